"""Open-open game: strategies, play, and an exhaustive winning oracle for Player I.

Player I offers a finite family of nonempty opens each round; Player II must answer with a
finite family holding, for every offered U, some V ⊆ U. Player I wins once the union of II's
answers is dense.
"""

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from enum import StrEnum
from itertools import product
from typing import Protocol

from .errors import BudgetExceeded, IllegalMoveError, InputError, PreconditionError
from .topo import (
    FiniteSpace,
    PointSet,
    Role,
    SetFamily,
    canonical,
    closure,
    family_role_check,
    format_set,
    is_subset,
    set_key,
)
from .witness import FnsWitness, verify_fns

DEFAULT_NODE_BUDGET = 200_000

type Move = tuple[PointSet, ...]


@dataclass(frozen=True, slots=True)
class Round:
    c: SetFamily
    d: SetFamily


@dataclass(frozen=True, slots=True)
class GameTranscript:
    space: FiniteSpace
    rounds: tuple[Round, ...]
    dense: bool

    def covered_by_round(self) -> list[PointSet]:
        """Cumulative union of II's answers after each round."""
        covered, result = 0, []
        for r in self.rounds:
            covered |= r.d.union()
            result.append(covered)
        return result


def is_dense(space: FiniteSpace, s: PointSet) -> bool:
    """cl s = X."""
    return closure(space, s) == space.full


def is_legal_reply(space: FiniteSpace, c: Sequence[PointSet], d: Sequence[PointSet]) -> bool:
    """Every answer is a nonempty open set and every offered set contains some answer."""
    if not all(v and space.is_open(v) for v in d):
        return False
    return all(any(is_subset(v, u) for v in d) for u in c)


def playable_moves(base: SetFamily) -> Move:
    """Nonempty base members in canonical order."""
    return canonical(s for s in base if s)


def _first_inside(moves: Move, target: PointSet) -> PointSet | None:
    return next((v for v in moves if is_subset(v, target)), None)


class StrategyI(Protocol):
    def opening(self) -> Move: ...

    def respond(self, history: Sequence[Move]) -> Move: ...


class StrategyII(Protocol):
    kind: str

    def reply(self, history: Sequence[Move], challenge: Move) -> Move: ...


class SigmaStrategy:
    """Player I's strategy built from an FNS witness over a (π-)base.

    After II's answers D_0..D_n, let A_n be the union of s(W) over the answered base members W.
    For every subfamily R of A_n with nonempty intersection, offer the canonically first base
    member inside ⋂R.
    """

    def __init__(self, base: SetFamily, witness: FnsWitness) -> None:
        if witness.family != base:
            raise InputError("witness is not over the given base")
        if not (family_role_check(base, Role.PI_BASE) or family_role_check(base, Role.BASE)):
            raise PreconditionError("family is neither a base nor a pi-base")
        verdict = verify_fns(witness)
        if not verdict.ok:
            raise PreconditionError(f"witness fails verification at pair {verdict.counterexample}")
        self.base = base
        self.witness = witness
        self.moves = playable_moves(base)
        self._index = {s: i for i, s in enumerate(base.members)}

    def opening(self) -> Move:
        return self.moves[:1]

    def respond(self, history: Sequence[Move]) -> Move:
        pool: set[int] = set()
        for answer in history:
            for w in answer:
                if w in self._index:
                    pool.update(self.witness.images[self._index[w]])
        intersections: set[PointSet] = set()
        for k in sorted(pool):
            s = self.base.members[k]
            intersections |= {s} | {t & s for t in intersections}
        offered = (_first_inside(self.moves, t) for t in intersections if t)
        return canonical(v for v in offered if v is not None)


class ConstantStrategy:
    """Offers the same family every round."""

    def __init__(self, family: Sequence[PointSet]) -> None:
        self.family = canonical(family)

    def opening(self) -> Move:
        return self.family

    def respond(self, history: Sequence[Move]) -> Move:
        return self.family


class AdversaryKind(StrEnum):
    FIRST_FIT = "first_fit"
    MAX_AVOIDER = "max_avoider"
    REPEATER = "repeater"
    SCRIPTED = "scripted"


class Adversary:
    """Deterministic Player II answering from a fixed family of nonempty opens."""

    def __init__(
        self,
        kind: AdversaryKind,
        space: FiniteSpace,
        moves: Move,
        script: Sequence[Move] = (),
    ) -> None:
        self.kind = kind
        self.space = space
        self.moves = canonical(moves)
        self.script = tuple(canonical(answer) for answer in script)

    def reply(self, history: Sequence[Move], challenge: Move) -> Move:
        match self.kind:
            case AdversaryKind.MAX_AVOIDER:
                return self._max_avoider(history, challenge)
            case AdversaryKind.REPEATER:
                if history and is_legal_reply(self.space, challenge, history[-1]):
                    return history[-1]
                return self._first_fit(challenge)
            case AdversaryKind.SCRIPTED:
                n = len(history)
                if n >= len(self.script):
                    return self._first_fit(challenge)
                if not is_legal_reply(self.space, challenge, self.script[n]):
                    raise IllegalMoveError(
                        f"scripted reply for round {n} is illegal",
                        {"round": n, "challenge": _show(challenge), "reply": _show(self.script[n])},
                    )
                return self.script[n]
            case _:
                return self._first_fit(challenge)

    def _inside(self, u: PointSet) -> list[PointSet]:
        inside = [v for v in self.moves if is_subset(v, u)]
        if not inside:
            raise IllegalMoveError(
                f"no available answer inside {format_set(u)}", {"challenge": format_set(u)}
            )
        return inside

    def _first_fit(self, challenge: Move) -> Move:
        return canonical(self._inside(u)[0] for u in challenge)

    def _max_avoider(self, history: Sequence[Move], challenge: Move) -> Move:
        covered = 0
        for answer in history:
            for v in answer:
                covered |= v
        chosen: list[PointSet] = []
        for u in challenge:
            if any(is_subset(v, u) for v in chosen):
                continue
            best = min(self._inside(u), key=lambda v: ((v & ~covered).bit_count(), set_key(v)))
            chosen.append(best)
            covered |= best
        return canonical(chosen)


def make_adversary(
    kind: str,
    space: FiniteSpace,
    moves: SetFamily,
    script: Sequence[Sequence[PointSet]] = (),
) -> Adversary:
    """Build a Player II of the given kind answering from `moves`."""
    try:
        parsed = AdversaryKind(kind)
    except ValueError:
        raise InputError(f"unknown adversary kind: {kind}") from None
    if moves.space != space:
        raise InputError("adversary moves are over a different space")
    for answer in script:
        for v in answer:
            if not (v and space.is_open(v)):
                raise InputError(f"scripted answer {format_set(v)} is not a nonempty open set")
    if script and parsed is not AdversaryKind.SCRIPTED:
        raise InputError("a script is only accepted by the scripted adversary")
    return Adversary(parsed, space, playable_moves(moves), [tuple(a) for a in script])


def _show(family: Sequence[PointSet]) -> str:
    return "[" + ", ".join(format_set(s) for s in family) + "]"


def _check_offer(space: FiniteSpace, n: int, c: Move) -> None:
    for u in c:
        if not (u and space.is_open(u)):
            raise IllegalMoveError(
                f"Player I offered {format_set(u)} in round {n}, not a nonempty open set",
                {"round": n, "offer": _show(c)},
            )


def play(
    space: FiniteSpace,
    base: SetFamily,
    i: StrategyI,
    ii: StrategyII,
    horizon: int,
) -> GameTranscript:
    """Alternate the two strategies for `horizon` rounds, stopping once II's union is dense."""
    if horizon < 1:
        raise InputError("horizon must be at least 1")
    if base.space != space:
        raise InputError("base is over a different space")
    history: list[Move] = []
    rounds: list[Round] = []
    covered = 0
    dense = False
    for n in range(horizon):
        c = i.opening() if n == 0 else i.respond(history)
        _check_offer(space, n, c)
        d = ii.reply(history, c)
        if not is_legal_reply(space, c, d):
            raise IllegalMoveError(
                f"Player II's reply in round {n} is illegal",
                {"round": n, "challenge": _show(c), "reply": _show(d)},
            )
        rounds.append(Round(SetFamily.of(space, c), SetFamily.of(space, d)))
        history.append(tuple(d))
        covered |= SetFamily.of(space, d).union()
        if is_dense(space, covered):
            dense = True
            break
    return GameTranscript(space, tuple(rounds), dense)


@dataclass(frozen=True, slots=True)
class WinResult:
    wins_all: bool
    worst_line: GameTranscript | None
    rounds_needed: int | None
    nodes: int


def _replies(moves: Move, challenge: Move) -> Iterator[Move]:
    """Every answer picking one available set inside each offered set, without repeats."""
    options = []
    for u in challenge:
        inside = [v for v in moves if is_subset(v, u)]
        if not inside:
            raise InputError(f"no base member inside offered set {format_set(u)}")
        options.append(inside)
    seen: set[Move] = set()
    for choice in product(*options):
        answer = canonical(choice)
        if answer not in seen:
            seen.add(answer)
            yield answer


def exhaustive_win(
    space: FiniteSpace,
    base: SetFamily,
    i: StrategyI,
    horizon: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> WinResult:
    """Explore every line of II's answers (drawn from the base) up to `horizon` rounds."""
    if horizon < 1:
        raise InputError("horizon must be at least 1")
    if base.space != space:
        raise InputError("base is over a different space")
    moves = playable_moves(base)
    nodes = 0
    longest: tuple[Round, ...] = ()
    losing: tuple[Round, ...] | None = None

    def explore(history: list[Move], rounds: tuple[Round, ...], covered: PointSet) -> bool:
        nonlocal nodes, longest, losing
        n = len(rounds)
        c = i.opening() if n == 0 else i.respond(history)
        _check_offer(space, n, c)
        for d in _replies(moves, c):
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded("exhaustive_win", node_budget)
            line = (*rounds, Round(SetFamily.of(space, c), SetFamily.of(space, d)))
            reached = covered | SetFamily.of(space, d).union()
            if is_dense(space, reached):
                if len(line) > len(longest):
                    longest = line
                continue
            if len(line) == horizon:
                losing = line
                return False
            history.append(d)
            survived = explore(history, line, reached)
            history.pop()
            if not survived:
                return False
        return True

    if is_dense(space, 0):
        return WinResult(True, GameTranscript(space, (), True), 0, 0)
    if explore([], (), 0):
        return WinResult(True, GameTranscript(space, longest, True), len(longest), nodes)
    assert losing is not None
    return WinResult(False, GameTranscript(space, losing, False), None, nodes)
