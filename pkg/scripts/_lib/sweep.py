"""Acceptance sweeps: exhaustive finite checks of the library's properties.

Each suite splits its instances into shards described by plain tuples, runs them sequentially
or on a process pool, and merges the per-shard results in shard order, so the report does not
depend on the worker count.
"""

import json
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import cache
from itertools import combinations
from pathlib import Path
from typing import Any

from .documents import dump_report
from .errors import InputError, PropertyViolation
from .game import GameTranscript, SigmaStrategy, exhaustive_win
from .generate import (
    MAX_ENUMERATION_POINTS,
    count_topologies_bruteforce,
    enumerate_bases,
    enumerate_topologies,
    neighbourhood_pi_base,
    nonempty_opens,
    set_partitions,
)
from .quotient import (
    build_quotient,
    is_cr_family,
    is_wcr,
    role_of_image,
    separation_report,
)
from .topo import (
    CoverSequence,
    FiniteSpace,
    Role,
    SetFamily,
    SpaceMap,
    discrete_space,
    format_set,
    lattice_closure,
    ro_atoms,
    ro_family,
    topology_family,
)
from .transfer import (
    LemmaReport,
    absolute_triples,
    check_d_open_lemma,
    check_kpv_pair,
    check_small_image_pair,
    irreducible_quotients,
    pullback_pi_base,
    representative_choices_agree,
    space_pairs,
    transfer_witness,
)
from .utils import get_project_root
from .witness import (
    FnsWitness,
    MediatorChoice,
    developable_fn,
    identity_fn,
    mediated_fn,
    project_fn_to_ro,
    search_fns,
    stone_lift,
    trivial_fns,
    verify_fn,
    verify_fns,
)

SUITES = ("enumerate", "witness", "quotient", "game", "lemmas", "transfer")
KNOWN_TOPOLOGY_COUNTS = {0: 1, 1: 1, 2: 4, 3: 29, 4: 355}
DEFAULT_LEMMA_SAMPLE = 2000
EXHAUSTIVE_LEMMA_POINTS = 3
KPV_POINTS = 3
GAME_POINTS = 3
DEVELOPMENT_POINTS = 5
DEVELOPMENT_BUDGET = 400
DISCRETE_FN_POINTS = 6
REPRESENTATIVE_POINTS = 3
REGRESSION_FILE = Path("config") / "regression.json"

MEDIATOR_CHOICES: dict[str, MediatorChoice] = {
    "lowest": lambda options: options[0],
    "middle": lambda options: options[len(options) // 2],
    "highest": lambda options: options[-1],
}

type Shard = tuple[Any, ...]


@dataclass(frozen=True, slots=True)
class CheckResult:
    """Outcome of one named check over a set of instances."""

    check: str
    instances: int = 0
    failures: int = 0
    counterexample: dict[str, Any] | None = None
    value: int | None = None
    example: dict[str, Any] | None = None

    def as_row(self) -> dict[str, Any]:
        row: dict[str, Any] = {
            "check": self.check,
            "instances": self.instances,
            "failures": self.failures,
        }
        if self.counterexample is not None:
            row["counterexample"] = self.counterexample
        if self.value is not None:
            row["value"] = self.value
        if self.example is not None:
            row["example"] = self.example
        return row


@dataclass(frozen=True, slots=True)
class SuiteReport:
    suite: str
    max_points: int
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.failures == 0 for c in self.checks)

    def check(self, name: str) -> CheckResult | None:
        return next((c for c in self.checks if c.check == name), None)

    def to_document(self) -> str:
        header = {"suite": self.suite, "max_points": self.max_points, "ok": self.ok}
        return dump_report(header, [c.as_row() for c in self.checks])


class Tally:
    """Accumulates instances and failures per check, keeping the first counterexample.

    Context passed to `record` is only formatted when it becomes the counterexample.
    """

    def __init__(self) -> None:
        self._results: dict[str, CheckResult] = {}

    def record(self, check: str, ok: bool, **context: Any) -> None:
        current = self._results.get(check, CheckResult(check))
        example = current.counterexample
        if not ok and example is None:
            example = describe(context)
        self._results[check] = replace(
            current,
            instances=current.instances + 1,
            failures=current.failures + (not ok),
            counterexample=example,
        )

    def add(self, result: CheckResult) -> None:
        self._results[result.check] = _merge_pair(
            self._results.get(result.check, CheckResult(result.check)), result
        )

    def results(self) -> list[CheckResult]:
        return list(self._results.values())


def _describe_value(value: Any) -> Any:
    match value:
        case FiniteSpace():
            return [format_set(o) for o in value.opens]
        case SetFamily():
            return [format_set(s) for s in value]
        case SpaceMap():
            return list(value.image)
        case GameTranscript():
            return [[_describe_value(r.c), _describe_value(r.d)] for r in value.rounds]
        case tuple() | list():
            return [_describe_value(v) for v in value]
        case _:
            return value


def describe(context: dict[str, Any]) -> dict[str, Any]:
    """Printable, JSON-ready form of a failing instance."""
    result: dict[str, Any] = {}
    for key, value in context.items():
        if isinstance(value, PropertyViolation):
            result[key] = str(value)
            result.update({k: _describe_value(v) for k, v in value.counterexample.items()})
        else:
            result[key] = _describe_value(value)
    return result


def _merge_pair(a: CheckResult, b: CheckResult) -> CheckResult:
    values = [v for v in (a.value, b.value) if v is not None]
    return CheckResult(
        a.check,
        a.instances + b.instances,
        a.failures + b.failures,
        a.counterexample if a.counterexample is not None else b.counterexample,
        max(values) if values else None,
        a.example if a.example is not None else b.example,
    )


def merge_results(parts: Iterable[Sequence[CheckResult]]) -> tuple[CheckResult, ...]:
    """Merge shard results in order; check order is first appearance."""
    tally = Tally()
    for part in parts:
        for result in part:
            tally.add(result)
    return tuple(tally.results())


def run_shards(
    worker: Callable[[Shard], list[CheckResult]], shards: Sequence[Shard], workers: int
) -> tuple[CheckResult, ...]:
    """Run `worker` over the shards and merge in shard order."""
    if workers < 1:
        raise InputError("workers must be at least 1")
    if workers == 1 or len(shards) <= 1:
        return merge_results(worker(shard) for shard in shards)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return merge_results(pool.map(worker, shards))


@cache
def topologies(n: int) -> tuple[FiniteSpace, ...]:
    """All topologies on n points, cached per process."""
    return tuple(enumerate_topologies(n))


def _topology_shards(max_points: int, low: int = 1) -> list[Shard]:
    return [(n, k) for n in range(low, max_points + 1) for k in range(len(topologies(n)))]


def _enumerate_worker(shard: Shard) -> list[CheckResult]:
    (n,) = shard
    tally = Tally()
    found = len(topologies(n))
    tally.record(f"count.{n}", found == KNOWN_TOPOLOGY_COUNTS[n], found=found)
    slow = count_topologies_bruteforce(n)
    tally.record(f"bruteforce.{n}", slow == found, found=found, bruteforce=slow)
    return tally.results()


def _witness_topology_worker(shard: Shard) -> list[CheckResult]:
    n, k = shard
    space = topologies(n)[k]
    tally = Tally()
    verdict = verify_fns(trivial_fns(topology_family(space)))
    tally.record("trivial_fns", verdict.ok, space=space, pair=verdict.counterexample)

    stone_base, lifted = stone_lift(space, trivial_fns(ro_family(space)))
    atoms = len(ro_atoms(space))
    tally.record(
        "stone_lift",
        verify_fns(lifted).ok and stone_base.space.point_count == atoms,
        space=space,
        atoms=atoms,
    )

    full = topology_family(space)
    for pick, choose in MEDIATOR_CHOICES.items():
        w = mediated_fn(full, choose)
        try:
            ok = verify_fn(w).ok and verify_fn(project_fn_to_ro(space, w)).ok
        except PropertyViolation as e:
            tally.record("ro_projection", False, space=space, mediator=pick, error=e)
            continue
        tally.record("ro_projection", ok, space=space, mediator=pick)
    return tally.results()


def _minimal_search_instances() -> list[tuple[str, SetFamily, int]]:
    d2, d3 = discrete_space(2), discrete_space(3)
    return [
        ("D2", SetFamily(d2, (0b01, 0b10, 0b11), Role.BASE), 2),
        ("D3", SetFamily(d3, (0b001, 0b010, 0b100, 0b111), Role.BASE), 3),
    ]


def _witness_fixed_worker(shard: Shard) -> list[CheckResult]:
    tally = Tally()
    for name, family, expected in _minimal_search_instances():
        found = search_fns(family, k_max=len(family))
        bound = None if found is None else found[0]
        tally.record("search_minimal", bound == expected, instance=name, bound=bound)
    for n in range(1, DISCRETE_FN_POINTS + 1):
        space = discrete_space(n)
        base = SetFamily(space, tuple(1 << x for x in space.points), Role.BASE)
        tally.record("discrete_fn_example", verify_fn(identity_fn(base)).ok, n=n)
    return tally.results()


def development_sequences(n: int, budget: int = DEVELOPMENT_BUDGET) -> list[CoverSequence]:
    """Refining point-finite developments of a discrete space, of length at most 3.

    Covers are partitions, optionally topped with the whole space; every sequence ends with the
    singletons. The first `budget` sequences in enumeration order are returned.
    """
    space = discrete_space(n)
    singletons = tuple(1 << x for x in space.points)
    partitions = [p for p in set_partitions(n) if p != singletons]
    covers = partitions + [(*p, space.full) for p in partitions if space.full not in p]

    def refines(fine: tuple[int, ...], coarse: tuple[int, ...]) -> bool:
        return all(any(s & ~t == 0 for t in coarse) for s in fine)

    chains: list[tuple[tuple[int, ...], ...]] = [(singletons,)]
    chains += [(c, singletons) for c in covers]
    chains += [(a, b, singletons) for a in covers for b in covers if a != b and refines(b, a)]
    return [
        CoverSequence(space, tuple(SetFamily(space, c, Role.COVER) for c in chain))
        for chain in chains[:budget]
    ]


def _witness_development_worker(shard: Shard) -> list[CheckResult]:
    (n,) = shard
    tally = Tally()
    space = discrete_space(n)
    for seq in development_sequences(n):
        try:
            _, witness = developable_fn(space, seq)
        except PropertyViolation as e:
            tally.record("developable_fn", False, n=n, covers=seq.covers, error=e)
            continue
        tally.record("developable_fn", verify_fn(witness).ok, n=n, covers=seq.covers)
    return tally.results()


def _quotient_worker(shard: Shard) -> list[CheckResult]:
    n, k = shard
    space = topologies(n)[k]
    tally = Tally()
    for size in range(4):
        for chosen in combinations(space.opens, size):
            family = SetFamily(space, chosen)
            try:
                result = build_quotient(space, family)
            except PropertyViolation as e:
                tally.record("quotient_map", False, space=space, family=family, error=e)
                continue
            tally.record("quotient_map", True)
            if is_wcr(space, family).holds:
                separation = separation_report(result.quotient)
                tally.record(
                    "wcr_base_image",
                    role_of_image(result) is Role.BASE,
                    space=space,
                    family=family,
                )
                tally.record(
                    "wcr_t2_regular",
                    separation.t2 and separation.regular,
                    space=space,
                    family=family,
                )

            closed = lattice_closure(space, family)
            if closed.union() == space.full and is_cr_family(space, closed):
                # Intersections of a lattice-closed family are members, so single members
                # already give every target.
                tally.record(
                    "cr_lattice_is_wcr",
                    is_wcr(space, closed, k_cap=1).holds,
                    space=space,
                    family=closed,
                )
    return tally.results()


def _game_worker(shard: Shard) -> list[CheckResult]:
    n, k = shard
    space = topologies(n)[k]
    full = topology_family(space)
    # The trivial witness on the whole topology, then the minimal witness on every base.
    plays = [(full, trivial_fns(full))]
    for base in enumerate_bases(space):
        found = search_fns(base, k_max=len(base))
        if found is not None:
            plays.append((base, found[1]))
    tally = Tally()
    horizon = 0
    for base, witness in plays:
        result = exhaustive_win(space, base, SigmaStrategy(base, witness), horizon=len(base))
        tally.record(
            "sigma_wins", result.wins_all, space=space, base=base, worst_line=result.worst_line
        )
        if result.rounds_needed is not None:
            horizon = max(horizon, result.rounds_needed)
    return [replace(c, value=horizon) for c in tally.results()]


def regression_path() -> Path:
    """config/regression.json under the project root."""
    return get_project_root() / REGRESSION_FILE


def load_regression(path: Path | None = None) -> dict[str, Any]:
    """Stored regression values; empty when the file does not exist."""
    path = path or regression_path()
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON: {e.msg}") from None


def save_regression(values: dict[str, Any], path: Path | None = None) -> None:
    """Write regression values as sorted, indented JSON."""
    path = path or regression_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(values, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def game_regression_check(report: SuiteReport, stored: dict[str, Any]) -> CheckResult:
    """Compare the measured horizon with the persisted regression value."""
    sigma = report.check("sigma_wins")
    measured = sigma.value if sigma else None
    expected = stored.get("game_max_horizon")
    tally = Tally()
    tally.record(
        "horizon_regression",
        expected is None or measured is None or measured <= expected,
        stored=expected,
        measured=measured,
    )
    return replace(tally.results()[0], value=measured)


_LEMMAS_BY_COUNT = {
    "onto_maps": ("frd", "f2"),
    "irreducible_maps": ("f1",),
    "kpv_instances": ("kpv",),
    "d_open_instances": ("d_open",),
}


def _lemma_results(report: LemmaReport) -> list[CheckResult]:
    by_lemma: dict[str, list[Any]] = {}
    for failure in report.failures:
        by_lemma.setdefault(failure.lemma, []).append(failure)
    results = []
    for key, instances in report.counts.items():
        for lemma in _LEMMAS_BY_COUNT.get(key, ()):
            found = by_lemma.get(lemma, [])
            example = found[0].as_dict() if found else None
            results.append(CheckResult(lemma, instances, len(found), example))
    return results


@cache
def _lemma_pairs(max_points: int, sample: int | None, seed: int) -> tuple[Any, ...]:
    return tuple(space_pairs(max_points, sample, seed))


def _small_image_worker(shard: Shard) -> list[CheckResult]:
    max_points, sample, seed, index = shard
    source, target = _lemma_pairs(max_points, sample, seed)[index]
    report = check_small_image_pair(source, target)
    example = report.expected_example
    # The first non-irreducible map whose small images separate intersecting opens.
    found = CheckResult(
        "f1_needs_irreducible",
        instances=1,
        value=1 if example else 0,
        example=example.as_dict() if example else None,
    )
    return [*_lemma_results(report), found]


def _kpv_worker(shard: Shard) -> list[CheckResult]:
    (sn, sk), (tn, tk) = shard
    source, target = topologies(sn)[sk], topologies(tn)[tk]
    results = _lemma_results(check_kpv_pair(source, target, enumerate_bases(target)))
    results += _lemma_results(check_d_open_lemma(source, target))
    return results


def _lemma_suite(
    max_points: int, workers: int, sample: int | None, seed: int
) -> list[CheckResult]:
    if sample is None and max_points > EXHAUSTIVE_LEMMA_POINTS:
        sample = DEFAULT_LEMMA_SAMPLE
    pairs = _lemma_pairs(max_points, sample, seed)
    shards: list[Shard] = [(max_points, sample, seed, i) for i in range(len(pairs))]
    checks = list(run_shards(_small_image_worker, shards, workers))

    spaces = _topology_shards(min(max_points, KPV_POINTS))
    checks += run_shards(_kpv_worker, [(a, b) for a in spaces for b in spaces], workers)

    # Finding no such map at all means the harness is too weak.
    return [
        replace(c, failures=0 if c.value else 1) if c.check == "f1_needs_irreducible" else c
        for c in checks
    ]


def _transfer_witnesses(x: FiniteSpace) -> list[tuple[SetFamily, FnsWitness]]:
    """The trivial witness on all nonempty opens and a minimal one on the neighbourhoods."""
    full = nonempty_opens(x)
    hoods = neighbourhood_pi_base(x)
    chosen = [(full, trivial_fns(full))]
    searched = search_fns(hoods, k_max=len(hoods))
    if searched is not None:
        chosen.append((hoods, searched[1]))
    return chosen


def _transfer_worker(shard: Shard) -> list[CheckResult]:
    n, k = shard
    z = topologies(n)[k]
    tally = Tally()

    for f in irreducible_quotients(z):
        try:
            pullback_pi_base(f, neighbourhood_pi_base(f.target))
            tally.record("pullback_pi_base", True)
        except PropertyViolation as e:
            tally.record("pullback_pi_base", False, z=z, f=f, error=e)

    witnesses: dict[tuple[int, ...], list[tuple[SetFamily, FnsWitness]]] = {}
    for t in absolute_triples(z):
        if t.x.opens not in witnesses:
            witnesses[t.x.opens] = _transfer_witnesses(t.x)
        for base_x, s in witnesses[t.x.opens]:
            try:
                transfer_witness(t, base_x, s)
                tally.record("transfer_witness", True)
            except PropertyViolation as e:
                tally.record("transfer_witness", False, z=z, f=t.f, g=t.g, error=e)
            if n <= REPRESENTATIVE_POINTS:
                tally.record(
                    "representatives_agree",
                    representative_choices_agree(t, base_x, s),
                    z=z,
                    f=t.f,
                    g=t.g,
                    base=base_x,
                )
    return tally.results()


def run_suite(
    suite: str,
    max_points: int,
    workers: int = 1,
    sample: int | None = None,
    seed: int = 0,
) -> SuiteReport:
    """Run one acceptance suite over spaces with at most `max_points` points."""
    if not 0 <= max_points <= MAX_ENUMERATION_POINTS:
        raise InputError(f"max_points must be in 0..{MAX_ENUMERATION_POINTS}, got {max_points}")
    match suite:
        case "enumerate":
            checks = run_shards(_enumerate_worker, [(n,) for n in range(max_points + 1)], workers)
        case "witness":
            checks = run_shards(_witness_topology_worker, _topology_shards(max_points), workers)
            checks += run_shards(_witness_fixed_worker, [()], workers)
            dev = [(n,) for n in range(1, DEVELOPMENT_POINTS + 1)]
            checks += run_shards(_witness_development_worker, dev, workers)
        case "quotient":
            checks = run_shards(_quotient_worker, _topology_shards(max_points), workers)
        case "game":
            shards = _topology_shards(min(max_points, GAME_POINTS))
            checks = run_shards(_game_worker, shards, workers)
        case "lemmas":
            checks = tuple(_lemma_suite(max_points, workers, sample, seed))
        case "transfer":
            checks = run_shards(_transfer_worker, _topology_shards(max_points), workers)
        case _:
            raise InputError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    return SuiteReport(suite, max_points, tuple(checks))


def raise_on_failure(report: SuiteReport) -> None:
    """Turn the first failing check into a PropertyViolation."""
    for c in report.checks:
        if c.failures:
            raise PropertyViolation(
                f"{report.suite}.{c.check}: {c.failures} of {c.instances} instance(s) failed",
                c.counterexample,
            )

