"""FNS and FN witnesses: construction, verification and bounded search."""

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from typing import Literal

from .errors import (
    BudgetExceeded,
    InputError,
    PreconditionError,
    PropertyViolation,
    WitnessStructureError,
)
from .topo import (
    CoverSequence,
    FiniteSpace,
    PointSet,
    Role,
    SetFamily,
    canonical,
    discrete_space,
    family_role_check,
    format_set,
    is_development,
    is_point_finite,
    is_refinement,
    is_subset,
    mask_of,
    maximal_subfamily,
    regular_part,
    ro_atoms,
    ro_family,
    set_key,
)

DEFAULT_SEARCH_BUDGET = 500_000

type IndexSets = tuple[tuple[int, ...], ...]
type Objective = Literal["uniform", "total"]


def _normalize(images: Iterable[Iterable[int]]) -> IndexSets:
    return tuple(tuple(sorted(set(image))) for image in images)


def _check_indices(images: IndexSets, size: int, what: str) -> None:
    if len(images) != size:
        raise WitnessStructureError(f"{what} has {len(images)} entries for {size} members")
    for i, image in enumerate(images):
        if list(image) != sorted(set(image)):
            raise WitnessStructureError(f"{what}[{i}] is not a sorted set of indices")
        for k in image:
            if not 0 <= k < size:
                raise WitnessStructureError(f"{what}[{i}] refers to member {k} of {size}")


@dataclass(frozen=True, slots=True)
class FnsWitness:
    """The operator s: member index -> finite set of member indices."""

    family: SetFamily
    images: IndexSets

    def __post_init__(self) -> None:
        _check_indices(self.images, len(self.family), "s")

    @classmethod
    def of(cls, family: SetFamily, images: Iterable[Iterable[int]]) -> FnsWitness:
        return cls(family, _normalize(images))

    @property
    def bound(self) -> int:
        return max((len(image) for image in self.images), default=0)

    @property
    def total(self) -> int:
        return sum(len(image) for image in self.images)

    def sets_of(self, i: int) -> tuple[PointSet, ...]:
        return tuple(self.family.members[k] for k in self.images[i])


@dataclass(frozen=True, slots=True)
class FnWitness:
    """The pair of operators (u, l) over a base, as index sets."""

    base: SetFamily
    up: IndexSets
    low: IndexSets

    def __post_init__(self) -> None:
        _check_indices(self.up, len(self.base), "u")
        _check_indices(self.low, len(self.base), "l")

    @classmethod
    def of(
        cls, base: SetFamily, up: Iterable[Iterable[int]], low: Iterable[Iterable[int]]
    ) -> FnWitness:
        return cls(base, _normalize(up), _normalize(low))


@dataclass(frozen=True, slots=True)
class WitnessVerdict:
    ok: bool
    counterexample: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if not self.ok and self.counterexample is None:
            raise InputError("a failing verdict needs a counterexample")


def trivial_fns(family: SetFamily) -> FnsWitness:
    """s(U) = the whole family for every U."""
    everything = tuple(range(len(family)))
    return FnsWitness(family, tuple(everything for _ in family))


def _separated(
    members: Sequence[PointSet], common: Iterable[int], u: PointSet, v: PointSet
) -> bool:
    pool = list(common)
    above_u = [members[k] for k in pool if is_subset(u, members[k])]
    above_v = [members[k] for k in pool if is_subset(v, members[k])]
    return any(a & b == 0 for a in above_u for b in above_v)


def verify_fns(w: FnsWitness) -> WitnessVerdict:
    """Every disjoint pair U, V needs disjoint W_U ⊇ U, W_V ⊇ V inside s(U) ∩ s(V)."""
    members = w.family.members
    for i, u in enumerate(members):
        for j in range(i, len(members)):
            v = members[j]
            if u & v:
                continue
            common = set(w.images[i]) & set(w.images[j])
            if not _separated(members, common, u, v):
                return WitnessVerdict(False, (i, j))
    return WitnessVerdict(True)


def _disjoint_pairs(family: SetFamily) -> list[tuple[int, int]]:
    members = family.members
    return [
        (i, j)
        for i in range(len(members))
        for j in range(i, len(members))
        if members[i] & members[j] == 0
    ]


def _separator_options(family: SetFamily, i: int, j: int) -> list[tuple[int, int]]:
    members = family.members
    u, v = members[i], members[j]
    return [
        (a, b)
        for a, wa in enumerate(members)
        if is_subset(u, wa)
        for b, wb in enumerate(members)
        if is_subset(v, wb) and wa & wb == 0
    ]


def _backtrack(
    size: int,
    pairs: list[tuple[int, int]],
    options: list[list[tuple[int, int]]],
    fits: Callable[[list[set[int]], int, int], bool],
    budget: int,
) -> list[set[int]] | None:
    images: list[set[int]] = [set() for _ in range(size)]
    nodes = 0

    def extend(p: int) -> bool:
        nonlocal nodes
        if p == len(pairs):
            return True
        i, j = pairs[p]
        common = images[i] & images[j]
        if any(a in common and b in common for a, b in options[p]):
            return extend(p + 1)
        for a, b in options[p]:
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded("search_fns", budget)
            added_i = {a, b} - images[i]
            images[i] |= added_i
            added_j = {a, b} - images[j]
            images[j] |= added_j
            if fits(images, i, j) and extend(p + 1):
                return True
            images[i] -= added_i
            images[j] -= added_j
        return False

    return images if extend(0) else None


def _uniform_fits(k: int) -> Callable[[list[set[int]], int, int], bool]:
    return lambda images, i, j: len(images[i]) <= k and len(images[j]) <= k


def _total_fits(limit: int, k_max: int) -> Callable[[list[set[int]], int, int], bool]:
    def fits(images: list[set[int]], i: int, j: int) -> bool:
        if len(images[i]) > k_max or len(images[j]) > k_max:
            return False
        return sum(len(image) for image in images) <= limit

    return fits


def search_fns(
    family: SetFamily,
    k_max: int,
    objective: Objective = "uniform",
    budget: int = DEFAULT_SEARCH_BUDGET,
) -> tuple[int, FnsWitness] | None:
    """Smallest bound admitting a witness, with one such witness; None if none within k_max.

    With objective="uniform" the bound is max |s(U)|; with "total" it is Σ |s(U)| under the
    per-member cap k_max. Minimality is rechecked by a failing search one below the result.
    """
    if k_max < 0:
        raise InputError("k_max must be non-negative")
    pairs = _disjoint_pairs(family)
    options = [_separator_options(family, i, j) for i, j in pairs]
    if any(not opts for opts in options):
        return None

    def fits_at(bound: int) -> Callable[[list[set[int]], int, int], bool]:
        return _uniform_fits(bound) if objective == "uniform" else _total_fits(bound, k_max)

    ceiling = k_max if objective == "uniform" else k_max * len(family)
    for bound in range(ceiling + 1):
        found = _backtrack(len(family), pairs, options, fits_at(bound), budget)
        if found is None:
            continue
        witness = FnsWitness.of(family, found)
        if bound > 0 and _backtrack(len(family), pairs, options, fits_at(bound - 1), budget):
            raise PropertyViolation(
                "search_fns minimality recheck failed", {"objective": objective, "bound": bound}
            )
        if not verify_fns(witness).ok:
            raise PropertyViolation("search_fns produced a failing witness", {"bound": bound})
        return bound, witness
    return None


def check_side_conditions(w: FnWitness) -> None:
    """u(V) must hold supersets of V and l(V) subsets of V."""
    members = w.base.members
    for i, v in enumerate(members):
        for k in w.up[i]:
            if not is_subset(v, members[k]):
                raise WitnessStructureError(
                    f"u({format_set(v)}) contains {format_set(members[k])}, not a superset"
                )
        for k in w.low[i]:
            if not is_subset(members[k], v):
                raise WitnessStructureError(
                    f"l({format_set(v)}) contains {format_set(members[k])}, not a subset"
                )


def verify_fn(w: FnWitness) -> WitnessVerdict:
    """u(V) ∩ l(W) must be nonempty whenever V ⊆ W."""
    check_side_conditions(w)
    members = w.base.members
    for i, v in enumerate(members):
        for j, target in enumerate(members):
            if is_subset(v, target) and not set(w.up[i]) & set(w.low[j]):
                return WitnessVerdict(False, (i, j))
    return WitnessVerdict(True)


def trivial_fn(base: SetFamily) -> FnWitness:
    """u(V) = all supersets of V in the base, l(V) = {V}."""
    members = base.members
    up = [[k for k, w in enumerate(members) if is_subset(v, w)] for v in members]
    return FnWitness.of(base, up, [[i] for i in range(len(members))])


def identity_fn(base: SetFamily) -> FnWitness:
    """u(V) = l(V) = {V}; verifies exactly on antichain bases."""
    selves = [[i] for i in range(len(base))]
    return FnWitness.of(base, selves, selves)


type MediatorChoice = Callable[[Sequence[int]], int]


def mediated_fn(base: SetFamily, choose: MediatorChoice) -> FnWitness:
    """For every V ⊆ W put one chosen M (V ⊆ M ⊆ W) into u(V) and into l(W).

    `choose` receives the candidate indices in canonical order and returns one of them. Picking
    the first gives u(V) = {V}; picking the last gives the trivial witness. Every verifying
    witness contains one of these.
    """
    members = base.members
    up: list[set[int]] = [set() for _ in members]
    low: list[set[int]] = [set() for _ in members]
    for i, v in enumerate(members):
        for j, w in enumerate(members):
            if not is_subset(v, w):
                continue
            between = [k for k, m in enumerate(members) if is_subset(v, m) and is_subset(m, w)]
            k = choose(sorted(between, key=lambda t: set_key(members[t])))
            if k not in between:
                raise InputError(f"mediator {k} is not between members {i} and {j}")
            up[i].add(k)
            low[j].add(k)
    return FnWitness.of(base, up, low)


def developable_fn(space: FiniteSpace, seq: CoverSequence) -> tuple[SetFamily, FnWitness]:
    """Base of maximal cover members with l(U) = {U} and u(U) drawn from earlier covers."""
    if not is_development(space, seq):
        raise PreconditionError("not a development")
    for n, cover in enumerate(seq.covers):
        if not is_point_finite(cover):
            raise PreconditionError(f"cover {n} is not point-finite")
        if n and not is_refinement(cover, seq.covers[n - 1]):
            raise PreconditionError(f"cover {n} does not refine cover {n - 1}")

    maximal = tuple(maximal_subfamily(cover) for cover in seq.covers)
    if not is_development(space, CoverSequence(space, maximal)):
        raise PropertyViolation("maximal subfamilies do not form a development")

    first_level: dict[PointSet, int] = {}
    for n, cover in enumerate(maximal):
        for s in cover:
            first_level.setdefault(s, n)
    base = SetFamily(space, canonical(first_level), Role.BASE)
    if not family_role_check(base, Role.BASE):
        raise PropertyViolation("maximal cover members do not form a base")

    up = []
    for u in base:
        m = first_level[u]
        up.append(
            [base.index_of(w) for i in range(m + 1) for w in maximal[i] if is_subset(u, w)]
        )
    witness = FnWitness.of(base, up, [[i] for i in range(len(base))])
    verdict = verify_fn(witness)
    if not verdict.ok:
        raise PropertyViolation(
            "developable construction failed verification", {"pair": verdict.counterexample}
        )
    return base, witness


def stone_lift(space: FiniteSpace, s_ro: FnsWitness) -> tuple[SetFamily, FnsWitness]:
    """Move a witness on RO(X) to the Stone space, the discrete space on the algebra's atoms."""
    ro = ro_family(space)
    if s_ro.family.space != space or s_ro.family.members != ro.members:
        raise InputError("witness is not over the regular open family of the space")
    atoms = ro_atoms(space)
    stone = discrete_space(len(atoms))

    def lift(u: PointSet) -> PointSet:
        return mask_of(a for a, atom in enumerate(atoms) if is_subset(atom, u))

    stone_base = SetFamily(stone, tuple(lift(u) for u in ro), Role.BASE)
    lifted = FnsWitness(stone_base, s_ro.images)
    if verify_fns(s_ro).ok:
        verdict = verify_fns(lifted)
        if not verdict.ok:
            raise PropertyViolation(
                "Stone lift lost verification", {"pair": verdict.counterexample}
            )
    return stone_base, lifted


def project_fn_to_ro(space: FiniteSpace, w: FnWitness) -> FnWitness:
    """u_reg(U) = {int cl W : W ∈ u(U)}, l_reg likewise, over the regular open family."""
    if w.base.space != space or w.base.members != space.opens:
        raise InputError("witness base is not the full topology of the space")
    ro = ro_family(space)
    opens = w.base.members
    up, low = [], []
    for r in ro:
        j = w.base.index_of(r)
        regular_up = (regular_part(space, opens[k]) for k in w.up[j])
        regular_low = (regular_part(space, opens[k]) for k in w.low[j])
        up.append([ro.index_of(t) for t in regular_up if is_subset(r, t)])
        low.append([ro.index_of(t) for t in regular_low if is_subset(t, r)])
    projected = FnWitness.of(ro, up, low)
    if verify_fn(w).ok:
        verdict = verify_fn(projected)
        if not verdict.ok:
            raise PropertyViolation(
                "projection to regular open sets lost verification",
                {"pair": verdict.counterexample},
            )
    return projected
