"""Small images along irreducible maps, π-base pullback, witness transfer between co-absolute
spaces, and exhaustive harnesses for the supporting lemmas."""

import random
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from itertools import product

from .errors import BudgetExceeded, InputError, PreconditionError, PropertyViolation
from .generate import MAX_ENUMERATION_POINTS, enumerate_topologies, set_partitions
from .quotient import Partition, quotient_by_partition, separation_report
from .topo import (
    FiniteSpace,
    PointSet,
    Role,
    SetFamily,
    SpaceMap,
    family_role_check,
    format_set,
    image,
    is_subset,
    kpv_condition,
    map_report,
    preimage,
    regular_part,
    small_image,
    small_image_pointwise,
)
from .witness import FnsWitness, verify_fns

DEFAULT_REPRESENTATIVE_BUDGET = 4096
LEMMA_PAIR_BUDGET = 5000


def irreducibility_failure(f: SpaceMap) -> str | None:
    """Name of the first irreducibility requirement f breaks, or None."""
    report = map_report(f)
    for name, ok in (
        ("onto", report.onto),
        ("continuous", report.continuous),
        ("closed_map", report.closed_map),
    ):
        if not ok:
            return name
    if not report.irreducible:
        return "a proper closed subset maps onto the target"
    return None


def require_irreducible(f: SpaceMap, name: str = "f") -> None:
    """Raise PreconditionError naming the first failed irreducibility condition."""
    failure = irreducibility_failure(f)
    if failure is not None:
        raise PreconditionError(f"{name} is not irreducible: {failure}")


@dataclass(frozen=True, slots=True)
class AbsoluteTriple:
    """Irreducible onto maps f: z -> y and g: z -> x from a common source."""

    z: FiniteSpace
    f: SpaceMap
    g: SpaceMap

    def __post_init__(self) -> None:
        if self.f.source != self.z or self.g.source != self.z:
            raise InputError("both maps must start at z")
        require_irreducible(self.f, "f")
        require_irreducible(self.g, "g")

    @property
    def x(self) -> FiniteSpace:
        return self.g.target

    @property
    def y(self) -> FiniteSpace:
        return self.f.target


def _require_pi_base(family: SetFamily, space: FiniteSpace, what: str) -> None:
    if family.space != space:
        raise InputError(f"{what} is over a different space")
    if family.role not in (Role.PI_BASE, Role.BASE):
        raise InputError(f"{what} has role {family.role}, expected pi_base")
    if not family_role_check(family.with_role(Role.PI_BASE), Role.PI_BASE):
        raise PreconditionError(f"{what} is not a pi-base")


def pullback_pi_base(f: SpaceMap, base_x: SetFamily) -> SetFamily:
    """{f^-1(B) : B in base_x}, a π-base of the source when f is irreducible."""
    require_irreducible(f)
    _require_pi_base(base_x, f.target, "base")
    pulled = SetFamily.of(f.source, (preimage(f, b) for b in base_x), Role.PI_BASE)
    if not family_role_check(pulled, Role.PI_BASE):
        raise PropertyViolation(
            "pulled back family is not a pi-base",
            {"map": list(f.image), "family": [format_set(s) for s in pulled]},
        )
    return pulled


@dataclass(frozen=True, slots=True)
class TransferResult:
    family_y: SetFamily
    s_z: FnsWitness
    representatives: tuple[int, ...]


def _transported_sets(t: AbsoluteTriple, base_x: SetFamily) -> list[PointSet]:
    return [small_image(t.f, preimage(t.g, v)) for v in base_x]


def _transfer_images(
    family_y: SetFamily, mapped: Sequence[PointSet], s: FnsWitness, reps: Sequence[int]
) -> FnsWitness:
    return FnsWitness.of(
        family_y, ([family_y.index_of(mapped[w]) for w in s.images[rep]] for rep in reps)
    )


def transfer_witness(t: AbsoluteTriple, base_x: SetFamily, s: FnsWitness) -> TransferResult:
    """s_Z(f#g^-1(U)) = {f#g^-1(W) : W in s(U)}, defined on the first U giving each set."""
    _require_pi_base(base_x, t.x, "base")
    if s.family != base_x:
        raise InputError("witness is not over the given base")
    verdict = verify_fns(s)
    if not verdict.ok:
        raise PreconditionError(f"witness fails verification at pair {verdict.counterexample}")

    mapped = _transported_sets(t, base_x)
    family_y = SetFamily.of(t.y, mapped, Role.PI_BASE)
    reps = tuple(mapped.index(v) for v in family_y)
    s_z = _transfer_images(family_y, mapped, s, reps)

    if not family_role_check(family_y, Role.PI_BASE):
        raise PropertyViolation(
            "transported family is not a pi-base of y",
            {"family_y": [format_set(v) for v in family_y]},
        )
    result = verify_fns(s_z)
    if not result.ok:
        i, j = result.counterexample or (0, 0)
        raise PropertyViolation(
            "transferred witness fails verification",
            {"U": format_set(family_y.members[i]), "V": format_set(family_y.members[j])},
        )
    return TransferResult(family_y, s_z, reps)


def representative_choices_agree(
    t: AbsoluteTriple,
    base_x: SetFamily,
    s: FnsWitness,
    budget: int = DEFAULT_REPRESENTATIVE_BUDGET,
) -> bool:
    """Whether verify_fns gives the same verdict for every choice of representatives."""
    mapped = _transported_sets(t, base_x)
    family_y = SetFamily.of(t.y, mapped, Role.PI_BASE)
    choices = [[i for i, v in enumerate(mapped) if v == target] for target in family_y]
    total = 1
    for options in choices:
        total *= len(options)
    if total > budget:
        raise BudgetExceeded("representative_choices_agree", budget)
    verdicts = {
        verify_fns(_transfer_images(family_y, mapped, s, reps)).ok for reps in product(*choices)
    }
    return len(verdicts) == 1


def irreducible_quotients(z: FiniteSpace) -> list[SpaceMap]:
    """Irreducible onto maps out of z, one per partition whose quotient map is irreducible.

    A continuous closed surjection is a quotient map, so these cover every irreducible image up
    to relabelling of the target.
    """
    maps = []
    for blocks in set_partitions(z.point_count):
        _, q = quotient_by_partition(z, Partition.from_classes(z, list(blocks)))
        if irreducibility_failure(q) is None:
            maps.append(q)
    return maps


def absolute_triples(z: FiniteSpace) -> Iterator[AbsoluteTriple]:
    """Every triple (Z, f, g) of irreducible quotient maps out of z."""
    maps = irreducible_quotients(z)
    for f in maps:
        for g in maps:
            yield AbsoluteTriple(z, f, g)


@dataclass(frozen=True, slots=True)
class LemmaFailure:
    """A map and the sets at which a lemma check failed."""

    lemma: str
    f: SpaceMap
    sets: tuple[PointSet, ...]

    def as_dict(self) -> dict[str, object]:
        return {
            "lemma": self.lemma,
            "map": list(self.f.image),
            "source_opens": [format_set(o) for o in self.f.source.opens],
            "target_opens": [format_set(o) for o in self.f.target.opens],
            "sets": [format_set(s) for s in self.sets],
        }


def lemma_holds(failure: LemmaFailure) -> bool:
    """Re-evaluate one failure record directly; False means the failure is genuine."""
    f = failure.f
    match failure.lemma:
        case "frd":
            (u,) = failure.sets
            return small_image(f, u) == small_image_pointwise(f, u)
        case "f2":
            (u,) = failure.sets
            return is_subset(small_image(f, u), image(f, u))
        case "f1" | "f1_converse":
            u, v = failure.sets
            return (u & v == 0) == (small_image(f, u) & small_image(f, v) == 0)
        case "kpv":
            base = SetFamily(f.target, failure.sets, Role.BASE)
            return kpv_condition(f, base) == map_report(f).d_open
        case "d_open":
            return map_report(f).open_map
    raise InputError(f"unknown lemma: {failure.lemma}")


@dataclass(frozen=True, slots=True)
class LemmaReport:
    instances_checked: int
    failures: tuple[LemmaFailure, ...] = ()
    expected_failures_found: bool = False
    expected_example: LemmaFailure | None = None
    counts: dict[str, int] = field(default_factory=dict)

    def recheck(self) -> bool:
        """Every recorded failure, and the expected example, really fails."""
        recorded = [*self.failures]
        if self.expected_example is not None:
            recorded.append(self.expected_example)
        return not any(lemma_holds(failure) for failure in recorded)


def merge_reports(reports: Sequence[LemmaReport]) -> LemmaReport:
    """Combine shard reports in the order given."""
    counts: dict[str, int] = {}
    for report in reports:
        for key, value in report.counts.items():
            counts[key] = counts.get(key, 0) + value
    example = next((r.expected_example for r in reports if r.expected_example), None)
    return LemmaReport(
        instances_checked=sum(r.instances_checked for r in reports),
        failures=tuple(f for r in reports for f in r.failures),
        expected_failures_found=example is not None,
        expected_example=example,
        counts=dict(sorted(counts.items())),
    )


def onto_functions(source: FiniteSpace, target: FiniteSpace) -> Iterator[SpaceMap]:
    """All surjective point functions, continuous or not."""
    for values in product(target.points, repeat=source.point_count):
        if len(set(values)) == target.point_count:
            yield SpaceMap(source, target, values)


def all_functions(source: FiniteSpace, target: FiniteSpace) -> Iterator[SpaceMap]:
    """All point functions from source to target."""
    for values in product(target.points, repeat=source.point_count):
        yield SpaceMap(source, target, values)


def check_small_image_pair(source: FiniteSpace, target: FiniteSpace) -> LemmaReport:
    """frd and f2 on every onto map and open set; f1 on the irreducible ones.

    Also looks for a non-irreducible onto map with disjoint small images of intersecting opens.
    """
    failures: list[LemmaFailure] = []
    example: LemmaFailure | None = None
    instances = 0
    irreducible_count = 0
    opens = source.opens
    for f in onto_functions(source, target):
        instances += 1
        smalls = [small_image(f, u) for u in opens]
        for u, small in zip(opens, smalls, strict=True):
            if small != small_image_pointwise(f, u):
                failures.append(LemmaFailure("frd", f, (u,)))
            if not is_subset(small, image(f, u)):
                failures.append(LemmaFailure("f2", f, (u,)))
        irreducible = irreducibility_failure(f) is None
        irreducible_count += irreducible
        for a, u in enumerate(opens):
            for b in range(a, len(opens)):
                v = opens[b]
                agree = (u & v == 0) == (smalls[a] & smalls[b] == 0)
                if irreducible and not agree:
                    failures.append(LemmaFailure("f1", f, (u, v)))
                elif not irreducible and example is None and u & v and not smalls[a] & smalls[b]:
                    example = LemmaFailure("f1_converse", f, (u, v))
    return LemmaReport(
        instances_checked=instances,
        failures=tuple(failures),
        expected_failures_found=example is not None,
        expected_example=example,
        counts={"onto_maps": instances, "irreducible_maps": irreducible_count},
    )


def space_pairs(
    max_points: int,
    sample: int | None = None,
    seed: int = 0,
    pair_budget: int = LEMMA_PAIR_BUDGET,
) -> list[tuple[FiniteSpace, FiniteSpace]]:
    """(source, target) topology pairs with 1 <= |target| <= |source| <= max_points.

    With `sample`, a seeded random subset of that size, kept in enumeration order. Without
    one, more than `pair_budget` pairs raise BudgetExceeded (all 3-point pairs fit; 4 do not).
    """
    if not 0 <= max_points <= MAX_ENUMERATION_POINTS:
        raise InputError(f"max_points must be in 0..{MAX_ENUMERATION_POINTS}, got {max_points}")
    spaces = [s for n in range(1, max_points + 1) for s in enumerate_topologies(n)]
    pairs = [(a, b) for a in spaces for b in spaces if b.point_count <= a.point_count]
    if sample is None and len(pairs) > pair_budget:
        raise BudgetExceeded("lemma pair enumeration without a sample", pair_budget)
    if sample is not None and sample < len(pairs):
        keep = sorted(random.Random(seed).sample(range(len(pairs)), sample))
        pairs = [pairs[k] for k in keep]
    return pairs


def lemma_harness(max_points: int, sample: int | None = None, seed: int = 0) -> LemmaReport:
    """Small-image lemmas over every (or a sampled set of) topology pair up to max_points."""
    pairs = space_pairs(max_points, sample, seed)
    return merge_reports([check_small_image_pair(a, b) for a, b in pairs])


def check_kpv_pair(
    source: FiniteSpace, target: FiniteSpace, bases: Sequence[SetFamily]
) -> LemmaReport:
    """KPV's separation condition agrees with d-openness for every onto function and base.

    Onto matters: a constant map into the Sierpinski space meets the condition without being
    d-open.
    """
    failures: list[LemmaFailure] = []
    instances = 0
    for f in onto_functions(source, target):
        d_open = map_report(f).d_open
        for base in bases:
            instances += 1
            if kpv_condition(f, base) != d_open:
                failures.append(LemmaFailure("kpv", f, tuple(base.members)))
    return LemmaReport(instances, tuple(failures), counts={"kpv_instances": instances})


def check_d_open_lemma(source: FiniteSpace, target: FiniteSpace) -> LemmaReport:
    """Closed continuous maps on a regular source that are d-open on a base are open."""
    failures: list[LemmaFailure] = []
    instances = 0
    if not separation_report(source).regular:
        return LemmaReport(0, counts={"d_open_instances": 0})
    for f in all_functions(source, target):
        report = map_report(f)
        if not (report.continuous and report.closed_map):
            continue
        good = [
            u for u in source.opens if is_subset(image(f, u), regular_part(target, image(f, u)))
        ]
        if not family_role_check(SetFamily(source, tuple(good), Role.BASE), Role.BASE):
            continue
        instances += 1
        if not report.open_map:
            failures.append(LemmaFailure("d_open", f, tuple(good)))
    return LemmaReport(instances, tuple(failures), counts={"d_open_instances": instances})
