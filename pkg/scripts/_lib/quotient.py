"""Quotients by the membership-pattern relation of a family of opens, and the regularity-style
family conditions that make such quotients well behaved."""

from dataclasses import dataclass
from itertools import combinations

from .errors import InputError, PropertyViolation
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
    mask_of,
    members,
    neighbourhood,
    preimage,
)


@dataclass(frozen=True, slots=True)
class Partition:
    """Equivalence classes of points, ordered by their smallest point."""

    space: FiniteSpace
    class_of: tuple[int, ...]
    classes: tuple[PointSet, ...]

    def __post_init__(self) -> None:
        if len(self.class_of) != self.space.point_count:
            raise InputError("class_of must assign every point")
        seen = 0
        for c, block in enumerate(self.classes):
            if block == 0 or block & seen:
                raise InputError(f"class {format_set(block)} is empty or overlaps another")
            seen |= block
            if any(self.class_of[x] != c for x in members(block)):
                raise InputError(f"class_of disagrees with class {format_set(block)}")
        if seen != self.space.full:
            raise InputError("classes do not cover the space")

    @classmethod
    def from_classes(cls, space: FiniteSpace, classes: list[PointSet]) -> Partition:
        ordered = tuple(sorted(classes, key=lambda block: members(block)[0]))
        class_of = [0] * space.point_count
        for c, block in enumerate(ordered):
            for x in members(space.check_set(block)):
                class_of[x] = c
        return cls(space, tuple(class_of), ordered)


@dataclass(frozen=True, slots=True)
class QuotientResult:
    quotient: FiniteSpace
    q: SpaceMap
    base_image: SetFamily


def _require_open(space: FiniteSpace, family: SetFamily) -> None:
    if family.space != space:
        raise InputError("family is over a different space")
    for s in family:
        if not space.is_open(s):
            raise InputError(f"member {format_set(s)} is not open")


def partition(space: FiniteSpace, family: SetFamily) -> Partition:
    """Points are equivalent when every member of the family contains both or neither."""
    _require_open(space, family)
    by_pattern: dict[int, PointSet] = {}
    for x in space.points:
        pattern = mask_of(k for k, v in enumerate(family) if v >> x & 1)
        by_pattern[pattern] = by_pattern.get(pattern, 0) | 1 << x
    return Partition.from_classes(space, list(by_pattern.values()))


def quotient_by_partition(space: FiniteSpace, part: Partition) -> tuple[FiniteSpace, SpaceMap]:
    """Quotient topology: the images of the saturated open sets."""
    if part.space != space:
        raise InputError("partition is over a different space")

    def saturated(o: PointSet) -> bool:
        return all(block & o == 0 or is_subset(block, o) for block in part.classes)

    opens = {
        mask_of(part.class_of[x] for x in members(o)) for o in space.opens if saturated(o)
    }
    quotient = FiniteSpace.from_opens(len(part.classes), opens)
    return quotient, SpaceMap(space, quotient, part.class_of)


def build_quotient(space: FiniteSpace, family: SetFamily) -> QuotientResult:
    """Quotient by the partition that `family` induces, with the checked quotient map."""
    quotient, q = quotient_by_partition(space, partition(space, family))
    base_image = SetFamily.of(quotient, (image(q, v) for v in family))

    for v in family:
        if preimage(q, image(q, v)) != v:
            raise PropertyViolation("member is not saturated", {"member": format_set(v)})
    for v in family:
        for w in family:
            if image(q, v & w) != image(q, v) & image(q, w):
                raise PropertyViolation(
                    "q does not preserve the intersection",
                    {"V": format_set(v), "W": format_set(w)},
                )
    return QuotientResult(quotient, q, base_image)


@dataclass(frozen=True, slots=True)
class PointWitness:
    """x ∈ ⋃A ⊆ X∖⋃B ⊆ target."""

    point: int
    a: tuple[int, ...]
    b: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class WcrEntry:
    indices: tuple[int, ...]
    target: PointSet
    witnesses: tuple[PointWitness, ...]
    cover: tuple[int, ...] = ()


@dataclass(frozen=True, slots=True)
class WcrCertificate:
    family: SetFamily
    entries: tuple[WcrEntry, ...]
    strict_empty: bool = False

    def recheck(self) -> bool:
        """Re-verify every inclusion chain literally."""
        space = self.family.space
        sets = self.family.members

        def union(indices: tuple[int, ...]) -> PointSet:
            result = 0
            for k in indices:
                result |= sets[k]
            return result

        for entry in self.entries:
            target = space.full
            for k in entry.indices:
                target &= sets[k]
            if target != entry.target:
                return False
            if target == 0:
                if self.strict_empty and union(entry.cover) != space.full:
                    return False
                continue
            covered = 0
            for pw in entry.witnesses:
                inner, outer = union(pw.a), space.full & ~union(pw.b)
                if not (inner >> pw.point & 1 and is_subset(inner, outer)):
                    return False
                if not is_subset(outer, target):
                    return False
                covered |= inner
            if covered != target:
                return False
        return True


@dataclass(frozen=True, slots=True)
class WcrResult:
    holds: bool
    certificate: WcrCertificate | None = None
    failing_tuple: tuple[int, ...] | None = None
    failing_point: int | None = None


def is_wcr(
    space: FiniteSpace,
    family: SetFamily,
    k_cap: int | None = None,
    strict_empty: bool = False,
) -> WcrResult:
    """Decide condition (*) in its pointwise finite form for every tuple of at most k_cap members.

    The empty tuple is included: its intersection is the whole space, so the family must cover.
    Empty intersections pass vacuously unless strict_empty asks for a subfamily covering X.
    """
    _require_open(space, family)
    if k_cap is not None and k_cap < 1:
        raise InputError("k_cap must be at least 1")
    sets = family.members
    cap = len(sets) if k_cap is None else min(k_cap, len(sets))

    done: set[PointSet] = set()
    entries: list[WcrEntry] = []
    for size in range(cap + 1):
        for indices in combinations(range(len(sets)), size):
            target = space.full
            for k in indices:
                target &= sets[k]
            if target in done:
                continue
            done.add(target)
            if target == 0:
                cover = tuple(range(len(sets)))
                if strict_empty and family.union() != space.full:
                    return WcrResult(False, failing_tuple=indices)
                entries.append(WcrEntry(indices, 0, (), cover if strict_empty else ()))
                continue
            witnesses = []
            for x in members(target):
                found = _point_witness(space, sets, target, x)
                if found is None:
                    return WcrResult(False, failing_tuple=indices, failing_point=x)
                witnesses.append(found)
            entries.append(WcrEntry(indices, target, tuple(witnesses)))

    certificate = WcrCertificate(family, tuple(entries), strict_empty)
    if not certificate.recheck():
        raise PropertyViolation("wcr certificate failed its own recheck")
    return WcrResult(True, certificate)


def _point_witness(
    space: FiniteSpace, sets: tuple[PointSet, ...], target: PointSet, x: int
) -> PointWitness | None:
    # Taking every member disjoint from A as B is the best possible choice for that A.
    outside = space.full & ~target
    for a, candidate in enumerate(sets):
        if not (candidate >> x & 1 and is_subset(candidate, target)):
            continue
        b = tuple(k for k, s in enumerate(sets) if s & candidate == 0)
        covered = 0
        for k in b:
            covered |= sets[k]
        if is_subset(outside, covered):
            return PointWitness(x, (a,), b)
    return None


def is_cr_family(space: FiniteSpace, family: SetFamily) -> bool:
    """Each x ∈ U ∈ P has U', V' ∈ P with x ∈ U' ⊆ X∖V' ⊆ U."""
    _require_open(space, family)
    sets = family.members
    for u in sets:
        outside = space.full & ~u
        for x in members(u):
            if not any(
                inner >> x & 1 and inner & v == 0 and is_subset(outside, v)
                for inner in sets
                for v in sets
            ):
                return False
    return True


@dataclass(frozen=True, slots=True)
class SeparationReport:
    t0: bool
    t1: bool
    t2: bool
    regular: bool


def separation_report(space: FiniteSpace) -> SeparationReport:
    """Decide T0/T1/T2 and regularity (points from closed sets, T1 not included)."""
    hood = [neighbourhood(space, x) for x in space.points]
    pairs = list(combinations(space.points, 2))

    t0 = all(hood[x] >> y & 1 == 0 or hood[y] >> x & 1 == 0 for x, y in pairs)
    t1 = all(hood[x] >> y & 1 == 0 and hood[y] >> x & 1 == 0 for x, y in pairs)
    t2 = all(hood[x] & hood[y] == 0 for x, y in pairs)

    def around(f: PointSet) -> PointSet:
        result = 0
        for y in members(f):
            result |= hood[y]
        return result

    regular = all(
        hood[x] & around(f) == 0
        for f in space.closed_sets
        for x in space.points
        if not f >> x & 1
    )
    return SeparationReport(t0, t1, t2, regular)


def role_of_image(result: QuotientResult) -> Role:
    """Role the base image actually has in the quotient."""
    if family_role_check(result.base_image, Role.BASE):
        return Role.BASE
    if family_role_check(result.base_image, Role.PI_BASE):
        return Role.PI_BASE
    return Role.PLAIN
