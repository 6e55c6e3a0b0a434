"""Exact finite-topology engine.

Point sets are plain ``int`` bitmasks over the points ``0..n-1``; a topology is stored
extensionally as the canonically ordered tuple of its open sets. Everything here is a pure
function of immutable values.
"""

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from enum import StrEnum

from .errors import InputError

type PointSet = int

MAX_SPACE_POINTS = 8


def mask_of(indices: Iterable[int]) -> PointSet:
    """Build a point set from point indices."""
    result = 0
    for i in indices:
        if i < 0:
            raise InputError(f"negative point index {i}")
        result |= 1 << i
    return result


def members(s: PointSet) -> tuple[int, ...]:
    """Sorted point indices of a point set."""
    return tuple(i for i in range(s.bit_length()) if s >> i & 1)


def set_key(s: PointSet) -> tuple[int, tuple[int, ...]]:
    """Canonical order: cardinality, then lexicographic on sorted indices."""
    return s.bit_count(), members(s)


def canonical(sets: Iterable[PointSet]) -> tuple[PointSet, ...]:
    """Distinct sets in canonical order."""
    return tuple(sorted(set(sets), key=set_key))


def format_set(s: PointSet) -> str:
    """Render a point set as {0,2}."""
    return "{" + ",".join(str(i) for i in members(s)) + "}"


def is_subset(a: PointSet, b: PointSet) -> bool:
    """a ⊆ b."""
    return a & ~b == 0


def find_closure_violation(
    opens: Iterable[PointSet],
) -> tuple[PointSet, PointSet, str] | None:
    """First pair (in canonical order) whose union or intersection is missing, or None."""
    ordered = canonical(opens)
    present = set(ordered)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            if a | b not in present:
                return a, b, "union"
            if a & b not in present:
                return a, b, "intersection"
    return None


def close_family(point_count: int, family: Iterable[PointSet]) -> frozenset[PointSet]:
    """Close a family under pairwise union and intersection, adding the empty and full sets."""
    full = (1 << point_count) - 1
    closed = set(family) | {0, full}
    frontier = list(closed)
    while frontier:
        added: list[PointSet] = []
        for a in frontier:
            for b in list(closed):
                for c in (a | b, a & b):
                    if c not in closed:
                        closed.add(c)
                        added.append(c)
        frontier = added
    return frozenset(closed)


@dataclass(frozen=True, slots=True)
class FiniteSpace:
    """A topology on the points 0..point_count-1, stored as its canonically ordered opens."""

    point_count: int
    opens: tuple[PointSet, ...]
    _open_lookup: frozenset[PointSet] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.point_count <= MAX_SPACE_POINTS:
            raise InputError(
                f"point_count {self.point_count} outside 0..{MAX_SPACE_POINTS}"
            )
        full = (1 << self.point_count) - 1
        if self.opens != canonical(self.opens):
            raise InputError("opens must be distinct and in canonical order")
        for s in self.opens:
            if s & ~full:
                raise InputError(f"open set {format_set(s)} has points >= {self.point_count}")
        if 0 not in self.opens or full not in self.opens:
            raise InputError("the empty set and the full set must be open")
        violation = find_closure_violation(self.opens)
        if violation is not None:
            a, b, op = violation
            raise InputError(f"opens not closed under {op}: {format_set(a)}, {format_set(b)}")
        object.__setattr__(self, "_open_lookup", frozenset(self.opens))

    @classmethod
    def from_opens(cls, point_count: int, opens: Iterable[PointSet]) -> FiniteSpace:
        """Build a space from opens in any order; axioms are still checked."""
        return cls(point_count, canonical(opens))

    @classmethod
    def generated_by(
        cls, point_count: int, family: Iterable[PointSet]
    ) -> tuple[FiniteSpace, int]:
        """Close a generating family under union/intersection; also count the sets added."""
        given = set(family)
        full = (1 << point_count) - 1
        for s in given:
            if s & ~full:
                raise InputError(f"set {format_set(s)} has points >= {point_count}")
        closed = close_family(point_count, given)
        return cls(point_count, canonical(closed)), len(closed - given)

    @property
    def full(self) -> PointSet:
        return (1 << self.point_count) - 1

    @property
    def points(self) -> range:
        return range(self.point_count)

    @property
    def closed_sets(self) -> tuple[PointSet, ...]:
        return canonical(self.full & ~o for o in self.opens)

    def is_open(self, s: PointSet) -> bool:
        """Membership in the topology."""
        return s in self._open_lookup

    def is_closed(self, s: PointSet) -> bool:
        return (self.full & ~s) in self._open_lookup

    def check_set(self, s: PointSet) -> PointSet:
        """Return s, or raise InputError if it has points outside the space."""
        if s < 0 or s & ~self.full:
            raise InputError(f"set {format_set(s)} is not over points 0..{self.point_count - 1}")
        return s

    def check_point(self, x: int) -> int:
        """Return x, or raise InputError if it is not a point of the space."""
        if not 0 <= x < self.point_count:
            raise InputError(f"point {x} out of range 0..{self.point_count - 1}")
        return x


class Role(StrEnum):
    """What a family claims to be; checked by family_role_check."""
    BASE = "base"
    PI_BASE = "pi_base"
    COVER = "cover"
    PLAIN = "plain"


@dataclass(frozen=True, slots=True)
class SetFamily:
    """An ordered family of distinct point sets over a space, tagged with a role."""

    space: FiniteSpace
    members: tuple[PointSet, ...]
    role: Role = Role.PLAIN

    def __post_init__(self) -> None:
        if len(set(self.members)) != len(self.members):
            raise InputError("family members must be distinct")
        for s in self.members:
            self.space.check_set(s)

    @classmethod
    def of(
        cls, space: FiniteSpace, sets: Iterable[PointSet], role: Role = Role.PLAIN
    ) -> SetFamily:
        """Build a family, dropping repeated sets but keeping first-occurrence order."""
        return cls(space, tuple(dict.fromkeys(sets)), role)

    @classmethod
    def canonical_of(
        cls, space: FiniteSpace, sets: Iterable[PointSet], role: Role = Role.PLAIN
    ) -> SetFamily:
        return cls(space, canonical(sets), role)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[PointSet]:
        return iter(self.members)

    def index_of(self, s: PointSet) -> int:
        """Position of a member; InputError for a non-member."""
        try:
            return self.members.index(s)
        except ValueError:
            raise InputError(f"{format_set(s)} is not a member of the family") from None

    def union(self) -> PointSet:
        """Union of all members (empty for an empty family)."""
        result = 0
        for s in self.members:
            result |= s
        return result

    def with_role(self, role: Role) -> SetFamily:
        return SetFamily(self.space, self.members, role)


def discrete_space(point_count: int) -> FiniteSpace:
    """Every subset open."""
    return FiniteSpace.from_opens(point_count, range(1 << point_count))


def indiscrete_space(point_count: int) -> FiniteSpace:
    """Only the empty and full sets open."""
    return FiniteSpace.from_opens(point_count, {0, (1 << point_count) - 1})


def topology_family(space: FiniteSpace) -> SetFamily:
    """All opens of a space, as a base."""
    return SetFamily(space, space.opens, Role.BASE)


@dataclass(frozen=True, slots=True)
class SpaceMap:
    """A total point function between two finite spaces."""

    source: FiniteSpace
    target: FiniteSpace
    image: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.image) != self.source.point_count:
            raise InputError(
                f"map has {len(self.image)} values for {self.source.point_count} source points"
            )
        for y in self.image:
            self.target.check_point(y)

    @classmethod
    def identity(cls, space: FiniteSpace) -> SpaceMap:
        """The identity map of a space."""
        return cls(space, space, tuple(space.points))


@dataclass(frozen=True, slots=True)
class MapReport:
    """Which map properties hold; irreducible implies onto, continuous and closed."""
    onto: bool
    continuous: bool
    closed_map: bool
    open_map: bool
    skeletal: bool
    d_open: bool
    irreducible: bool


@dataclass(frozen=True, slots=True)
class CoverSequence:
    """Finite sequence of open covers, read as repeating its last cover forever."""

    space: FiniteSpace
    covers: tuple[SetFamily, ...]

    def __post_init__(self) -> None:
        for n, cover in enumerate(self.covers):
            if cover.space != self.space:
                raise InputError(f"cover {n} is over a different space")
            if cover.role is not Role.COVER:
                raise InputError(f"cover {n} has role {cover.role}, expected cover")
            for s in cover:
                if not self.space.is_open(s):
                    raise InputError(f"cover {n} member {format_set(s)} is not open")
            if cover.union() != self.space.full:
                raise InputError(f"cover {n} does not cover the space")

    def cover_at(self, n: int) -> SetFamily:
        return self.covers[min(n, len(self.covers) - 1)]


def interior(space: FiniteSpace, s: PointSet) -> PointSet:
    """Largest open subset of s."""
    space.check_set(s)
    result = 0
    for o in space.opens:
        if o & ~s == 0:
            result |= o
    return result


def closure(space: FiniteSpace, s: PointSet) -> PointSet:
    """Smallest closed superset of s."""
    space.check_set(s)
    return space.full & ~interior(space, space.full & ~s)


def regular_part(space: FiniteSpace, s: PointSet) -> PointSet:
    """int cl s."""
    return interior(space, closure(space, s))


def neighbourhood(space: FiniteSpace, x: int) -> PointSet:
    """Smallest open set containing x."""
    space.check_point(x)
    result = space.full
    for o in space.opens:
        if o >> x & 1:
            result &= o
    return result


def ro_family(space: FiniteSpace) -> SetFamily:
    """All regular open sets, canonically ordered."""
    return SetFamily(space, tuple(o for o in space.opens if regular_part(space, o) == o))


def ro_meet(space: FiniteSpace, a: PointSet, b: PointSet) -> PointSet:
    """Meet in RO(X): the plain intersection."""
    space.check_set(a)
    space.check_set(b)
    return a & b


def ro_join(space: FiniteSpace, a: PointSet, b: PointSet) -> PointSet:
    """Join in RO(X): int cl (a ∪ b)."""
    return regular_part(space, a | b)


def ro_complement(space: FiniteSpace, a: PointSet) -> PointSet:
    """Complement in RO(X): int (X \\ a)."""
    return interior(space, space.full & ~space.check_set(a))


def ro_atoms(space: FiniteSpace) -> tuple[PointSet, ...]:
    """Minimal nonempty regular open sets, canonically ordered."""
    nonzero = [r for r in ro_family(space) if r]
    return tuple(r for r in nonzero if not any(o != r and is_subset(o, r) for o in nonzero))


def lattice_closure(space: FiniteSpace, family: SetFamily) -> SetFamily:
    """Close a family of opens under pairwise union and intersection (no empty/full added)."""
    for s in family:
        if not space.is_open(s):
            raise InputError(f"member {format_set(s)} is not open")
    closed = set(family.members)
    frontier = list(closed)
    while frontier:
        added: list[PointSet] = []
        for a in frontier:
            for b in list(closed):
                for c in (a | b, a & b):
                    if c not in closed:
                        closed.add(c)
                        added.append(c)
        frontier = added
    return SetFamily.canonical_of(space, closed)


def require_role(family: SetFamily, role: Role) -> None:
    """Raise InputError unless the family is tagged with `role`."""
    if family.role is not role:
        raise InputError(f"family has role {family.role}, expected {role}")


def star(space: FiniteSpace, x: int, cover: SetFamily) -> PointSet:
    """Union of the cover members containing x."""
    require_role(cover, Role.COVER)
    space.check_point(x)
    result = 0
    for s in cover:
        if s >> x & 1:
            result |= s
    return result


def maximal_subfamily(family: SetFamily) -> SetFamily:
    """Members not strictly contained in another member."""
    kept = tuple(
        s for s in family if not any(t != s and is_subset(s, t) for t in family.members)
    )
    return SetFamily(family.space, kept, family.role)


def multiplicity(family: SetFamily) -> tuple[int, int | None]:
    """Largest number of members sharing a point, and the first point attaining it."""
    best, where = 0, None
    for x in family.space.points:
        count = sum(1 for s in family if s >> x & 1)
        if count > best:
            best, where = count, x
    return best, where


def is_point_finite(family: SetFamily) -> bool:
    """Every point lies in finitely many members; multiplicity() gives the actual count."""
    return multiplicity(family)[0] <= len(family)


def is_refinement(fine: SetFamily, coarse: SetFamily) -> bool:
    """Every member of `fine` lies inside some member of `coarse`."""
    if fine.space != coarse.space:
        raise InputError("families are over different spaces")
    return all(any(is_subset(s, t) for t in coarse) for s in fine)


def is_development(space: FiniteSpace, seq: CoverSequence) -> bool:
    """For every point x and open U containing x, some cover's star at x lies inside U.

    The sequence repeats its last cover, so checking the listed covers suffices.
    """
    if seq.space != space:
        raise InputError("cover sequence is over a different space")
    if not seq.covers:
        raise InputError("empty cover sequence")
    for x in space.points:
        stars = [star(space, x, cover) for cover in seq.covers]
        for u in space.opens:
            if u >> x & 1 and not any(is_subset(st, u) for st in stars):
                return False
    return True


def family_role_check(family: SetFamily, role: Role) -> bool:
    """Whether the family really is a base, pi-base or cover of its space."""
    space = family.space
    match role:
        case Role.BASE:
            if not all(space.is_open(s) for s in family):
                return False
            return all(_union_of_members_inside(family, o) == o for o in space.opens)
        case Role.PI_BASE:
            if not all(s and space.is_open(s) for s in family):
                return False
            return all(any(is_subset(s, o) for s in family) for o in space.opens if o)
        case Role.COVER:
            return family.union() == space.full
        case _:
            return True


def _union_of_members_inside(family: SetFamily, o: PointSet) -> PointSet:
    result = 0
    for s in family:
        if is_subset(s, o):
            result |= s
    return result


def image(f: SpaceMap, s: PointSet) -> PointSet:
    """f(s)."""
    f.source.check_set(s)
    result = 0
    for x in members(s):
        result |= 1 << f.image[x]
    return result


def preimage(f: SpaceMap, t: PointSet) -> PointSet:
    """f^-1(t)."""
    f.target.check_set(t)
    result = 0
    for x, y in enumerate(f.image):
        if t >> y & 1:
            result |= 1 << x
    return result


def map_report(f: SpaceMap) -> MapReport:
    """Classify a map by direct evaluation of each definition over all opens/closed sets."""
    src, tgt = f.source, f.target
    closed = src.closed_sets
    open_images = [image(f, o) for o in src.opens]
    closed_images = [image(f, c) for c in closed]

    onto = image(f, src.full) == tgt.full
    continuous = all(src.is_open(preimage(f, o)) for o in tgt.opens)
    closed_map = all(tgt.is_closed(t) for t in closed_images)
    open_map = all(tgt.is_open(t) for t in open_images)
    skeletal = all(
        regular_part(tgt, t) != 0 for o, t in zip(src.opens, open_images, strict=True) if o
    )
    d_open = all(is_subset(t, regular_part(tgt, t)) for t in open_images)
    irreducible = (
        onto
        and continuous
        and closed_map
        and not any(
            c != src.full and t == tgt.full
            for c, t in zip(closed, closed_images, strict=True)
        )
    )
    return MapReport(onto, continuous, closed_map, open_map, skeletal, d_open, irreducible)


def small_image(f: SpaceMap, u: PointSet) -> PointSet:
    """f#(U) = Y \\ f(X \\ U)."""
    f.source.check_set(u)
    return f.target.full & ~image(f, f.source.full & ~u)


def small_image_pointwise(f: SpaceMap, u: PointSet) -> PointSet:
    """{y : f^-1(y) ⊆ U}, evaluated fibre by fibre."""
    f.source.check_set(u)
    result = 0
    for y in f.target.points:
        if is_subset(preimage(f, 1 << y), u):
            result |= 1 << y
    return result


def kpv_condition(f: SpaceMap, base_y: SetFamily) -> bool:
    """Separation condition on P = {f^-1(V) : V in base_y}, over every subfamily S of P."""
    if base_y.space != f.target:
        raise InputError("base is not over the map's target")
    require_role(base_y, Role.BASE)
    if not family_role_check(base_y, Role.BASE):
        raise InputError("family tagged base is not a base of the target")

    src = f.source
    pulled = tuple(dict.fromkeys(preimage(f, v) for v in base_y))
    # Only the union of S matters, so iterate over distinct unions.
    unions = {0}
    for p in pulled:
        unions |= {u | p for u in unions}
    for u in unions:
        outside = src.full & ~closure(src, u)
        for x in members(outside):
            if not any(p >> x & 1 and p & u == 0 for p in pulled):
                return False
    return True
