"""Space generators and exhaustive enumeration of small topologies, partitions and bases."""

import random
from collections.abc import Iterator
from dataclasses import dataclass
from enum import StrEnum
from itertools import combinations

from .errors import BudgetExceeded, InputError
from .topo import (
    FiniteSpace,
    PointSet,
    Role,
    SetFamily,
    discrete_space,
    format_set,
    indiscrete_space,
    is_subset,
    mask_of,
    members,
    neighbourhood,
    set_key,
)

MAX_ENUMERATION_POINTS = 4


class SpaceKind(StrEnum):
    DISCRETE = "discrete"
    INDISCRETE = "indiscrete"
    SIERPINSKI = "sierpinski"
    ALEXANDROV = "alexandrov"
    RANDOM = "random"
    CLUSTER = "cluster"


@dataclass(frozen=True, slots=True)
class GeneratorSpec:
    """What to build. Fields a kind does not use are ignored."""

    kind: SpaceKind
    n: int = 0
    edges: tuple[tuple[int, int], ...] = ()
    blocks: tuple[PointSet, ...] = ()
    density: float = 0.5
    seed: int = 0


def parse_edges(text: str) -> tuple[tuple[int, int], ...]:
    """Parse "0<1,1<2" into order pairs."""
    edges = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        lo, sep, hi = part.partition("<")
        if not sep:
            raise InputError(f"edge '{part}' is not of the form a<b")
        try:
            edges.append((int(lo), int(hi)))
        except ValueError:
            raise InputError(f"edge '{part}' has a non-integer endpoint") from None
    return tuple(edges)


def parse_blocks(text: str) -> tuple[PointSet, ...]:
    """Parse "0,1;2,3" into point sets."""
    blocks = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        try:
            blocks.append(mask_of(int(x) for x in part.split(",")))
        except ValueError:
            raise InputError(f"block '{part}' has a non-integer point") from None
    return tuple(blocks)


def up_set_space(point_count: int, up: list[PointSet]) -> FiniteSpace:
    """Topology of the up-sets of a preorder given by each point's up-closure."""
    opens = [
        s
        for s in range(1 << point_count)
        if all(is_subset(up[x], s) for x in members(s))
    ]
    return FiniteSpace.from_opens(point_count, opens)


def _order_closure(point_count: int, edges: tuple[tuple[int, int], ...]) -> list[PointSet]:
    up = [1 << x for x in range(point_count)]
    for a, b in edges:
        if not (0 <= a < point_count and 0 <= b < point_count):
            raise InputError(f"edge {a}<{b} refers to a point outside 0..{point_count - 1}")
        up[a] |= 1 << b
    changed = True
    while changed:
        changed = False
        for x in range(point_count):
            grown = up[x]
            for y in members(up[x]):
                grown |= up[y]
            if grown != up[x]:
                up[x], changed = grown, True
    for x in range(point_count):
        for y in members(up[x]):
            if y != x and up[y] >> x & 1:
                raise InputError(f"order has a cycle through points {x} and {y}")
    return up


def _cluster_space(blocks: tuple[PointSet, ...]) -> FiniteSpace:
    seen = 0
    for block in blocks:
        if block == 0 or block & seen:
            raise InputError(f"block {format_set(block)} is empty or overlaps another block")
        seen |= block
    point_count = seen.bit_length()
    if seen != (1 << point_count) - 1:
        raise InputError("blocks must cover the points 0..n-1 without gaps")
    opens = set()
    for size in range(len(blocks) + 1):
        for chosen in combinations(blocks, size):
            opens.add(mask_of(x for block in chosen for x in members(block)))
    return FiniteSpace.from_opens(point_count, opens)


def generate(spec: GeneratorSpec) -> FiniteSpace:
    """Build a space; deterministic for a given spec (and seed)."""
    match spec.kind:
        case SpaceKind.DISCRETE:
            return discrete_space(spec.n)
        case SpaceKind.INDISCRETE:
            return indiscrete_space(spec.n)
        case SpaceKind.SIERPINSKI:
            return FiniteSpace.from_opens(2, [0, 0b10, 0b11])
        case SpaceKind.ALEXANDROV:
            return up_set_space(spec.n, _order_closure(spec.n, spec.edges))
        case SpaceKind.RANDOM:
            if not 0.0 <= spec.density <= 1.0:
                raise InputError(f"density {spec.density} outside [0, 1]")
            if spec.n < 0:
                raise InputError("n must be non-negative")
            rng = random.Random(spec.seed)
            full = (1 << spec.n) - 1
            family = [s for s in range(1, full) if rng.random() < spec.density]
            return FiniteSpace.generated_by(spec.n, family)[0]
        case SpaceKind.CLUSTER:
            return _cluster_space(spec.blocks)
    raise InputError(f"unknown space kind: {spec.kind}")


def _check_enumeration_size(n: int) -> None:
    if not 0 <= n <= MAX_ENUMERATION_POINTS:
        raise InputError(f"enumeration is limited to 0..{MAX_ENUMERATION_POINTS} points, got {n}")


def topology_key(space: FiniteSpace) -> tuple[int, tuple[tuple[int, tuple[int, ...]], ...]]:
    """Canonical order of topologies on the same points: number of opens, then the opens."""
    return len(space.opens), tuple(set_key(o) for o in space.opens)


def enumerate_topologies(n: int) -> list[FiniteSpace]:
    """All topologies on n labelled points, one per preorder, canonically ordered."""
    _check_enumeration_size(n)
    pairs = [(x, y) for x in range(n) for y in range(n) if x != y]
    found: dict[tuple[PointSet, ...], FiniteSpace] = {}
    for chosen in range(1 << len(pairs)):
        up = [1 << x for x in range(n)]
        for k, (x, y) in enumerate(pairs):
            if chosen >> k & 1:
                up[x] |= 1 << y
        transitive = all(is_subset(up[y], up[x]) for x in range(n) for y in members(up[x]))
        if transitive:
            space = up_set_space(n, up)
            found.setdefault(space.opens, space)
    return sorted(found.values(), key=topology_key)


def count_topologies_bruteforce(n: int) -> int:
    """Count topologies by testing every candidate family for ∪/∩ closure pair by pair."""
    _check_enumeration_size(n)
    full = (1 << n) - 1
    proper = list(range(1, full))
    count = 0
    for chosen in range(1 << len(proper)):
        family = {0, full} | {s for k, s in enumerate(proper) if chosen >> k & 1}
        if all(a | b in family and a & b in family for a in family for b in family):
            count += 1
    return count


def set_partitions(n: int) -> Iterator[tuple[PointSet, ...]]:
    """Every partition of 0..n-1 into blocks, blocks ordered by smallest point."""
    if n == 0:
        yield ()
        return
    for rest in set_partitions(n - 1):
        new_point = 1 << (n - 1)
        for k in range(len(rest)):
            yield (*rest[:k], rest[k] | new_point, *rest[k + 1 :])
        yield (*rest, new_point)


def neighbourhood_pi_base(space: FiniteSpace) -> SetFamily:
    """Distinct minimal neighbourhoods; every nonempty open contains one."""
    return SetFamily.canonical_of(
        space, (neighbourhood(space, x) for x in space.points), Role.PI_BASE
    )


def nonempty_opens(space: FiniteSpace) -> SetFamily:
    """All nonempty opens, as a pi-base."""
    return SetFamily(space, tuple(o for o in space.opens if o), Role.PI_BASE)


def enumerate_bases(space: FiniteSpace, budget: int = 1 << 16) -> list[SetFamily]:
    """Every base of the space.

    A base must contain each minimal neighbourhood, so the bases are exactly those plus any
    choice of the remaining opens.
    """
    required = {neighbourhood(space, x) for x in space.points}
    optional = [o for o in space.opens if o not in required]
    if 1 << len(optional) > budget:
        raise BudgetExceeded("enumerate_bases", budget)
    bases = []
    for chosen in range(1 << len(optional)):
        picked = required | {o for k, o in enumerate(optional) if chosen >> k & 1}
        bases.append(SetFamily.canonical_of(space, picked, Role.BASE))
    return bases
