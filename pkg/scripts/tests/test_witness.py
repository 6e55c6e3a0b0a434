"""Tests for FNS/FN witnesses."""

import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# scriptsディレクトリをパスに追加
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from _lib.errors import BudgetExceeded, InputError, PreconditionError, WitnessStructureError
from _lib.generate import enumerate_topologies
from _lib.topo import (
    CoverSequence,
    FiniteSpace,
    Role,
    SetFamily,
    discrete_space,
    indiscrete_space,
    is_development,
    mask_of,
    maximal_subfamily,
    ro_atoms,
    ro_family,
    topology_family,
)
from _lib.witness import (
    FnsWitness,
    FnWitness,
    WitnessVerdict,
    developable_fn,
    identity_fn,
    mediated_fn,
    project_fn_to_ro,
    search_fns,
    stone_lift,
    trivial_fn,
    trivial_fns,
    verify_fn,
    verify_fns,
)
from tests.strategies import D2, D3, I2, SIERPINSKI, X3, open_families, topologies

D2_BASE = SetFamily(D2, (0b01, 0b10, 0b11), Role.BASE)
D3_BASE = SetFamily(D3, (0b001, 0b010, 0b100, 0b111), Role.BASE)


def covers(space: FiniteSpace, *families: list[list[int]]) -> CoverSequence:
    return CoverSequence(
        space,
        tuple(SetFamily(space, tuple(mask_of(s) for s in f), Role.COVER) for f in families),
    )


class TestFns:
    """trivial_fns / verify_fns のテスト。"""

    def test_trivial_is_everything(self) -> None:
        w = trivial_fns(D2_BASE)
        assert w.images == ((0, 1, 2),) * 3
        assert verify_fns(w).ok

    def test_empty_family(self) -> None:
        w = trivial_fns(SetFamily(D2, ()))
        assert w.images == ()
        assert verify_fns(w).ok

    def test_failing_witness_reports_pair(self) -> None:
        w = FnsWitness.of(D2_BASE, [[0], [1], []])
        verdict = verify_fns(w)
        assert not verdict.ok
        assert verdict.counterexample == (0, 1)

    def test_shared_singletons_verify(self) -> None:
        assert verify_fns(FnsWitness.of(D2_BASE, [[0, 1], [0, 1], []])).ok

    def test_rejects_bad_index(self) -> None:
        with pytest.raises(WitnessStructureError):
            FnsWitness.of(D2_BASE, [[3], [], []])

    def test_failing_verdict_needs_counterexample(self) -> None:
        with pytest.raises(InputError):
            WitnessVerdict(False)

    @given(open_families(), st.data())
    @settings(max_examples=100, deadline=None)
    def test_enlarging_images_keeps_verification(
        self, family: SetFamily, data: st.DataObject
    ) -> None:
        """s(U) を大きくしても検証結果が保たれること。"""
        indices = st.lists(st.integers(0, max(len(family) - 1, 0)), max_size=len(family))
        if not family.members:
            return
        images = [data.draw(indices) for _ in family]
        extra = [data.draw(indices) for _ in family]
        small = FnsWitness.of(family, images)
        large = FnsWitness.of(family, [a + b for a, b in zip(images, extra, strict=True)])
        if verify_fns(small).ok:
            assert verify_fns(large).ok

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_trivial_verifies_on_every_topology(self, n: int) -> None:
        for space in enumerate_topologies(n):
            assert verify_fns(trivial_fns(topology_family(space))).ok


class TestSearchFns:
    """search_fns のテスト。"""

    def test_no_disjoint_pairs(self) -> None:
        found = search_fns(SetFamily(D2, (0b11,)), k_max=0)
        assert found is not None
        bound, witness = found
        assert bound == 0
        assert witness.images == ((),)

    def test_d2_minimum_is_two(self) -> None:
        found = search_fns(D2_BASE, k_max=3)
        assert found is not None
        assert found[0] == 2
        assert verify_fns(found[1]).ok

    def test_d3_minimum_is_three(self) -> None:
        found = search_fns(D3_BASE, k_max=4)
        assert found is not None
        assert found[0] == 3

    def test_absent_within_bound(self) -> None:
        assert search_fns(D2_BASE, k_max=1) is None

    def test_total_objective(self) -> None:
        found = search_fns(D2_BASE, k_max=2, objective="total")
        assert found is not None
        assert found[0] == 4
        assert found[1].total == 4

    def test_budget(self) -> None:
        with pytest.raises(BudgetExceeded):
            search_fns(D2_BASE, k_max=2, budget=0)

    def test_negative_bound_rejected(self) -> None:
        with pytest.raises(InputError):
            search_fns(D2_BASE, k_max=-1)


class TestFn:
    """verify_fn / developable_fn のテスト。"""

    @pytest.mark.parametrize("n", range(1, 7))
    def test_discrete_singleton_example(self, n: int) -> None:
        """u({α})={{α}}=l({α}) が単点基で成り立つこと。"""
        space = discrete_space(n)
        base = SetFamily(space, tuple(1 << x for x in space.points), Role.BASE)
        assert verify_fn(identity_fn(base)).ok

    def test_missing_link_fails(self) -> None:
        base = SetFamily(D2, (0b01, 0b11), Role.BASE)
        verdict = verify_fn(FnWitness.of(base, [[0], [1]], [[0], [1]]))
        assert not verdict.ok
        assert verdict.counterexample == (0, 1)

    def test_trivial_fn_verifies(self) -> None:
        for space in enumerate_topologies(3):
            assert verify_fn(trivial_fn(topology_family(space))).ok

    def test_mediated_extremes(self) -> None:
        """最小の仲介は u(V)={V}、最大の仲介は trivial_fn になること。"""
        lowest = mediated_fn(D2_BASE, lambda options: options[0])
        assert lowest.up == ((0,), (1,), (2,))
        assert lowest.low == ((0,), (1,), (0, 1, 2))
        assert verify_fn(lowest).ok
        assert mediated_fn(D2_BASE, lambda options: options[-1]) == trivial_fn(D2_BASE)

    def test_mediator_outside_interval_rejected(self) -> None:
        with pytest.raises(InputError):
            mediated_fn(D2_BASE, lambda options: 99)

    def test_side_condition_violation(self) -> None:
        base = SetFamily(D2, (0b01, 0b11), Role.BASE)
        with pytest.raises(WitnessStructureError):
            verify_fn(FnWitness.of(base, [[0], [0]], [[0], [1]]))

    def test_developable_example(self) -> None:
        seq = covers(D3, [[0], [0, 1], [2]], [[0], [1], [2]])
        base, witness = developable_fn(D3, seq)
        assert set(base.members) == {0b011, 0b100, 0b001, 0b010}
        i = base.index_of(0b001)
        assert witness.up[i] == tuple(sorted((base.index_of(0b011), i)))
        assert witness.low[i] == (i,)
        assert verify_fn(witness).ok

    def test_developable_antichain(self) -> None:
        base, witness = developable_fn(D2, covers(D2, [[0], [1]]))
        assert base.members == (0b01, 0b10)
        assert witness.up == witness.low == ((0,), (1,))

    def test_maximal_sequence_stays_a_development(self) -> None:
        seq = covers(D3, [[0], [0, 1], [2], [1, 2]], [[0], [1], [2]])
        maximal = CoverSequence(D3, tuple(maximal_subfamily(c) for c in seq.covers))
        assert is_development(D3, maximal)

    def test_sierpinski_is_not_a_development(self) -> None:
        with pytest.raises(PreconditionError, match="not a development"):
            developable_fn(SIERPINSKI, covers(SIERPINSKI, [[0, 1]]))

    def test_refinement_required(self) -> None:
        seq = covers(D2, [[0], [1]], [[0, 1]])
        with pytest.raises(PreconditionError, match="refine"):
            developable_fn(D2, seq)


class TestRegularOpen:
    """stone_lift / project_fn_to_ro のテスト。"""

    def test_x3_stone_lift(self) -> None:
        stone_base, lifted = stone_lift(X3, trivial_fns(ro_family(X3)))
        assert stone_base.space.point_count == 2
        assert stone_base.members == (0b00, 0b01, 0b10, 0b11)
        assert verify_fns(lifted).ok

    def test_discrete_lift_is_relabeling(self) -> None:
        stone_base, _ = stone_lift(D3, trivial_fns(ro_family(D3)))
        assert stone_base.members == ro_family(D3).members

    def test_indiscrete_has_one_stone_point(self) -> None:
        stone_base, _ = stone_lift(I2, trivial_fns(ro_family(I2)))
        assert stone_base.space.point_count == 1

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_stone_points_match_atoms(self, n: int) -> None:
        for space in enumerate_topologies(n):
            stone_base, lifted = stone_lift(space, trivial_fns(ro_family(space)))
            assert stone_base.space.point_count == len(ro_atoms(space))
            assert verify_fns(lifted).ok

    def test_lift_rejects_other_family(self) -> None:
        with pytest.raises(InputError):
            stone_lift(X3, trivial_fns(topology_family(X3)))

    def test_projection_on_x3(self) -> None:
        projected = project_fn_to_ro(X3, trivial_fn(topology_family(X3)))
        assert projected.base.members == (0b000, 0b100, 0b011, 0b111)
        assert verify_fn(projected).ok

    def test_projection_on_discrete_is_identity(self) -> None:
        projected = project_fn_to_ro(D2, trivial_fn(topology_family(D2)))
        assert projected == trivial_fn(ro_family(D2))

    def test_projection_on_indiscrete(self) -> None:
        space = indiscrete_space(2)
        projected = project_fn_to_ro(space, trivial_fn(topology_family(space)))
        assert projected.base.members == (0b00, 0b11)
        assert verify_fn(projected).ok

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_projection_preserves_verification(self, n: int) -> None:
        for space in enumerate_topologies(n):
            assert verify_fn(project_fn_to_ro(space, trivial_fn(topology_family(space)))).ok

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("pick", [0, -1, 1])
    def test_projection_of_mediated_witnesses(self, n: int, pick: int) -> None:
        """非自明な FN 証拠も射影後に検証を通ること。"""
        for space in enumerate_topologies(n):
            family = topology_family(space)
            witness = mediated_fn(family, lambda options: options[pick % len(options)])
            assert verify_fn(witness).ok
            assert verify_fn(project_fn_to_ro(space, witness)).ok

    @given(space=topologies(1, 4), data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_projection_of_random_mediated_witnesses(
        self, space: FiniteSpace, data: st.DataObject
    ) -> None:
        witness = mediated_fn(
            topology_family(space), lambda options: data.draw(st.sampled_from(options))
        )
        assert verify_fn(witness).ok
        assert verify_fn(project_fn_to_ro(space, witness)).ok

    def test_projection_requires_full_topology(self) -> None:
        with pytest.raises(InputError):
            project_fn_to_ro(X3, trivial_fn(ro_family(X3)))
