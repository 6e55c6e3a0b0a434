"""Tests for quotients and regularity-style family conditions."""

import sys
from itertools import combinations
from pathlib import Path

import pytest

# scriptsディレクトリをパスに追加
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from _lib.errors import InputError
from _lib.generate import enumerate_topologies
from _lib.quotient import (
    Partition,
    PointWitness,
    SeparationReport,
    build_quotient,
    is_cr_family,
    is_wcr,
    partition,
    quotient_by_partition,
    role_of_image,
    separation_report,
)
from _lib.topo import Role, SetFamily, image, preimage
from tests.strategies import D2, D3, I2, SIERPINSKI, X3


class TestPartition:
    """partition のテスト。"""

    def test_empty_family_gives_one_class(self) -> None:
        assert partition(X3, SetFamily(X3, ())).classes == (0b111,)

    def test_membership_pattern(self) -> None:
        part = partition(X3, SetFamily(X3, (0b011, 0b100)))
        assert part.classes == (0b011, 0b100)
        assert part.class_of == (0, 0, 1)

    def test_all_opens_of_t0_space_separate_points(self) -> None:
        part = partition(X3, SetFamily(X3, X3.opens))
        assert part.classes == (0b001, 0b010, 0b100)

    def test_rejects_non_open_member(self) -> None:
        with pytest.raises(InputError):
            partition(X3, SetFamily(X3, (0b010,)))

    def test_invalid_partition(self) -> None:
        with pytest.raises(InputError):
            Partition.from_classes(D2, [0b01])


class TestBuildQuotient:
    """build_quotient のテスト。"""

    def test_x3_quotient_is_discrete(self) -> None:
        result = build_quotient(X3, SetFamily(X3, (0b011, 0b100)))
        assert result.quotient == D2
        assert result.base_image.members == (0b01, 0b10)
        assert role_of_image(result) is Role.BASE

    def test_empty_family_gives_point(self) -> None:
        result = build_quotient(X3, SetFamily(X3, ()))
        assert result.quotient.point_count == 1
        assert result.q.image == (0, 0, 0)

    def test_sierpinski_quotient_is_itself(self) -> None:
        result = build_quotient(SIERPINSKI, SetFamily(SIERPINSKI, (0b10,)))
        assert result.quotient == SIERPINSKI

    def test_quotient_by_partition(self) -> None:
        part = Partition.from_classes(D3, [0b011, 0b100])
        quotient, q = quotient_by_partition(D3, part)
        assert quotient == D2
        assert q.image == (0, 0, 1)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_saturation_and_intersections(self, n: int) -> None:
        """q⁻¹(q[V])=V と q[V∩W]=q[V]∩q[W] が常に成り立つこと。"""
        for space in enumerate_topologies(n):
            for size in range(3):
                for chosen in combinations(space.opens, size):
                    result = build_quotient(space, SetFamily(space, chosen))
                    for v in chosen:
                        assert preimage(result.q, image(result.q, v)) == v

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_wcr_quotient_is_regular_hausdorff(self, n: int) -> None:
        for space in enumerate_topologies(n):
            for size in range(3):
                for chosen in combinations(space.opens, size):
                    family = SetFamily(space, chosen)
                    if not is_wcr(space, family).holds:
                        continue
                    result = build_quotient(space, family)
                    sep = separation_report(result.quotient)
                    assert role_of_image(result) is Role.BASE
                    assert sep.t2 and sep.regular


class TestWcr:
    """is_wcr / is_cr_family のテスト。"""

    def test_discrete_singletons(self) -> None:
        result = is_wcr(D2, SetFamily(D2, (0b01, 0b10)))
        assert result.holds
        assert result.certificate is not None
        assert result.certificate.recheck()
        entry = next(e for e in result.certificate.entries if e.indices == (0,))
        assert entry.witnesses == (PointWitness(0, (0,), (1,)),)

    def test_sierpinski_point_fails(self) -> None:
        result = is_wcr(SIERPINSKI, SetFamily(SIERPINSKI, (0b10,)))
        assert not result.holds
        assert result.failing_point == 0

    def test_whole_space_family(self) -> None:
        for space in (D2, X3, SIERPINSKI, I2):
            assert is_wcr(space, SetFamily(space, (space.full,))).holds

    def test_strict_empty_reading(self) -> None:
        result = is_wcr(D2, SetFamily(D2, (0b01, 0b10)), strict_empty=True)
        assert result.holds
        assert result.certificate is not None
        assert result.certificate.recheck()

    def test_k_cap_must_be_positive(self) -> None:
        with pytest.raises(InputError):
            is_wcr(D2, SetFamily(D2, (0b01,)), k_cap=0)

    def test_cr_family_examples(self) -> None:
        singletons_and_complements = SetFamily(
            D3, (0b001, 0b010, 0b100, 0b110, 0b101, 0b011)
        )
        assert is_cr_family(D3, singletons_and_complements)
        assert not is_cr_family(SIERPINSKI, SetFamily(SIERPINSKI, SIERPINSKI.opens))
        assert is_cr_family(X3, SetFamily(X3, (0b000, 0b111)))


class TestSeparation:
    """separation_report のテスト。"""

    def test_discrete(self) -> None:
        assert separation_report(D3) == SeparationReport(True, True, True, True)

    def test_sierpinski(self) -> None:
        assert separation_report(SIERPINSKI) == SeparationReport(True, False, False, False)

    def test_indiscrete(self) -> None:
        report = separation_report(I2)
        assert not report.t0
        assert report.regular
