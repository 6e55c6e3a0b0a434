"""Tests for the open-open game engine."""

import sys
from pathlib import Path

import pytest

# scriptsディレクトリをパスに追加
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from _lib.errors import BudgetExceeded, IllegalMoveError, InputError, PreconditionError
from _lib.game import (
    ConstantStrategy,
    SigmaStrategy,
    exhaustive_win,
    is_dense,
    is_legal_reply,
    make_adversary,
    play,
)
from _lib.generate import enumerate_bases, enumerate_topologies
from _lib.topo import Role, SetFamily, topology_family
from _lib.witness import FnsWitness, search_fns, trivial_fns
from tests.strategies import D2, D3, I2, POINT, SIERPINSKI

D2_BASE = SetFamily(D2, (0b01, 0b10, 0b11), Role.BASE)


def sigma_for(base: SetFamily) -> SigmaStrategy:
    return SigmaStrategy(base, trivial_fns(base))


class TestSigmaStrategy:
    """SigmaStrategy のテスト。"""

    def test_opening_is_first_member(self) -> None:
        assert sigma_for(D2_BASE).opening() == (0b01,)

    def test_forces_the_other_point(self) -> None:
        sigma = sigma_for(D2_BASE)
        offered = sigma.respond([(0b01,)])
        assert any(v & ~0b10 == 0 for v in offered)
        assert offered == (0b01, 0b10)

    def test_single_member_base_is_constant(self) -> None:
        base = SetFamily(I2, (0b11,), Role.BASE)
        sigma = sigma_for(base)
        assert sigma.opening() == (0b11,)
        assert sigma.respond([(0b11,)]) == (0b11,)

    def test_rejects_failing_witness(self) -> None:
        with pytest.raises(PreconditionError):
            SigmaStrategy(D2_BASE, FnsWitness.of(D2_BASE, [[0], [1], []]))

    def test_rejects_witness_over_other_family(self) -> None:
        with pytest.raises(InputError):
            SigmaStrategy(D2_BASE, trivial_fns(topology_family(D2)))

    def test_rejects_non_base(self) -> None:
        family = SetFamily(D2, (0b01,))
        with pytest.raises(PreconditionError):
            SigmaStrategy(family, trivial_fns(family))


class TestAdversary:
    """make_adversary のテスト。"""

    def test_first_fit(self) -> None:
        ii = make_adversary("first_fit", D2, D2_BASE)
        assert ii.reply([], (0b11,)) == (0b01,)

    def test_repeater_falls_back(self) -> None:
        ii = make_adversary("repeater", D2, D2_BASE)
        assert ii.reply([], (0b11,)) == (0b01,)
        assert ii.reply([(0b10,)], (0b11,)) == (0b10,)

    def test_max_avoider_prefers_covered_points(self) -> None:
        ii = make_adversary("max_avoider", D2, D2_BASE)
        assert ii.reply([(0b10,)], (0b11,)) == (0b10,)

    def test_scripted_illegal_move(self) -> None:
        ii = make_adversary("scripted", D2, D2_BASE, [[0b10]])
        with pytest.raises(IllegalMoveError):
            ii.reply([], (0b01,))

    def test_scripted_exhausted_uses_first_fit(self) -> None:
        ii = make_adversary("scripted", D2, D2_BASE, [[0b01]])
        assert ii.reply([], (0b01,)) == (0b01,)
        assert ii.reply([(0b01,)], (0b11,)) == (0b01,)

    def test_unknown_kind(self) -> None:
        with pytest.raises(InputError):
            make_adversary("random", D2, D2_BASE)

    def test_script_needs_scripted_kind(self) -> None:
        with pytest.raises(InputError):
            make_adversary("first_fit", D2, D2_BASE, [[0b01]])

    def test_script_must_be_open(self) -> None:
        base = topology_family(SIERPINSKI)
        with pytest.raises(InputError):
            make_adversary("scripted", SIERPINSKI, base, [[0b01]])


class TestPlay:
    """play のテスト。"""

    def test_d2_dense_by_round_two(self) -> None:
        ii = make_adversary("first_fit", D2, D2_BASE)
        transcript = play(D2, D2_BASE, sigma_for(D2_BASE), ii, horizon=4)
        assert transcript.dense
        assert len(transcript.rounds) == 2
        for r in transcript.rounds:
            assert is_legal_reply(D2, r.c.members, r.d.members)

    def test_one_point_space(self) -> None:
        base = topology_family(POINT)
        ii = make_adversary("first_fit", POINT, base)
        transcript = play(POINT, base, sigma_for(base), ii, horizon=1)
        assert transcript.dense
        assert len(transcript.rounds) == 1

    @pytest.mark.parametrize("kind", ["first_fit", "max_avoider", "repeater"])
    def test_sigma_beats_adversaries_on_d3(self, kind: str) -> None:
        base = topology_family(D3)
        ii = make_adversary(kind, D3, base)
        transcript = play(D3, base, sigma_for(base), ii, horizon=3)
        assert transcript.dense
        covered = transcript.covered_by_round()
        assert all(a & ~b == 0 for a, b in zip(covered, covered[1:], strict=False))

    def test_deterministic(self) -> None:
        base = topology_family(D3)
        runs = [
            play(D3, base, sigma_for(base), make_adversary("max_avoider", D3, base), 5)
            for _ in range(2)
        ]
        assert runs[0] == runs[1]

    def test_horizon_must_be_positive(self) -> None:
        ii = make_adversary("first_fit", D2, D2_BASE)
        with pytest.raises(InputError):
            play(D2, D2_BASE, sigma_for(D2_BASE), ii, horizon=0)

    def test_non_dense_play(self) -> None:
        ii = make_adversary("first_fit", D2, D2_BASE)
        transcript = play(D2, D2_BASE, ConstantStrategy([0b01]), ii, horizon=3)
        assert not transcript.dense
        assert len(transcript.rounds) == 3
        assert not is_dense(D2, transcript.covered_by_round()[-1])


class TestExhaustiveWin:
    """exhaustive_win のテスト。"""

    def test_sigma_wins_on_d2(self) -> None:
        result = exhaustive_win(D2, D2_BASE, sigma_for(D2_BASE), horizon=3)
        assert result.wins_all
        assert result.rounds_needed == 2

    def test_whole_space_is_dense_in_sierpinski(self) -> None:
        base = topology_family(SIERPINSKI)
        result = exhaustive_win(SIERPINSKI, base, ConstantStrategy([0b11]), horizon=3)
        assert result.wins_all

    def test_constant_point_loses(self) -> None:
        base = topology_family(D2)
        result = exhaustive_win(D2, base, ConstantStrategy([0b01]), horizon=5)
        assert not result.wins_all
        assert result.worst_line is not None
        assert len(result.worst_line.rounds) == 5
        assert all(r.d.members == (0b01,) for r in result.worst_line.rounds)

    def test_budget(self) -> None:
        with pytest.raises(BudgetExceeded):
            exhaustive_win(D2, D2_BASE, sigma_for(D2_BASE), horizon=3, node_budget=0)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_sigma_wins_on_every_topology(self, n: int) -> None:
        """全位相・全開集合基で σ が horizon=|base| で勝つこと。"""
        for space in enumerate_topologies(n):
            base = topology_family(space)
            result = exhaustive_win(space, base, sigma_for(base), horizon=len(base))
            assert result.wins_all
            assert result.rounds_needed is not None and result.rounds_needed <= 2

    @pytest.mark.parametrize(("n", "deepest"), [(1, 1), (2, 2), (3, 3)])
    def test_sigma_wins_on_every_base_with_minimal_witness(self, n: int, deepest: int) -> None:
        """全位相の全基で、最小の FNS 証拠から作った σ が勝つこと。"""
        rounds = []
        for space in enumerate_topologies(n):
            for base in enumerate_bases(space):
                found = search_fns(base, k_max=len(base))
                assert found is not None
                sigma = SigmaStrategy(base, found[1])
                result = exhaustive_win(space, base, sigma, horizon=len(base))
                assert result.wins_all, result.worst_line
                assert result.rounds_needed is not None
                rounds.append(result.rounds_needed)
        assert max(rounds) == deepest
