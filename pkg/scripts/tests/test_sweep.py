"""Tests for the acceptance sweeps."""

import sys
from pathlib import Path

import pytest

# scriptsディレクトリをパスに追加
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from _lib.documents import load_report
from _lib.errors import InputError, PropertyViolation
from _lib.sweep import (
    SUITES,
    CheckResult,
    SuiteReport,
    Tally,
    describe,
    development_sequences,
    game_regression_check,
    load_regression,
    merge_results,
    raise_on_failure,
    run_suite,
    save_regression,
)
from _lib.topo import is_development
from tests.strategies import D2


class TestTally:
    """Tally / merge_results のテスト。"""

    def test_keeps_first_counterexample(self) -> None:
        tally = Tally()
        tally.record("c", True)
        tally.record("c", False, space=D2, n=1)
        tally.record("c", False, n=2)
        (result,) = tally.results()
        assert (result.instances, result.failures) == (3, 2)
        assert result.counterexample == {"space": ["{}", "{0}", "{1}", "{0,1}"], "n": 1}

    def test_merge_order_and_values(self) -> None:
        merged = merge_results(
            [
                [CheckResult("a", 1, 0, value=2), CheckResult("b", 1)],
                [CheckResult("a", 2, 1, {"x": 1}, value=1)],
            ]
        )
        assert [c.check for c in merged] == ["a", "b"]
        assert merged[0] == CheckResult("a", 3, 1, {"x": 1}, 2)

    def test_describe_violation(self) -> None:
        error = PropertyViolation("broken", {"family": (0b01, 0b10)})
        assert describe({"error": error}) == {"error": "broken", "family": [1, 2]}


class TestRunSuite:
    """run_suite のテスト。"""

    def test_enumerate(self) -> None:
        report = run_suite("enumerate", 3)
        assert report.ok
        assert [c.check for c in report.checks] == [
            "count.0",
            "bruteforce.0",
            "count.1",
            "bruteforce.1",
            "count.2",
            "bruteforce.2",
            "count.3",
            "bruteforce.3",
        ]

    def test_witness(self) -> None:
        report = run_suite("witness", 1)
        assert report.ok
        assert report.check("search_minimal").instances == 2
        assert report.check("discrete_fn_example").instances == 6
        assert report.check("developable_fn").instances > 0
        # one topology, three mediator choices
        assert report.check("ro_projection").instances == 3
        assert report.check("ro_projection").failures == 0

    def test_quotient(self) -> None:
        report = run_suite("quotient", 2)
        assert report.ok
        assert report.check("quotient_map").instances > 0
        assert report.check("wcr_t2_regular").instances > 0

    def test_game(self) -> None:
        report = run_suite("game", 2)
        assert report.ok
        sigma = report.check("sigma_wins")
        # 5 topologies on the trivial witness plus 12 bases on their minimal witness.
        assert sigma.instances == 17
        assert sigma.failures == 0
        assert sigma.value == 2

    def test_lemmas(self) -> None:
        report = run_suite("lemmas", 2)
        assert report.ok
        assert report.check("f1_needs_irreducible").value == 1
        f1 = report.check("f1_needs_irreducible")
        assert f1.example is not None
        assert f1.counterexample is None
        assert "example" in f1.as_row()
        assert report.check("kpv").instances > 0
        assert report.check("frd").failures == 0

    def test_lemmas_need_an_example(self) -> None:
        """1 点空間だけでは既約性が必要な例が見つからず失敗すること。"""
        report = run_suite("lemmas", 1)
        assert not report.ok
        assert report.check("f1_needs_irreducible").failures == 1

    def test_transfer(self) -> None:
        report = run_suite("transfer", 2)
        assert report.ok
        assert report.check("transfer_witness").instances > 0

    def test_worker_count_does_not_change_report(self) -> None:
        one = run_suite("quotient", 2, workers=1)
        two = run_suite("quotient", 2, workers=2)
        assert one == two
        assert one.to_document() == two.to_document()

    def test_document(self) -> None:
        header, rows = load_report(run_suite("game", 1).to_document())
        assert header["suite"] == "game"
        assert header["ok"] is True
        assert rows[0]["check"] == "sigma_wins"

    @pytest.mark.parametrize(
        ("suite", "max_points", "workers"),
        [("poetry", 2, 1), ("game", 5, 1), ("game", -1, 1), ("game", 1, 0)],
    )
    def test_bad_arguments(self, suite: str, max_points: int, workers: int) -> None:
        with pytest.raises(InputError):
            run_suite(suite, max_points, workers=workers)

    def test_suite_names(self) -> None:
        assert SUITES == ("enumerate", "witness", "quotient", "game", "lemmas", "transfer")


class TestFailures:
    """raise_on_failure のテスト。"""

    def test_ok_report_passes(self) -> None:
        raise_on_failure(SuiteReport("game", 1, (CheckResult("sigma_wins", 1),)))

    def test_first_failure_raised(self) -> None:
        report = SuiteReport(
            "quotient",
            2,
            (CheckResult("quotient_map", 3), CheckResult("wcr_base_image", 4, 1, {"space": []})),
        )
        with pytest.raises(PropertyViolation, match=r"quotient\.wcr_base_image: 1 of 4") as info:
            raise_on_failure(report)
        assert info.value.counterexample == {"space": []}


class TestRegression:
    """回帰値ファイルのテスト。"""

    def report_with(self, value: int | None) -> SuiteReport:
        return SuiteReport("game", 3, (CheckResult("sigma_wins", 34, 0, value=value),))

    def test_within_stored_horizon(self) -> None:
        result = game_regression_check(self.report_with(2), {"game_max_horizon": 2})
        assert result.failures == 0
        assert result.value == 2

    def test_regression_detected(self) -> None:
        result = game_regression_check(self.report_with(3), {"game_max_horizon": 2})
        assert result.failures == 1
        assert result.counterexample == {"stored": 2, "measured": 3}

    def test_nothing_stored(self) -> None:
        assert game_regression_check(self.report_with(3), {}).failures == 0

    def test_save_and_load(self, tmp_path: Path) -> None:
        path = tmp_path / "config" / "regression.json"
        assert load_regression(path) == {}
        save_regression({"game_max_horizon": 2}, path)
        assert load_regression(path) == {"game_max_horizon": 2}
        assert path.read_text(encoding="utf-8").endswith("\n")

    def test_invalid_json(self, tmp_path: Path) -> None:
        path = tmp_path / "regression.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(InputError):
            load_regression(path)


class TestDevelopmentSequences:
    """development_sequences のテスト。"""

    def test_two_points(self) -> None:
        seqs = development_sequences(2)
        assert [len(s.covers) for s in seqs] == [1, 2]

    def test_every_sequence_is_a_development(self) -> None:
        for seq in development_sequences(3):
            assert is_development(seq.space, seq)
            assert seq.covers[-1].members == (0b001, 0b010, 0b100)

    def test_budget_limits_sequences(self) -> None:
        assert len(development_sequences(4, budget=10)) == 10
