"""
Integration tests for the command-line entry point.

Runs main() end to end on small inputs and checks stdout documents, exit statuses and the
error lines written to stderr.
"""

import io
import json
import logging

import pandas as pd
import pytest

from src.cli import main
from src.models.reports import CheckResult
from src.utils.logger import logger


@pytest.fixture(autouse=True)
def restore_console():
    """main() points the log console at the captured stderr; put it back afterwards."""
    handlers = [h for h in logger.handlers if isinstance(h, logging.StreamHandler)]
    streams = [h.stream for h in handlers]
    level = logger.level
    yield
    for handler, stream in zip(handlers, streams):
        handler.stream = stream  # setStream() would flush the already-closed capture buffer
    logger.setLevel(level)


def run(capsys, *argv: str) -> tuple[int, str, str]:
    status = main(list(argv))
    captured = capsys.readouterr()
    return status, captured.out, captured.err


class TestMomentsCommand:
    def test_closed_form_document(self, capsys):
        """
        Test moments at (m, k) = (12, 4): kappa = 2 + C(8,4)/C(12,4) = 212/99.
        """
        # When running the moments command
        status, out, _ = run(capsys, "moments", "--m", "12", "--k", "4")

        # Then it succeeds with an exact fourth moment
        assert status == 0
        document = json.loads(out)
        assert document["schema_version"] == "1.0"
        assert document["regime"] == "critical"
        fourth = document["moments"][0]
        assert fourth["order"] == 4
        assert (fourth["value"]["num"], fourth["value"]["den"]) == (212, 99)
        assert document["kink_points"]["8"] == [4, 5, 7]

    def test_canonical_domain(self, capsys):
        status, out, _ = run(capsys, "moments", "--m", "5", "--k", "3", "--orders", "4,6,8")

        values = [m["value"]["num"] for m in json.loads(out)["moments"]]
        assert status == 0
        assert values == [2, 5, 14]

    def test_csv_output(self, capsys):
        status, out, _ = run(capsys, "moments", "--m", "4", "--k", "1", "--format", "csv")

        frame = pd.read_csv(io.StringIO(out), comment="#")
        assert status == 0
        assert out.startswith("# schema_version=1.0\n")
        assert frame["order"].tolist() == [4, 6, 8]
        assert (frame.loc[0, "num"], frame.loc[0, "den"]) == (11, 4)

    def test_k_exceeding_m_exits_two(self, capsys):
        """
        Protects against: Invalid points producing a silent zero Hamiltonian or a traceback.
        """
        status, out, err = run(capsys, "moments", "--m", "2", "--k", "3")

        assert status == 2
        assert out == ""
        assert "error: k exceeds m" in err

    def test_odd_order_exits_two(self, capsys):
        status, _, err = run(capsys, "moments", "--m", "4", "--k", "1", "--orders", "5")

        assert status == 2
        assert "even" in err


class TestArgumentErrors:
    def test_unknown_subcommand(self, capsys):
        status, _, _ = run(capsys, "teleport")

        assert status == 2

    def test_nonpositive_budget(self, capsys):
        status, _, err = run(capsys, "--budget", "0", "dyck", "--n", "2")

        assert status == 2
        assert "--budget" in err


class TestDyckCommand:
    def test_words_and_translations(self, capsys):
        status, out, _ = run(capsys, "dyck", "--n", "2")

        document = json.loads(out)
        assert status == 0
        assert document["catalan"] == 2
        assert document["words"] == ["XXYY", "XYXY"]
        assert [t["dyck"] for t in document["translations"]] == ["XXYYXY", "XYXXYY"]

    def test_word_list_omitted_above_limit(self, capsys):
        status, out, _ = run(capsys, "dyck", "--n", "10", "--max-words", "100")

        document = json.loads(out)
        assert status == 0
        assert document["catalan"] == 16796
        assert document["words"] is None
        assert "translations" not in document


class TestDiagramsCommand:
    def test_text_report(self, capsys):
        status, out, _ = run(capsys, "diagrams", "--order", "4", "--m", "4", "--k", "1", "--format", "text")

        assert status == 0
        assert "Moment at m=4, k=1: 11/4" in out

    def test_json_report_with_levels(self, capsys):
        status, out, _ = run(capsys, "diagrams", "--order", "4", "--m", "4", "--k", "1", "--l", "10")

        document = json.loads(out)
        assert status == 0
        assert document["command"] == "diagrams"
        assert {c["leading_term_value"] for c in document["classes"] if c["tail_count"] == 0} == {75600}

    def test_m_without_k_exits_two(self, capsys):
        status, _, err = run(capsys, "diagrams", "--order", "6", "--m", "4")

        assert status == 2
        assert "together" in err


class TestExactCommand:
    def test_trace_and_moment(self, capsys):
        """
        Test l=2, m=k=1: tr H^4 = 18, tr H^2 = 4, N = 2, so beta_4 = 18 * 2 / 16 = 9/4.
        """
        status, out, _ = run(capsys, "exact", "--l", "2", "--m", "1", "--k", "1", "--order", "4")

        document = json.loads(out)
        assert status == 0
        assert document["trace"] == 18
        assert document["second_trace"] == 4
        assert (document["moment"]["num"], document["moment"]["den"]) == (9, 4)
        assert document["strategy"] == "reference_state"
        assert document["reference_state"]["label"] == "{1}"

    def test_budget_overrun_exits_three(self, capsys):
        """
        Protects against: Budget overruns being reported as invalid input.
        """
        status, out, err = run(
            capsys, "--budget", "10", "exact", "--l", "6", "--m", "3", "--k", "1",
            "--order", "4", "--strategy", "full_basis",
        )

        assert status == 3
        assert out == ""
        assert "budget" in err


class TestSimulationCommands:
    def test_simulate_document(self, capsys):
        status, out, _ = run(
            capsys, "simulate", "--l", "5", "--m", "2", "--k", "1", "--samples", "4", "--seed", "9",
            "--orders", "4",
        )

        document = json.loads(out)
        assert status == 0
        assert document["lambda0"] == 8
        assert document["second_moment_per_state"] == 8.0
        assert document["limit_moments"]["4"]["num"] == 5
        assert document["report"]["moments"][0]["order"] == 4

    def test_output_independent_of_workers(self, capsys):
        """
        Protects against: Thread scheduling leaking into supposedly reproducible output.
        """
        argv = ["simulate", "--l", "5", "--m", "2", "--k", "1", "--samples", "6", "--seed", "4"]

        _, serial, _ = run(capsys, *argv, "--workers", "1")
        _, pooled, _ = run(capsys, *argv, "--workers", "3")

        assert serial == pooled

    def test_simulate_bosons_beyond_one_per_level(self, capsys):
        """
        Protects against: The fermionic move count crashing a valid bosonic run with m > l.
        """
        status, out, _ = run(
            capsys, "simulate", "--l", "2", "--m", "3", "--k", "1", "--statistics", "bosonic",
            "--samples", "4", "--seed", "2", "--orders", "4",
        )

        document = json.loads(out)
        assert status == 0
        assert document["lambda0"] is None
        assert document["second_moment_per_state"] == 12.0
        assert document["limit_moments"] == {}

    def test_density_csv(self, capsys):
        status, out, _ = run(
            capsys, "density", "--l", "6", "--m", "3", "--k", "2", "--samples", "3", "--bins", "12", "--seed", "1",
        )

        frame = pd.read_csv(io.StringIO(out), comment="#")
        assert status == 0
        assert list(frame.columns) == ["bin_lo", "bin_hi", "height", "overlay_height"]
        assert len(frame) == 12
        assert ((frame["bin_hi"] - frame["bin_lo"]) * frame["height"]).sum() == pytest.approx(1.0)

    def test_invalid_beta_rejected_by_parser(self, capsys):
        status, _, _ = run(capsys, "simulate", "--l", "5", "--m", "2", "--k", "1", "--beta", "3")

        assert status == 2

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "out" / "moments.json"

        status, out, _ = run(capsys, "--output", str(target), "moments", "--m", "4", "--k", "1")

        assert status == 0
        assert out == ""
        assert json.loads(target.read_text())["command"] == "moments"


class TestVerifyCommand:
    def test_passing_suite(self, capsys, mocker):
        results = [CheckResult("dyck_catalan", True, 3, {"failures": []})]
        mocker.patch("src.handlers.verification_handler.verification_service.run_suite", return_value=results)

        status, out, _ = run(capsys, "verify", "--no-cache")

        assert status == 0
        assert json.loads(out)["passed"] is True

    def test_failing_suite_exits_one(self, capsys, mocker):
        results = [
            CheckResult("dyck_catalan", True, 3, {"failures": []}),
            CheckResult("hahn_lemma", False, 5, {"failures": [{"m": 4, "k": 1}]}),
        ]
        mocker.patch("src.handlers.verification_handler.verification_service.run_suite", return_value=results)

        status, out, _ = run(capsys, "verify", "--no-cache")

        document = json.loads(out)
        assert status == 1
        assert document["passed"] is False
        assert [c["name"] for c in document["checks"]] == ["dyck_catalan", "hahn_lemma"]

    def test_unreachable_cache_falls_back(self, capsys, mocker):
        """
        Protects against: A broken DATABASE_URL aborting a suite that needs no cache.
        """
        results = [CheckResult("dyck_catalan", True, 3, {"failures": []})]
        suite = mocker.patch(
            "src.handlers.verification_handler.verification_service.run_suite", return_value=results
        )
        mocker.patch("src.handlers.verification_handler.init_db")
        mocker.patch("src.handlers.verification_handler.check_db_connection", return_value=False)

        status, _, _ = run(capsys, "verify")

        assert status == 0
        assert "db" not in suite.call_args.kwargs
