import json
from pathlib import Path

import pytest

from zoneplanner.cli import EXIT_OK, EXIT_USAGE, build_parser, main
from zoneplanner.harness import compare_engines, load_scenario, run_scenario
from zoneplanner import wire

DEMO = Path(__file__).resolve().parent.parent / "scenarios" / "demo.json"


class TestParser:
    def test_run_defaults(self):
        args = build_parser().parse_args(["run", "demo.json"])
        assert args.command == "run"
        assert args.scenario == "demo.json"
        assert args.engine is None
        assert args.format == "json"
        assert args.out is None

    def test_run_flags(self):
        args = build_parser().parse_args(
            ["run", "demo.json", "--engine", "oracle", "--seed", "7",
             "--format", "csv", "--out", "report.csv", "--verbose"]
        )
        assert args.engine == "oracle"
        assert args.seed == 7
        assert args.format == "csv"
        assert args.out == "report.csv"
        assert args.verbose

    def test_compare_defaults(self):
        args = build_parser().parse_args(["compare", "demo.json"])
        assert args.engines == "greedy,oracle"
        assert args.trials == 20
        assert args.seed == 0

    def test_unknown_engine_rejected(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["run", "demo.json", "--engine", "psychic"])

    def test_serve_flags(self):
        args = build_parser().parse_args(["serve", "--port", "9000"])
        assert args.command == "serve"
        assert args.port == 9000


class TestRunCommand:
    def test_run_writes_json_report(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["run", str(DEMO), "--out", str(out)])
        assert code == EXIT_OK
        text = out.read_text()
        doc = json.loads(text)
        # the report is a canonical wire envelope of the report type
        assert doc["schema_version"] == "1"
        assert doc["kind"] == "scenario_report"
        assert wire.canonical_dumps(doc) == text.rstrip("\n")
        assert doc["body"]["engine"] == "mock"
        assert len(doc["body"]["assignment"]["entries"]) == 8
        assert doc["body"]["record"]["accepted"] == 8

    def test_scenario_with_telemetry_log(self, tmp_path):
        from zoneplanner.telemetry import EventKind, InteractionEvent, append_events

        log = tmp_path / "events.ndjson"
        append_events(
            log,
            [
                InteractionEvent(float(i), EventKind.FOCUS, app=app)
                for i, app in enumerate(["ide", "terminal", "ide", "browser"] * 5)
            ],
        )
        scenario_doc = json.loads(DEMO.read_text())
        scenario_doc["telemetry"] = str(log)
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(scenario_doc))
        from zoneplanner.harness import load_scenario as load

        report = run_scenario(load(path), clock=lambda: 0.0)
        baseline = run_scenario(load_scenario(DEMO), clock=lambda: 0.0)
        # the log biases transition frequencies, which moves the costs
        assert report["total_cost"] != baseline["total_cost"]

    def test_missing_telemetry_log_exits_2(self, tmp_path):
        scenario_doc = json.loads(DEMO.read_text())
        scenario_doc["telemetry"] = "does-not-exist.ndjson"
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps(scenario_doc))
        assert main(["run", str(path)]) == EXIT_USAGE

    def test_missing_scenario_exits_2(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.json")]) == EXIT_USAGE

    def test_invalid_scenario_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"engine\": \"psychic\"}")
        assert main(["run", str(bad)]) == EXIT_USAGE

    def test_text_and_csv_formats(self, tmp_path):
        for fmt in ("text", "csv"):
            out = tmp_path / f"report.{fmt}"
            assert main(["run", str(DEMO), "--format", fmt, "--out", str(out)]) == EXIT_OK
            assert out.read_text().strip()

    def test_engine_override(self, tmp_path):
        out = tmp_path / "report.json"
        assert main(["run", str(DEMO), "--engine", "greedy", "--out", str(out)]) == EXIT_OK
        assert json.loads(out.read_text())["body"]["engine"] == "greedy"


class TestRunDeterminism:
    def test_report_bytes_identical_under_fixed_clock(self):
        scenario = load_scenario(DEMO)
        first = run_scenario(scenario, clock=lambda: 0.0)
        second = run_scenario(load_scenario(DEMO), clock=lambda: 0.0)
        assert wire.canonical_dumps(first) == wire.canonical_dumps(second)

    def test_oracle_never_costlier_than_greedy_on_demo(self):
        greedy = run_scenario(load_scenario(DEMO), engine="greedy", clock=lambda: 0.0)
        oracle = run_scenario(load_scenario(DEMO), engine="oracle", clock=lambda: 0.0)
        assert oracle["total_cost"] <= greedy["total_cost"] + 1e-12


class TestCompareCommand:
    def test_greedy_regret_non_negative(self):
        table = compare_engines(
            load_scenario(DEMO), ["greedy", "oracle"], trials=5, seed=3,
            clock=lambda: 0.0,
        )
        assert table["engines"]["greedy"]["mean_regret"] >= 0.0
        assert table["engines"]["oracle"]["mean_regret"] == pytest.approx(0.0)

    def test_identical_seeds_identical_tables(self):
        scenario = load_scenario(DEMO)
        a = compare_engines(scenario, ["greedy", "oracle"], 4, 11, clock=lambda: 0.0)
        b = compare_engines(scenario, ["greedy", "oracle"], 4, 11, clock=lambda: 0.0)
        assert wire.canonical_dumps(a) == wire.canonical_dumps(b)

    def test_zero_trials_empty_table_exit_zero(self, tmp_path):
        out = tmp_path / "table.json"
        code = main(
            ["compare", str(DEMO), "--trials", "0", "--format", "json",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["body"]["engines"] == {}
        assert doc["body"]["trials"] == 0

    def test_compare_csv_has_header_row(self, tmp_path):
        out = tmp_path / "table.csv"
        code = main(
            ["compare", str(DEMO), "--trials", "2", "--format", "csv",
             "--out", str(out)]
        )
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "engine,mean_cost,mean_regret,runtime_seconds"
        assert len(lines) == 3

    def test_mock_engine_in_comparison(self):
        table = compare_engines(
            load_scenario(DEMO), ["mock", "oracle"], trials=3, seed=5,
            clock=lambda: 0.0,
        )
        assert table["engines"]["mock"]["mean_regret"] >= 0.0
