"""Scenario parsing, run reports, record round trips, and the CLI contract."""

import json

import numpy as np
import pytest

from agreelab import ParseError, ValidationError, parse_scenario, run_scenario
from agreelab.cli import main
from agreelab.report import emit_report, parse_records
from agreelab.scenario import RunReport


MINIMAL_TABLE = {
    "id": "t",
    "backend": "table",
    "sizes": [2, 2, 2],
    "p": [0.125] * 8,
    "event": [0],
}


class TestParseScenario:
    def test_minimal_table(self):
        s = parse_scenario(json.dumps(MINIMAL_TABLE))
        assert s.backend == "table"
        assert s.joint.table.sum() == pytest.approx(1.0)

    def test_malformed_json_locates_line(self):
        with pytest.raises(ParseError, match="line"):
            parse_scenario('{"backend": "table",\n  broken')

    def test_unknown_backend(self):
        with pytest.raises(ValidationError, match="backend"):
            parse_scenario(json.dumps({"backend": "oracle", "event": [0]}))

    def test_missing_key_is_located(self):
        bad = dict(MINIMAL_TABLE)
        del bad["p"]
        with pytest.raises(ValidationError, match="p"):
            parse_scenario(json.dumps(bad))

    def test_non_trace_preserving_instrument_cites_diagnostics(self):
        eye = [[[1.1, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.1, 0.0]]]
        payload = {
            "backend": "quantum",
            "state": {"maximally_mixed": 2},
            "instruments": {"A": [[eye]], "B": [[eye]], "E": [[eye]]},
            "event": [0],
        }
        with pytest.raises(ValidationError, match="trace preserving"):
            parse_scenario(json.dumps(payload))

    def test_block_preset_out_of_range(self):
        payload = {
            "backend": "quantum",
            "preset": {"name": "block_rotation", "theta": 0.1, "phi": 0.2, "q": 0.6, "r": 0.1},
            "event": [0],
        }
        with pytest.raises(ValidationError, match="q must satisfy"):
            parse_scenario(json.dumps(payload))

    def test_all_fixture_files_parse(self, scenarios_dir):
        for path in sorted(scenarios_dir.glob("*.json")):
            s = parse_scenario(path.read_text())
            assert s.backend in ("table", "classical", "quantum", "process")

    def test_table_labels(self):
        payload = dict(MINIMAL_TABLE, labels={"I": ["left", "right"], "K": ["hit", "miss"]})
        s = parse_scenario(json.dumps(payload))
        assert s.joint.space.labels_i == ("left", "right")
        bad = dict(MINIMAL_TABLE, labels={"I": ["left"]})
        with pytest.raises(ValidationError, match="labels"):
            parse_scenario(json.dumps(bad))


class TestRunScenario:
    def test_classical_fixture_report(self, scenarios_dir):
        s = parse_scenario((scenarios_dir / "classical_four_state.json").read_text())
        r = run_scenario(s)
        assert r.q_a == pytest.approx((0.5, 0.5))
        assert r.q_b == pytest.approx((1 / 3, 1.0))
        assert r.violation_count == 0
        assert r.singular_ok

    def test_quantum_block_fixture_report(self, scenarios_dir):
        s = parse_scenario((scenarios_dir / "quantum_block.json").read_text())
        r = run_scenario(s)
        assert r.q_b == pytest.approx((0.2, 0.2, 0.1, 0.5), abs=1e-9)
        assert r.violation_count == 0

    def test_trivial_table_agrees(self):
        payload = {"backend": "table", "sizes": [1, 1, 1], "p": [1.0], "event": [0]}
        r = run_scenario(parse_scenario(json.dumps(payload)))
        assert len(r.reports) == 1
        assert r.reports[0].ck_holds and r.reports[0].agrees


class TestReportEmission:
    def test_header_only_when_no_reports(self):
        r = RunReport(
            scenario_id="empty", backend="table", sizes=(1, 1, 1), event=(0,),
            q_a=(1.0,), q_b=(1.0,), reports=(), violation_count=0, singular_ok=True,
        )
        text = emit_report(r, "table")
        assert "q_a" in text and "\n" in text
        assert len(text.strip().splitlines()) == 5  # header block only

    def test_single_report_fully_populated(self, scenarios_dir):
        s = parse_scenario((scenarios_dir / "table_uniform.json").read_text())
        r = run_scenario(s)
        text = emit_report(r, "records")
        lines = [json.loads(line) for line in text.strip().splitlines()]
        assert lines[0]["record"] == "run"
        assert all(line["record"] == "ck" for line in lines[1:])
        assert {"q_a", "q_b", "a_star", "b_star", "steps", "ck_holds", "agrees",
                "mass_a", "mass_b", "witness"} <= set(lines[1])

    def test_records_round_trip_equals_report(self, scenarios_dir):
        for name in ("classical_four_state.json", "quantum_block.json"):
            s = parse_scenario((scenarios_dir / name).read_text())
            r = run_scenario(s, include_joint=True)
            assert parse_records(emit_report(r, "records")) == r

    def test_records_are_deterministic(self, scenarios_dir):
        s = parse_scenario((scenarios_dir / "quantum_block.json").read_text())
        a = emit_report(run_scenario(s, include_joint=True), "records")
        b = emit_report(run_scenario(s, include_joint=True), "records")
        assert a == b


class TestCLI:
    def test_verify_fixture_exits_zero(self, scenarios_dir, capsys):
        assert main(["verify", str(scenarios_dir / "classical_four_state.json")]) == 0
        out = capsys.readouterr().out
        assert "violations: 0" in out

    def test_parse_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert main(["verify", str(bad)]) == 2

    def test_validation_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"backend": "table", "sizes": [2, 2], "p": [], "event": []}))
        assert main(["joint", str(bad)]) == 3

    def test_block_example_command(self, capsys):
        assert main(["block-example", "--theta", "0.785398", "--phi", "1.0472",
                     "--q", "0.2", "--r", "0.1"]) == 0
        out = capsys.readouterr().out
        assert "max deviation" in out

    def test_block_example_bad_params_exit_code(self, capsys):
        assert main(["block-example", "--theta", "0.1", "--phi", "0.1",
                     "--q", "0.6", "--r", "0.1"]) == 3

    def test_search_command(self, capsys):
        assert main(["search", "--backend", "table", "--trials", "5", "--seed", "4"]) == 0
        assert "violations: 0" in capsys.readouterr().out

    def test_ck_and_protocol_commands(self, scenarios_dir, capsys):
        path = str(scenarios_dir / "classical_four_state.json")
        assert main(["ck", path, "--pair", "0", "0"]) == 0
        assert "common knowledge = False" in capsys.readouterr().out
        assert main(["protocol", path, "--pair", "0", "0"]) == 0
        out = capsys.readouterr().out
        assert "final: alice 0.5 bob 0.5" in out

    def test_joint_echo(self, scenarios_dir, capsys):
        assert main(["joint", str(scenarios_dir / "table_uniform.json")]) == 0
        assert "joint (row-major)" in capsys.readouterr().out

    def test_violation_exit_code(self, scenarios_dir, monkeypatch, capsys):
        # no valid input can produce a violation, so force one through the
        # reporting path to pin the exit-code contract
        import agreelab.cli as cli

        real = cli.run_scenario

        def tampered(s, include_joint=False):
            import dataclasses

            return dataclasses.replace(real(s, include_joint), violation_count=1)

        monkeypatch.setattr(cli, "run_scenario", tampered)
        assert main(["verify", str(scenarios_dir / "table_uniform.json")]) == 4
