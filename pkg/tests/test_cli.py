import json
from pathlib import Path

import pytest

from ks1d.cli import (
    ConfigError,
    compare_suite,
    load_manifest,
    main,
    parse_config,
    run_scenario,
)
from ks1d.core import Variant

MINIMAL = """\
scenario: demo
problem:
  diffusion: {kind: inverse_u}
  initial_condition: {kind: cosine_bump, mass: 2.0, amplitude: 0.4}
  t_end: 0.02
grid: {n_cells: 64}
"""

SNAPSHOTS = """\
scenario: snaps
problem:
  diffusion: {kind: inverse_one_plus_u}
  initial_condition: {kind: gaussian_bump, mass: 1.0, center: 0.5, width: 0.2, floor: 0.1}
  t_end: 0.02
grid: {n_cells: 64}
output:
  snapshot_times: [0.0, 0.01, 0.02]
"""


class TestParseConfig:
    def test_minimal_and_defaults(self):
        m = parse_config(MINIMAL)
        assert m.scenario == "demo"
        assert m.grid.n_cells == 64
        assert m.problem.variant is Variant.STANDARD
        assert m.solver.cfl_diff == 0.4
        assert m.solver.cfl_adv == 0.9
        assert m.solver.dt_min == 1e-12
        assert m.solver.blowup_threshold == 1e6
        assert m.solver.record_every == 10
        assert m.snapshot_times == []

    def test_default_grid_is_128(self):
        m = parse_config(MINIMAL.replace("grid: {n_cells: 64}\n", ""))
        assert m.grid.n_cells == 128

    def test_name_hint_used_without_scenario_key(self):
        m = parse_config(MINIMAL.replace("scenario: demo\n", ""), name_hint="fromfile")
        assert m.scenario == "fromfile"

    @pytest.mark.parametrize(
        "mutation",
        [
            ("scenario: demo", "scenario: demo\nbogus: 1"),
            ("{kind: inverse_u}", "{kind: inverse_u, q: 3}"),
            ("amplitude: 0.4}", "amplitude: 0.4, sigma: 1}"),
            ("grid: {n_cells: 64}", "grid: {n_cells: 64, h: 0.1}"),
            ("grid: {n_cells: 64}", "grid: {n_cells: 64}\nsolver: {dt: 0.1}"),
        ],
    )
    def test_unknown_keys_rejected(self, mutation):
        old, new = mutation
        with pytest.raises(ConfigError, match="unknown"):
            parse_config(MINIMAL.replace(old, new))

    def test_invalid_yaml(self):
        with pytest.raises(ConfigError):
            parse_config("scenario: [unclosed")

    def test_non_mapping_document(self):
        with pytest.raises(ConfigError):
            parse_config("- a\n- b\n")

    def test_invalid_variant(self):
        with pytest.raises(ConfigError):
            parse_config(MINIMAL + "  variant: parabolic_parabolic\n")

    def test_jl_variant_accepted(self):
        text = MINIMAL.replace("t_end: 0.02", "t_end: 0.02\n  variant: jaeger_luckhaus")
        assert parse_config(text).problem.variant is Variant.JAEGER_LUCKHAUS

    def test_critical_power_accepted(self):
        text = MINIMAL.replace("{kind: inverse_u}", "{kind: power_one_plus_u, p: -1.0}")
        m = parse_config(text)
        assert m.problem.diffusion.criticality == "critical"

    def test_singular_diffusion_zero_floor_rejected(self):
        text = MINIMAL.replace(
            "{kind: cosine_bump, mass: 2.0, amplitude: 0.4}",
            "{kind: gaussian_bump, mass: 2.0, floor: 0.0}",
        )
        with pytest.raises(ConfigError, match="singular"):
            parse_config(text)

    def test_snapshot_times_validated(self):
        with pytest.raises(ConfigError, match="sorted"):
            parse_config(SNAPSHOTS.replace("[0.0, 0.01, 0.02]", "[0.01, 0.0]"))
        with pytest.raises(ConfigError, match="t_end"):
            parse_config(SNAPSHOTS.replace("[0.0, 0.01, 0.02]", "[0.0, 5.0]"))


class TestRunScenario:
    def test_outputs_and_summary(self, tmp_path):
        summary = run_scenario(parse_config(MINIMAL), tmp_path / "out")
        assert summary["status"] == "finished"
        assert summary["steps"] > 0
        assert summary["mass_drift"] <= 1e-12
        assert summary["min_regest1_slack"] > 0.0
        ts = (tmp_path / "out" / "timeseries.csv").read_text()
        header = ts.splitlines()[0]
        assert header == (
            "t,mass,F,D,source,F0,D0,entropy,grad_seminorm,"
            "u_linf,u_l3,v_lp,energy_residual,regest1_slack,regest2_slack"
        )
        on_disk = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert on_disk["scenario"] == "demo"
        assert on_disk["status"] == "finished"

    def test_first_row_has_empty_residual(self, tmp_path):
        run_scenario(parse_config(MINIMAL), tmp_path)
        rows = (tmp_path / "timeseries.csv").read_text().splitlines()
        first = rows[1].split(",")
        assert first[0] == "0.0"
        assert first[12] == ""  # energy_residual undefined at t = 0
        assert float(first[1]) == pytest.approx(2.0, abs=1e-12)

    def test_snapshots_written(self, tmp_path):
        run_scenario(parse_config(SNAPSHOTS), tmp_path)
        for tag in ("0", "0.01", "0.02"):
            prof = tmp_path / f"profile_t{tag}.csv"
            assert prof.exists()
            lines = prof.read_text().splitlines()
            assert lines[0] == "x,u,v"
            assert len(lines) == 1 + 64

    def test_rerun_is_deterministic(self, tmp_path):
        run_scenario(parse_config(MINIMAL), tmp_path / "a")
        run_scenario(parse_config(MINIMAL), tmp_path / "b")
        assert (tmp_path / "a" / "timeseries.csv").read_bytes() == (
            tmp_path / "b" / "timeseries.csv"
        ).read_bytes()


class TestSuite:
    def test_needs_two(self, tmp_path):
        with pytest.raises(ConfigError, match="at least 2"):
            compare_suite([parse_config(MINIMAL)], tmp_path)

    def test_duplicate_names_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="duplicate"):
            compare_suite([parse_config(MINIMAL), parse_config(MINIMAL)], tmp_path)

    def test_two_scenarios(self, tmp_path):
        other = parse_config(
            MINIMAL.replace("scenario: demo", "scenario: other").replace(
                "{kind: inverse_u}", "{kind: power_one_plus_u, p: -0.5}"
            )
        )
        rows = compare_suite([parse_config(MINIMAL), other], tmp_path)
        assert [r["scenario"] for r in rows] == ["demo", "other"]
        assert rows[0]["p"] == -1.0  # inverse_u reported at the critical exponent
        assert rows[1]["p"] == -0.5
        table = (tmp_path / "comparison.csv").read_text().splitlines()
        assert table[0] == "scenario,p,M,variant,status,max_u_linf,t_final"
        assert len(table) == 3
        assert (tmp_path / "demo" / "summary.json").exists()
        assert (tmp_path / "other" / "summary.json").exists()


class TestMain:
    def write(self, tmp_path, text=MINIMAL, name="demo.yaml"):
        p = tmp_path / name
        p.write_text(text)
        return p

    def test_simulate_exit_zero(self, tmp_path, capsys):
        cfg = self.write(tmp_path)
        rc = main(["simulate", str(cfg), "--out", str(tmp_path / "run")])
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["status"] == "finished"

    def test_simulate_overrides(self, tmp_path, capsys):
        cfg = self.write(tmp_path)
        rc = main(
            [
                "simulate",
                str(cfg),
                "--out",
                str(tmp_path / "run"),
                "--n-cells",
                "32",
                "--t-end",
                "0.01",
            ]
        )
        assert rc == 0
        out = json.loads(capsys.readouterr().out)
        assert out["t_final"] == pytest.approx(0.01)
        lines = (tmp_path / "run" / "timeseries.csv").read_text().splitlines()
        assert len(lines[1].split(",")) == 15

    def test_simulate_missing_file(self, tmp_path, capsys):
        rc = main(["simulate", str(tmp_path / "nope.yaml")])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_simulate_bad_config(self, tmp_path, capsys):
        cfg = self.write(tmp_path, MINIMAL + "bogus: 1\n")
        rc = main(["simulate", str(cfg)])
        assert rc == 2

    def test_simulate_blowup_exit_code(self, tmp_path, capsys):
        scenario = Path(__file__).parent.parent / (
            "scenarios/supercritical_contrast/supercritical_jl.yaml"
        )
        rc = main(["simulate", str(scenario), "--out", str(tmp_path / "run")])
        assert rc == 10
        out = json.loads(capsys.readouterr().out)
        assert out["status"] == "blowup_suspected"

    def test_suite_command(self, tmp_path, capsys):
        self.write(tmp_path, MINIMAL, "a.yaml")
        self.write(
            tmp_path,
            MINIMAL.replace("scenario: demo", "scenario: demo2"),
            "b.yaml",
        )
        out_dir = tmp_path / "suite_out"
        rc = main(["suite", str(tmp_path), "--out", str(out_dir)])
        assert rc == 0
        assert (out_dir / "comparison.csv").exists()
        assert "demo: finished" in capsys.readouterr().out

    def test_verify_passes(self, capsys):
        rc = main(["verify"])
        text = capsys.readouterr().out
        assert rc == 0
        assert "FAIL" not in text
        assert text.count("PASS") >= 5


def test_load_manifest_roundtrip(tmp_path):
    p = tmp_path / "demo.yaml"
    p.write_text(MINIMAL.replace("scenario: demo\n", ""))
    assert load_manifest(p).scenario == "demo"
