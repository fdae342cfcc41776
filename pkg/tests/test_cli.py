"""
Tests for config parsing, experiment execution, exit statuses and plot data.
"""

import json

import numpy as np
import pytest
from typer.testing import CliRunner

from hallmhd.CLI import app
from hallmhd.commands.experiments import EXIT_DIVERGENCE, EXIT_OK, run_experiment
from hallmhd.commands.plotdata import CAUCHY_FILE, ENERGY_FILE, HSIGMA_FILE, emit_plotdata
from hallmhd.core import dynamics
from hallmhd.errors import ConfigError, PlotDataError
from hallmhd.models.ledger import EnergyLedger
from hallmhd.storage.ledgers import LEDGER_FILE, write_ledger
from hallmhd.storage.manifest import read_manifest
from hallmhd.storage.snapshots import read_snapshot, snapshot_name
from hallmhd.utils.parsing import parse_config, parse_float_list

runner = CliRunner()


def write_config(directory, **entries):
    path = directory / "plan.json"
    path.write_text(json.dumps({"N": 32, "T": 0.02, "data": "single-mode", **entries}))
    return path


class TestParseConfig:
    def test_minimal_document(self, tmp_path):
        plan = parse_config(write_config(tmp_path, alpha=0.75))
        assert plan.points == 32
        assert plan.alpha == 0.75
        assert plan.cutoff == 10.0
        assert plan.sigma == 2.5
        assert plan.dt == "auto"

    def test_no_document_gives_defaults(self):
        plan = parse_config()
        assert plan.points == 64
        assert plan.cutoff == 21.0

    def test_radius_beyond_two_thirds_rule(self, tmp_path):
        with pytest.raises(ConfigError, match="N/3"):
            parse_config(write_config(tmp_path, N=64, n=30))

    def test_alpha_must_be_positive(self, tmp_path):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config(write_config(tmp_path, alpha=0))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="viscosity"):
            parse_config(write_config(tmp_path, viscosity=0.1))

    def test_resolution_must_be_a_power_of_two(self, tmp_path):
        with pytest.raises(ConfigError, match="power of two"):
            parse_config(write_config(tmp_path, N=48))

    def test_converge_cutoffs_are_checked(self, tmp_path):
        with pytest.raises(ConfigError, match="cutoffs"):
            parse_config(write_config(tmp_path, experiment="converge", cutoffs=[4, 16]))

    def test_snapshot_data_needs_a_path(self, tmp_path):
        with pytest.raises(ConfigError, match="snapshot"):
            parse_config(write_config(tmp_path, data="snapshot"))

    def test_overrides_win_and_none_is_ignored(self, tmp_path):
        plan = parse_config(write_config(tmp_path, seed=5, T=0.5), {"seed": None, "T": 0.1})
        assert plan.seed == 5
        assert plan.horizon == 0.1

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text("{N: 32")
        with pytest.raises(ConfigError, match="not a valid JSON"):
            parse_config(path)

    def test_top_level_must_be_a_mapping(self, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="key-value"):
            parse_config(path)

    def test_warnings_below_the_regularity_threshold(self, tmp_path):
        plan = parse_config(write_config(tmp_path, sigma=1.5))
        assert any("1 + d/2" in message for message in plan.warnings())

    def test_float_lists(self):
        assert parse_float_list("8,12, 16 21") == [8.0, 12.0, 16.0, 21.0]
        with pytest.raises(ConfigError, match="number list"):
            parse_float_list("8,x")


class TestRunExperiment:
    def test_zero_data_run(self, tmp_path):
        plan = parse_config(write_config(tmp_path, data="zero", output=str(tmp_path / "out")))
        assert run_experiment(plan) == EXIT_OK
        manifest = read_manifest(tmp_path / "out")
        assert manifest.exit_status == EXIT_OK
        assert not manifest.diverged
        assert manifest.mode == "reference"
        assert LEDGER_FILE in manifest.artifacts
        assert f"snapshots/{snapshot_name(0)}" in manifest.artifacts
        assert f"snapshots/{snapshot_name(2)}" in manifest.artifacts
        assert manifest.plan["N"] == 32

    def test_final_snapshot_holds_the_final_time(self, tmp_path):
        plan = parse_config(write_config(tmp_path, output=str(tmp_path / "out"), dt=0.005))
        run_experiment(plan)
        snapshot = read_snapshot(tmp_path / "out" / "snapshots" / snapshot_name(4))
        assert snapshot.time == 0.02
        assert snapshot.alpha == 1.0

    def test_runs_are_bit_identical(self, tmp_path):
        for name in ("a", "b"):
            run_experiment(parse_config(write_config(tmp_path, data="random", seed=7, output=str(tmp_path / name))))
        assert (tmp_path / "a" / LEDGER_FILE).read_bytes() == (tmp_path / "b" / LEDGER_FILE).read_bytes()
        snapshots_a = sorted((tmp_path / "a" / "snapshots").iterdir())
        snapshots_b = sorted((tmp_path / "b" / "snapshots").iterdir())
        assert [p.name for p in snapshots_a] == [p.name for p in snapshots_b]
        assert all(a.read_bytes() == b.read_bytes() for a, b in zip(snapshots_a, snapshots_b))

    def test_divergence_keeps_partial_artifacts(self, tmp_path):
        plan = parse_config(
            write_config(tmp_path, data="orszag-tang", blowup_cap=1e-3, output=str(tmp_path / "out"))
        )
        assert run_experiment(plan) == EXIT_DIVERGENCE
        manifest = read_manifest(tmp_path / "out")
        assert manifest.diverged
        assert manifest.exit_status == EXIT_DIVERGENCE
        assert "blow-up cap" in manifest.message
        assert (tmp_path / "out" / LEDGER_FILE).is_file()
        assert manifest.artifacts.count(f"snapshots/{snapshot_name(0)}") == 1

    def test_converge_with_one_cutoff_is_degenerate(self, tmp_path):
        plan = parse_config(
            write_config(tmp_path, experiment="converge", cutoffs=[8], output=str(tmp_path / "out"))
        )
        assert run_experiment(plan) == EXIT_OK
        manifest = read_manifest(tmp_path / "out")
        assert any("at least two distinct cutoffs" in message for message in manifest.warnings)
        assert "converge_summary.txt" in manifest.artifacts

    def test_alpha_sweep(self, tmp_path):
        plan = parse_config(
            write_config(tmp_path, experiment="alpha-sweep", alphas=[0.6, 1.0], output=str(tmp_path / "out"))
        )
        assert run_experiment(plan) == EXIT_OK
        summary = (tmp_path / "out" / "alpha-sweep_summary.txt").read_text()
        assert summary.count("bounded") == 2
        assert (tmp_path / "out" / "alpha-sweep_alpha=0.6.csv").is_file()


class TestCommands:
    def test_run(self, tmp_path):
        config = write_config(tmp_path)
        result = runner.invoke(app, ["run", "--config", str(config), "--output", str(tmp_path / "out")])
        assert result.exit_code == EXIT_OK
        assert (tmp_path / "out" / "manifest.json").is_file()

    def test_invalid_config_exits_with_two(self, tmp_path):
        config = write_config(tmp_path, alpha=-1)
        result = runner.invoke(app, ["run", "--config", str(config), "--output", str(tmp_path / "out")])
        assert result.exit_code == 2

    def test_invalid_dt_flag_exits_with_two(self, tmp_path):
        config = write_config(tmp_path)
        result = runner.invoke(app, ["run", "--config", str(config), "--dt=-1", "--output", str(tmp_path)])
        assert result.exit_code == 2

    def test_missing_snapshot_exits_with_four(self, tmp_path):
        result = runner.invoke(app, ["diagnose", str(tmp_path / "absent.hmhd"), "--output", str(tmp_path / "out")])
        assert result.exit_code == 4

    def test_corrupt_snapshot_exits_with_four(self, tmp_path):
        path = tmp_path / "corrupt.hmhd"
        path.write_bytes(b"not a snapshot at all, but long enough")
        result = runner.invoke(app, ["diagnose", str(path), "--output", str(tmp_path / "out")])
        assert result.exit_code == 4

    def test_diagnose_a_saved_state(self, tmp_path):
        config = write_config(tmp_path, data="random", alpha=0.75)
        runner.invoke(app, ["run", "--config", str(config), "--output", str(tmp_path / "run")])
        snapshot = sorted((tmp_path / "run" / "snapshots").iterdir())[-1]
        result = runner.invoke(
            app, ["diagnose", str(snapshot), "--sigma", "2.5", "--output", str(tmp_path / "audit")]
        )
        assert result.exit_code == EXIT_OK
        manifest = read_manifest(tmp_path / "audit")
        assert manifest.plan["alpha"] == 0.75
        assert manifest.message is None
        assert (tmp_path / "audit" / "diagnose_sigma=2.5.csv").is_file()

    def test_diagnose_records_the_shared_flags(self, tmp_path):
        config = write_config(tmp_path, data="random")
        runner.invoke(app, ["run", "--config", str(config), "--output", str(tmp_path / "run")])
        snapshot = sorted((tmp_path / "run" / "snapshots").iterdir())[-1]
        flags = ["--seed", "3", "--jobs", "2", "--dt", "0.005", "--snapshot-every", "2"]
        result = runner.invoke(app, ["diagnose", str(snapshot), *flags, "--output", str(tmp_path / "audit")])
        assert result.exit_code == EXIT_OK
        manifest = read_manifest(tmp_path / "audit")
        assert manifest.plan["seed"] == 3
        assert manifest.plan["jobs"] == 2
        assert manifest.plan["dt"] == 0.005
        assert manifest.plan["snapshot_every"] == 2
        assert manifest.mode == "parallel"

    def test_converge_flag(self, tmp_path):
        config = write_config(tmp_path)
        result = runner.invoke(
            app, ["converge", "--cutoffs", "4,8", "--config", str(config), "--output", str(tmp_path / "out")]
        )
        assert result.exit_code == EXIT_OK
        assert read_manifest(tmp_path / "out").plan["cutoffs"] == [4.0, 8.0]

    def test_unparseable_list_exits_with_two(self, tmp_path):
        result = runner.invoke(app, ["alpha-sweep", "--alphas", "0.6,abc", "--output", str(tmp_path)])
        assert result.exit_code == 2


class TestPlotData:
    def test_run_directory(self, tmp_path):
        config = write_config(tmp_path, T=0.2)
        runner.invoke(app, ["run", "--config", str(config), "--output", str(tmp_path / "out")])
        written = emit_plotdata(tmp_path / "out")
        assert {path.name for path in written} == {ENERGY_FILE, HSIGMA_FILE}

        table = np.loadtxt(tmp_path / "out" / ENERGY_FILE, ndmin=2)
        assert table.shape[1] == 5
        # E + ∫ D stays at E(0)
        assert np.max(np.abs(table[:, 4] - table[0, 3])) <= 1e-9 * table[0, 3]
        assert np.all(np.diff(table[:, 0]) > 0)

    def test_header_only_ledger(self, tmp_path):
        ledger = write_ledger(tmp_path / LEDGER_FILE, EnergyLedger())
        emit_plotdata(ledger)
        lines = (tmp_path / ENERGY_FILE).read_text().splitlines()
        assert lines == ["# t E_u E_B E E+int_D"]

    def test_single_row_ledger(self, tmp_path, single_mode_state):
        _, ledger = dynamics.evolve(single_mode_state, 0.01, dt=0.01, ledger_every=10)
        ledger.rows = ledger.rows[:1]
        emit_plotdata(write_ledger(tmp_path / LEDGER_FILE, ledger), tmp_path / "plots")
        table = np.loadtxt(tmp_path / "plots" / HSIGMA_FILE, ndmin=2)
        assert table.shape == (1, 4)
        assert table[0, 0] == 0.0

    def test_convergence_table(self, tmp_path):
        config = write_config(tmp_path)
        runner.invoke(
            app, ["converge", "--cutoffs", "4,6,8", "--config", str(config), "--output", str(tmp_path / "out")]
        )
        written = emit_plotdata(tmp_path / "out")
        assert CAUCHY_FILE in {path.name for path in written}
        table = np.loadtxt(tmp_path / "out" / CAUCHY_FILE, ndmin=2)
        assert table[:, :2].tolist() == [[4.0, 6.0], [4.0, 8.0], [6.0, 8.0]]
        assert np.all(table[:, 2] <= 1e-12)

    def test_nothing_to_plot(self, tmp_path):
        with pytest.raises(PlotDataError, match="neither"):
            emit_plotdata(tmp_path)

    def test_missing_path_exits_with_two(self, tmp_path):
        result = runner.invoke(app, ["plotdata", str(tmp_path / "absent")])
        assert result.exit_code == 2

    def test_malformed_ledger_exits_with_two(self, tmp_path):
        (tmp_path / LEDGER_FILE).write_text("t,step\n0,0\n")
        result = runner.invoke(app, ["plotdata", str(tmp_path)])
        assert result.exit_code == 2
