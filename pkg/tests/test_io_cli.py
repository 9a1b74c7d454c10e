"""Configuration loading, snapshots, time series, and the CLI surface."""

import json

import numpy as np
import pytest

from smaflow import (
    ConfigurationError,
    Field,
    Params,
    SnapshotError,
    State,
    StepConfig,
    Stepper,
    TimeseriesError,
    VectorField,
    build_state,
    export_config,
    load_config,
    load_snapshot,
    make_grid,
    random_band_field,
    random_band_velocity,
    read_timeseries,
    resolve_config,
    run,
    save_snapshot,
    write_timeseries,
)
from smaflow.cli import cli
from smaflow.io import TIMESERIES_COLUMNS


def write_json(path, tree):
    path.write_text(json.dumps(tree), encoding="utf-8")
    return path


MINIMAL = {"n": 32}


class TestLoadConfig:
    def test_minimal_defaults(self, tmp_path):
        cfg = load_config(write_json(tmp_path / "c.json", MINIMAL))
        assert cfg.n == 32
        assert cfg.params == Params()
        assert cfg.stepping.dt == 1e-4
        assert cfg.stepping.t_end == 1.0
        assert cfg.stepping.scheme == "imex1"
        assert cfg.stepping.dealias == "two_thirds"
        assert cfg.initial_v.kind == "zero"
        assert cfg.initial_phi.kind == "zero"
        assert cfg.formats == ("csv",)
        assert cfg.figures is True

    def test_negative_mu4_names_field(self, tmp_path):
        tree = {"n": 32, "params": {"mu4": -1.0}}
        with pytest.raises(ConfigurationError, match="mu4"):
            load_config(write_json(tmp_path / "c.json", tree))

    def test_unknown_params_key_rejected(self, tmp_path):
        tree = {"n": 32, "params": {"mu9": 1.0}}
        with pytest.raises(ConfigurationError, match="mu9"):
            load_config(write_json(tmp_path / "c.json", tree))

    def test_unknown_top_level_key_rejected(self, tmp_path):
        with pytest.raises(ConfigurationError, match="grid_size"):
            load_config(write_json(tmp_path / "c.json", {"n": 32, "grid_size": 1}))

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n "n": 32,\n}\n', encoding="utf-8")
        with pytest.raises(ConfigurationError, match="line 3"):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_config(tmp_path / "absent.json")

    def test_missing_snapshot_reference(self, tmp_path):
        tree = {"n": 32, "initial": {"phi": {"kind": "from_snapshot", "path": "no.snap"}}}
        with pytest.raises(ConfigurationError, match="no.snap"):
            load_config(write_json(tmp_path / "c.json", tree))

    def test_taylor_green_phi_rejected(self, tmp_path):
        tree = {"n": 32, "initial": {"phi": {"kind": "taylor_green"}}}
        with pytest.raises(ConfigurationError, match="initial.phi"):
            load_config(write_json(tmp_path / "c.json", tree))

    def test_bad_dealias(self, tmp_path):
        tree = {"n": 32, "stepping": {"dealias": "three_quarters"}}
        with pytest.raises(ConfigurationError, match="dealias"):
            load_config(write_json(tmp_path / "c.json", tree))

    def test_bad_formats(self, tmp_path):
        tree = {"n": 32, "output": {"formats": ["yaml"]}}
        with pytest.raises(ConfigurationError, match="formats"):
            load_config(write_json(tmp_path / "c.json", tree))

    def test_resolved_reexport_idempotent(self, tmp_path):
        tree = {
            "n": 32,
            "params": {"mu1": 0.1, "epsilon": 0.5},
            "stepping": {"dt": 1e-3, "t_end": 0.1, "scheme": "imex2"},
            "initial": {"v": {"kind": "taylor_green", "amplitude": 0.7}},
        }
        cfg = load_config(write_json(tmp_path / "c.json", tree))
        exported = export_config(cfg)
        cfg2 = resolve_config(exported)
        assert cfg2 == cfg
        assert export_config(cfg2) == exported


class TestBuildState:
    def test_zero_defaults(self, tmp_path):
        cfg = load_config(write_json(tmp_path / "c.json", {"n": 16}))
        s = build_state(cfg)
        assert np.all(s.v.c1.values == 0.0)
        assert np.all(s.phi.values == 0.0)

    def test_taylor_green_and_random_band(self, tmp_path):
        tree = {"n": 16, "initial": {
            "v": {"kind": "taylor_green", "amplitude": 2.0},
            "phi": {"kind": "random_band", "max_mode": 3, "amplitude": 0.2, "seed": 5, "mean": 0.4},
        }}
        cfg = load_config(write_json(tmp_path / "c.json", tree))
        s = build_state(cfg)
        g = make_grid(16)
        assert s.v.c1.values[4, 0] == pytest.approx(2.0 * np.sin(2 * np.pi * 0.25), rel=1e-12)
        assert s.phi.mean == pytest.approx(0.4, abs=1e-12)

    def test_from_snapshot(self, tmp_path):
        g = make_grid(16)
        ref = State(v=random_band_velocity(g, 3, 0.1, 1), phi=random_band_field(g, 3, 0.1, 2), t=0.25)
        save_snapshot(ref, tmp_path / "ref.snap")
        tree = {"n": 16, "initial": {
            "v": {"kind": "from_snapshot", "path": "ref.snap"},
            "phi": {"kind": "from_snapshot", "path": "ref.snap"},
        }}
        cfg = load_config(write_json(tmp_path / "c.json", tree))
        s = build_state(cfg, base_dir=tmp_path)
        assert np.array_equal(s.v.c1.values, ref.v.c1.values)
        assert np.array_equal(s.phi.values, ref.phi.values)


class TestSnapshot:
    def make_state(self, n=16):
        g = make_grid(n)
        return State(v=random_band_velocity(g, 3, 0.3, 11), phi=random_band_field(g, 3, 0.2, 12), t=0.125)

    def test_round_trip_bit_exact(self, tmp_path):
        s = self.make_state()
        path = tmp_path / "s.snap"
        save_snapshot(s, path)
        back = load_snapshot(path)
        assert np.array_equal(back.v.c1.values, s.v.c1.values)
        assert np.array_equal(back.v.c2.values, s.v.c2.values)
        assert np.array_equal(back.phi.values, s.phi.values)
        assert back.t == s.t

    def test_truncated_payload(self, tmp_path):
        s = self.make_state()
        path = tmp_path / "s.snap"
        save_snapshot(s, path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-16])
        with pytest.raises(SnapshotError, match="size mismatch"):
            load_snapshot(path)

    def test_wrong_magic(self, tmp_path):
        s = self.make_state()
        path = tmp_path / "s.snap"
        save_snapshot(s, path)
        blob = path.read_bytes()
        path.write_bytes(b"SMBFLOW1" + blob[8:])
        with pytest.raises(SnapshotError, match="magic"):
            load_snapshot(path)

    def test_non_finite_payload_rejected_on_save(self, tmp_path):
        g = make_grid(16)
        vals = np.zeros((16, 16))
        vals[3, 3] = np.nan
        s = State(v=VectorField.zeros(g), phi=Field.from_physical(g, vals))
        with pytest.raises(SnapshotError, match="non-finite"):
            save_snapshot(s, tmp_path / "bad.snap")

    def test_resume_equals_uninterrupted(self, tmp_path):
        p = Params(mu1=0.1, mu4=1.0, mu5=0.1, K=1.0, lam=1.0, eps=0.5)
        cfg = StepConfig(dt=1e-3, t_end=1.0)
        s = self.make_state()
        stepper = Stepper(p, cfg)
        for _ in range(4):
            s = stepper.step(s)
        mid = s
        for _ in range(6):
            s = stepper.step(s)
        save_snapshot(mid, tmp_path / "mid.snap")
        resumed = load_snapshot(tmp_path / "mid.snap")
        stepper2 = Stepper(p, cfg)
        for _ in range(6):
            resumed = stepper2.step(resumed)
        assert np.array_equal(resumed.v.c1.values, s.v.c1.values)
        assert np.array_equal(resumed.v.c2.values, s.v.c2.values)
        assert np.array_equal(resumed.phi.values, s.phi.values)
        assert resumed.t == s.t


class TestTimeseries:
    def run_short(self):
        g = make_grid(16)
        s = State(v=random_band_velocity(g, 3, 0.1, 3), phi=random_band_field(g, 3, 0.1, 4))
        p = Params(mu1=0.1, mu4=1.0, mu5=0.1, eps=0.5)
        return run(s, p, StepConfig(dt=1e-3, t_end=0.01, diag_every=1, snapshot_every=10**9))

    def test_csv_columns_exact(self, tmp_path):
        traj = self.run_short()
        path = tmp_path / "ts.csv"
        write_timeseries(traj, path, "csv")
        header = path.read_text().splitlines()[0]
        assert header == "t,E,D_mu1,D_mu4,D_mu5,D_Q,grad_v_l2,q_l2,A,mean_v1,mean_v2,mean_phi,phi_h2"

    def test_single_record(self, tmp_path):
        traj = self.run_short()
        path = tmp_path / "one.csv"
        write_timeseries(traj.records[:1], path, "csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 2

    def test_empty(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_timeseries([], path, "csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 1

    def test_round_trip_full_precision(self, tmp_path):
        traj = self.run_short()
        path = tmp_path / "ts.csv"
        write_timeseries(traj, path, "csv")
        back = read_timeseries(path)
        assert len(back) == len(traj.records)
        for a, b in zip(traj.records, back):
            for c in TIMESERIES_COLUMNS:
                assert getattr(a, c) == getattr(b, c)

    def test_json_same_field_names(self, tmp_path):
        traj = self.run_short()
        path = tmp_path / "ts.json"
        write_timeseries(traj, path, "json")
        rows = json.loads(path.read_text())
        assert set(rows[0]) == set(TIMESERIES_COLUMNS)
        back = read_timeseries(path)
        assert back[0] == traj.records[0]

    def test_unknown_format(self, tmp_path):
        with pytest.raises(TimeseriesError):
            write_timeseries([], tmp_path / "x.yaml", "yaml")


@pytest.fixture()
def sim_config(tmp_path):
    tree = {
        "n": 16,
        "params": {"mu1": 0.1, "mu4": 1.0, "mu5": 0.1, "K": 1.0, "lambda": 1.0, "epsilon": 0.5},
        "stepping": {"dt": 1e-3, "t_end": 0.02, "snapshot_every": 10, "diag_every": 1},
        "initial": {
            "v": {"kind": "random_band", "max_mode": 3, "amplitude": 0.1, "seed": 1},
            "phi": {"kind": "random_band", "max_mode": 3, "amplitude": 0.1, "seed": 2},
        },
        "output": {"dir": "out", "formats": ["csv", "json"], "figures": True},
    }
    return write_json(tmp_path / "cfg.json", tree)


class TestCli:
    def test_simulate_creates_outputs(self, sim_config, capsys):
        assert cli(["simulate", str(sim_config)]) == 0
        out = sim_config.parent / "out"
        for name in ("timeseries.csv", "timeseries.json", "config.json",
                     "energy.png", "dissipation.png", "norms.png", "fields.png"):
            assert (out / name).exists(), name
        assert list((out / "snapshots").glob("*.snap"))
        assert "simulate:" in capsys.readouterr().out

    def test_simulate_missing_config_exit_1(self, capsys):
        assert cli(["simulate", "missing.json"]) == 1
        assert "error" in capsys.readouterr().err

    def test_usage_error_exit_2(self):
        assert cli([]) == 2
        assert cli(["simulate"]) == 2

    def test_version_exit_0(self, capsys):
        assert cli(["--version"]) == 0
        assert "smaflow" in capsys.readouterr().out

    def test_energy_audit_and_fit_rate(self, sim_config, capsys):
        assert cli(["simulate", str(sim_config)]) == 0
        ts = str(sim_config.parent / "out" / "timeseries.csv")
        capsys.readouterr()
        assert cli(["energy-audit", ts]) == 0
        audit = json.loads(capsys.readouterr().out)
        assert "max_abs_residual" in audit

        assert cli(["fit-rate", ts, "--column", "q_l2", "--window", "0.001,0.015"]) == 0
        fit = json.loads(capsys.readouterr().out)
        assert fit["model"] in ("exponential", "algebraic")
        assert 0.0 <= fit["r_squared"] <= 1.0

    def test_fit_rate_bad_column_exit_1(self, sim_config, capsys):
        assert cli(["simulate", str(sim_config)]) == 0
        ts = str(sim_config.parent / "out" / "timeseries.csv")
        assert cli(["fit-rate", ts, "--column", "vorticity", "--window", "0,1"]) == 1

    def test_steady_outputs(self, sim_config, capsys):
        assert cli(["steady", str(sim_config)]) == 0
        out = sim_config.parent / "out"
        assert (out / "phi_inf.snap").exists()
        assert (out / "steady_residuals.csv").exists()
        assert (out / "residual.png").exists()
        snap = load_snapshot(out / "phi_inf.snap")
        assert snap.grid.n == 16

    def test_probe_uniqueness(self, sim_config, capsys):
        assert cli(["probe-uniqueness", str(sim_config), "--seeds", "2"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["threshold_satisfied"] is True
        assert report["all_converged"] is True

    def test_probe_uniqueness_one_seed_exit_1(self, sim_config, capsys):
        assert cli(["probe-uniqueness", str(sim_config), "--seeds", "1"]) == 1
        assert "seeds" in capsys.readouterr().err

    def test_simulate_zero_state_still_renders_figures(self, tmp_path):
        # all-zero series: log-scale panels have nothing to draw but must not fail
        tree = {"n": 16, "stepping": {"dt": 1e-3, "t_end": 0.005, "diag_every": 1}}
        cfg = write_json(tmp_path / "zero.json", tree)
        assert cli(["simulate", str(cfg)]) == 0
        for name in ("energy.png", "dissipation.png", "norms.png"):
            assert (tmp_path / "out" / name).exists()
