"""Serialization round trips, CLI subcommands, exit codes and
reproducibility of the emitted files."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from nnqs.cli import exit_code_for, main
from nnqs.errors import (ConfigError, FitConvergenceError, ResourceLimitError,
                         SignProblemError)
from nnqs.io import (load_state, nno_from_dict, nno_to_dict, save_state,
                     state_from_dict, state_to_dict)
from nnqs.randoms import random_nno, random_rbm, random_ubm
from nnqs.states import RbmNns, UbmNns


class TestSerialization:
    def test_state_round_trip_is_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        st = random_ubm(rng, 4, 3, scale=0.7)
        path = tmp_path / "state.json"
        save_state(st, path)
        back = load_state(path)
        assert isinstance(back, UbmNns)
        for name in ("a", "b", "W", "X", "Y"):
            assert np.array_equal(getattr(st, name), getattr(back, name))

    def test_restricted_state_round_trips_to_restricted(self, tmp_path):
        rng = np.random.default_rng(1)
        st = random_rbm(rng, 3, 2, scale=0.5).replace(log_prefactor=1.25 - 3j)
        path = tmp_path / "rbm.json"
        save_state(st, path)
        back = load_state(path)
        assert isinstance(back, RbmNns)
        assert back.log_prefactor == st.log_prefactor
        for name in ("a", "b", "W", "Y"):
            assert np.array_equal(getattr(st, name), getattr(back, name))

    def test_schema_fields(self):
        st = RbmNns.zeros(2, 1)
        d = state_to_dict(st)
        assert set(d) == {"n_visible", "n_hidden", "a", "b", "W", "X", "Y"}
        assert d["a"][0] == [0.0, 0.0]
        back = state_from_dict(d)
        assert isinstance(back, RbmNns)

    def test_nno_round_trip(self):
        op = random_nno(np.random.default_rng(2), 3)
        back = nno_from_dict(nno_to_dict(op))
        assert back.k == op.k and back.A == op.A
        for name in ("alpha", "beta", "Lambda", "Gamma", "Omega"):
            assert np.array_equal(getattr(op, name), getattr(back, name))


class TestExitCodes:
    def test_mapping(self):
        assert exit_code_for(ConfigError("x")) == 2
        assert exit_code_for(FitConvergenceError("x")) == 3
        assert exit_code_for(SignProblemError("x")) == 3
        assert exit_code_for(ResourceLimitError("x")) == 4


@pytest.fixture
def runner():
    return CliRunner()


class TestFig5Command:
    def test_outputs_and_trends(self, runner, tmp_path):
        out = tmp_path / "fig5"
        res = runner.invoke(main, ["fig5", "--out", str(out), "--n", "6",
                                   "--states", "4", "--x-values", "0.0,0.5",
                                   "--seed", "3"])
        assert res.exit_code == 0, res.output
        rows = (out / "fig5.csv").read_text().strip().split("\n")
        assert rows[0] == "x_scale,seed,infidelity_numeric,infidelity_weak," \
            "infidelity_strong"
        assert len(rows) == 1 + 2 * 4
        for line in rows[1:]:
            x, _, i_num, i_weak, i_strong = line.split(",")
            if float(x) == 0.0:
                assert float(i_num) < 1e-12
                assert float(i_weak) < 1e-12
                assert float(i_strong) < 1e-12
        assert (out / "fig5.png").exists()
        assert (out / "manifest.json").exists()
        assert (out / "schema.json").exists()

    def test_reproducible_csv_bytes(self, runner, tmp_path):
        args = ["fig5", "--n", "5", "--states", "3", "--x-values", "0.2",
                "--seed", "7", "--no-plot"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(main, args + ["--out", str(a)]).exit_code == 0
        assert runner.invoke(main, args + ["--out", str(b)]).exit_code == 0
        assert (a / "fig5.csv").read_bytes() == (b / "fig5.csv").read_bytes()

    def test_weak_variant_infidelity_grows_with_coupling(self, tmp_path):
        from nnqs.experiments import Fig5Config, run_fig5

        cfg = Fig5Config(n=8, x_values=(0.05, 1.0), n_states=10, seed=2)
        summary = run_fig5(cfg, str(tmp_path / "trend"))
        weak = {row["x"]: row["mean"] for row in summary
                if row["variant"] == "weak"}
        assert weak[1.0] > weak[0.05]

    def test_threaded_run_matches_serial(self, runner, tmp_path):
        base = ["fig5", "--n", "5", "--states", "4", "--x-values", "0.1,0.3",
                "--seed", "11", "--no-plot"]
        a, b = tmp_path / "serial", tmp_path / "threaded"
        assert runner.invoke(main, base + ["--out", str(a)]).exit_code == 0
        assert runner.invoke(
            main, base + ["--out", str(b), "--threads", "4"]).exit_code == 0
        assert (a / "fig5.csv").read_bytes() == (b / "fig5.csv").read_bytes()


class TestEvolveCommand:
    def _config(self, tmp_path, **kw):
        cfg = {"n": 4, "h_field": 0.5, "tau": 0.05, "steps": 5,
               "measure_every": 1}
        cfg.update(kw)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_writes_trajectory_state_and_manifest(self, runner, tmp_path):
        cfg = self._config(tmp_path)
        out = tmp_path / "run"
        res = runner.invoke(main, ["evolve", "--config", str(cfg),
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert (out / "trajectory.csv").exists()
        assert (out / "final_state.json").exists()
        assert (out / "best_state.json").exists()
        assert (out / "evolve.png").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["n"] == 4
        state = load_state(out / "final_state.json")
        assert state.n_visible == 4

    def test_invalid_config_exits_2_without_outputs(self, runner, tmp_path):
        cfg = self._config(tmp_path, tau=-1.0)
        out = tmp_path / "bad"
        res = runner.invoke(main, ["evolve", "--config", str(cfg),
                                   "--out", str(out)])
        assert res.exit_code == 2
        assert not (out / "trajectory.csv").exists()

    def test_unknown_key_exits_2(self, runner, tmp_path):
        cfg = self._config(tmp_path, nonsense=1)
        res = runner.invoke(main, ["evolve", "--config", str(cfg),
                                   "--out", str(tmp_path / "x")])
        assert res.exit_code == 2

    def test_resource_cap_exits_4(self, runner, tmp_path):
        cfg = self._config(tmp_path, projector="none", n=6, steps=10,
                           oracle_checks=False)
        res = runner.invoke(main, ["evolve", "--config", str(cfg),
                                   "--out", str(tmp_path / "cap")])
        assert res.exit_code == 4

    def test_seed_override_and_reproducibility(self, runner, tmp_path):
        cfg = self._config(tmp_path, mode="real", projector="method2",
                           h_field=2.0, tau=0.005,
                           sampler={"n_chains": 2, "n_sweeps": 100,
                                    "n_burnin": 10, "seed": 0})
        a, b = tmp_path / "r1", tmp_path / "r2"
        for out in (a, b):
            res = runner.invoke(main, ["evolve", "--config", str(cfg),
                                       "--out", str(out), "--seed", "5",
                                       "--no-plot"])
            assert res.exit_code == 0, res.output
        assert (a / "trajectory.csv").read_bytes() == \
            (b / "trajectory.csv").read_bytes()
        assert (a / "manifest.json").read_bytes() == \
            (b / "manifest.json").read_bytes()


class TestSampleCommand:
    def test_energy_estimate_with_batches(self, runner, tmp_path):
        rng = np.random.default_rng(4)
        st = random_rbm(rng, 5, 3, scale=0.3)
        spath = tmp_path / "state.json"
        save_state(st, spath)
        out = tmp_path / "sample"
        res = runner.invoke(main, ["sample", "--state", str(spath),
                                   "--observable", "energy",
                                   "--out", str(out), "--seed", "1"])
        assert res.exit_code == 0, res.output
        rows = (out / "samples.csv").read_text().strip().split("\n")
        assert rows[0] == "chain,batch,value"
        assert len(rows) > 1
        est = json.loads((out / "estimate.json").read_text())
        assert est["observable"] == "energy"
        assert est["std_error"] >= 0
        assert (out / "sample.png").exists()

    def test_unrestricted_state_rejected(self, runner, tmp_path):
        rng = np.random.default_rng(5)
        st = random_ubm(rng, 3, 2)
        spath = tmp_path / "ubm.json"
        save_state(st, spath)
        res = runner.invoke(main, ["sample", "--state", str(spath),
                                   "--out", str(tmp_path / "o")])
        assert res.exit_code == 2


class TestGateVerifyCommand:
    def test_small_battery_passes(self, runner, tmp_path):
        out = tmp_path / "gv"
        res = runner.invoke(main, ["gate-verify", "--out", str(out),
                                   "--cases", "10", "--seed", "0"])
        assert res.exit_code == 0, res.output
        report = json.loads((out / "report.json").read_text())
        assert report["passed"] is True
        assert (out / "gate_verify.csv").exists()


class TestTrotterUbmCommand:
    def test_pattern_and_state_files(self, runner, tmp_path):
        out = tmp_path / "tub"
        res = runner.invoke(main, ["trotter-ubm", "--n", "3", "--steps", "2",
                                   "--tau", "0.1", "--h", "0.5",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        state = load_state(out / "state.json")
        assert state.n_hidden == 6
        pattern = json.loads((out / "pattern.json").read_text())
        assert pattern["w_vertical"] == pytest.approx(
            0.5 * np.log(1.0 / np.tanh(0.05)))
        assert (out / "trotter_ubm.png").exists()


class TestStateInfoCommand:
    def test_prints_summary(self, runner, tmp_path):
        rng = np.random.default_rng(6)
        st = random_rbm(rng, 4, 2)
        spath = tmp_path / "s.json"
        save_state(st, spath)
        res = runner.invoke(main, ["state-info", "--state", str(spath)])
        assert res.exit_code == 0
        assert "restricted" in res.output
        assert "visible nodes: 4" in res.output
