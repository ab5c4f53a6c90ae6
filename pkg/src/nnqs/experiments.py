"""Experiment drivers behind the command line: random-state projection
sweeps, gate verification batteries, Trotter runs.

Every run writes a manifest (full configuration, seed, package and
library versions) next to its outputs; with a single thread the same
manifest reproduces the outputs byte for byte.  Floating-point values
are emitted through repr, which round-trips exactly.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .dense import (apply_gate_dense, densify_normalized, entanglement_entropy,
                    fidelity, infidelity)
from .errors import ConfigError
from .gates import (apply_k_body, apply_one_body, apply_two_body,
                    apply_z_rotation, apply_zz_rotation, check_nno_unitary,
                    nno_to_matrix, param_count)
from .projection import project_method1
from .randoms import random_nno, random_star, random_ubm, random_unitary_nno
from .states import RbmNns

__all__ = [
    "write_manifest",
    "Fig5Config",
    "run_fig5",
    "GateVerifyConfig",
    "run_gate_verify",
]

FIG5_CSV_COLUMNS = ("x_scale", "seed", "infidelity_numeric",
                    "infidelity_weak", "infidelity_strong")


def write_manifest(out_dir, command, config: dict, seed):
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "versions": {
            "nnqs": __version__,
            "numpy": np.__version__,
        },
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path


def _fmt(x) -> str:
    return repr(float(x))


@dataclass
class Fig5Config:
    """Random-star projection sweep: N = M visible/hidden nodes, weights
    uniform in [-w, w], hub couplings uniform in [-x, x]."""

    n: int = 12
    w_scale: float = 0.2
    x_values: tuple = (0.0, 0.05, 0.1, 0.2, 0.5, 1.0)
    n_states: int = 200
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.n < 2 or self.n_states < 1:
            raise ConfigError("need n >= 2 and at least one state")
        if any(x < 0 for x in self.x_values):
            raise ConfigError("hub coupling scales must be non-negative")


def _fig5_trial(cfg: Fig5Config, x, seed_index):
    ss = np.random.SeedSequence(cfg.seed, spawn_key=(hash_x(x), seed_index))
    rng = np.random.default_rng(ss)
    star = random_star(rng, cfg.n, cfg.n, w_scale=cfg.w_scale, x_scale=x)
    reference = densify_normalized(star)
    out = {}
    for variant in ("numeric", "weak", "strong"):
        projected = project_method1(star, variant).projected
        out[variant] = infidelity(reference, densify_normalized(projected))
    return out


def hash_x(x) -> int:
    # stable small integer per x value for seed splitting
    return int(round(float(x) * 10 ** 6))


def run_fig5(cfg: Fig5Config, out_dir):
    """Sweep the hub-coupling scale and record the projection infidelity
    of the three method-I variants per seeded state.

    Writes fig5.csv (one row per state), fig5_summary.csv (per-x means
    with standard errors) and returns the summary rows.
    """
    os.makedirs(out_dir, exist_ok=True)
    rows = []

    def work(args):
        x, i = args
        return (x, i, _fig5_trial(cfg, x, i))

    tasks = [(x, i) for x in cfg.x_values for i in range(cfg.n_states)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    with open(os.path.join(out_dir, "fig5.csv"), "w") as fh:
        fh.write(",".join(FIG5_CSV_COLUMNS) + "\n")
        for x, i, res in results:
            rows.append((x, i, res))
            fh.write(f"{_fmt(x)},{i},{_fmt(res['numeric'])},"
                     f"{_fmt(res['weak'])},{_fmt(res['strong'])}\n")

    summary = []
    with open(os.path.join(out_dir, "fig5_summary.csv"), "w") as fh:
        fh.write("x_scale,variant,mean_infidelity,std_error,n_states\n")
        for x in cfg.x_values:
            vals = {v: np.array([r[v] for xx, _, r in rows if xx == x])
                    for v in ("numeric", "weak", "strong")}
            for v, arr in vals.items():
                sem = arr.std(ddof=1) / np.sqrt(len(arr)) if len(arr) > 1 else 0.0
                summary.append({"x": x, "variant": v, "mean": arr.mean(),
                                "sem": sem})
                fh.write(f"{_fmt(x)},{v},{_fmt(arr.mean())},{_fmt(sem)},"
                         f"{len(arr)}\n")
    write_manifest(out_dir, "fig5", cfg.__dict__ | {
        "x_values": list(cfg.x_values)}, cfg.seed)
    return summary


@dataclass
class GateVerifyConfig:
    """Seeded battery sizes for the rewrite/unitarity verification."""

    n_apply: int = 500
    n_unitary: int = 500
    n_visible: int = 6
    max_hidden: int = 4
    seed: int = 0
    fidelity_tol: float = 1e-10
    unitary_tol: float = 1e-8


def _apply_case(rng, kind, n, m):
    state = random_ubm(rng, n, m, scale=0.3)
    d_in = densify_normalized(state)
    if kind == "one_body":
        j = int(rng.integers(n))
        op = random_nno(rng, 1)
        out = apply_one_body(state, j, op)
        ref = apply_gate_dense(d_in, [j], nno_to_matrix(op))
    elif kind == "two_body":
        j, k = [int(v) for v in rng.choice(n, size=2, replace=False)]
        op = random_nno(rng, 2)
        out = apply_two_body(state, j, k, op)
        ref = apply_gate_dense(d_in, [j, k], nno_to_matrix(op))
    elif kind == "k_body":
        sites = [int(v) for v in rng.choice(n, size=3, replace=False)]
        op = random_nno(rng, 3)
        out = apply_k_body(state, sites, op)
        ref = apply_gate_dense(d_in, sites, nno_to_matrix(op))
    elif kind == "z_rot":
        j = int(rng.integers(n))
        theta = float(rng.uniform(-np.pi, np.pi))
        out = apply_z_rotation(state, j, theta)
        U = np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
        ref = apply_gate_dense(d_in, [j], U)
    elif kind == "zz_rot":
        j, k = [int(v) for v in rng.choice(n, size=2, replace=False)]
        theta = float(rng.uniform(-np.pi, np.pi))
        out = apply_zz_rotation(state, j, k, theta)
        U = np.diag(np.exp(-0.5j * theta
                           * np.array([1.0, -1.0, -1.0, 1.0])))
        ref = apply_gate_dense(d_in, [j, k], U)
    else:
        raise ConfigError(f"unknown gate kind {kind!r}")
    return fidelity(densify_normalized(out), ref)


def run_gate_verify(cfg: GateVerifyConfig, out_dir):
    """Run the seeded rewrite and unitarity batteries; returns a report
    dict and writes report.json plus a per-family CSV."""
    os.makedirs(out_dir, exist_ok=True)
    kinds = ("one_body", "two_body", "k_body", "z_rot", "zz_rot")
    report = {"families": {}, "unitarity": {}, "entangling_entropy": None,
              "param_count": {}}
    rows = []
    for kind in kinds:
        worst = 1.0
        failures = 0
        for i in range(cfg.n_apply):
            rng = np.random.default_rng(
                np.random.SeedSequence(cfg.seed, spawn_key=(kinds.index(kind), i)))
            m = int(rng.integers(0, cfg.max_hidden + 1))
            f = _apply_case(rng, kind, cfg.n_visible, m)
            worst = min(worst, f)
            if f < 1.0 - cfg.fidelity_tol:
                failures += 1
        report["families"][kind] = {"cases": cfg.n_apply,
                                    "worst_fidelity": worst,
                                    "failures": failures}
        rows.append((kind, cfg.n_apply, worst, failures))

    for k in (1, 2, 3):
        agree = 0
        for i in range(cfg.n_unitary):
            rng = np.random.default_rng(
                np.random.SeedSequence(cfg.seed, spawn_key=(100 + k, i)))
            if rng.random() < 0.5:
                op = random_unitary_nno(rng, k)
            else:
                op = random_nno(rng, k)
            rep = check_nno_unitary(op, tol=1e-9)
            numeric = rep.unitarity_defect < cfg.unitary_tol
            if rep.ok == numeric:
                agree += 1
        report["unitarity"][k] = {"cases": cfg.n_unitary, "agree": agree}

    # entangling two-body operation at lambda = pi/4 on |++>
    from .gates import Nno

    lam = np.pi / 4
    op = Nno(2, 0.5, np.zeros(2), np.zeros(2),
             1j * lam * np.array([[0, 1], [1, 0]]), np.zeros((2, 2)),
             1j * (np.pi / 4) * np.eye(2))
    out = apply_two_body(RbmNns.zeros(2), 0, 1, op)
    report["entangling_entropy"] = entanglement_entropy(
        densify_normalized(out), 1)
    report["param_count"] = {k: param_count(k) for k in (1, 2, 3)}
    report["passed"] = (
        all(v["failures"] == 0 for v in report["families"].values())
        and all(v["agree"] == v["cases"] for v in report["unitarity"].values())
        and abs(report["entangling_entropy"] - np.log(2.0)) < 1e-8
        and report["param_count"][1] == (3, 3)
        and report["param_count"][2] == (8, 15)
    )

    with open(os.path.join(out_dir, "gate_verify.csv"), "w") as fh:
        fh.write("family,cases,worst_fidelity,failures\n")
        for kind, cases, worst, failures in rows:
            fh.write(f"{kind},{cases},{_fmt(worst)},{failures}\n")
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, default=str)
    write_manifest(out_dir, "gate-verify", cfg.__dict__, cfg.seed)
    return report
