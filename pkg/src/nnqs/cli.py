"""Command-line interface.

Exit codes: 0 success, 2 invalid configuration, 3 numeric failure
(non-convergence), 4 resource cap exceeded.

CSV schemas are documented in --help of each subcommand and written as
schema.json next to each run's outputs.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from .errors import (ConfigError, DegenerateGateError, FitConvergenceError,
                     NnqsError, ResourceLimitError, ShapeError,
                     SignProblemError, StructureError)
from .evolve import EvolveConfig, Trajectory, run_imaginary, run_real

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, ResourceLimitError):
        return EXIT_RESOURCE
    if isinstance(exc, (FitConvergenceError, DegenerateGateError,
                        SignProblemError)):
        return EXIT_NUMERIC
    if isinstance(exc, (ConfigError, ShapeError, StructureError,
                        json.JSONDecodeError, FileNotFoundError, KeyError)):
        return EXIT_CONFIG
    return 1


def _run_guarded(fn):
    try:
        fn()
    except NnqsError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exit_code_for(exc))
    except (json.JSONDecodeError, FileNotFoundError, KeyError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _write_schema(out_dir, name, columns):
    with open(os.path.join(out_dir, "schema.json"), "w") as fh:
        json.dump({name: list(columns)}, fh, indent=2)


@click.group()
def main():
    """Boltzmann-machine quantum states: gate rewrites, projections and
    Trotter evolution of the transverse-field Ising chain."""


@main.command()
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--threads", default=1, show_default=True, type=int)
@click.option("--n", default=12, show_default=True, type=int,
              help="Visible = hidden node count of the random states.")
@click.option("--w-scale", default=0.2, show_default=True, type=float)
@click.option("--x-values", default="0.0,0.05,0.1,0.2,0.5,1.0",
              show_default=True, help="Comma-separated hub coupling scales.")
@click.option("--states", "n_states", default=200, show_default=True, type=int)
@click.option("--plot/--no-plot", default=True, show_default=True)
def fig5(out, seed, threads, n, w_scale, x_values, n_states, plot):
    """Random-star projection sweep.

    Writes fig5.csv with columns (x_scale, seed, infidelity_numeric,
    infidelity_weak, infidelity_strong), a per-x summary and a figure.
    """

    def body():
        from .experiments import FIG5_CSV_COLUMNS, Fig5Config, run_fig5

        xs = tuple(float(v) for v in x_values.split(","))
        cfg = Fig5Config(n=n, w_scale=w_scale, x_values=xs, n_states=n_states,
                         seed=seed, threads=threads)
        os.makedirs(out, exist_ok=True)
        run_fig5(cfg, out)
        _write_schema(out, "fig5.csv", FIG5_CSV_COLUMNS)
        if plot:
            from .plotting import plot_fig5

            plot_fig5(os.path.join(out, "fig5_summary.csv"),
                      os.path.join(out, "fig5.png"))
        click.echo(f"wrote {out}/fig5.csv")

    _run_guarded(body)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True), help="EvolveConfig JSON file.")
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", default=None, type=int,
              help="Overrides the seed in the config file.")
@click.option("--plot/--no-plot", default=True, show_default=True)
def evolve(config_path, out, seed, plot):
    """Trotter evolution driver.

    Writes trajectory.csv with columns (step, time, energy_per_spin, sx,
    hidden_count, oracle_fidelity, sx_sampled, sx_sampled_err, sx_ref),
    the final state as final_state.json and a manifest.
    """

    def body():
        from .experiments import write_manifest
        from .io import save_state

        with open(config_path) as fh:
            raw = json.load(fh)
        if seed is not None:
            raw["seed"] = seed
        cfg = EvolveConfig.from_dict(raw)
        os.makedirs(out, exist_ok=True)
        traj = run_imaginary(cfg) if cfg.mode == "imaginary" else run_real(cfg)
        traj.to_csv(os.path.join(out, "trajectory.csv"))
        save_state(traj.final_state, os.path.join(out, "final_state.json"))
        if traj.best_state is not None:
            save_state(traj.best_state, os.path.join(out, "best_state.json"))
        _write_schema(out, "trajectory.csv", Trajectory.CSV_COLUMNS)
        write_manifest(out, "evolve", cfg.to_dict(), cfg.seed)
        if plot:
            from .plotting import plot_trajectory

            exact = None
            if cfg.n <= 14 and cfg.mode == "imaginary":
                from .dense import exact_ground

                e0, _ = exact_ground(cfg.n, cfg.j_coupling, cfg.h_field,
                                     cfg.boundary == "periodic")
                exact = e0 / cfg.n
            plot_trajectory(os.path.join(out, "trajectory.csv"),
                            os.path.join(out, "evolve.png"), exact)
        click.echo(f"wrote {out}/trajectory.csv")

    _run_guarded(body)


@main.command()
@click.option("--state", "state_path", required=True,
              type=click.Path(exists=True), help="State JSON file.")
@click.option("--observable", type=click.Choice(["energy", "sx"]),
              default="energy", show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(),
              help="SamplerConfig JSON file.")
@click.option("--j", "j_coupling", default=1.0, show_default=True, type=float)
@click.option("--h", "h_field", default=0.5, show_default=True, type=float)
@click.option("--boundary", type=click.Choice(["open", "periodic"]),
              default="open", show_default=True)
@click.option("--seed", default=None, type=int)
@click.option("--out", required=True, type=click.Path())
@click.option("--plot/--no-plot", default=True, show_default=True)
def sample(state_path, observable, config_path, j_coupling, h_field, boundary,
           seed, out, plot):
    """Metropolis estimate of an observable on a restricted state.

    Writes samples.csv with columns (chain, batch, value) holding the
    batch means, estimate.json with the combined estimate, and a figure.
    """

    def body():
        from .experiments import write_manifest
        from .io import load_state
        from .sampler import SamplerConfig, _RbmChains, _batch_means, \
            _flip_log_ratios
        from .states import RbmNns

        state = load_state(state_path)
        if not isinstance(state, RbmNns):
            raise ConfigError("sampling needs a restricted state (X = 0)")
        raw = {}
        if config_path:
            with open(config_path) as fh:
                raw = json.load(fh)
        if seed is not None:
            raw["seed"] = seed
        cfg = SamplerConfig(**raw)
        os.makedirs(out, exist_ok=True)

        n = state.n_visible
        periodic = boundary == "periodic"
        bonds = [(jj, (jj + 1) % n) for jj in range(n if periodic else n - 1)]
        chains = _RbmChains(state, cfg)
        per_sweep = []
        for sweep in range(cfg.n_sweeps):
            chains.sweep()
            if sweep < cfg.n_burnin:
                continue
            if observable == "energy":
                s = chains.s
                diag = np.zeros(cfg.n_chains)
                for jj, kk in bonds:
                    diag += s[:, jj] * s[:, kk]
                val = -j_coupling * diag.astype(complex)
                if h_field != 0:
                    val = val - j_coupling * h_field * np.exp(
                        _flip_log_ratios(state, chains)).sum(axis=1)
                per_sweep.append(val.real / n)
            else:
                per_sweep.append(np.exp(
                    _flip_log_ratios(state, chains)).mean(axis=1).real)
        values = np.array(per_sweep)  # (sweeps, chains)
        mean, sem, nsamp = _batch_means(values)
        n_batches = min(16, values.shape[0])
        usable = (values.shape[0] // n_batches) * n_batches
        batch_means = values[:usable].reshape(n_batches, -1,
                                              cfg.n_chains).mean(axis=1)
        with open(os.path.join(out, "samples.csv"), "w") as fh:
            fh.write("chain,batch,value\n")
            for c in range(cfg.n_chains):
                for bidx in range(n_batches):
                    fh.write(f"{c},{bidx},{float(batch_means[bidx, c])!r}\n")
        with open(os.path.join(out, "estimate.json"), "w") as fh:
            json.dump({"observable": observable, "mean": mean.real,
                       "std_error": sem, "n_samples": nsamp,
                       "acceptance_rate": chains.acceptance_rate}, fh, indent=2)
        _write_schema(out, "samples.csv", ("chain", "batch", "value"))
        write_manifest(out, "sample", {"state": os.path.abspath(state_path),
                                       "observable": observable,
                                       "sampler": raw, "J": j_coupling,
                                       "h": h_field, "boundary": boundary},
                       cfg.seed)
        if plot:
            from .plotting import plot_sample_batches

            plot_sample_batches(os.path.join(out, "samples.csv"),
                                os.path.join(out, "sample.png"))
        click.echo(f"{observable}: {mean.real!r} +- {sem!r}")

    _run_guarded(body)


@main.command("gate-verify")
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--cases", default=500, show_default=True, type=int,
              help="Seeded cases per gate family and per unitarity body count.")
def gate_verify(out, seed, cases):
    """Seeded verification battery: every rewrite against the dense
    oracle, the unitarity checker against the numeric test, and the
    entangling-gate entropy.  Exits 3 if any case fails."""

    def body():
        from .experiments import GateVerifyConfig, run_gate_verify

        cfg = GateVerifyConfig(n_apply=cases, n_unitary=cases, seed=seed)
        report = run_gate_verify(cfg, out)
        for fam, res in report["families"].items():
            click.echo(f"{fam}: {res['cases']} cases, worst fidelity "
                       f"{res['worst_fidelity']:.12f}, {res['failures']} failures")
        for k, res in report["unitarity"].items():
            click.echo(f"unitarity K={k}: {res['agree']}/{res['cases']} agree")
        click.echo(f"entangling entropy: {report['entangling_entropy']:.10f} "
                   f"(ln 2 = {np.log(2):.10f})")
        if not report["passed"]:
            raise FitConvergenceError("gate verification battery failed")
        click.echo("gate-verify: all checks passed")

    _run_guarded(body)


@main.command("trotter-ubm")
@click.option("--n", required=True, type=int)
@click.option("--steps", required=True, type=int)
@click.option("--tau", required=True, type=float)
@click.option("--j", "j_coupling", default=1.0, show_default=True, type=float)
@click.option("--h", "h_field", required=True, type=float)
@click.option("--out", required=True, type=click.Path())
@click.option("--plot/--no-plot", default=True, show_default=True)
def trotter_ubm(n, steps, tau, j_coupling, h_field, out, plot):
    """Build the unprojected Trotter network and write it as JSON,
    together with a coupling-pattern summary."""

    def body():
        from .evolve import build_trotter_ubm
        from .experiments import write_manifest
        from .io import save_state

        state = build_trotter_ubm(n, steps, tau, j_coupling, h_field)
        os.makedirs(out, exist_ok=True)
        save_state(state, os.path.join(out, "state.json"))
        w_v = float(0.5 * np.log(1.0 / np.tanh(tau * j_coupling * h_field)))
        summary = {"n_visible": n, "n_hidden": state.n_hidden,
                   "w_vertical": w_v, "w_horizontal": tau * j_coupling}
        with open(os.path.join(out, "pattern.json"), "w") as fh:
            json.dump(summary, fh, indent=2)
        write_manifest(out, "trotter-ubm",
                       {"n": n, "steps": steps, "tau": tau, "J": j_coupling,
                        "h": h_field}, 0)
        if plot:
            from .plotting import plot_trotter_grid

            plot_trotter_grid(state, os.path.join(out, "trotter_ubm.png"))
        click.echo(f"n_hidden={state.n_hidden} w_v={w_v!r} w_h={tau*j_coupling!r}")

    _run_guarded(body)


@main.command("state-info")
@click.option("--state", "state_path", required=True,
              type=click.Path(exists=True))
def state_info(state_path):
    """Print the shape and parameter scales of a serialized state."""

    def body():
        from .io import load_state
        from .states import RbmNns

        state = load_state(state_path)
        kind = "restricted" if isinstance(state, RbmNns) else "unrestricted"
        click.echo(f"type: {kind}")
        click.echo(f"visible nodes: {state.n_visible}")
        click.echo(f"hidden nodes:  {state.n_hidden}")
        click.echo(f"hidden density: {state.n_hidden / state.n_visible:.3f}")
        for name in ("a", "b", "W", "Y") + (("X",) if kind == "unrestricted" else ()):
            arr = getattr(state, name)
            mx = float(np.abs(arr).max()) if arr.size else 0.0
            click.echo(f"max |{name}|: {mx!r}")
        click.echo(f"log prefactor: {state.log_prefactor!r}")

    _run_guarded(body)


if __name__ == "__main__":
    main()
