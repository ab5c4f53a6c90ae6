"""Trotter evolution of the 1D transverse-field Ising chain on
Boltzmann-machine states.

One first-order step is S = prod_bonds g2 * prod_sites g1 with
g1 = exp(tau J h sx) and g2 = exp(tau J sz sz) (real time: the unitary
analogues).  g2 is diagonal and lands directly in the Y couplings; each
g1 adds a hidden node, which is immediately removed again by the chosen
projector:

  method1-*  g1 is applied as a one-body rewrite (the state is then
             exactly star-shaped) and projected back to restricted form
             after every single gate; imaginary time only for the
             numeric variant, which needs real parameters.
  method2    g1 = cosh(x)(1 + tanh(x) sx) is absorbed by first-order
             parameter updates; the hidden count never changes.
  none       the unrestricted network is kept and grows by one node per
             g1 (oracle-capped; ground truth for everything else).

After each full method1 step, hidden nodes with exactly zero couplings
are dropped and the density cap M <= alpha N is enforced by deleting
the oldest nodes, which keeps the hidden count pinned at N for this
model.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigError, ResourceLimitError
from .states import RbmNns, UbmNns
from .gates import (apply_one_body, apply_one_body_star, apply_zz_exponent,
                    g1_nno, g1_flip_amplitude)
from .projection import project_method1, method2_update, apply_method2_update
from .dense import (DenseState, all_configs, apply_gate_dense, densify_normalized,
                    fidelity, tfi_expectations)

__all__ = [
    "EvolveConfig",
    "StepRecord",
    "Trajectory",
    "initial_plus_state",
    "initial_bond_state",
    "trotter_step",
    "build_trotter_ubm",
    "run_imaginary",
    "run_real",
]

PROJECTORS = ("method1-numeric", "method1-weak", "method1-strong",
              "method2", "none")


@dataclass
class EvolveConfig:
    n: int
    h_field: float
    tau: float
    steps: int
    j_coupling: float = 1.0
    boundary: str = "periodic"
    mode: str = "imaginary"
    projector: str = "method1-numeric"
    seed: int = 0
    oracle_checks: bool = True
    hidden_density: int | None = 1
    hub_matching: str = "dominant"
    measure_every: int = 1
    oracle_cap_n: int = 16
    oracle_cap_m: int = 22
    sampler: dict | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("need at least two sites")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if self.steps < 1:
            raise ConfigError("need at least one step")
        if self.boundary not in ("open", "periodic"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.mode not in ("imaginary", "real"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.projector not in PROJECTORS:
            raise ConfigError(f"unknown projector {self.projector!r}")
        if self.mode == "real" and self.projector.startswith("method1"):
            raise ConfigError("method1 projection needs real parameters and "
                              "is restricted to imaginary time")
        if self.mode == "real" and self.projector == "none":
            raise ConfigError("the unrestricted track is imaginary-time only")
        if self.projector == "method2" and self.boundary == "open":
            raise ConfigError("the bond initial state used by method2 is "
                              "defined with periodic indexing")
        if self.hub_matching not in ("l1", "dominant"):
            raise ConfigError(f"unknown hub_matching {self.hub_matching!r}")
        if self.measure_every < 1:
            raise ConfigError("measure_every must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "EvolveConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class StepRecord:
    step: int
    time: float
    energy_per_spin: float | None
    sx: float | None
    hidden_count: int
    oracle_fidelity: float | None = None
    sx_sampled: float | None = None
    sx_sampled_err: float | None = None
    sx_ref: float | None = None


@dataclass
class Trajectory:
    records: list
    final_state: object
    best_state: object = None
    best_step: int | None = None

    CSV_COLUMNS = ("step", "time", "energy_per_spin", "sx", "hidden_count",
                   "oracle_fidelity", "sx_sampled", "sx_sampled_err", "sx_ref")

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write(",".join(self.CSV_COLUMNS) + "\n")
            for r in self.records:
                row = []
                for col in self.CSV_COLUMNS:
                    v = getattr(r, col)
                    if v is None:
                        row.append("")
                    elif isinstance(v, float):
                        row.append(repr(float(v)))
                    else:
                        row.append(str(v))
                fh.write(",".join(row) + "\n")


def initial_plus_state(n) -> RbmNns:
    """Product of +x eigenstates: no hidden nodes, all parameters zero."""
    return RbmNns.zeros(n)


def initial_bond_state(n, tau, J, real_time=False) -> RbmNns:
    """One hidden node per bond with weight w = arccosh(e^{2 tau J})/2
    (real time: arccosh(e^{i 2 tau J})/2), periodic indexing.

    Equals the bond layer prod_k g2(k) applied once to the plus state,
    which gives method2 the couplings it needs to act on.
    """
    if n < 2:
        raise ConfigError("need at least two sites")
    arg = np.exp(2j * tau * J) if real_time else np.exp(2.0 * tau * J)
    w = 0.5 * np.arccosh(arg + 0j)
    if not np.isfinite(w):
        raise ConfigError("bond weight arccosh diverged for these parameters")
    W = np.zeros((n, n), dtype=np.complex128)
    for k in range(n):
        W[k, k] = w
        W[k, (k + 1) % n] = w
    return RbmNns(n, n, np.zeros(n), np.zeros(n), W,
                  np.zeros((n, n)))


def _bonds(n, periodic):
    return [(j, (j + 1) % n) for j in range(n if periodic else n - 1)]


def _prune_zero_nodes(state: RbmNns) -> RbmNns:
    """Drop hidden nodes whose couplings and offset are exactly zero."""
    if state.n_hidden == 0:
        return state
    dead = (np.abs(state.W).max(axis=1) == 0.0) & (np.abs(state.b) == 0.0)
    if not dead.any():
        return state
    keep = ~dead
    return RbmNns(state.n_visible, int(keep.sum()), state.a, state.b[keep],
                  state.W[keep], state.Y, state.log_prefactor)


def _cap_density(state: RbmNns, alpha) -> RbmNns:
    """Keep at most alpha*N hidden nodes, deleting the oldest first."""
    if alpha is None:
        return state
    cap = alpha * state.n_visible
    if state.n_hidden <= cap:
        return state
    return RbmNns(state.n_visible, cap, state.a, state.b[-cap:],
                  state.W[-cap:], state.Y, state.log_prefactor)


def _g2_coefficient(cfg) -> complex:
    tJ = cfg.tau * cfg.j_coupling
    return 1j * tJ if cfg.mode == "real" else tJ


def trotter_step(state, cfg: EvolveConfig):
    """One Trotter step under the configured projector.

    The transverse-field gates sweep the sites in index order, each
    followed immediately by the projection; the bond factors follow.
    At zero field g1 is the identity and is skipped.
    """
    real = cfg.mode == "real"
    x = cfg.tau * cfg.j_coupling * cfg.h_field
    proj = cfg.projector
    if x != 0:
        if proj.startswith("method1"):
            variant = proj.split("-", 1)[1]
            gate = g1_nno(cfg.tau, cfg.j_coupling, cfg.h_field, real)
            for j in range(cfg.n):
                star = apply_one_body_star(state, j, gate)
                state = project_method1(star, variant,
                                        cfg.hub_matching).projected
                state = _prune_zero_nodes(state)
        elif proj == "method2":
            A = g1_flip_amplitude(cfg.tau, cfg.j_coupling, cfg.h_field, real)
            for j in range(cfg.n):
                upd = method2_update(state, j, A, predict=False)
                state = apply_method2_update(state, upd)
        else:
            gate = g1_nno(cfg.tau, cfg.j_coupling, cfg.h_field, real)
            ubm = state if isinstance(state, UbmNns) else state.to_ubm()
            if ubm.n_hidden + cfg.n > cfg.oracle_cap_m:
                raise ResourceLimitError(
                    "unrestricted track would exceed the hidden-node cap; "
                    "raise oracle_cap_m or use a projector")
            for j in range(cfg.n):
                ubm = apply_one_body(ubm, j, gate)
            state = ubm
    c = _g2_coefficient(cfg)
    for j, k in _bonds(cfg.n, cfg.boundary == "periodic"):
        state = apply_zz_exponent(state, j, k, c)
    if proj.startswith("method1"):
        state = _cap_density(state, cfg.hidden_density)
    return state


def build_trotter_ubm(n, steps, tau, J, h, max_hidden=64) -> UbmNns:
    """Unprojected unrestricted network after the given number of
    imaginary-time steps from the plus state, open boundary.

    The hidden nodes organize into a 2D grid: one row per step, vertical
    couplings w_v = log(coth(tau J h))/2 between a node, its predecessor
    at the same site and (in the last row) the visible layer; horizontal
    couplings w_h = tau J inside each row.  The construction asserts
    this pattern.
    """
    if steps * n > max_hidden:
        raise ResourceLimitError("requested network exceeds the hidden cap")
    state = initial_plus_state(n).to_ubm()
    gate = g1_nno(tau, J, h, real_time=False)
    for _ in range(steps):
        for j in range(n):
            state = apply_one_body(state, j, gate)
        for j, k in _bonds(n, periodic=False):
            state = apply_zz_exponent(state, j, k, tau * J)
    w_v = 0.5 * np.log(1.0 / np.tanh(tau * J * h))
    w_h = tau * J
    _assert_grid_pattern(state, n, steps, w_v, w_h)
    return state


def _assert_grid_pattern(state, n, steps, w_v, w_h, tol=1e-12):
    node = lambda layer, site: layer * n + site
    for layer in range(steps):
        for site in range(n):
            i = node(layer, site)
            # vertical: last layer couples to the visible layer through W
            if layer == steps - 1:
                assert abs(state.W[i, site] - w_v) < tol
            # horizontal neighbors inside the row live in X
            if site > 0 and layer > 0:
                assert abs(state.X[node(layer, site - 1), i] - w_h) < tol
            if layer > 0:
                assert abs(state.X[node(layer - 1, site), i] - w_v) < tol


def _dense_reference_step(ref: DenseState, cfg) -> DenseState:
    """Exact dense application of one Trotter step (same gate order)."""
    x = cfg.tau * cfg.j_coupling * cfg.h_field
    real = cfg.mode == "real"
    if x != 0:
        g1 = np.array([[np.cos(x), 1j * np.sin(x)],
                       [1j * np.sin(x), np.cos(x)]]) if real else \
            np.array([[np.cosh(x), np.sinh(x)], [np.sinh(x), np.cosh(x)]])
        for j in range(cfg.n):
            ref = apply_gate_dense(ref, [j], g1)
    c = _g2_coefficient(cfg)
    spins = all_configs(ref.n).astype(np.complex128)
    phase = np.zeros(len(ref.amps), dtype=np.complex128)
    for j, k in _bonds(cfg.n, cfg.boundary == "periodic"):
        phase += c * spins[:, j] * spins[:, k]
    out = DenseState(ref.n, np.exp(phase) * ref.amps)
    return DenseState(ref.n, out.amps / np.linalg.norm(out.amps))


def _measure(state, cfg, ref=None):
    dense_ok = cfg.oracle_checks and state.n_visible <= cfg.oracle_cap_n \
        and state.n_hidden <= cfg.oracle_cap_m
    energy = sx = orc = None
    if dense_ok:
        d = densify_normalized(state, cfg.oracle_cap_n, cfg.oracle_cap_m)
        e, sx = tfi_expectations(d, cfg.j_coupling, cfg.h_field,
                                 cfg.boundary == "periodic")
        energy = e / cfg.n
        if ref is not None:
            orc = fidelity(d, ref)
    elif cfg.sampler is not None:
        from .sampler import SamplerConfig, estimate_energy, estimate_sx

        scfg = SamplerConfig(**cfg.sampler)
        if isinstance(state, RbmNns):
            energy = estimate_energy(state, cfg.j_coupling, cfg.h_field,
                                     cfg.boundary, scfg).mean.real
            sx = estimate_sx(state, scfg).mean.real
    return energy, sx, orc


def run_imaginary(cfg: EvolveConfig) -> Trajectory:
    """Imaginary-time ground-state drive; records energy per spin, the
    transverse magnetization and (when oracle-checked) the fidelity
    against the exact dense Trotter circuit each step.

    Keeps the running-minimum-energy state alongside the final one: at
    larger tau the energy rebounds after its minimum as projection
    errors accumulate.
    """
    if cfg.mode != "imaginary":
        raise ConfigError("run_imaginary needs mode='imaginary'")
    if cfg.projector == "method2":
        state = initial_bond_state(cfg.n, cfg.tau, cfg.j_coupling)
    else:
        state = initial_plus_state(cfg.n)
        if cfg.projector == "none":
            state = state.to_ubm()
    ref = None
    track_ref = cfg.oracle_checks and cfg.n <= cfg.oracle_cap_n
    if track_ref:
        ref = densify_normalized(state, cfg.oracle_cap_n,
                                 max(cfg.oracle_cap_m, state.n_hidden))
    records = []
    e0, sx0, _ = _measure(state, cfg, None)
    records.append(StepRecord(0, 0.0, e0, sx0, state.n_hidden, None))
    best = (np.inf, state, 0)
    for step in range(1, cfg.steps + 1):
        state = trotter_step(state, cfg)
        if track_ref:
            ref = _dense_reference_step(ref, cfg)
        if step % cfg.measure_every == 0 or step == cfg.steps:
            energy, sx, orc = _measure(state, cfg, ref)
            records.append(StepRecord(step, step * cfg.tau, energy, sx,
                                      state.n_hidden, orc))
            if energy is not None and energy < best[0]:
                best = (energy, state, step)
    return Trajectory(records, state, best[1], best[2])


def run_real(cfg: EvolveConfig) -> Trajectory:
    """Real-time quench from the h -> infinity ground state.

    The step-0 record is the plus state itself (sx = 1 exactly); the
    bond layer is then folded in as preparation, exactly as in the dense
    reference, and each step applies the first-order flip updates
    followed by the bond phases.  Records the dense transverse
    magnetization of the updated state, the same quantity from the
    Metropolis sampler when configured, and the exact dense Trotter
    value for comparison.
    """
    if cfg.mode != "real":
        raise ConfigError("run_real needs mode='real'")
    if cfg.projector != "method2":
        raise ConfigError("real-time evolution uses the method2 projector")
    state = initial_bond_state(cfg.n, cfg.tau, cfg.j_coupling, real_time=True)
    track_ref = cfg.oracle_checks and cfg.n <= cfg.oracle_cap_n
    ref = None
    if track_ref:
        plus = densify_normalized(initial_plus_state(cfg.n))
        spins = all_configs(cfg.n).astype(np.complex128)
        phase = np.zeros(len(plus.amps), dtype=np.complex128)
        for j, k in _bonds(cfg.n, True):
            phase += 1j * cfg.tau * cfg.j_coupling * spins[:, j] * spins[:, k]
        ref = DenseState(cfg.n, np.exp(phase) * plus.amps).normalized()
    records = [StepRecord(0, 0.0, None, 1.0, 0, None, 1.0, 0.0, 1.0)]
    scfg = None
    if cfg.sampler is not None:
        from .sampler import SamplerConfig

        scfg = SamplerConfig(**cfg.sampler)
    for step in range(1, cfg.steps + 1):
        state = trotter_step(state, cfg)
        if track_ref:
            ref = _dense_reference_step(ref, cfg)
        if step % cfg.measure_every == 0 or step == cfg.steps:
            energy = sx = sx_ref = None
            if track_ref:
                d = densify_normalized(state)
                e, sx = tfi_expectations(d, cfg.j_coupling, cfg.h_field, True)
                energy = e / cfg.n
                _, sx_ref = tfi_expectations(ref, cfg.j_coupling, cfg.h_field,
                                             True)
            sx_s = sx_s_err = None
            if scfg is not None:
                from .sampler import estimate_sx

                seeded = SamplerConfig(**{**cfg.sampler, "seed":
                                          scfg.seed + step})
                est = estimate_sx(state, seeded)
                sx_s, sx_s_err = est.mean.real, est.std_error
            records.append(StepRecord(step, step * cfg.tau, energy, sx,
                                      state.n_hidden, None, sx_s, sx_s_err,
                                      sx_ref))
    return Trajectory(records, state)
