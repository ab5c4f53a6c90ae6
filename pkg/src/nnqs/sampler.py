"""Metropolis sampling of Boltzmann-machine states.

Restricted states are sampled in the visible configuration space with
single-site flips accepted by |psi(s')/psi(s)|^2; the log ratio comes
from cached pre-activations theta = W s + b updated in O(M) per flip.
Real-parameter unrestricted states are sampled jointly over the visible
layer and two independent hidden replicas, whose visible marginal is
the Born distribution |psi(s)|^2; complex couplings are refused because
the summand stops being positive and importance sampling breaks down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SignProblemError
from .states import RbmNns, UbmNns, log2cosh

__all__ = [
    "SamplerConfig",
    "Estimate",
    "metropolis_sample",
    "estimate_energy",
    "estimate_sx",
    "joint_ubm_sample",
    "JointEstimates",
]

THETA_REFRESH_SWEEPS = 1000


@dataclass(frozen=True)
class SamplerConfig:
    n_chains: int = 4
    n_sweeps: int = 2000
    n_burnin: int = 200
    seed: int = 0
    flip_scheme: str = "sequential"  # or "random"

    def __post_init__(self):
        if self.n_chains < 1 or self.n_sweeps < 1 or self.n_burnin < 0:
            raise ConfigError("chain, sweep and burn-in counts must be positive")
        if self.n_burnin >= self.n_sweeps:
            raise ConfigError("burn-in must be smaller than the sweep count")
        if self.flip_scheme not in ("sequential", "random"):
            raise ConfigError(f"unknown flip scheme {self.flip_scheme!r}")


@dataclass(frozen=True)
class Estimate:
    mean: complex
    std_error: float
    n_samples: int
    acceptance_rate: float

    def __post_init__(self):
        if self.std_error < 0:
            raise ConfigError("standard error cannot be negative")


class _RbmChains:
    """Vectorized single-flip chains over |psi|^2 with cached theta = Ws + b
    and Ys products, rebuilt periodically to bound drift."""

    def __init__(self, state: RbmNns, cfg: SamplerConfig):
        self.state = state
        self.cfg = cfg
        self.rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        n, c = state.n_visible, cfg.n_chains
        self.s = 2 * self.rng.integers(0, 2, size=(c, n)).astype(np.int8) - 1
        self._refresh()
        # a start configuration with vanishing amplitude would stall its
        # chain; redraw such chains
        from .states import rbm_log_amplitudes

        for _ in range(100):
            logs = rbm_log_amplitudes(state, self.s.astype(np.complex128))
            dead = ~np.isfinite(logs.real)
            if not dead.any():
                break
            self.s[dead] = 2 * self.rng.integers(
                0, 2, size=(int(dead.sum()), n)).astype(np.int8) - 1
            self._refresh()
        self.accepted = 0
        self.proposed = 0

    def _refresh(self):
        sc = self.s.astype(np.complex128)
        self.theta = sc @ self.state.W.T + self.state.b
        self.ys = sc @ self.state.Y

    def sweep(self):
        n = self.state.n_visible
        c = self.cfg.n_chains
        if self.cfg.flip_scheme == "sequential":
            sites = range(n)
        else:
            sites = self.rng.integers(0, n, size=n)
        for j in sites:
            sj = self.s[:, j].astype(np.complex128)
            dlog = -2.0 * sj * (self.state.a[j] + self.ys[:, j])
            if self.state.n_hidden:
                dtheta = -2.0 * np.outer(sj, self.state.W[:, j])
                dlog = dlog + (log2cosh(self.theta + dtheta)
                               - log2cosh(self.theta)).sum(axis=1)
            acc = np.log(self.rng.random(c)) < 2.0 * dlog.real
            self.accepted += int(acc.sum())
            self.proposed += c
            if acc.any():
                if self.state.n_hidden:
                    self.theta[acc] += dtheta[acc]
                self.ys[acc] -= 2.0 * np.outer(sj[acc], self.state.Y[j, :])
                self.s[acc, j] *= -1

    @property
    def acceptance_rate(self):
        return self.accepted / max(self.proposed, 1)


def metropolis_sample(state: RbmNns, cfg: SamplerConfig):
    """Generator of configuration batches, one (n_chains, N) array per
    retained sweep, targeting |psi(s)|^2."""
    chains = _RbmChains(state, cfg)
    for sweep in range(cfg.n_sweeps):
        chains.sweep()
        if sweep > 0 and sweep % THETA_REFRESH_SWEEPS == 0:
            chains._refresh()
        if sweep >= cfg.n_burnin:
            yield chains.s.copy()


def _batch_means(values, n_batches=16):
    """Batch-means standard error; values shaped (n_samples, n_chains)."""
    values = np.asarray(values)
    ns, nc = values.shape
    nb = min(n_batches, ns)
    usable = (ns // nb) * nb
    batches = values[:usable].reshape(nb, -1, nc).mean(axis=1)  # (nb, nc)
    means = batches.reshape(-1)
    sem = float(np.std(means, ddof=1) / np.sqrt(means.size)) if means.size > 1 else 0.0
    return complex(values.mean()), sem, ns * nc


def _run_with_local(state, cfg, local_fn):
    chains = _RbmChains(state, cfg)
    vals = []
    for sweep in range(cfg.n_sweeps):
        chains.sweep()
        if sweep > 0 and sweep % THETA_REFRESH_SWEEPS == 0:
            chains._refresh()
        if sweep >= cfg.n_burnin:
            vals.append(local_fn(chains))
    mean, sem, nsamp = _batch_means(np.array(vals))
    return Estimate(mean, sem, nsamp, chains.acceptance_rate)


def _flip_log_ratios(state, chains):
    """Log psi(flip_j s) - log psi(s) for every site j; (n_chains, N)."""
    s = chains.s.astype(np.complex128)
    out = -2.0 * s * (state.a + chains.ys)
    if state.n_hidden:
        base = log2cosh(chains.theta).sum(axis=1)
        for j in range(state.n_visible):
            dtheta = -2.0 * np.outer(s[:, j], state.W[:, j])
            out[:, j] += log2cosh(chains.theta + dtheta).sum(axis=1) - base
    return out


def estimate_energy(state: RbmNns, J, h, boundary, cfg: SamplerConfig) -> Estimate:
    """Per-spin energy of the transverse-field Ising chain from the local
    estimator E(s) = -J [sum_bonds s_j s_k + h sum_j psi(flip_j s)/psi(s)]."""
    n = state.n_visible
    periodic = boundary == "periodic"
    bonds = [(j, (j + 1) % n) for j in range(n if periodic else n - 1)]

    def local(chains):
        s = chains.s
        diag = np.zeros(cfg.n_chains)
        for j, k in bonds:
            diag += s[:, j] * s[:, k]
        e = -J * diag.astype(np.complex128)
        if h != 0:
            ratios = np.exp(_flip_log_ratios(state, chains))
            e = e - J * h * ratios.sum(axis=1)
        return e / n

    return _run_with_local(state, cfg, local)


def estimate_sx(state: RbmNns, cfg: SamplerConfig) -> Estimate:
    """Transverse magnetization (1/N) sum_j <sx_j> from flip ratios."""

    def local(chains):
        ratios = np.exp(_flip_log_ratios(state, chains))
        return ratios.mean(axis=1)

    return _run_with_local(state, cfg, local)


# ---------------------------------------------------------------------------
# joint visible+hidden sampling of real unrestricted states


@dataclass
class JointEstimates:
    """Visible-marginal estimates from the joint sampler."""

    sz: list
    szsz: dict
    acceptance_rate: float


def joint_ubm_sample(state: UbmNns, cfg: SamplerConfig,
                     periodic=False) -> JointEstimates:
    """Sample the visible marginal |psi(s)|^2 of a real-parameter
    unrestricted state by Metropolis over (s, h, h') with two hidden
    replicas; single-node flips.

    Complex parameters are refused: the joint summand would lose
    positivity (the sign problem) and the estimates would be unreliable.
    """
    if isinstance(state, RbmNns):
        state = state.to_ubm()
    for name, arr in (("a", state.a), ("b", state.b), ("W", state.W),
                      ("X", state.X), ("Y", state.Y)):
        if np.any(np.asarray(arr).imag != 0):
            raise SignProblemError(
                f"{name} has complex entries; the joint summand is not "
                "positive and the sampler would face the sign problem")
    n, m = state.n_visible, state.n_hidden
    a, b = state.a.real, state.b.real
    W, X, Y = state.W.real, state.X.real, state.Y.real
    c = cfg.n_chains
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    s = 2 * rng.integers(0, 2, size=(c, n)).astype(np.int8) - 1
    h1 = 2 * rng.integers(0, 2, size=(c, m)).astype(np.int8) - 1
    h2 = 2 * rng.integers(0, 2, size=(c, m)).astype(np.int8) - 1
    accepted = proposed = 0
    sz_vals, zz_vals = [], []
    bonds = [(j, (j + 1) % n) for j in range(n if periodic else n - 1)]

    for sweep in range(cfg.n_sweeps):
        for j in range(n):
            sj = s[:, j].astype(float)
            dlog = -2.0 * sj * (2.0 * a[j] + 2.0 * (s @ Y[j])
                                + ((h1 + h2) @ W[:, j]))
            acc = np.log(rng.random(c)) < dlog
            accepted += int(acc.sum()); proposed += c
            s[acc, j] *= -1
        for hrep in (h1, h2):
            for i in range(m):
                hi = hrep[:, i].astype(float)
                dlog = -2.0 * hi * (b[i] + (s @ W[i]) + (hrep @ X[i]))
                acc = np.log(rng.random(c)) < dlog
                accepted += int(acc.sum()); proposed += c
                hrep[acc, i] *= -1
        if sweep >= cfg.n_burnin:
            sz_vals.append(s.astype(float).copy())
            zz_vals.append(np.stack([s[:, j] * s[:, k] for j, k in bonds],
                                    axis=1).astype(float))

    sz_vals = np.array(sz_vals)    # (samples, chains, n)
    zz_vals = np.array(zz_vals)
    rate = accepted / max(proposed, 1)
    sz = []
    for j in range(n):
        mean, sem, nsamp = _batch_means(sz_vals[:, :, j])
        sz.append(Estimate(mean, sem, nsamp, rate))
    szsz = {}
    for idx, (j, k) in enumerate(bonds):
        mean, sem, nsamp = _batch_means(zz_vals[:, :, idx])
        szsz[(j, k)] = Estimate(mean, sem, nsamp, rate)
    return JointEstimates(sz, szsz, rate)
