"""Brute-force dense state-vector backend.

Ground truth for every network rewrite: states are expanded into full
2^n amplitude vectors, gates are applied exactly, and fidelities and
observables are computed without approximation.  Only usable at small
system sizes; everything here is guarded by explicit caps.

Basis convention (used everywhere in the package): site 1 is the most
significant position of the index, spin +1 maps to bit 0 and spin -1 to
bit 1.  Index 0 is therefore the all-up configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, ShapeError, UndefinedFidelityError
from .states import (RbmNns, StarUbm, UbmNns, hidden_configs,
                     rbm_log_amplitudes, star_log_amplitudes)

__all__ = [
    "DenseState",
    "all_configs",
    "config_index",
    "densify",
    "densify_normalized",
    "fidelity",
    "infidelity",
    "apply_gate_dense",
    "tfi_hamiltonian",
    "tfi_expectations",
    "exact_ground",
    "entanglement_entropy",
]

DENSIFY_MAX_N = 16
DENSIFY_MAX_M = 22


@dataclass(frozen=True)
class DenseState:
    """Full complex amplitude vector over all 2^n configurations."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != (1 << self.n):
            raise ShapeError(f"amplitude vector must have length 2^{self.n}")
        if not np.all(np.isfinite(amps)):
            raise ShapeError("amplitudes must be finite (no NaN/Inf)")
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "DenseState":
        nrm = self.norm
        if nrm == 0.0:
            raise UndefinedFidelityError("cannot normalize the zero vector")
        return DenseState(self.n, self.amps / nrm)


def all_configs(n) -> np.ndarray:
    """All 2^n spin configurations in index order, shape (2^n, n)."""
    return hidden_configs(n)


def config_index(s) -> int:
    s = np.asarray(s)
    bits = (1 - s) // 2
    n = s.shape[0]
    return int(bits @ (1 << (n - 1 - np.arange(n))))


def _hidden_chunk(m, lo, hi):
    idx = np.arange(lo, hi)
    bits = (idx[:, None] >> (m - 1 - np.arange(m))) & 1
    return (1 - 2 * bits).astype(np.int8)


def _ubm_log_amplitudes(state: UbmNns, configs, chunk=1 << 14):
    """Log amplitudes of every configuration by explicit hidden sum."""
    m = state.n_hidden
    configs = np.asarray(configs)
    base = configs @ state.a + 0.5 * np.einsum(
        "bi,bi->b", configs @ state.Y, configs.astype(np.complex128))
    if m == 0:
        return base + state.log_prefactor
    theta = configs @ state.W.T + state.b  # (B, M)
    running = None
    shift = None
    # accumulate log-sum-exp over hidden configurations in chunks
    for lo in range(0, 1 << m, chunk):
        H = _hidden_chunk(m, lo, min(lo + chunk, 1 << m))
        quad = 0.5 * np.einsum("hi,ij,hj->h", H, state.X,
                               H.astype(np.complex128))
        exps = theta @ H.T.astype(np.complex128) + quad  # (B, Hc)
        local_shift = exps.real.max(axis=1)
        local = np.exp(exps - local_shift[:, None]).sum(axis=1)
        if running is None:
            running, shift = local, local_shift
        else:
            new_shift = np.maximum(shift, local_shift)
            running = running * np.exp(shift - new_shift) \
                + local * np.exp(local_shift - new_shift)
            shift = new_shift
    return np.log(running) + shift + base + state.log_prefactor


def state_log_amplitudes(state, configs) -> np.ndarray:
    """Batch log amplitudes, dispatching to the cheapest exact evaluator."""
    if isinstance(state, RbmNns):
        return rbm_log_amplitudes(state, configs)
    if isinstance(state, StarUbm):
        return star_log_amplitudes(state, configs)
    return _ubm_log_amplitudes(state, configs)


def densify(state, max_n=DENSIFY_MAX_N, max_m=DENSIFY_MAX_M) -> DenseState:
    """Expand a network state into its full amplitude vector.

    Entries are the raw unnormalized amplitudes; use
    :func:`densify_normalized` for long circuits whose amplitudes leave
    the double range.
    """
    n, m = state.n_visible, state.n_hidden
    if n > max_n:
        raise ResourceLimitError(f"densify capped at {max_n} visible nodes")
    if m > max_m and isinstance(state, UbmNns):
        raise ResourceLimitError(f"densify capped at {max_m} hidden nodes "
                                 "for the brute-force hidden sum")
    logs = state_log_amplitudes(state, all_configs(n))
    return DenseState(n, np.exp(logs))


def densify_normalized(state, max_n=DENSIFY_MAX_N, max_m=DENSIFY_MAX_M) -> DenseState:
    """Unit-norm dense vector, shift-stabilized in the log domain."""
    n, m = state.n_visible, state.n_hidden
    if n > max_n:
        raise ResourceLimitError(f"densify capped at {max_n} visible nodes")
    if m > max_m and isinstance(state, UbmNns):
        raise ResourceLimitError(f"densify capped at {max_m} hidden nodes")
    logs = state_log_amplitudes(state, all_configs(n))
    amps = np.exp(logs - logs.real.max())
    return DenseState(n, amps).normalized()


def fidelity(p: DenseState, q: DenseState) -> float:
    """|<p|q>| / (|p| |q|); scale and global-phase invariant, in [0, 1]."""
    if p.n != q.n:
        raise ShapeError("states live on different numbers of sites")
    np_, nq = p.norm, q.norm
    if np_ == 0.0 or nq == 0.0:
        raise UndefinedFidelityError("fidelity undefined for the zero vector")
    return float(min(1.0, abs(np.vdot(p.amps, q.amps)) / (np_ * nq)))


def infidelity(p: DenseState, q: DenseState) -> float:
    """1 - fidelity, computed through the orthogonal residual.

    1 - F^2 = |r|^2 / |q|^2 with r the component of q orthogonal to p,
    which stays accurate down to ~1e-28 where the direct 1 - F would
    round to zero.
    """
    if p.n != q.n:
        raise ShapeError("states live on different numbers of sites")
    if p.norm == 0.0 or q.norm == 0.0:
        raise UndefinedFidelityError("fidelity undefined for the zero vector")
    pa = p.amps / p.norm
    qa = q.amps / q.norm
    r = qa - pa * np.vdot(pa, qa)
    one_minus_f2 = float(np.vdot(r, r).real)
    f = fidelity(p, q)
    return one_minus_f2 / (1.0 + f)


def apply_gate_dense(state: DenseState, sites, U) -> DenseState:
    """Apply a 2^k x 2^k matrix exactly on the given sites (0-based)."""
    U = np.asarray(U, dtype=np.complex128)
    sites = list(sites)
    k = len(sites)
    if U.shape != (1 << k, 1 << k):
        raise ShapeError(f"gate on {k} sites must be {1 << k} x {1 << k}")
    if len(set(sites)) != k or any(j < 0 or j >= state.n for j in sites):
        raise ShapeError("sites must be distinct and in range")
    psi = state.amps.reshape([2] * state.n)
    psi = np.moveaxis(psi, sites, range(k))
    shape = psi.shape
    psi = U @ psi.reshape(1 << k, -1)
    psi = np.moveaxis(psi.reshape(shape), range(k), sites)
    return DenseState(state.n, psi.reshape(-1))


def _bonds(n, periodic):
    bonds = [(j, j + 1) for j in range(n - 1)]
    if periodic and n > 1:
        bonds.append((n - 1, 0))
    return bonds


def tfi_hamiltonian(n, J, h, periodic) -> np.ndarray:
    """Dense transverse-field Ising Hamiltonian
    H = -J (sum_j sz_j sz_{j+1} + h sum_j sx_j)."""
    if n > 14:
        raise ResourceLimitError("dense Hamiltonian capped at 14 sites")
    dim = 1 << n
    spins = all_configs(n).astype(np.float64)
    diag = np.zeros(dim)
    for j, k in _bonds(n, periodic):
        diag -= J * spins[:, j] * spins[:, k]
    H = np.diag(diag.astype(np.complex128))
    idx = np.arange(dim)
    for j in range(n):
        flipped = idx ^ (1 << (n - 1 - j))
        H[idx, flipped] += -J * h
    return H


def tfi_expectations(state: DenseState, J, h, periodic) -> tuple[float, float]:
    """Energy <H> and transverse magnetization (1/n) sum_j <sx_j>.

    Both are asserted real to 1e-10 relative imaginary residue.
    """
    psi = state.normalized().amps
    n = state.n
    spins = all_configs(n).astype(np.float64)
    prob = np.abs(psi) ** 2
    diag = np.zeros(len(psi))
    for j, k in _bonds(n, periodic):
        diag += spins[:, j] * spins[:, k]
    energy = -J * float(diag @ prob)
    resh = psi.reshape([2] * n)
    sx_total = 0j
    for j in range(n):
        flipped = np.flip(resh, axis=j)
        sx_total += np.vdot(resh, flipped)
    assert abs(sx_total.imag) < 1e-10 * max(1.0, abs(sx_total.real)), \
        "sx expectation has a non-negligible imaginary part"
    energy += -J * h * sx_total.real
    sx = sx_total.real / n
    return float(energy), float(sx)


def _apply_tfi(n, J, h, periodic, v):
    spins = all_configs(n).astype(np.float64)
    diag = np.zeros(len(v))
    for j, k in _bonds(n, periodic):
        diag -= J * spins[:, j] * spins[:, k]
    out = diag * v
    resh = v.reshape([2] * n)
    for j in range(n):
        out += (-J * h) * np.flip(resh, axis=j).reshape(-1)
    return out


def exact_ground(n, J, h, periodic, max_n=14) -> tuple[float, DenseState]:
    """Lowest eigenpair of the transverse-field Ising chain.

    Dense Hermitian solve up to 10 sites; shifted power iteration above
    that (no sparse-solver dependency needed at these sizes).
    """
    if n > max_n:
        raise ResourceLimitError(f"exact ground state capped at {max_n} sites")
    if n <= 10:
        H = tfi_hamiltonian(n, J, h, periodic)
        vals, vecs = np.linalg.eigh(H)
        return float(vals[0]), DenseState(n, vecs[:, 0])
    # power iteration on (shift - H); shift above the spectral radius
    shift = abs(J) * (n + abs(h) * n) + 1.0
    rng = np.random.default_rng(7)
    v = rng.normal(size=1 << n) + 0.05
    v /= np.linalg.norm(v)
    energy = np.inf
    for _ in range(200000):
        w = shift * v - _apply_tfi(n, J, h, periodic, v)
        w /= np.linalg.norm(w)
        e = float(np.real(np.vdot(w, _apply_tfi(n, J, h, periodic, w))))
        if abs(e - energy) < 1e-12:
            v = w
            energy = e
            break
        v, energy = w, e
    return energy, DenseState(n, v)


def entanglement_entropy(state: DenseState, cut) -> float:
    """Von Neumann entropy (natural log) across sites [0, cut) | [cut, n)."""
    if cut < 1 or cut >= state.n:
        raise ShapeError("cut must leave at least one site on each side")
    psi = state.normalized().amps.reshape(1 << cut, -1)
    svals = np.linalg.svd(psi, compute_uv=False)
    p = svals ** 2
    p = p[p > 1e-15]
    return float(-(p * np.log(p)).sum())
