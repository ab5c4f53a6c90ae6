"""Boltzmann-machine representations of spin-1/2 wavefunctions.

A state maps configurations s in {-1,+1}^N to unnormalized complex
amplitudes.  With hidden offsets b, couplings W and visible-visible
couplings Y, the restricted form (no hidden-hidden couplings) sums out
its hidden nodes in closed form:

    psi(s) = exp(a.s + s.Y.s/2) * prod_k 2*cosh((W s + b)_k)

The unrestricted form adds a symmetric hidden-hidden matrix X and in
general needs an explicit sum over the 2^M hidden configurations.  A
star-shaped special case, where every hidden-hidden coupling attaches
to one hub node, still evaluates in closed form by summing the hub
explicitly.

All evaluation is done in the log domain: near-identity gates produce
large real weights, and products of cosh terms overflow long before the
log of the amplitude does.  Complex log and arccosh use the principal
branch throughout; amplitudes are branch-sensitive only up to a global
constant, which cancels in ratios and fidelities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, StructureError, ResourceLimitError, SingularRatioError

__all__ = [
    "RbmNns",
    "UbmNns",
    "StarUbm",
    "spin_config",
    "log2cosh",
    "rbm_log_amplitude",
    "rbm_amplitude",
    "rbm_log_amplitudes",
    "ubm_amplitude_bruteforce",
    "star_log_amplitude",
    "star_amplitude",
    "star_log_amplitudes",
    "log_amplitude_ratio",
]

DEFAULT_HIDDEN_CAP = 22


def spin_config(values, n=None):
    """Validate and return a spin configuration as an int8 array of +-1."""
    s = np.asarray(values)
    if s.ndim != 1:
        raise ShapeError(f"spin configuration must be 1-d, got shape {s.shape}")
    if not np.all(np.abs(s) == 1):
        raise ShapeError("spin values must be exactly -1 or +1")
    if n is not None and s.shape[0] != n:
        raise ShapeError(f"expected {n} spins, got {s.shape[0]}")
    return s.astype(np.int8)


def _as_complex_vector(x, n, name):
    v = np.asarray(x, dtype=np.complex128).reshape(-1)
    if v.shape != (n,):
        raise ShapeError(f"{name} must have length {n}, got {v.shape}")
    return v


def _as_complex_matrix(x, shape, name):
    m = np.asarray(x, dtype=np.complex128)
    if m.shape != shape:
        raise ShapeError(f"{name} must have shape {shape}, got {m.shape}")
    return m


def _check_symmetric_hollow(m, name):
    if not np.array_equal(m, m.T):
        raise StructureError(f"{name} must be symmetric")
    if np.any(np.diagonal(m) != 0):
        raise StructureError(f"{name} must have zero diagonal")


def _freeze(*arrays):
    for a in arrays:
        a.flags.writeable = False


@dataclass(frozen=True)
class RbmNns:
    """Restricted state: hidden-hidden couplings absent (X = 0).

    Parameters
    ----------
    a : (N,) complex   visible offsets
    b : (M,) complex   hidden offsets
    W : (M, N) complex hidden-visible couplings
    Y : (N, N) complex symmetric, zero diagonal; visible-visible couplings
    log_prefactor : accumulated log of gate prefactors.  Metadata only:
        it never enters ratios or fidelities.
    """

    n_visible: int
    n_hidden: int
    a: np.ndarray
    b: np.ndarray
    W: np.ndarray
    Y: np.ndarray
    log_prefactor: complex = 0j

    def __post_init__(self):
        n, m = self.n_visible, self.n_hidden
        if n < 1 or m < 0:
            raise ShapeError("need n_visible >= 1 and n_hidden >= 0")
        a = _as_complex_vector(self.a, n, "a")
        b = _as_complex_vector(self.b, m, "b")
        W = _as_complex_matrix(self.W, (m, n), "W")
        Y = _as_complex_matrix(self.Y, (n, n), "Y")
        _check_symmetric_hollow(Y, "Y")
        _freeze(a, b, W, Y)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "log_prefactor", complex(self.log_prefactor))

    @classmethod
    def zeros(cls, n_visible, n_hidden=0):
        return cls(
            n_visible,
            n_hidden,
            np.zeros(n_visible),
            np.zeros(n_hidden),
            np.zeros((n_hidden, n_visible)),
            np.zeros((n_visible, n_visible)),
        )

    def to_ubm(self) -> "UbmNns":
        """Lossless upward conversion: identical state with X = 0."""
        m = self.n_hidden
        return UbmNns(self.n_visible, m, self.a, self.b, self.W,
                      np.zeros((m, m)), self.Y, self.log_prefactor)

    def replace(self, **kw) -> "RbmNns":
        d = dict(n_visible=self.n_visible, n_hidden=self.n_hidden, a=self.a,
                 b=self.b, W=self.W, Y=self.Y, log_prefactor=self.log_prefactor)
        d.update(kw)
        return RbmNns(**d)


@dataclass(frozen=True)
class UbmNns:
    """Unrestricted state: adds symmetric hidden-hidden couplings X."""

    n_visible: int
    n_hidden: int
    a: np.ndarray
    b: np.ndarray
    W: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    log_prefactor: complex = 0j

    def __post_init__(self):
        n, m = self.n_visible, self.n_hidden
        if n < 1 or m < 0:
            raise ShapeError("need n_visible >= 1 and n_hidden >= 0")
        a = _as_complex_vector(self.a, n, "a")
        b = _as_complex_vector(self.b, m, "b")
        W = _as_complex_matrix(self.W, (m, n), "W")
        X = _as_complex_matrix(self.X, (m, m), "X")
        Y = _as_complex_matrix(self.Y, (n, n), "Y")
        _check_symmetric_hollow(X, "X")
        _check_symmetric_hollow(Y, "Y")
        _freeze(a, b, W, X, Y)
        for name, arr in (("a", a), ("b", b), ("W", W), ("X", X), ("Y", Y)):
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "log_prefactor", complex(self.log_prefactor))

    def to_rbm(self) -> RbmNns:
        """Lossless downward conversion; requires X identically zero."""
        if np.any(self.X != 0):
            raise StructureError("state has nonzero hidden-hidden couplings")
        return RbmNns(self.n_visible, self.n_hidden, self.a, self.b, self.W,
                      self.Y, self.log_prefactor)

    def to_star(self) -> "StarUbm":
        return StarUbm.from_ubm(self)


@dataclass(frozen=True)
class StarUbm:
    """Unrestricted state whose X couplings all attach to one hub node.

    The hub is the last hidden node (index M-1); ``hub_x[k]`` holds the
    coupling between hidden node k and the hub.  The hidden sum then
    factorizes after summing the hub node explicitly:

        psi(s) = exp(a.s + s.Y.s/2) *
                 [ exp(+b_M + w_M.s) * prod_k 2 cosh(w_k.s + b_k + x_k)
                 + exp(-b_M - w_M.s) * prod_k 2 cosh(w_k.s + b_k - x_k) ]
    """

    n_visible: int
    n_hidden: int
    a: np.ndarray
    b: np.ndarray
    W: np.ndarray
    Y: np.ndarray
    hub_x: np.ndarray
    log_prefactor: complex = 0j

    def __post_init__(self):
        n, m = self.n_visible, self.n_hidden
        if m < 1:
            raise StructureError("star state needs at least the hub node")
        a = _as_complex_vector(self.a, n, "a")
        b = _as_complex_vector(self.b, m, "b")
        W = _as_complex_matrix(self.W, (m, n), "W")
        Y = _as_complex_matrix(self.Y, (n, n), "Y")
        hub_x = _as_complex_vector(self.hub_x, m - 1, "hub_x")
        _check_symmetric_hollow(Y, "Y")
        _freeze(a, b, W, Y, hub_x)
        for name, arr in (("a", a), ("b", b), ("W", W), ("Y", Y), ("hub_x", hub_x)):
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "log_prefactor", complex(self.log_prefactor))

    @property
    def hub_w(self):
        return self.W[-1]

    @property
    def hub_b(self):
        return self.b[-1]

    @property
    def factor_W(self):
        return self.W[:-1]

    @property
    def factor_b(self):
        return self.b[:-1]

    @classmethod
    def from_ubm(cls, state: UbmNns) -> "StarUbm":
        m = state.n_hidden
        if m < 1:
            raise StructureError("star state needs at least the hub node")
        X = state.X
        body = X[: m - 1, : m - 1]
        if np.any(body != 0):
            raise StructureError("X is not star-shaped: couplings exist away "
                                 "from the hub row/column")
        return cls(state.n_visible, m, state.a, state.b, state.W, state.Y,
                   X[: m - 1, m - 1], state.log_prefactor)

    def to_ubm(self) -> UbmNns:
        m = self.n_hidden
        X = np.zeros((m, m), dtype=np.complex128)
        X[: m - 1, m - 1] = self.hub_x
        X[m - 1, : m - 1] = self.hub_x
        return UbmNns(self.n_visible, m, self.a, self.b, self.W, X, self.Y,
                      self.log_prefactor)


# ---------------------------------------------------------------------------
# amplitude evaluation

def log2cosh(z):
    """log(2 cosh(z)) for complex z, stable for large |Re z|.

    Singular (log of zero) exactly at z = i pi (n + 1/2).
    """
    z = np.asarray(z, dtype=np.complex128)
    zz = np.where(z.real < 0, -z, z)
    return zz + np.log(1.0 + np.exp(-2.0 * zz))


def _logaddexp_c(p, q):
    """log(exp(p) + exp(q)) for complex arrays, shift-stabilized."""
    m = np.maximum(p.real, q.real)
    return m + np.log(np.exp(p - m) + np.exp(q - m))


def _quadratic_term(Y, configs):
    """s.Y.s / 2 for each row s of configs (Y symmetric, zero diagonal)."""
    sy = configs @ Y
    return 0.5 * np.einsum("bi,bi->b", sy, configs.astype(np.complex128))


def rbm_log_amplitudes(state: RbmNns, configs) -> np.ndarray:
    """Log amplitudes for a batch of configurations, shape (B, N)."""
    configs = np.atleast_2d(np.asarray(configs))
    if configs.shape[1] != state.n_visible:
        raise ShapeError("configuration length does not match n_visible")
    theta = configs @ state.W.T + state.b
    out = configs @ state.a + _quadratic_term(state.Y, configs)
    if state.n_hidden:
        out = out + log2cosh(theta).sum(axis=1)
    return out + state.log_prefactor


def rbm_log_amplitude(state: RbmNns, s) -> complex:
    s = spin_config(s, state.n_visible)
    return complex(rbm_log_amplitudes(state, s[None, :])[0])


def rbm_amplitude(state: RbmNns, s) -> complex:
    """Closed-form amplitude of a restricted state.

    May overflow to inf for large parameters; prefer the log form.
    """
    return complex(np.exp(rbm_log_amplitude(state, s)))


def hidden_configs(m) -> np.ndarray:
    """All 2^m hidden configurations, most significant node first."""
    idx = np.arange(1 << m)
    bits = (idx[:, None] >> (m - 1 - np.arange(m))) & 1
    return (1 - 2 * bits).astype(np.int8)


def ubm_amplitude_bruteforce(state, s, max_hidden=DEFAULT_HIDDEN_CAP) -> complex:
    """Exact amplitude by explicit sum over all 2^M hidden configurations.

    Ground truth for every closed form in this module; exponential in M,
    guarded by ``max_hidden``.
    """
    if isinstance(state, RbmNns):
        state = state.to_ubm()
    m = state.n_hidden
    if m > max_hidden:
        raise ResourceLimitError(f"brute-force sum over {m} hidden nodes "
                                 f"exceeds the cap of {max_hidden}")
    s = spin_config(s, state.n_visible)
    base = complex(state.a @ s) + 0.5 * complex(s @ state.Y @ s) + state.log_prefactor
    if m == 0:
        return complex(np.exp(base))
    H = hidden_configs(m)
    exps = H @ (state.b + state.W @ s)
    exps = exps + 0.5 * np.einsum("hi,ij,hj->h", H, state.X, H.astype(np.complex128))
    shift = exps.real.max()
    return complex(np.exp(base + shift) * np.exp(exps - shift).sum())


def star_log_amplitudes(state: StarUbm, configs) -> np.ndarray:
    """Log amplitudes of a star state for a batch of configurations."""
    configs = np.atleast_2d(np.asarray(configs))
    if configs.shape[1] != state.n_visible:
        raise ShapeError("configuration length does not match n_visible")
    hub = configs @ state.hub_w + state.hub_b
    theta = configs @ state.factor_W.T + state.factor_b
    plus = hub + log2cosh(theta + state.hub_x).sum(axis=1)
    minus = -hub + log2cosh(theta - state.hub_x).sum(axis=1)
    out = configs @ state.a + _quadratic_term(state.Y, configs)
    return out + _logaddexp_c(plus, minus) + state.log_prefactor


def star_log_amplitude(state: StarUbm, s) -> complex:
    s = spin_config(s, state.n_visible)
    return complex(star_log_amplitudes(state, s[None, :])[0])


def star_amplitude(state: StarUbm, s) -> complex:
    """Two-branch closed form: hub node summed explicitly, remaining
    hidden nodes as cosh factors."""
    return complex(np.exp(star_log_amplitude(state, s)))


def log_amplitude_ratio(state: RbmNns, s, s_prime) -> complex:
    """log psi(s) - log psi(s'), computed in the log domain.

    The accumulated prefactor cancels and is excluded.  Raises if either
    amplitude vanishes exactly.
    """
    s = spin_config(s, state.n_visible)
    sp = spin_config(s_prime, state.n_visible)
    pieces = []
    for cfg in (s, sp):
        val = rbm_log_amplitudes(
            state.replace(log_prefactor=0j), cfg[None, :])[0]
        if not np.isfinite(val):
            raise SingularRatioError("log amplitude is not finite at one of "
                                     "the configurations (vanishing or "
                                     "overflowed amplitude)")
        pieces.append(val)
    return complex(pieces[0] - pieces[1])
