"""K-site operations applied to Boltzmann-machine states by graph rewrites.

An operation on K spins is parametrized by a prefactor A, offset vectors
alpha (output side) and beta (input side), symmetric hollow matrices
Lambda (output-output) and Gamma (input-input), and a general K x K
matrix Omega (output-input).  Its matrix elements are

    U[q, q'] = A * exp( alpha.q + beta.q'
                        + q.Lambda.q/2 + q.Omega.q' + q'.Gamma.q'/2 )

Applying such an operation to an unrestricted state adds exactly K
hidden nodes (the summed-over input spins become hidden) and shuffles
existing couplings; no other structure changes.  Diagonal rotations
about z (one- and two-spin) are the degenerate limit and update a / Y
in place without any new nodes.

Basis-index order for matrices: q = (q_1, ..., q_K) maps to an integer
with q_1 most significant, spin +1 -> bit 0 and -1 -> bit 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (DegenerateGateError, ResourceLimitError, ShapeError,
                     StructureError)
from .states import RbmNns, StarUbm, UbmNns, hidden_configs

__all__ = [
    "Nno",
    "OneBodyAngles",
    "UnitarityReport",
    "nno_to_matrix",
    "one_body_unitary",
    "check_nno_unitary",
    "param_count",
    "apply_one_body",
    "apply_two_body",
    "apply_k_body",
    "apply_one_body_star",
    "apply_z_rotation",
    "apply_zz_rotation",
    "apply_zz_exponent",
    "g1_nno",
    "g1_flip_amplitude",
    "apply_circuit",
    "circuit_hidden_growth",
]

MATRIX_MAX_K = 10


def _sym_hollow(x, k, name):
    m = np.asarray(x, dtype=np.complex128)
    if m.shape != (k, k):
        raise ShapeError(f"{name} must be {k} x {k}")
    if not np.array_equal(m, m.T):
        raise StructureError(f"{name} must be symmetric")
    if np.any(np.diagonal(m) != 0):
        raise StructureError(f"{name} must have zero diagonal")
    return m


@dataclass(frozen=True)
class Nno:
    """K-site operation with exponential-of-quadratic matrix elements."""

    k: int
    A: complex
    alpha: np.ndarray
    beta: np.ndarray
    Lambda: np.ndarray
    Gamma: np.ndarray
    Omega: np.ndarray

    def __post_init__(self):
        k = self.k
        if k < 1:
            raise ShapeError("body count k must be >= 1")
        alpha = np.asarray(self.alpha, dtype=np.complex128).reshape(-1)
        beta = np.asarray(self.beta, dtype=np.complex128).reshape(-1)
        if alpha.shape != (k,) or beta.shape != (k,):
            raise ShapeError("alpha and beta must have length k")
        Lam = _sym_hollow(self.Lambda, k, "Lambda")
        Gam = _sym_hollow(self.Gamma, k, "Gamma")
        Om = np.asarray(self.Omega, dtype=np.complex128)
        if Om.shape != (k, k):
            raise ShapeError("Omega must be k x k")
        for name, arr in (("alpha", alpha), ("beta", beta), ("Lambda", Lam),
                          ("Gamma", Gam), ("Omega", Om)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "A", complex(self.A))

    @classmethod
    def one_body(cls, A, alpha, beta, omega):
        z = np.zeros((1, 1))
        return cls(1, A, [alpha], [beta], z, z, [[omega]])


@dataclass(frozen=True)
class OneBodyAngles:
    """Real angles (alpha', beta', omega') of the single-spin unitary
    parametrization; any spin-1/2 unitary is reachable up to phase."""

    alpha_p: float
    beta_p: float
    omega_p: float


def nno_to_matrix(op: Nno, max_k=MATRIX_MAX_K) -> np.ndarray:
    """Dense 2^K x 2^K matrix of the operation (rows: output q)."""
    if op.k > max_k:
        raise ResourceLimitError(f"dense gate matrix capped at K={max_k}")
    Q = hidden_configs(op.k).astype(np.complex128)
    lam = 0.5 * np.einsum("qi,ij,qj->q", Q, op.Lambda, Q)
    gam = 0.5 * np.einsum("qi,ij,qj->q", Q, op.Gamma, Q)
    expo = (Q @ op.alpha + lam)[:, None] + (Q @ op.beta + gam)[None, :] \
        + Q @ op.Omega @ Q.T
    return op.A * np.exp(expo)


def one_body_unitary(angles: OneBodyAngles) -> Nno:
    """Single-spin unitary as a one-body operation.

    alpha and beta are i times the real angles, omega = omega' + i pi/4,
    and the prefactor normalizes the matrix; the result carries a global
    phase exp(i pi/4) and tends to that phase times the identity as
    omega' grows.
    """
    w = angles.omega_p
    A = 1.0 / np.sqrt(2.0 * np.cosh(2.0 * w))
    return Nno.one_body(A, 1j * angles.alpha_p, 1j * angles.beta_p,
                        w + 0.25j * np.pi)


def param_count(k: int) -> tuple[int, int]:
    """(free real parameters of a unitary K-body operation,
    free real parameters of an arbitrary K-qubit unitary up to phase)."""
    if k < 1:
        raise ShapeError("k must be >= 1")
    return k * k + 2 * k, (1 << (2 * k)) - 1


class UnitarityReport(NamedTuple):
    ok: bool
    violations: list
    unitarity_defect: float | None


def check_nno_unitary(op: Nno, tol: float = 1e-9) -> UnitarityReport:
    """Structural unitarity test.

    Conditions: (i) alpha, beta, Lambda, Gamma purely imaginary;
    (ii) the support of Omega is a permutation pattern (one entry per
    row and per column); (iii) each supported entry x has
    |cos(2 Im x)| < tol, with |A| normalizing the row cosh product.
    For K <= 6 the numeric defect max|U+U - 1| is reported alongside.
    """
    violations = []
    re_max = max(np.abs(op.alpha.real).max(initial=0.0),
                 np.abs(op.beta.real).max(initial=0.0),
                 np.abs(op.Lambda.real).max(initial=0.0),
                 np.abs(op.Gamma.real).max(initial=0.0))
    if re_max > tol:
        violations.append("imaginary-parts")
    support = np.abs(op.Omega) > tol
    row_ok = (support.sum(axis=1) == 1).all()
    col_ok = (support.sum(axis=0) == 1).all()
    if not (row_ok and col_ok):
        violations.append("omega-row-pattern")
    else:
        entries = op.Omega[support]
        if np.any(np.abs(np.cos(2.0 * entries.imag)) > tol):
            violations.append("omega-phase")
        norm = abs(op.A) ** 2 * np.prod(2.0 * np.cosh(2.0 * entries.real))
        if abs(norm - 1.0) > max(tol, 1e-9) * 100:
            violations.append("prefactor-normalization")
    defect = None
    if op.k <= 6:
        U = nno_to_matrix(op)
        defect = float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())
    return UnitarityReport(not violations, violations, defect)


# ---------------------------------------------------------------------------
# graph-rewrite application


def _as_ubm(state):
    return state.to_ubm() if isinstance(state, RbmNns) else state


def _check_sites(n, sites):
    sites = [int(j) for j in sites]
    if len(set(sites)) != len(sites):
        raise ShapeError("sites must be distinct")
    if any(j < 0 or j >= n for j in sites):
        raise ShapeError("site index out of range")
    return sites


def apply_one_body(state, j, op: Nno) -> UbmNns:
    """Apply a one-body operation at site j; adds one hidden node.

    The summed-over input spin becomes hidden node M+1: it takes offset
    beta + a_j, couples to site j with omega, inherits the old Y row of
    site j as hidden-visible couplings, and inherits the old W column j
    as hidden-hidden couplings.
    """
    if op.k != 1:
        raise ShapeError("apply_one_body needs a one-body operation")
    state = _as_ubm(state)
    (j,) = _check_sites(state.n_visible, [j])
    n, m = state.n_visible, state.n_hidden

    a = np.array(state.a)
    a[j] = op.alpha[0]
    b = np.concatenate([state.b, [op.beta[0] + state.a[j]]])

    W = np.zeros((m + 1, n), dtype=np.complex128)
    W[:m] = state.W
    W[:m, j] = 0
    W[m] = state.Y[j]
    W[m, j] = op.Omega[0, 0]

    X = np.zeros((m + 1, m + 1), dtype=np.complex128)
    X[:m, :m] = state.X
    X[:m, m] = state.W[:, j]
    X[m, :m] = state.W[:, j]

    Y = np.array(state.Y)
    Y[j, :] = Y[:, j] = 0

    return UbmNns(n, m + 1, a, b, W, X, Y,
                  state.log_prefactor + np.log(complex(op.A)))


def apply_two_body(state, j, k, op: Nno) -> UbmNns:
    """Apply a two-body operation at sites (j, k); adds two hidden nodes."""
    if op.k != 2:
        raise ShapeError("apply_two_body needs a two-body operation")
    state = _as_ubm(state)
    j, k = _check_sites(state.n_visible, [j, k])
    n, m = state.n_visible, state.n_hidden
    lam = op.Lambda[0, 1]
    gam = op.Gamma[0, 1]

    a = np.array(state.a)
    a[j], a[k] = op.alpha[0], op.alpha[1]
    b = np.concatenate([state.b, [op.beta[0] + state.a[j],
                                  op.beta[1] + state.a[k]]])

    W = np.zeros((m + 2, n), dtype=np.complex128)
    W[:m] = state.W
    W[:m, j] = 0
    W[:m, k] = 0
    W[m] = state.Y[j]
    W[m + 1] = state.Y[k]
    # output spin at site p couples to new hidden node i with Omega[p-slot, i]
    W[m, j], W[m, k] = op.Omega[0, 0], op.Omega[1, 0]
    W[m + 1, j], W[m + 1, k] = op.Omega[0, 1], op.Omega[1, 1]

    X = np.zeros((m + 2, m + 2), dtype=np.complex128)
    X[:m, :m] = state.X
    X[:m, m] = state.W[:, j]
    X[m, :m] = state.W[:, j]
    X[:m, m + 1] = state.W[:, k]
    X[m + 1, :m] = state.W[:, k]
    X[m, m + 1] = X[m + 1, m] = gam + state.Y[j, k]

    Y = np.array(state.Y)
    Y[j, :] = Y[:, j] = 0
    Y[k, :] = Y[:, k] = 0
    Y[j, k] = Y[k, j] = lam

    return UbmNns(n, m + 2, a, b, W, X, Y,
                  state.log_prefactor + np.log(complex(op.A)))


def apply_k_body(state, sites, op: Nno) -> UbmNns:
    """Apply a K-body operation; adds K hidden nodes.

    Direct generalization of the one- and two-body rules: visible
    offsets at the operated sites are replaced by alpha, the K new
    hidden nodes take offsets beta_i + a_{site_i}, Omega couples them to
    the operated sites, Gamma plus the old Y block couples them to each
    other, Lambda lands in Y, and the old W columns at the operated
    sites move into the new X rows.
    """
    state = _as_ubm(state)
    sites = _check_sites(state.n_visible, sites)
    kk = len(sites)
    if op.k != kk:
        raise ShapeError(f"operation body count {op.k} != number of sites {kk}")
    if kk > state.n_visible:
        raise ShapeError("more operated sites than visible nodes")
    n, m = state.n_visible, state.n_hidden
    p = np.array(sites)

    a = np.array(state.a)
    a[p] = op.alpha
    b = np.concatenate([state.b, op.beta + state.a[p]])

    W = np.zeros((m + kk, n), dtype=np.complex128)
    W[:m] = state.W
    W[:m, p] = 0
    W[m:] = state.Y[p]
    W[np.ix_(range(m, m + kk), p)] = op.Omega.T

    X = np.zeros((m + kk, m + kk), dtype=np.complex128)
    X[:m, :m] = state.X
    X[:m, m:] = state.W[:, p]
    X[m:, :m] = state.W[:, p].T
    cross = op.Gamma + state.Y[np.ix_(p, p)]
    np.fill_diagonal(cross, 0)
    X[m:, m:] = cross

    Y = np.array(state.Y)
    Y[p, :] = 0
    Y[:, p] = 0
    Y[np.ix_(p, p)] = op.Lambda

    return UbmNns(n, m + kk, a, b, W, X, Y,
                  state.log_prefactor + np.log(complex(op.A)))


def apply_one_body_star(state: RbmNns, j, op: Nno) -> StarUbm:
    """One-body application specialized to restricted input.

    The output is exactly star-shaped (all hidden-hidden couplings
    attach to the new node), kept in the compact star representation so
    no M x M matrix is ever materialized.  This is the projection-loop
    fast path.
    """
    if op.k != 1:
        raise ShapeError("apply_one_body_star needs a one-body operation")
    if not isinstance(state, RbmNns):
        raise ShapeError("apply_one_body_star needs a restricted state")
    (j,) = _check_sites(state.n_visible, [j])
    n, m = state.n_visible, state.n_hidden
    omega = op.Omega[0, 0]

    a = np.array(state.a)
    a[j] = op.alpha[0]
    b = np.concatenate([state.b, [op.beta[0] + state.a[j]]])
    W = np.zeros((m + 1, n), dtype=np.complex128)
    W[:m] = state.W
    W[:m, j] = 0
    W[m] = state.Y[j]
    W[m, j] = omega
    Y = np.array(state.Y)
    Y[j, :] = Y[:, j] = 0
    return StarUbm(n, m + 1, a, b, W, Y, state.W[:, j],
                   state.log_prefactor + np.log(complex(op.A)))


def _update_Y(state, j, k, delta):
    Y = np.array(state.Y)
    Y[j, k] += delta
    Y[k, j] += delta
    return Y


def apply_z_rotation(state, j, theta):
    """Rotation exp(-i theta sz/2) at site j: a_j -> a_j - i theta / 2.

    No hidden nodes are added; works on any state type.
    """
    (j,) = _check_sites(state.n_visible, [j])
    a = np.array(state.a)
    a[j] -= 0.5j * theta
    return state.replace(a=a) if isinstance(state, RbmNns) else \
        _replace_field(state, a=a)


def apply_zz_rotation(state, j, k, theta):
    """Rotation exp(-i theta sz_j sz_k / 2): Y_jk -> Y_jk - i theta / 2."""
    return apply_zz_exponent(state, j, k, -0.5j * theta)


def apply_zz_exponent(state, j, k, c):
    """Multiply amplitudes by exp(c * s_j * s_k): Y_jk -> Y_jk + c.

    The non-unitary sibling of the zz rotation, used for imaginary-time
    bond factors.
    """
    j, k = _check_sites(state.n_visible, [j, k])
    if j == k:
        raise ShapeError("zz update needs two distinct sites")
    Y = _update_Y(state, j, k, c)
    return state.replace(Y=Y) if isinstance(state, RbmNns) else \
        _replace_field(state, Y=Y)


def _replace_field(state, **kw):
    if isinstance(state, UbmNns):
        d = dict(n_visible=state.n_visible, n_hidden=state.n_hidden,
                 a=state.a, b=state.b, W=state.W, X=state.X, Y=state.Y,
                 log_prefactor=state.log_prefactor)
        d.update(kw)
        return UbmNns(**d)
    if isinstance(state, StarUbm):
        d = dict(n_visible=state.n_visible, n_hidden=state.n_hidden,
                 a=state.a, b=state.b, W=state.W, Y=state.Y,
                 hub_x=state.hub_x, log_prefactor=state.log_prefactor)
        d.update(kw)
        return StarUbm(**d)
    raise ShapeError(f"unsupported state type {type(state)!r}")


# ---------------------------------------------------------------------------
# transverse-field gate family


def g1_nno(tau, J, h, real_time=False) -> Nno:
    """Single-spin transverse-field factor of the Trotter step.

    Imaginary time: exp(tau J h sx), with coupling weight
    omega = log(coth(tau J h)) / 2 (real).  Real time: exp(i tau J h sx),
    the complex analogue.  The exactly diagonal case tau J h = 0 is not
    representable (omega diverges); use a z rotation instead.
    """
    x = tau * J * h
    if x == 0:
        raise DegenerateGateError("tau * J * h = 0: gate is diagonal and the "
                                  "coupling weight diverges")
    if real_time:
        diag, off = np.cos(x) + 0j, 1j * np.sin(x)
    else:
        if x < 0:
            raise DegenerateGateError("imaginary-time factor needs tau*J*h > 0")
        diag, off = np.cosh(x) + 0j, np.sinh(x) + 0j
    ld, lo = np.log(diag), np.log(off)
    omega = 0.5 * (ld - lo)
    A = np.exp(0.5 * (ld + lo))
    return Nno.one_body(A, 0.0, 0.0, omega)


def g1_flip_amplitude(tau, J, h, real_time=False) -> complex:
    """Coefficient A of the normalization-free form 1 + A sx of the
    transverse-field factor (tanh for imaginary time, i tan for real)."""
    x = tau * J * h
    return complex(1j * np.tan(x)) if real_time else complex(np.tanh(x))


# ---------------------------------------------------------------------------
# gate records / circuits

def circuit_hidden_growth(gates) -> int:
    """Hidden nodes added by a circuit: one per one-body operation, two
    per two-body, K per K-body, none for z / zz rotations."""
    total = 0
    for g in gates:
        t = g["type"]
        if t == "one_body":
            total += 1
        elif t == "two_body":
            total += 2
        elif t == "k_body":
            total += len(g["sites"])
        elif t in ("z_rot", "zz_rot"):
            pass
        else:
            raise ShapeError(f"unknown gate type {t!r}")
    return total


def apply_circuit(state, gates):
    """Apply a list of tagged gate records (see io.circuit schema)."""
    from .io import nno_from_dict

    for g in gates:
        t, sites = g["type"], list(g["sites"])
        if t == "one_body":
            state = apply_one_body(state, sites[0], nno_from_dict(g["params"]["nno"]))
        elif t == "two_body":
            state = apply_two_body(state, sites[0], sites[1],
                                   nno_from_dict(g["params"]["nno"]))
        elif t == "k_body":
            state = apply_k_body(state, sites, nno_from_dict(g["params"]["nno"]))
        elif t == "z_rot":
            state = apply_z_rotation(state, sites[0], g["params"]["theta"])
        elif t == "zz_rot":
            state = apply_zz_rotation(state, sites[0], sites[1],
                                      g["params"]["theta"])
        else:
            raise ShapeError(f"unknown gate type {t!r}")
    return state
