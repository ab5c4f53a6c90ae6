"""Projection of star-shaped unrestricted states back to restricted form.

Two routes:

Method I (factor fitting).  The star amplitude factors exactly as

    psi(s) = exp(a.s + s.Y.s/2) * 2 cosh(log chi(s)) * prod_k 2 f_k(s)

with
    log chi(s) = b_M + w_M.s + sum_k g_k(w_k.s)
    g_k(t)     = [log cosh(t + b_k + x_k) - log cosh(t + b_k - x_k)] / 2
    f_k(t)     = sqrt(cosh(t + b_k + x_k) * cosh(t + b_k - x_k))

Each f_k is fitted by c_k cosh(beta w_k.s + b'_k), matched exactly at
w_k.s in {0, +|w_k|_1, -|w_k|_1}; log chi is linearized through the
two-point secant of each g_k at +-|w_k|_1.  Closed-form weak- and
strong-coupling limits are provided alongside the numeric fit.

Method II (infinitesimal flips).  The action of 1 + A sx on spin k is
absorbed, to first order in the parameters, by updates delta a/b/W/Y
chosen so that the residual operator P - Q is constant; the projection
infidelity is Var(P - Q)/2 under the Born distribution of the original
state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import FitConvergenceError, StructureError
from .states import RbmNns, StarUbm, log2cosh
from .dense import all_configs

__all__ = [
    "FactorFit",
    "Method1Report",
    "Method2Update",
    "chi_log",
    "fit_factor",
    "fit_hub",
    "project_method1",
    "method2_update",
    "apply_method2_update",
    "variance_PQ",
    "infidelity_first_order",
]

FIT_TOL = 1e-10
FIT_MAX_ITER = 200


def _half_g(t, b, x):
    """g_k(t): half the log ratio of the shifted cosh factors."""
    return 0.5 * (log2cosh(t + b + x) - log2cosh(t + b - x))


def _log_f(t, b, x):
    """log f_k(t): half the log product of the shifted cosh factors,
    without the factor 2 (kept as part of the overall constant)."""
    return 0.5 * (log2cosh(t + b + x) + log2cosh(t + b - x)) - np.log(2.0)


def chi_log(state: StarUbm, s) -> complex:
    """log chi(s): hub offset plus the weighted half log-cosh ratios."""
    from .states import spin_config

    s = spin_config(s, state.n_visible)
    t = state.factor_W @ s.astype(np.complex128)
    out = state.hub_b + state.hub_w @ s
    if state.n_hidden > 1:
        out = out + _half_g(t, state.factor_b, state.hub_x).sum()
    return complex(out)


class FactorFit(NamedTuple):
    c: float
    w_prime: np.ndarray
    b_prime: float
    residual: float


def _require_real(state_or_arrays, what):
    for arr in state_or_arrays:
        if np.any(np.asarray(arr).imag != 0):
            raise StructureError(f"{what} requires real parameters")


def _fit_factors_batch(T, b, x, tol=FIT_TOL, max_iter=FIT_MAX_ITER):
    """Vectorized damped-Newton solve of the three-point matching
    equations  log c + log cosh(beta t + b') = log F(t),
    t in {0, +T, -T}.  Returns (log_c, beta, b_prime, residual, ok).

    Solved in the end-point arguments (u, v) = (beta T + b', -beta T + b')
    rather than (beta, b') directly: when every cosh saturates, beta and
    b' trade off against log c and the naive Jacobian loses rank, while
    the (u, v) system stays well conditioned.
    """
    T = np.asarray(T, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    ts = np.stack([np.zeros_like(T), T, -T], axis=1)  # (B, 3)
    logF = _log_f(ts, b[:, None], x[:, None]).real     # (B, 3)

    # initial guess (c, beta, b') = (F(0)/cosh(b), 1, b), exact at x = 0
    lc = (logF[:, 0] - _logcosh_r(b)).copy()
    u = T + b
    v = -T + b
    live = T > 0

    def residuals(lc, u, v):
        mid = 0.5 * (u + v)
        return np.stack([lc + _logcosh_r(mid) - logF[:, 0],
                         lc + _logcosh_r(u) - logF[:, 1],
                         lc + _logcosh_r(v) - logF[:, 2]], axis=1)

    res = residuals(lc, u, v)
    for _ in range(max_iter):
        rmax = np.abs(res).max(axis=1)
        active = live & (rmax > tol)
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        one = np.ones(len(idx))
        zero = np.zeros(len(idx))
        tm = np.tanh(0.5 * (u[idx] + v[idx]))
        J = np.stack([
            np.stack([one, 0.5 * tm, 0.5 * tm], axis=1),
            np.stack([one, np.tanh(u[idx]), zero], axis=1),
            np.stack([one, zero, np.tanh(v[idx])], axis=1),
        ], axis=1)  # (B, 3, 3)
        try:
            step = np.linalg.solve(J, res[idx][..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(J[i], res[idx][i], rcond=None)[0]
                             for i in range(len(idx))])
        # backtracking with damping factor 0.5
        cur = np.abs(res[idx]).max(axis=1)
        scale = np.ones(len(idx))
        for _ in range(40):
            lc_t = lc[idx] - scale * step[:, 0]
            u_t = u[idx] - scale * step[:, 1]
            v_t = v[idx] - scale * step[:, 2]
            mid = 0.5 * (u_t + v_t)
            r_t = np.stack([lc_t + _logcosh_r(mid) - logF[idx, 0],
                            lc_t + _logcosh_r(u_t) - logF[idx, 1],
                            lc_t + _logcosh_r(v_t) - logF[idx, 2]], axis=1)
            worse = np.abs(r_t).max(axis=1) > cur
            if not worse.any():
                break
            scale[worse] *= 0.5
        lc[idx] -= scale * step[:, 0]
        u[idx] -= scale * step[:, 1]
        v[idx] -= scale * step[:, 2]
        res = residuals(lc, u, v)
    rmax = np.where(live, np.abs(res).max(axis=1), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(live, (u - v) / np.where(live, 2.0 * T, 1.0), 0.0)
    bp = np.where(live, 0.5 * (u + v), 0.0)
    lc = np.where(live, lc, logF[:, 0])
    # the tolerance is read relative to the magnitude of the matched
    # log values: deeply saturated factors (|logF| in the hundreds)
    # cannot be matched below their own curvature floor, which is
    # already far beyond the precision the projection consumes
    scale = np.maximum(1.0, np.abs(logF).max(axis=1))
    return lc, beta, bp, rmax, rmax <= tol * scale


def _logcosh_r(z):
    z = np.abs(np.asarray(z, dtype=float))
    return z + np.log1p(np.exp(-2.0 * z)) - np.log(2.0)


def fit_factor(w_k, b_k, x_kM, tol=FIT_TOL, max_iter=FIT_MAX_ITER) -> FactorFit:
    """Fit one cosh factor: find (c, beta, b') with
    c cosh(beta w.s + b') equal to f_k at w.s in {0, +-|w|_1}.

    Real parameters only.  A zero-weight factor is exactly constant and
    returns (f_k(0), 0, 0).
    """
    w = np.asarray(w_k)
    _require_real((w, [b_k], [x_kM]), "the three-point factor fit")
    w = w.real.astype(float)
    T = float(np.abs(w).sum())
    lc, beta, bp, res, ok = _fit_factors_batch(
        np.array([T]), np.array([float(np.real(b_k))]),
        np.array([float(np.real(x_kM))]), tol, max_iter)
    if not ok[0]:
        raise FitConvergenceError(
            f"factor fit stalled at residual {res[0]:.3e}", residuals=res)
    return FactorFit(float(np.exp(lc[0])), beta[0] * w, float(bp[0]),
                     float(res[0]))


def fit_hub(state: StarUbm, matching="l1") -> tuple[np.ndarray, complex]:
    """Linearize log chi: w'_M = w_M + sum alpha_k w_k and
    b'_M = b_M + sum beta_k, with (alpha_k, beta_k) the two-point secant
    of g_k.  Zero-weight factors contribute (0, g_k(0)).

    matching selects the secant abscissae per factor:
      "l1"       +-|w_k|_1, the extreme attainable arguments
      "dominant" +-max|w_k|, the centers of the attained distribution
    The l1 choice is exact at the extremes but under-transfers badly
    when one large entry saturates g_k well inside its range (the
    near-identity-gate regime); the dominant choice stays accurate
    there.
    """
    if matching not in ("l1", "dominant"):
        raise ValueError(f"unknown matching {matching!r}")
    _require_real((state.W, state.b, state.hub_x), "the hub linearization")
    m = state.n_hidden
    w_M = np.array(state.W[-1])
    b_M = state.b[-1]
    if m == 1:
        return w_M, complex(b_M)
    Wf = state.factor_W.real
    bf = state.factor_b.real
    xf = state.hub_x.real
    T = np.abs(Wf).sum(axis=1) if matching == "l1" else np.abs(Wf).max(axis=1)
    g_plus = _half_g(T + 0j, bf, xf).real
    g_minus = _half_g(-T + 0j, bf, xf).real
    g_zero = _half_g(0.0 + 0j, bf, xf).real
    live = T > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(live, (g_plus - g_minus) / np.where(live, 2 * T, 1.0), 0.0)
    beta = np.where(live, 0.5 * (g_plus + g_minus), g_zero)
    return w_M + alpha @ Wf, complex(b_M + beta.sum())


@dataclass
class Method1Report:
    """Projection result: restricted state with the same hidden count,
    plus per-factor fit residuals and the matching abscissae used."""

    projected: RbmNns
    fit_residuals: np.ndarray
    matching_points: list


def project_method1(state: StarUbm, variant="numeric",
                    hub_matching="l1") -> Method1Report:
    """Project a star state onto a restricted one.

    variant:
      numeric - three-point factor fits plus hub secant (real parameters)
      weak    - factors keep their parameters; hub gains x_k-weighted sums
      strong  - factors coupled to the hub are condensed into it with
                tanh(x_k) weights; uncoupled factors are untouched

    hub_matching is passed to :func:`fit_hub` (numeric variant only).
    """
    if variant not in ("numeric", "weak", "strong"):
        raise ValueError(f"unknown variant {variant!r}")
    n, m = state.n_visible, state.n_hidden
    Wf = state.factor_W
    bf = state.factor_b
    x = state.hub_x
    coupled = x != 0

    if variant == "numeric":
        _require_real((state.W, state.b, x), "the numeric projection")
        T = np.abs(Wf.real).sum(axis=1)
        lc, beta, bp, res, ok = _fit_factors_batch(T, bf.real, x.real)
        if not ok.all():
            raise FitConvergenceError(
                "factor fits stalled above tolerance", residuals=res)
        W_new = beta[:, None] * Wf.real
        b_new = bp.astype(np.complex128)
        residuals = res
        points = [(-t, 0.0, t) for t in T]
    elif variant == "weak":
        W_new = np.array(Wf)
        b_new = np.array(bf)
        residuals = np.zeros(m - 1)
        points = []
    else:
        keep = ~coupled
        W_new = np.where(keep[:, None], Wf, 0.0)
        b_new = np.where(keep, bf, 0.0)
        residuals = np.zeros(m - 1)
        points = []

    if variant == "numeric":
        hub_w, hub_b = fit_hub(state, hub_matching)
    elif variant == "weak":
        hub_w = state.hub_w + x @ Wf
        hub_b = state.hub_b + x @ bf
    else:
        th = np.tanh(x)
        hub_w = state.hub_w + th @ Wf
        hub_b = state.hub_b + th @ bf

    W = np.zeros((m, n), dtype=np.complex128)
    W[: m - 1] = W_new
    W[m - 1] = hub_w
    b = np.concatenate([np.asarray(b_new, dtype=np.complex128),
                        [complex(hub_b)]])
    projected = RbmNns(n, m, state.a, b, W, state.Y, state.log_prefactor)
    return Method1Report(projected, np.asarray(residuals, dtype=float), points)


# ---------------------------------------------------------------------------
# Method II: infinitesimal flip absorbed by parameter updates


@dataclass
class Method2Update:
    """First-order parameter updates absorbing 1 + A sx at one site."""

    delta_a: np.ndarray
    delta_b: np.ndarray
    delta_W: np.ndarray
    delta_Y: np.ndarray
    predicted_infidelity: float | None


def method2_update(state: RbmNns, k, A, predict=True,
                   sampler_cfg=None, rng=None) -> Method2Update:
    """Updates chosen so the residual P - Q is constant to first order:

        delta a_j   = -2 A C_k delta_{jk} a_k
        delta Y_ij  = -2 A C_k (delta_{ik} Y_kj + delta_{jk} Y_ki)
        delta b_j   =  2 A C_k tanh(2 W_jk) a_k
        delta W_ij  =  2 A C_k tanh(2 W_ik) (Y_kj - delta_{kj}/2)

    with C_k = prod_j cosh(2 W_jk).  Valid for complex parameters.
    """
    n, m = state.n_visible, state.n_hidden
    if k < 0 or k >= n:
        raise StructureError("site index out of range")
    A = complex(A)
    wk = state.W[:, k]
    Ck = complex(np.prod(np.cosh(2.0 * wk))) if m else 1.0
    th = np.tanh(2.0 * wk)

    delta_a = np.zeros(n, dtype=np.complex128)
    delta_a[k] = -2.0 * A * Ck * state.a[k]

    delta_Y = np.zeros((n, n), dtype=np.complex128)
    delta_Y[k, :] += -2.0 * A * Ck * state.Y[k, :]
    delta_Y[:, k] += -2.0 * A * Ck * state.Y[:, k]
    delta_Y[k, k] = 0.0

    delta_b = 2.0 * A * Ck * th * state.a[k]

    ident = np.zeros(n)
    ident[k] = 0.5
    delta_W = 2.0 * A * Ck * np.outer(th, state.Y[k, :] - ident)

    upd = Method2Update(delta_a, delta_b, delta_W, delta_Y, None)
    if predict:
        upd.predicted_infidelity = 0.5 * variance_PQ(
            state, upd, k, A, sampler_cfg=sampler_cfg, rng=rng)
    return upd


def apply_method2_update(state: RbmNns, upd: Method2Update) -> RbmNns:
    return RbmNns(state.n_visible, state.n_hidden,
                  state.a + upd.delta_a, state.b + upd.delta_b,
                  state.W + upd.delta_W, state.Y + upd.delta_Y,
                  state.log_prefactor)


def _pq_values(state: RbmNns, upd: Method2Update, k, A, configs):
    configs_c = np.asarray(configs, dtype=np.complex128)
    theta = configs_c @ state.W.T + state.b
    T = np.tanh(theta)
    P = configs_c @ upd.delta_a \
        + 0.5 * np.einsum("bi,bi->b", configs_c @ upd.delta_Y, configs_c) \
        + T @ upd.delta_b \
        + np.einsum("bm,mi,bi->b", T, upd.delta_W, configs_c)
    sk = configs_c[:, k]
    wk = state.W[:, k]
    Ck = complex(np.prod(np.cosh(2.0 * wk))) if state.n_hidden else 1.0
    D = np.prod(1.0 - T * np.tanh(2.0 * wk) * sk[:, None], axis=1) \
        if state.n_hidden else np.ones(len(configs_c), dtype=np.complex128)
    ys = (configs_c @ state.Y)[:, k]
    Q = A * np.exp(-2.0 * state.a[k] * sk - 2.0 * sk * ys) * Ck * D
    return P, Q


def variance_PQ(state: RbmNns, upd: Method2Update, k, A,
                max_n_exact=12, sampler_cfg=None, rng=None) -> float:
    """Var(P - Q) under the Born distribution |psi(s)|^2.

    Exact (full enumeration) up to ``max_n_exact`` sites; beyond that a
    Metropolis estimate is used.
    """
    from .states import rbm_log_amplitudes

    n = state.n_visible
    A = complex(A)
    if n <= max_n_exact:
        configs = all_configs(n)
        logs = rbm_log_amplitudes(state, configs)
        w = np.exp(2.0 * (logs.real - logs.real.max()))
        w /= w.sum()
        P, Q = _pq_values(state, upd, k, A, configs)
        X = P - Q
        mean = (w * X).sum()
        return float((w * np.abs(X - mean) ** 2).sum().real)
    from .sampler import SamplerConfig, metropolis_sample

    cfg = sampler_cfg or SamplerConfig(n_chains=4, n_sweeps=800, n_burnin=100,
                                       seed=0)
    xs = []
    for configs in metropolis_sample(state, cfg):
        P, Q = _pq_values(state, upd, k, A, configs)
        xs.append(P - Q)
    X = np.concatenate(xs)
    return float(np.mean(np.abs(X - X.mean()) ** 2).real)


def infidelity_first_order(W, k, A) -> float:
    """Leading-order projection infidelity of the flip update at
    a = b = Y = 0 and small couplings.

    With U_i = (W^t W)_{ik} and V_ij = sum_m W_mk^2 W_mi W_mj, the
    residual operator is 4 sum_{i<j} (U_i U_j - V_ij) s_i s_j up to a
    constant, so

        I = 8 |A C_k|^2 sum_{i<j} |U_i U_j - V_ij|^2 .

    Scales as |A|^2 lambda^8 N^2 for couplings of scale lambda and fixed
    hidden connectivity.
    """
    W = np.asarray(W, dtype=np.complex128)
    m, n = W.shape
    if k < 0 or k >= n:
        raise StructureError("site index out of range")
    wk = W[:, k]
    Ck = complex(np.prod(np.cosh(2.0 * wk)))
    U = W.T @ wk
    V = W.T @ (wk[:, None] ** 2 * W)
    P = np.outer(U, U) - V
    iu = np.triu_indices(n, 1)
    return float(8.0 * abs(complex(A) * Ck) ** 2 * (np.abs(P[iu]) ** 2).sum())
