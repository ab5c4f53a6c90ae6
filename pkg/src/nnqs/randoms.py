"""Seeded generators for states and operations, shared by the test
battery and the gate-verify driver."""

from __future__ import annotations

import numpy as np

from .gates import Nno
from .states import RbmNns, StarUbm, UbmNns

__all__ = [
    "random_rbm",
    "random_ubm",
    "random_star",
    "random_nno",
    "random_unitary_nno",
]


def _cplx(rng, shape, scale):
    return scale * (rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape))


def _sym_hollow(rng, n, scale, complex_=True):
    m = _cplx(rng, (n, n), scale) if complex_ else \
        rng.uniform(-scale, scale, (n, n)).astype(np.complex128)
    m = m + m.T
    np.fill_diagonal(m, 0)
    return m


def random_rbm(rng, n, m, scale=0.3, complex_=True, with_y=True):
    a = _cplx(rng, n, scale) if complex_ else rng.uniform(-scale, scale, n)
    b = _cplx(rng, m, scale) if complex_ else rng.uniform(-scale, scale, m)
    W = _cplx(rng, (m, n), scale) if complex_ else rng.uniform(-scale, scale, (m, n))
    Y = _sym_hollow(rng, n, scale if with_y else 0.0, complex_)
    return RbmNns(n, m, a, b, W, Y)


def random_ubm(rng, n, m, scale=0.3, complex_=True, with_y=True):
    rbm = random_rbm(rng, n, m, scale, complex_, with_y)
    X = _sym_hollow(rng, m, scale, complex_)
    return UbmNns(n, m, rbm.a, rbm.b, rbm.W, X, rbm.Y)


def random_star(rng, n, m, w_scale=0.2, x_scale=0.3, complex_=False,
                offsets=False):
    """Star state with uniform W entries in [-w, w] and hub couplings in
    [-x, x]; offsets and Y zero unless asked for."""
    if complex_:
        W = _cplx(rng, (m, n), w_scale)
        hub_x = _cplx(rng, m - 1, x_scale)
    else:
        W = rng.uniform(-w_scale, w_scale, (m, n)).astype(np.complex128)
        hub_x = rng.uniform(-x_scale, x_scale, m - 1).astype(np.complex128)
    a = np.zeros(n, dtype=np.complex128)
    b = np.zeros(m, dtype=np.complex128)
    Y = np.zeros((n, n), dtype=np.complex128)
    if offsets:
        a = _cplx(rng, n, w_scale) if complex_ else \
            rng.uniform(-w_scale, w_scale, n).astype(np.complex128)
        b = _cplx(rng, m, w_scale) if complex_ else \
            rng.uniform(-w_scale, w_scale, m).astype(np.complex128)
    return StarUbm(n, m, a, b, W, Y, hub_x)


def random_nno(rng, k, scale=0.4) -> Nno:
    """Generic (typically non-unitary) K-body operation."""
    return Nno(
        k,
        np.exp(_cplx(rng, (), 0.3)),
        _cplx(rng, k, scale),
        _cplx(rng, k, scale),
        _sym_hollow(rng, k, scale),
        _sym_hollow(rng, k, scale),
        _cplx(rng, (k, k), scale),
    )


def random_unitary_nno(rng, k, scale=0.5) -> Nno:
    """K-body operation built to satisfy the structural unitarity
    conditions exactly."""
    alpha = 1j * rng.uniform(-scale, scale, k)
    beta = 1j * rng.uniform(-scale, scale, k)
    Lam = 1j * _sym_hollow(rng, k, scale, complex_=False)
    Gam = 1j * _sym_hollow(rng, k, scale, complex_=False)
    perm = rng.permutation(k)
    Omega = np.zeros((k, k), dtype=np.complex128)
    rows = np.arange(k)
    re = rng.uniform(-scale, scale, k)
    n_branch = rng.integers(-2, 3, k)
    Omega[rows, perm] = re + 1j * (np.pi / 4.0) * (2 * n_branch + 1)
    amp = 1.0 / np.sqrt(np.prod(2.0 * np.cosh(2.0 * re)))
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return Nno(k, amp * phase, alpha, beta, Lam, Gam, Omega)
