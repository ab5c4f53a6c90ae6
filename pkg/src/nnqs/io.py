"""JSON serialization of states, operations and circuits.

Complex numbers are stored as [re, im] pairs and matrices row-major.
Python's float repr is shortest-round-trip, so a save/load cycle is
bit-exact.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ShapeError
from .gates import Nno
from .states import RbmNns, UbmNns

__all__ = [
    "state_to_dict",
    "state_from_dict",
    "save_state",
    "load_state",
    "nno_to_dict",
    "nno_from_dict",
    "save_circuit",
    "load_circuit",
]


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _c_back(pair) -> complex:
    return complex(pair[0], pair[1])


def _vec(v) -> list:
    return [_c(z) for z in np.asarray(v).reshape(-1)]


def _vec_back(lst) -> np.ndarray:
    return np.array([_c_back(p) for p in lst], dtype=np.complex128)


def _mat(m) -> list:
    m = np.asarray(m)
    return [[_c(z) for z in row] for row in m]


def _mat_back(lst, rows, cols) -> np.ndarray:
    arr = np.array([[_c_back(p) for p in row] for row in lst],
                   dtype=np.complex128).reshape(rows, cols)
    return arr


def state_to_dict(state) -> dict:
    """Serialize a restricted or unrestricted state (X saved as zeros
    for restricted input)."""
    if isinstance(state, RbmNns):
        state = state.to_ubm()
    if not isinstance(state, UbmNns):
        raise ShapeError(f"cannot serialize {type(state)!r}; convert to "
                         "UbmNns first")
    d = {
        "n_visible": state.n_visible,
        "n_hidden": state.n_hidden,
        "a": _vec(state.a),
        "b": _vec(state.b),
        "W": _mat(state.W),
        "X": _mat(state.X),
        "Y": _mat(state.Y),
    }
    if state.log_prefactor != 0:
        d["log_prefactor"] = _c(state.log_prefactor)
    return d


def state_from_dict(d):
    """Deserialize; returns RbmNns when X is identically zero."""
    n, m = int(d["n_visible"]), int(d["n_hidden"])
    ubm = UbmNns(
        n, m,
        _vec_back(d["a"]),
        _vec_back(d["b"]),
        _mat_back(d["W"], m, n),
        _mat_back(d["X"], m, m),
        _mat_back(d["Y"], n, n),
        _c_back(d.get("log_prefactor", [0.0, 0.0])),
    )
    if not np.any(ubm.X):
        return ubm.to_rbm()
    return ubm


def save_state(state, path):
    with open(path, "w") as fh:
        json.dump(state_to_dict(state), fh)


def load_state(path):
    with open(path) as fh:
        return state_from_dict(json.load(fh))


def nno_to_dict(op: Nno) -> dict:
    return {
        "k": op.k,
        "A": _c(op.A),
        "alpha": _vec(op.alpha),
        "beta": _vec(op.beta),
        "Lambda": _mat(op.Lambda),
        "Gamma": _mat(op.Gamma),
        "Omega": _mat(op.Omega),
    }


def nno_from_dict(d) -> Nno:
    k = int(d["k"])
    return Nno(k, _c_back(d["A"]), _vec_back(d["alpha"]), _vec_back(d["beta"]),
               _mat_back(d["Lambda"], k, k), _mat_back(d["Gamma"], k, k),
               _mat_back(d["Omega"], k, k))


def save_circuit(gates, path):
    """Circuit file: JSON array of tagged gate records
    {type: one_body|two_body|k_body|z_rot|zz_rot, sites, params}."""
    with open(path, "w") as fh:
        json.dump(list(gates), fh)


def load_circuit(path) -> list:
    with open(path) as fh:
        gates = json.load(fh)
    if not isinstance(gates, list):
        raise ShapeError("circuit file must hold a JSON array of gate records")
    return gates
