"""Boltzmann-machine quantum states: gate rewrites, RBM projection and
Trotter evolution of the 1D transverse-field Ising chain."""

__version__ = "0.1.0"

from .states import (RbmNns, UbmNns, StarUbm, rbm_amplitude,
                     rbm_log_amplitude, ubm_amplitude_bruteforce,
                     star_amplitude, log_amplitude_ratio)
from .gates import (Nno, OneBodyAngles, nno_to_matrix, one_body_unitary,
                    check_nno_unitary, param_count, apply_one_body,
                    apply_two_body, apply_k_body, apply_z_rotation,
                    apply_zz_rotation, g1_nno, apply_circuit)
from .dense import (DenseState, densify, densify_normalized, fidelity,
                    infidelity, apply_gate_dense, tfi_expectations,
                    exact_ground, entanglement_entropy)

__all__ = [
    "RbmNns", "UbmNns", "StarUbm", "Nno", "OneBodyAngles", "DenseState",
    "rbm_amplitude", "rbm_log_amplitude", "ubm_amplitude_bruteforce",
    "star_amplitude", "log_amplitude_ratio", "nno_to_matrix",
    "one_body_unitary", "check_nno_unitary", "param_count", "apply_one_body",
    "apply_two_body", "apply_k_body", "apply_z_rotation", "apply_zz_rotation",
    "g1_nno", "apply_circuit", "densify", "densify_normalized", "fidelity",
    "infidelity", "apply_gate_dense", "tfi_expectations", "exact_ground",
    "entanglement_entropy",
]
