"""Dense state-vector backend: densify cross-checks, fidelity,
observables and exact ground states."""

import numpy as np
import pytest

from nnqs.dense import (DenseState, all_configs, apply_gate_dense,
                        densify, densify_normalized, entanglement_entropy,
                        exact_ground, fidelity, infidelity, tfi_expectations,
                        tfi_hamiltonian)
from nnqs.errors import ShapeError, UndefinedFidelityError
from nnqs.randoms import random_rbm, random_star, random_ubm
from nnqs.states import RbmNns, star_amplitude


class TestDensify:
    def test_zero_network_is_uniform(self):
        d = densify(RbmNns.zeros(3))
        assert np.allclose(d.amps, 1.0)

    def test_rbm_and_ubm_paths_agree(self):
        rng = np.random.default_rng(0)
        st = random_rbm(rng, 4, 3, scale=0.5)
        a = densify(st).amps
        b = densify(st.to_ubm()).amps
        assert np.allclose(a, b, rtol=1e-12)

    def test_star_entries_match_closed_form(self):
        rng = np.random.default_rng(1)
        st = random_star(rng, 4, 4, w_scale=0.4, x_scale=0.4, complex_=True)
        d = densify(st)
        for idx, s in enumerate(all_configs(4)):
            assert d.amps[idx] == pytest.approx(star_amplitude(st, s),
                                                rel=1e-12)

    def test_star_and_brute_force_paths_agree(self):
        rng = np.random.default_rng(2)
        st = random_star(rng, 4, 4, w_scale=0.4, x_scale=0.4, complex_=True)
        a = densify(st).amps
        b = densify(st.to_ubm()).amps
        assert np.allclose(a, b, rtol=1e-11)

    def test_nan_rejected(self):
        with pytest.raises(ShapeError):
            DenseState(1, [np.nan, 1.0])


class TestFidelity:
    def test_identical_states(self):
        rng = np.random.default_rng(3)
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        d = DenseState(3, v)
        assert fidelity(d, d) == pytest.approx(1.0)

    def test_orthogonal_states(self):
        p = DenseState(1, [1.0, 0.0])
        q = DenseState(1, [0.0, 1.0])
        assert fidelity(p, q) == 0.0

    def test_scale_and_phase_invariance(self):
        rng = np.random.default_rng(4)
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        p = DenseState(3, v)
        q = DenseState(3, v * 2.7 * np.exp(0.9j))
        assert fidelity(p, q) == pytest.approx(1.0, abs=1e-14)
        assert fidelity(p, q) == fidelity(q, p)

    def test_zero_vector_raises(self):
        p = DenseState(1, [1.0, 0.0])
        with pytest.raises(UndefinedFidelityError):
            fidelity(p, DenseState(1, [0.0, 0.0]))

    def test_infidelity_resolves_tiny_defects(self):
        rng = np.random.default_rng(5)
        p = rng.normal(size=16) + 1j * rng.normal(size=16)
        p /= np.linalg.norm(p)
        q0 = rng.normal(size=16) + 1j * rng.normal(size=16)
        q0 -= p * np.vdot(p, q0)
        q0 /= np.linalg.norm(q0)
        for eps in (1e-4, 1e-8, 1e-12):
            q = p + eps * q0
            got = infidelity(DenseState(4, p), DenseState(4, q))
            assert got == pytest.approx(eps ** 2 / 2, rel=1e-4)


class TestGateApplication:
    def test_identity_leaves_state(self):
        rng = np.random.default_rng(6)
        d = DenseState(3, rng.normal(size=8))
        out = apply_gate_dense(d, [1], np.eye(2))
        assert np.allclose(out.amps, d.amps)

    def test_sigma_x_swaps_bit_pairs(self):
        d = DenseState(2, [1.0, 2.0, 3.0, 4.0])
        sx = np.array([[0, 1], [1, 0]])
        out = apply_gate_dense(d, [1], sx)  # site 1 = least significant
        assert np.allclose(out.amps, [2.0, 1.0, 4.0, 3.0])
        out = apply_gate_dense(d, [0], sx)  # site 0 = most significant
        assert np.allclose(out.amps, [3.0, 4.0, 1.0, 2.0])

    def test_two_site_gate_equals_full_matrix_at_n2(self):
        rng = np.random.default_rng(7)
        d = DenseState(2, rng.normal(size=4) + 1j * rng.normal(size=4))
        U = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        out = apply_gate_dense(d, [0, 1], U)
        assert np.allclose(out.amps, U @ d.amps)

    def test_gate_shape_mismatch(self):
        d = DenseState(2, [1, 0, 0, 0])
        with pytest.raises(ShapeError):
            apply_gate_dense(d, [0], np.eye(4))


class TestTfiObservables:
    def test_uniform_state_has_unit_sx(self):
        d = densify(RbmNns.zeros(4)).normalized()
        _, sx = tfi_expectations(d, 1.0, 0.5, periodic=False)
        assert sx == pytest.approx(1.0)

    def test_all_up_product_state_energy(self):
        n = 4
        amps = np.zeros(1 << n)
        amps[0] = 1.0  # index 0 is all spins up
        e, _ = tfi_expectations(DenseState(n, amps), 1.0, 0.0, periodic=True)
        assert e == pytest.approx(-1.0 * n)

    def test_ground_state_energy_matches_eigendecomposition(self):
        e0, gs = exact_ground(8, 1.0, 0.5, periodic=False)
        e, _ = tfi_expectations(gs, 1.0, 0.5, periodic=False)
        assert e == pytest.approx(e0, rel=1e-10)


class TestExactGround:
    def test_two_site_classical_chain(self):
        e0, _ = exact_ground(2, 1.0, 0.0, periodic=False)
        assert e0 == pytest.approx(-1.0)

    def test_single_site_field_only(self):
        e0, _ = exact_ground(1, 1.0, 0.7, periodic=False)
        assert e0 == pytest.approx(-0.7)

    def test_power_iteration_agrees_with_dense_solve(self):
        # the iterative branch (n > 10) against a dense solve of the
        # same Hamiltonian
        e_pi, _ = exact_ground(11, 1.0, 0.5, periodic=True)
        H = np.zeros((2048, 2048), dtype=complex)
        spins = all_configs(11).astype(float)
        diag = np.zeros(2048)
        for j in range(11):
            diag -= spins[:, j] * spins[:, (j + 1) % 11]
        H += np.diag(diag)
        idx = np.arange(2048)
        for j in range(11):
            H[idx, idx ^ (1 << (11 - 1 - j))] += -0.5
        e_dense = np.linalg.eigvalsh(H)[0]
        assert e_pi == pytest.approx(e_dense, abs=1e-8)

    def test_cross_check_against_imaginary_time_flow(self):
        # independent route: repeated application of exp(-tau H)
        n, J, h = 8, 1.0, 0.5
        e0, _ = exact_ground(n, J, h, periodic=False)
        H = tfi_hamiltonian(n, J, h, periodic=False)
        vals, vecs = np.linalg.eigh(H)
        tau = 0.3
        prop = vecs @ np.diag(np.exp(-tau * vals)) @ vecs.conj().T
        # start in the spin-flip-even sector: the odd partner is nearly
        # degenerate at h = 0.5 and would stall a generic start vector
        v = np.ones(1 << n)
        v /= np.linalg.norm(v)
        for _ in range(300):
            v = prop @ v
            v /= np.linalg.norm(v)
        e_flow = float(np.real(v @ H @ v))
        assert e_flow == pytest.approx(e0, abs=1e-9)


class TestEntanglement:
    def test_product_state_has_zero_entropy(self):
        rng = np.random.default_rng(9)
        left = rng.normal(size=2) + 1j * rng.normal(size=2)
        right = rng.normal(size=4) + 1j * rng.normal(size=4)
        d = DenseState(3, np.kron(left, right))
        assert entanglement_entropy(d, 1) == pytest.approx(0.0, abs=1e-12)

    def test_bell_state_entropy_is_ln_two(self):
        amps = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
        assert entanglement_entropy(DenseState(2, amps), 1) == \
            pytest.approx(np.log(2.0), abs=1e-12)


class TestVariationalBound:
    def test_random_states_sit_above_the_ground_energy(self):
        rng = np.random.default_rng(10)
        e0, _ = exact_ground(6, 1.0, 0.5, periodic=True)
        for _ in range(20):
            st = random_ubm(rng, 6, 4, scale=0.4)
            d = densify_normalized(st)
            e, _ = tfi_expectations(d, 1.0, 0.5, periodic=True)
            assert e >= e0 - 1e-10
