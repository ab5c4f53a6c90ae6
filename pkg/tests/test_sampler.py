"""Metropolis sampling: calibration against dense Born distributions,
detailed balance, estimator accuracy, the joint two-replica sampler and
bit-reproducibility."""

import numpy as np
import pytest

from nnqs.dense import all_configs, config_index, densify_normalized, \
    tfi_expectations
from nnqs.errors import ConfigError, SignProblemError
from nnqs.randoms import random_rbm
from nnqs.sampler import (Estimate, SamplerConfig, estimate_energy,
                          estimate_sx, joint_ubm_sample, metropolis_sample)
from nnqs.states import RbmNns


class TestConfig:
    def test_burnin_must_be_smaller_than_sweeps(self):
        with pytest.raises(ConfigError):
            SamplerConfig(n_sweeps=10, n_burnin=10)

    def test_unknown_flip_scheme(self):
        with pytest.raises(ConfigError):
            SamplerConfig(flip_scheme="cluster")


class TestMetropolis:
    def test_uniform_state_magnetization_is_zero(self):
        st = RbmNns.zeros(6)
        cfg = SamplerConfig(n_chains=8, n_sweeps=800, n_burnin=100, seed=0)
        total = np.zeros(6)
        count = 0
        for batch in metropolis_sample(st, cfg):
            total += batch.sum(axis=0)
            count += batch.shape[0]
        mags = total / count
        # 3 sigma with sigma ~ 1/sqrt(samples); cushioned for correlation
        assert np.abs(mags).max() < 5.0 / np.sqrt(count)

    def test_empirical_distribution_matches_born_rule(self):
        rng = np.random.default_rng(1)
        st = random_rbm(rng, 8, 4, scale=0.3)
        cfg = SamplerConfig(n_chains=32, n_sweeps=2000, n_burnin=150, seed=2)
        counts = np.zeros(256)
        total = 0
        for batch in metropolis_sample(st, cfg):
            for row in batch:
                counts[config_index(row)] += 1
            total += len(batch)
        assert total >= 5 * 10 ** 4
        p_emp = counts / total
        p_true = np.abs(densify_normalized(st).amps) ** 2
        tv = 0.5 * np.abs(p_emp - p_true).sum()
        assert tv < 0.05

    def test_large_offset_polarizes_the_marginal(self):
        a = np.zeros(4, dtype=complex)
        a[0] = 2.5  # strongly favors s_0 = +1 under |psi|^2
        st = RbmNns(4, 0, a, [], np.zeros((0, 4)), np.zeros((4, 4)))
        cfg = SamplerConfig(n_chains=8, n_sweeps=600, n_burnin=100, seed=3)
        total = 0.0
        count = 0
        for batch in metropolis_sample(st, cfg):
            total += batch[:, 0].sum()
            count += batch.shape[0]
        spins = all_configs(4).astype(float)
        p = np.abs(densify_normalized(st).amps) ** 2
        expect = float(p @ spins[:, 0])
        assert expect > 0.98
        assert total / count == pytest.approx(expect, abs=0.02)

    def test_stationary_ratios_follow_born_weights(self):
        # detailed balance against |psi|^2 pins the visit-count ratio of
        # every single-flip pair at |psi(s)/psi(s')|^2
        rng = np.random.default_rng(4)
        st = random_rbm(rng, 3, 2, scale=0.4)
        cfg = SamplerConfig(n_chains=16, n_sweeps=8000, n_burnin=500, seed=5,
                            flip_scheme="random")
        counts = np.zeros(8)
        for sweep_idx, batch in enumerate(metropolis_sample(st, cfg)):
            if sweep_idx % 5:
                continue  # thin to reduce autocorrelation
            for row in batch:
                counts[config_index(row)] += 1
        p = np.abs(densify_normalized(st).amps) ** 2
        for i in range(8):
            for bit in range(3):
                j = i ^ (1 << bit)
                if j < i or counts[i] < 200 or counts[j] < 200:
                    continue
                log_ratio = np.log(counts[i] / counts[j])
                expect = np.log(p[i] / p[j])
                sigma = np.sqrt(1.0 / counts[i] + 1.0 / counts[j])
                assert abs(log_ratio - expect) < 3.0 * 2.0 * sigma


class TestEstimators:
    def test_energy_against_dense_value(self):
        rng = np.random.default_rng(6)
        st = random_rbm(rng, 8, 4, scale=0.3)
        cfg = SamplerConfig(n_chains=8, n_sweeps=1500, n_burnin=200, seed=7)
        est = estimate_energy(st, 1.0, 0.5, "open", cfg)
        e_true, _ = tfi_expectations(densify_normalized(st), 1.0, 0.5, False)
        assert abs(est.mean.real - e_true / 8) < 3 * est.std_error

    def test_diagonal_energy_at_zero_field(self):
        rng = np.random.default_rng(8)
        st = random_rbm(rng, 8, 3, scale=0.3)
        cfg = SamplerConfig(n_chains=8, n_sweeps=1200, n_burnin=150, seed=9)
        est = estimate_energy(st, 1.0, 0.0, "open", cfg)
        e_true, _ = tfi_expectations(densify_normalized(st), 1.0, 0.0, False)
        assert abs(est.mean.real - e_true / 8) < 3 * est.std_error

    def test_sx_on_uniform_state_is_exactly_one(self):
        st = RbmNns.zeros(5)
        cfg = SamplerConfig(n_chains=4, n_sweeps=120, n_burnin=20, seed=10)
        est = estimate_sx(st, cfg)
        assert est.mean == 1.0
        assert est.std_error == 0.0

    def test_sx_against_dense_value(self):
        rng = np.random.default_rng(11)
        st = random_rbm(rng, 8, 4, scale=0.3)
        cfg = SamplerConfig(n_chains=8, n_sweeps=1500, n_burnin=200, seed=12)
        est = estimate_sx(st, cfg)
        _, sx_true = tfi_expectations(densify_normalized(st), 1.0, 0.5, False)
        assert abs(est.mean.real - sx_true) < 3 * est.std_error

    def test_phase_offsets_suppress_sx(self):
        # purely imaginary visible offsets rotate sx away; dense check
        a = np.zeros(4, dtype=complex)
        a[:] = 0.25j * np.pi
        st = RbmNns(4, 0, a, [], np.zeros((0, 4)), np.zeros((4, 4)))
        cfg = SamplerConfig(n_chains=8, n_sweeps=800, n_burnin=100, seed=13)
        est = estimate_sx(st, cfg)
        _, sx_true = tfi_expectations(densify_normalized(st), 1.0, 0.5, False)
        assert sx_true == pytest.approx(0.0, abs=1e-12)
        assert abs(est.mean.real - sx_true) < max(3 * est.std_error, 1e-10)

    def test_local_energy_variance_shrinks_near_an_eigenstate(self):
        # zero-variance principle: monitored through the reported error
        # bar, which should be far smaller near the ground state than on
        # a generic state of the same size
        from nnqs.evolve import EvolveConfig, run_imaginary

        cfg = EvolveConfig(n=6, h_field=0.5, tau=0.05, steps=60,
                           measure_every=1, hub_matching="l1")
        near_ground = run_imaginary(cfg).best_state
        rng = np.random.default_rng(30)
        generic = random_rbm(rng, 6, 6, scale=0.3)
        scfg = SamplerConfig(n_chains=4, n_sweeps=800, n_burnin=100, seed=31)
        err_ground = estimate_energy(near_ground, 1.0, 0.5, "periodic",
                                     scfg).std_error
        err_generic = estimate_energy(generic, 1.0, 0.5, "periodic",
                                      scfg).std_error
        assert err_ground < err_generic

    def test_estimates_invariant_under_prefactor_rescaling(self):
        rng = np.random.default_rng(14)
        st = random_rbm(rng, 6, 3, scale=0.3)
        scaled = st.replace(log_prefactor=4.2 - 1.3j)
        cfg = SamplerConfig(n_chains=4, n_sweeps=400, n_burnin=50, seed=15)
        a = estimate_energy(st, 1.0, 0.5, "open", cfg)
        b = estimate_energy(scaled, 1.0, 0.5, "open", cfg)
        assert a.mean == b.mean and a.std_error == b.std_error

    def test_seeded_runs_are_bit_reproducible(self):
        rng = np.random.default_rng(16)
        st = random_rbm(rng, 6, 3, scale=0.3)
        cfg = SamplerConfig(n_chains=4, n_sweeps=300, n_burnin=50, seed=17)
        a = estimate_energy(st, 1.0, 0.5, "periodic", cfg)
        b = estimate_energy(st, 1.0, 0.5, "periodic", cfg)
        assert a == b


class TestJointSampler:
    def test_zero_state_accepts_everything(self):
        st = RbmNns.zeros(3, 2).to_ubm()
        res = joint_ubm_sample(st, SamplerConfig(n_chains=2, n_sweeps=50,
                                                 n_burnin=5, seed=0))
        assert res.acceptance_rate == 1.0

    def test_complex_parameters_refused_with_sign_problem_error(self):
        rng = np.random.default_rng(18)
        st = random_rbm(rng, 3, 2).to_ubm()
        with pytest.raises(SignProblemError):
            joint_ubm_sample(st, SamplerConfig())

    def test_visible_marginals_match_direct_rbm_sampling(self):
        rng = np.random.default_rng(19)
        st = random_rbm(rng, 4, 3, scale=0.3, complex_=False)
        jcfg = SamplerConfig(n_chains=8, n_sweeps=3000, n_burnin=300, seed=20)
        res = joint_ubm_sample(st.to_ubm(), jcfg)
        p = np.abs(densify_normalized(st).amps) ** 2
        spins = all_configs(4).astype(float)
        for j in range(4):
            truth = float(p @ spins[:, j])
            est = res.sz[j]
            assert abs(est.mean.real - truth) < max(3 * est.std_error, 0.02)

    def test_trotter_network_correlations_match_dense(self):
        from nnqs.evolve import build_trotter_ubm

        st = build_trotter_ubm(4, 2, 0.1, 1.0, 0.5)
        cfg = SamplerConfig(n_chains=8, n_sweeps=3000, n_burnin=300, seed=21)
        res = joint_ubm_sample(st, cfg)
        p = np.abs(densify_normalized(st).amps) ** 2
        spins = all_configs(4).astype(float)
        for (j, k), est in res.szsz.items():
            truth = float(p @ (spins[:, j] * spins[:, k]))
            assert abs(est.mean.real - truth) < max(3 * est.std_error, 0.02)


class TestEstimateType:
    def test_negative_std_error_rejected(self):
        with pytest.raises(ConfigError):
            Estimate(0.0, -1.0, 10, 0.5)
