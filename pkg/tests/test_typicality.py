import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy.stats import binom

from corrsim import linalg as la
from corrsim import states as st
from corrsim import typicality as ty
from corrsim.errors import DimensionCapError, PreconditionError

BIASED = st.DensityMatrix(np.diag([0.9, 0.1]), (2,))


class TestTypicalProjector:
    def test_pure(self):
        tp = ty.typical_projector(st.bell().density(), 3, 0.1)
        assert tp.rank == 1
        rep = ty.typicality_report(tp, st.bell().density(), 3, 0.1)
        assert abs(rep.mass - 1) < 1e-12 and rep.dim == 1 and rep.sandwich_ok

    def test_maximally_mixed_single_copy(self):
        tp = ty.typical_projector(st.maximally_mixed((2,)), 1, 0.1)
        assert tp.rank == 2

    def test_weight_one_strings(self):
        tp = ty.typical_projector(BIASED, 10, 0.2)
        assert tp.rank == 10
        s = st.binary_entropy(0.9)
        brute = [bits for bits in itertools.product((0, 1), repeat=10)
                 if abs(-sum(math.log2(0.1 if b else 0.9) for b in bits) - 10 * s) < 0.2 * 10]
        assert len(brute) == 10 and all(sum(b) == 1 for b in brute)

    def test_projector_invariants(self):
        rho = st.random_state("induced_mixed", (2,), 3)
        tp = ty.typical_projector(rho, 6, 0.3)
        p = tp.projector
        assert np.max(np.abs(p @ p - p)) < 1e-9 and np.max(np.abs(p - p.conj().T)) < 1e-9
        big = rho.power(6).matrix
        assert np.max(np.abs(p @ big - big @ p)) <= 1e-10

    def test_cap(self, monkeypatch):
        monkeypatch.setenv("CORRSIM_DIM_CAP", "64")
        with pytest.raises(DimensionCapError):
            ty.typical_projector(BIASED, 7, 0.1)

    def test_degenerate_flag(self):
        assert ty.typical_projector(st.maximally_mixed((2,)), 2, 0.1).degenerate
        assert not ty.typical_projector(BIASED, 2, 0.1).degenerate


class TestTypicalityReport:
    def test_small_n_mass(self):
        rep = ty.typicality_report(ty.typical_projector(BIASED, 10, 0.2), BIASED, 10, 0.2)
        assert rep.dim == 10 and abs(rep.mass - 10 * 0.9**9 * 0.1) < 1e-9
        assert rep.sandwich_ok and not rep.converged and rep.notes

    def test_counting_matches_matrix(self):
        for n, eps in [(4, 0.3), (8, 0.25), (10, 0.2), (12, 0.15)]:
            a = ty.typicality_report(ty.typical_projector(BIASED, n, eps), BIASED, n, eps)
            b = ty.typicality_report_counting([0.9, 0.1], n, eps)
            assert a.dim == b.dim and abs(a.mass - b.mass) < 1e-12 and a.sandwich_ok == b.sandwich_ok

    def test_counting_matches_binomial_oracle(self):
        n, eps, s = 200, 0.1, st.binary_entropy(0.9)
        ks = np.arange(n + 1)
        surprisal = -(n - ks) * math.log2(0.9) - ks * math.log2(0.1)
        typical = np.abs(surprisal - n * s) < eps * n
        oracle = binom.pmf(ks[typical], n, 0.1).sum()
        rep = ty.typicality_report_counting([0.9, 0.1], n, eps)
        assert abs(rep.mass - oracle) < 1e-12 and rep.sandwich_ok

    def test_three_outcome_counting(self):
        rho = st.DensityMatrix(np.diag([0.5, 0.3, 0.2]), (3,))
        a = ty.typicality_report(ty.typical_projector(rho, 6, 0.2), rho, 6, 0.2)
        b = ty.typicality_report_counting([0.5, 0.3, 0.2], 6, 0.2)
        assert a.dim == b.dim and abs(a.mass - b.mass) < 1e-12

    def test_dimension_upper_bound(self):
        for n in (4, 8, 12):
            rep = ty.typicality_report_counting([0.7, 0.3], n, 0.2)
            assert rep.dim_upper_ok and rep.dim <= 2 ** (n * (st.binary_entropy(0.7) + 0.2))

    @settings(max_examples=20, deadline=None)
    @given(hst.integers(0, 10_000), hst.integers(1, 8), hst.floats(0.05, 0.5))
    def test_sandwich_random(self, seed, n, eps):
        rho = st.random_state("induced_mixed", (2,), seed)
        tp = ty.typical_projector(rho, n, eps)
        assert ty.typicality_report(tp, rho, n, eps).sandwich_ok


class TestGentle:
    def test_identity(self):
        res = ty.gentle_measurement_check(BIASED, np.eye(2))
        assert abs(res.delta) < 1e-15 and res.lhs < 1e-15

    def test_diagonal(self):
        res = ty.gentle_measurement_check(BIASED, np.diag([1.0, 0.0]))
        assert abs(res.delta - 0.1) < 1e-12 and abs(res.lhs - 0.1) < 1e-12
        assert abs(res.bound - math.sqrt(0.8)) < 1e-12 and res.ok

    def test_outside_interval(self):
        with pytest.raises(PreconditionError):
            ty.gentle_measurement_check(BIASED, 1.5 * np.eye(2))

    def test_subnormalized(self):
        res = ty.gentle_measurement_check(0.5 * BIASED.matrix, np.diag([1.0, 0.5]))
        assert res.ok

    @settings(max_examples=50, deadline=None)
    @given(hst.integers(0, 100_000))
    def test_random_effects(self, seed):
        rng = st.rng_for(seed)
        rho = st.random_state("induced_mixed", (4,), seed)
        u = ty.haar_unitary(4, rng)
        x = u @ np.diag(rng.random(4)) @ u.conj().T
        assert ty.gentle_measurement_check(rho, x).ok


class TestEnsembles:
    def test_weyl_commutation(self):
        for d in (2, 3, 5):
            x, z = ty.shift_operator(d), ty.clock_operator(d)
            assert np.allclose(z @ x, np.exp(2j * np.pi / d) * x @ z, atol=1e-9)
            for a, b in itertools.product(range(d), repeat=2):
                assert la.is_unitary(ty.weyl_operator(a, b, d))

    def test_full_weyl_twirl_is_private(self):
        rng = np.random.default_rng(0)
        iso = ty.haar_unitary(6, rng)[:, :3]
        us = ty.generate_ensemble(ty.UnitaryEnsembleSpec("discrete_weyl", 3, support=iso))
        assert len(us) == 9
        phi = iso @ st.random_state("induced_mixed", (3,), 1).matrix @ iso.conj().T
        support = iso @ iso.conj().T
        out = ty.twirl(us, phi)
        assert np.allclose(out, np.trace(phi) / 3 * support, atol=1e-12)
        assert np.allclose(ty.twirl(us, out), out, atol=1e-12)

    def test_identity_off_support(self):
        rng = np.random.default_rng(1)
        iso = ty.haar_unitary(5, rng)[:, :2]
        off = np.eye(5) - iso @ iso.conj().T
        for u in ty.generate_ensemble(ty.UnitaryEnsembleSpec("haar", 2, support=iso, seed=3), 4):
            assert la.is_unitary(u) and np.allclose(u @ off, off)

    def test_sampled_weyl(self):
        us = ty.generate_ensemble(ty.UnitaryEnsembleSpec("discrete_weyl", 4, seed=2), 7)
        assert len(us) == 7

    def test_phase_family_qubit(self):
        us = ty.generate_ensemble(ty.UnitaryEnsembleSpec("phase_family", 2))
        assert np.allclose(us[0], la.SIGMA_Z) and np.allclose(us[1], np.eye(2))

    def test_phase_family_kills_off_diagonal(self):
        psi = st.random_state("haar_pure", (3, 3), 4)
        form = st.schmidt(psi)
        basis = np.kron(form.left_basis, form.right_basis)
        spec = ty.UnitaryEnsembleSpec("phase_family", 3, support=form.left_basis)
        us = [np.kron(u, np.eye(3)) for u in ty.generate_ensemble(spec)]
        out = ty.twirl(us, psi.density().matrix)
        expected = sum(f * la.proj(basis[:, 3 * j + j]) for j, f in enumerate(form.coefficients))
        assert np.max(np.abs(out - expected)) < 1e-10

    def test_haar_mean(self):
        rng = st.rng_for(11)
        acc = np.zeros((4, 4), dtype=complex)
        for _ in range(10_000):
            v = ty.haar_unitary(4, rng)[:, 0]
            acc += np.outer(v, v.conj())
        assert la.trace_norm(acc / 10_000 - np.eye(4) / 4) < 5e-2

    def test_haar_phase_fix(self):
        # without the R-diagonal correction E[U_00] would be biased away from 0
        rng = st.rng_for(12)
        first = np.array([ty.haar_unitary(2, rng)[0, 0] for _ in range(4000)])
        assert abs(first.mean()) < 0.05


class TestChernoff:
    def test_deterministic(self):
        m = np.diag([0.5, 0.25])

        def sampler(rng, size):
            return np.broadcast_to(m, (size, 2, 2))

        res = ty.chernoff_trial(sampler, 16, 0.2, 20, 0, mean=m)
        assert res.violation_rate == 0 and res.ok

    def test_rejects_out_of_interval(self):
        def sampler(rng, size):
            return np.broadcast_to(2 * np.eye(2), (size, 2, 2))

        with pytest.raises(PreconditionError):
            ty.chernoff_trial(sampler, 4, 0.2, 2, 0, mean=2 * np.eye(2))

    @pytest.mark.parametrize("n_samples", [32, 128, 512, 1024])
    @pytest.mark.parametrize("eps", [0.2, 0.5])
    def test_bernoulli(self, n_samples, eps):
        sampler, mean = ty.bernoulli_sampler(0.3)
        res = ty.chernoff_trial(sampler, n_samples, eps, 400, 5, mean=mean)
        assert res.violation_rate <= res.bound + 3 * res.stderr

    def test_pilot_estimates_mean(self):
        sampler, mean = ty.bernoulli_sampler(0.4)
        res = ty.chernoff_trial(sampler, 64, 0.5, 50, 1)
        assert abs(res.mu - 0.4) < 0.05

    def test_weyl_decay(self):
        d = 4
        rho_tilde = np.diag([1 / d if i // d == i % d else 0 for i in range(d * d)])
        sampler, mean = ty.weyl_sampler(rho_tilde, (d, d))
        rates = [ty.chernoff_trial(sampler, n, 0.2, 100, 3, mean=mean).violation_rate
                 for n in (32, 128, 512, 1024)]
        assert all(b <= a for a, b in zip(rates, rates[1:])) and rates[-1] < rates[0]
