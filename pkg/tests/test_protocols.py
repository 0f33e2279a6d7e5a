import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from corrsim import channels as ch
from corrsim import linalg as la
from corrsim import protocols as pr
from corrsim import states as st
from corrsim.errors import PreconditionError, ProtocolError

RHO_CL = st.bell_dephased()


class TestBellErasure:
    def test_full_run(self):
        rep = pr.bell_erasure_demo()
        assert rep.totals.log_n == 2.0
        assert rep.steps[-1].achieved_eps < 1e-12
        assert la.trace_norm(rep.final_state.matrix - np.eye(4) / 4) < 1e-12

    def test_step_one(self):
        rep = pr.bell_erasure_demo("Z")
        assert abs(rep.steps[0].after["mutual_information"] - 1) < 1e-9
        assert rep.steps[0].separability.separable

    def test_order_swapped(self):
        zx, xz = pr.bell_erasure_demo("ZX"), pr.bell_erasure_demo("XZ")
        assert zx.totals == xz.totals
        assert np.allclose(zx.final_state.matrix, xz.final_state.matrix, atol=1e-15)

    def test_reproducible(self):
        assert pr.bell_erasure_demo().as_dict() == pr.bell_erasure_demo().as_dict()

    def test_totals_are_step_sums(self):
        rep = pr.bell_erasure_demo()
        for key in ("log_n", "shannon", "entropy_exchange"):
            assert getattr(rep.totals, key) == sum(getattr(s.cost, key) for s in rep.steps)

    def test_bad_order(self):
        with pytest.raises(PreconditionError):
            pr.bell_erasure_demo("ZY")


class TestDecorrelation:
    def test_shapes_and_rate(self):
        res = pr.decorrelate_typical(RHO_CL, 2, 0.1, 4, seed=0)
        assert res.channel.locality == ch.Locality.A_LUR
        assert res.channel.dims == (4, 4) and res.rate == 1.0
        assert 0 <= res.achieved_eps <= 2

    def test_seeded_determinism(self):
        a = pr.decorrelate_typical(RHO_CL, 3, 0.1, 8, seed=5)
        b = pr.decorrelate_typical(RHO_CL, 3, 0.1, 8, seed=5)
        assert a.achieved_eps == b.achieved_eps

    def test_product_input(self):
        rho = st.DensityMatrix(np.diag([0.7, 0.3]), (2,)).tensor(st.DensityMatrix(np.diag([0.6, 0.4]), (2,)))
        for size in (1, 3):
            assert pr.decorrelate_typical(rho, 2, 0.5, size, seed=1).achieved_eps < 1e-12

    def test_degenerate_local_state(self):
        rho = st.DensityMatrix(np.diag([1.0, 0, 0, 0]), (2, 2))
        res = pr.decorrelate_typical(rho, 2, 0.1, 2, seed=0)
        assert res.achieved_eps < 1e-12

    def test_empty_typical_subspace(self):
        rho = st.DensityMatrix(np.diag([0.9, 0, 0, 0.1]), (2, 2))
        with pytest.raises(ProtocolError, match="typical"):
            pr.decorrelate_typical(rho, 2, 0.05, 2, seed=0)

    def test_full_group_decorrelates(self):
        # all D² Weyl operators on Alice's typical subspace twirl it completely
        res = pr.decorrelate_typical(RHO_CL, 3, 0.1, 64, seed=0)
        assert res.diagnostics["typical_rank_a"] == 8

    def test_median_decreases(self):
        sizes = (2, 8, 32)
        med = [np.median([pr.decorrelate_typical(RHO_CL, 3, 0.1, n, seed=s).achieved_eps for s in range(20)])
               for n in sizes]
        assert med[0] > med[1] > med[2]

    def test_entropy_exchange_bound_on_outputs(self):
        big = ch.ab_copies(RHO_CL, 3)
        for seed in range(3):
            res = pr.decorrelate_typical(RHO_CL, 3, 0.1, 16, seed=seed)
            flat = st.DensityMatrix(big.matrix, res.channel.dims)
            s_e = ch.entropy_exchange(res.channel, flat)
            bound = ch.decorrelation_lower_bound(1.0, 3, res.achieved_eps, 1.0)
            assert s_e >= bound - 1e-6

    def test_sweep_rows(self):
        rows = pr.decorrelation_sweep(RHO_CL, 2, 0.1, [2, 4], [0, 1])
        assert [(r["param"], r["seed"]) for r in rows] == [(2, 0), (2, 1), (4, 0), (4, 1)]
        assert all(r["log_n"] >= r["shannon"] >= r["entropy_exchange"] - 2e-9 for r in rows)

    def test_bipartite_only(self):
        with pytest.raises(PreconditionError):
            pr.decorrelate_typical(st.ghz3().density(), 1, 0.1, 2)


class TestPureStates:
    def test_bell(self):
        res = pr.disentangle_pure(st.bell())
        assert res.schmidt_rank == 2 and res.costs.log_n == 1
        assert la.trace_norm(res.output.matrix - RHO_CL.matrix) < 1e-12

    def test_product(self):
        res = pr.disentangle_pure(st.PureState(np.kron([1, 0], [0, 1]), (2, 2)))
        assert res.schmidt_rank == 1 and res.costs.log_n == 0

    def test_weighted(self):
        res = pr.disentangle_pure(st.two_qubit_pure(0.8))
        assert np.allclose(res.output.matrix, np.diag([0.8, 0, 0, 0.2]), atol=1e-12)
        assert abs(res.costs.entropy_exchange - st.binary_entropy(0.8)) < 1e-10
        assert res.costs.entropy_exchange < res.costs.log_n == 1

    @settings(max_examples=30, deadline=None)
    @given(hst.integers(0, 100_000), hst.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)]))
    def test_output_commutes_with_schmidt_projectors(self, seed, dims):
        psi = st.random_state("haar_pure", dims, seed)
        res = pr.disentangle_pure(psi)
        form = st.schmidt(psi)
        out = res.output.matrix
        for j in range(form.rank):
            pa = np.kron(la.proj(form.left_basis[:, j]), np.eye(dims[1]))
            pb = np.kron(np.eye(dims[0]), la.proj(form.right_basis[:, j]))
            assert np.max(np.abs(pa @ out - out @ pa)) < 1e-10
            assert np.max(np.abs(pb @ out - out @ pb)) < 1e-10

    def test_classical_values(self):
        assert abs(pr.classical_correlation_dephasing(st.bell())[1] - 1) < 1e-9
        product = st.PureState(np.kron([1, 0], [1, 0]), (2, 2))
        assert abs(pr.classical_correlation_dephasing(product)[1]) < 1e-12
        assert abs(pr.classical_correlation_dephasing(st.two_qubit_pure(0.8))[1] - 0.7219280948873623) < 1e-9

    def test_classical_matches_disentangled(self):
        psi = st.random_state("haar_pure", (3, 3), 2)
        sigma, i_cl = pr.classical_correlation_dephasing(psi)
        assert np.allclose(sigma.matrix, pr.disentangle_pure(psi).output.matrix)
        assert abs(i_cl - st.entanglement_entropy(psi)) < 1e-9


class TestTwoStep:
    def test_bell(self):
        res = pr.two_step_cost_comparison(st.bell().density(), ch.z_twirl())
        assert abs(res.two_step - 2) < 1e-9 and abs(res.one_shot - 2) < 1e-9 and abs(res.gap) < 1e-9

    def test_weighted_dephasing(self):
        psi = st.two_qubit_pure(0.8)
        chan = ch.MixedUnitaryChannel.a_lur([0.5, 0.5], ch.dephasing_unitaries(np.eye(2)), (2, 2))
        assert abs(pr.two_step_cost_comparison(psi.density(), chan).gap) < 1e-12

    def test_requires_separable(self):
        with pytest.raises(PreconditionError):
            pr.two_step_cost_comparison(st.bell().density(), ch.identity_channel((2, 2)))

    def test_non_unital_flagged(self):
        reset = [np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]])]
        chan = ch.KrausChannel.local(reset, [la.I2], (2, 2))
        res = pr.two_step_cost_comparison(st.bell().density(), chan)
        assert not res.locally_unital and res.gap < 0

    def test_random_search(self):
        for t in range(20):
            rho = st.random_state("induced_mixed", (2, 2), 9, t)
            chan = pr.find_disentangling_twirl(rho, st.rng_for(9, 1000 + t))
            res = pr.two_step_cost_comparison(rho, chan)
            assert res.locally_unital and res.gap >= -1e-9


class TestMultipartite:
    def test_ghz(self):
        c_er, seq = pr.multipartite_erasure(st.ghz3())
        assert abs(c_er - 3) < 1e-9 and np.allclose(seq, [2, 1])

    def test_product(self):
        rho = st.maximally_mixed((2,)).tensor(st.DensityMatrix(np.diag([0.3, 0.7]), (2,)))
        c_er, _ = pr.multipartite_erasure(rho.tensor(st.maximally_mixed((2,))))
        assert abs(c_er) < 1e-12

    def test_grouped_parties(self):
        c_er, seq = pr.multipartite_erasure(st.ghz3(), [[0, 1], [2]])
        assert abs(c_er - 2) < 1e-9 and len(seq) == 1

    def test_one_party(self):
        with pytest.raises(PreconditionError):
            pr.multipartite_erasure(st.ghz3(), [[0, 1, 2]])

    @settings(max_examples=30, deadline=None)
    @given(hst.integers(0, 100_000))
    def test_telescoping(self, seed):
        c_er, seq = pr.multipartite_erasure(st.random_state("induced_mixed", (2, 2, 2), seed))
        assert abs(sum(seq) - c_er) < 1e-9


class TestScans:
    def test_ssa(self):
        res = pr.ssa_scan(200, seed=42)
        assert res.violations == 0 and res.min_value >= -1e-9

    def test_ssa_products(self):
        res = pr.ssa_scan(20, kind="product")
        assert np.max(np.abs(res.values)) < 1e-10

    def test_ssa_ghz(self):
        res = pr.ssa_scan(5, include_ghz=True)
        assert abs(res.values[-1] - 1) < 1e-10

    def test_conjecture_dephasing_saturates(self):
        res = pr.conjecture_scan(100, family="schmidt_dephasing", seed=3)
        assert res.separable_trials == 100 and not res.witnesses and abs(res.max_excess) < 1e-9

    def test_conjecture_trace_replace(self):
        res = pr.conjecture_scan(20, family="trace_replace")
        assert res.separable_trials == 20 and res.max_excess <= 1e-12

    def test_conjecture_random(self):
        res = pr.conjecture_scan(100, (2, 3), seed=1, family="random_local")
        assert res.trials == 100 and res.family == "random_local"

    def test_conjecture_witness_serialized(self):
        res = pr.conjecture_scan(50, family="random_local", threshold=-math.inf)
        assert len(res.witnesses) == res.separable_trials
        w = res.witnesses[0]
        assert {"trial", "excess", "state", "kraus"} <= set(w)

    def test_conjecture_dims_restricted(self):
        with pytest.raises(PreconditionError):
            pr.conjecture_scan(1, (3, 3))
