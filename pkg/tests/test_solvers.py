import numpy as np
import pytest

from pssv.matcore import lagrangian_value
from pssv.metrics import nrmse, rank_deficiency_ratio
from pssv.solvers import (
    CompletionConfig,
    ObservationMask,
    RpcaConfig,
    default_lambda,
    kkt_residuals,
    solve_completion,
    solve_rpca,
)
from pssv.synth import PrngStream, gen_low_rank, gen_mask, make_instance

from reference import svt_ialm


@pytest.fixture(scope="module")
def planted():
    return make_instance(1000, 40, 3, 0.05, PrngStream(7))


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(rho=1.0), dict(tol=0), dict(max_iter=0),
                                    dict(target_rank=-1), dict(lam=-1.0), dict(inner_iters=0),
                                    dict(mu0=0.0)])
    def test_rpca_rejects(self, kw):
        with pytest.raises(ValueError):
            RpcaConfig(**kw)

    @pytest.mark.parametrize("kw", [dict(rho=0.9), dict(mu0=-1.0), dict(target_rank=-2)])
    def test_completion_rejects(self, kw):
        with pytest.raises(ValueError):
            CompletionConfig(**kw)

    def test_default_lambda(self):
        assert default_lambda((1000, 40)) == pytest.approx(1 / np.sqrt(1000))
        assert default_lambda((40, 1000)) == pytest.approx(1 / np.sqrt(1000))


class TestMask:
    def test_from_indices(self):
        mask = ObservationMask.from_indices((3, 4), [0, 2], [1, 3])
        assert mask.count == 2 and mask.shape == (3, 4)
        assert mask.observed == [(0, 1), (2, 3)]
        np.testing.assert_array_equal(mask.project(np.ones((3, 4))).sum(), 2)

    def test_rejects_out_of_bounds_and_duplicates(self):
        with pytest.raises(ValueError):
            ObservationMask.from_indices((3, 4), [3], [0])
        with pytest.raises(ValueError):
            ObservationMask.from_indices((3, 4), [1, 1], [2, 2])

    def test_from_array_rejects_non_binary(self):
        with pytest.raises(ValueError):
            ObservationMask.from_array([[0, 2]])

    def test_read_only(self):
        mask = ObservationMask.from_array(np.eye(3))
        with pytest.raises(ValueError):
            mask.array[0, 1] = True


class TestSolveRpca:
    def test_clean_low_rank(self):
        O = gen_low_rank(100, 20, 2, PrngStream(3))
        sol = solve_rpca(O, RpcaConfig(target_rank=2))
        assert sol.converged
        assert np.linalg.norm(sol.E) / np.linalg.norm(O) < 1e-6
        assert nrmse(O, sol.A) < 1e-6

    def test_planted_pssv(self, planted):
        sol = solve_rpca(planted.O, RpcaConfig(target_rank=3))
        assert sol.converged and nrmse(planted.A_gt, sol.A) < 0.01

    def test_planted_both_methods_agree(self, planted):
        for N in (0, 3):
            assert nrmse(planted.A_gt, solve_rpca(planted.O, RpcaConfig(target_rank=N)).A) < 0.01

    def test_zero_input(self):
        with pytest.raises(ValueError):
            solve_rpca(np.zeros((5, 4)))

    @pytest.mark.parametrize("bad", [np.nan, np.inf])
    def test_non_finite_input(self, bad):
        O = np.ones((4, 3))
        O[1, 1] = bad
        with pytest.raises(ValueError):
            solve_rpca(O)

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError):
            solve_rpca(np.ones((4, 3)), RpcaConfig(target_rank=4))

    def test_iteration_cap_is_flagged(self, planted):
        sol = solve_rpca(planted.O, RpcaConfig(target_rank=3, max_iter=3))
        assert not sol.converged and sol.iterations == 3 and len(sol.trace) == 3
        assert sol.residual >= 1e-7

    def test_mu_grows_by_rho(self, planted):
        sol = solve_rpca(planted.O, RpcaConfig(target_rank=3, rho=1.3))
        mu = np.array(sol.trace.mu)
        assert np.all(np.diff(mu) > 0)
        np.testing.assert_allclose(mu[1:] / mu[:-1], 1.3, rtol=1e-12)
        assert mu[0] == pytest.approx(1.25 / np.linalg.norm(planted.O, 2))

    def test_deterministic(self, planted):
        a = solve_rpca(planted.O, RpcaConfig(target_rank=3))
        b = solve_rpca(planted.O, RpcaConfig(target_rank=3))
        assert np.array_equal(a.A, b.A) and np.array_equal(a.E, b.E)
        assert a.trace.feasibility == b.trace.feasibility

    def test_trace_objective_uses_solver_rank(self, planted):
        sol = solve_rpca(planted.O, RpcaConfig(target_rank=0, max_iter=5))
        s = np.linalg.svd(sol.A, compute_uv=False)
        expected = s.sum() + sol.lam * np.abs(sol.E).sum()
        assert sol.trace.objective[-1] == pytest.approx(expected, rel=1e-10)

    def test_inner_iterations(self, planted):
        sol = solve_rpca(planted.O, RpcaConfig(target_rank=3, inner_iters=3))
        assert sol.converged and nrmse(planted.A_gt, sol.A) < 0.01

    def test_explicit_init_and_mu0(self, planted):
        Z = np.zeros_like(planted.O)
        sol = solve_rpca(planted.O, RpcaConfig(target_rank=3, mu0=0.05), init=(None, None, Z))
        assert sol.trace.mu[0] == 0.05 and sol.converged

    def test_init_shape_checked(self, planted):
        with pytest.raises(ValueError):
            solve_rpca(planted.O, init=(np.zeros((3, 3)), None, None))

    def test_per_block_descent(self):
        for seed in range(5):
            inst = make_instance(200, 20, 2, 0.1, PrngStream(seed))
            N, viol = 2, []

            def cb(k, st):
                lam = default_lambda(inst.O.shape)
                L = lambda A, E: lagrangian_value(A, E, st["Z"], inst.O, N, lam, st["mu"])  # noqa
                l0 = L(st["A_prev"], st["E_prev"])
                l1 = L(st["A"], st["E_prev"])
                l2 = L(st["A"], st["E"])
                viol.append(max(l1 - l0, l2 - l1))

            solve_rpca(inst.O, RpcaConfig(target_rank=N), callback=cb)
            assert max(viol) <= 1e-9

    def test_rank_encouragement(self):
        ratios = []
        for seed in range(20):
            inst = make_instance(1000, 40, 3, 0.05, PrngStream(100 + seed))
            sol = solve_rpca(inst.O, RpcaConfig(target_rank=3))
            assert nrmse(inst.A_gt, sol.A) < 0.01
            ratios.append(rank_deficiency_ratio(sol.A, 3))
        assert min(ratios) >= 0.01

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_nuclear_matches_reference(self, seed):
        inst = make_instance(300, 30, 2, 0.05, PrngStream(seed))
        A_ref, _ = svt_ialm(inst.O)
        A = solve_rpca(inst.O, RpcaConfig(target_rank=0)).A
        assert np.linalg.norm(A - A_ref) / np.linalg.norm(A_ref) < 1e-6


class TestKkt:
    def test_trivial_point(self):
        O = np.outer([1.0, 2], [3.0, 1])
        Z = np.full_like(O, 0.2)
        res = kkt_residuals(O, O, np.zeros_like(O), Z, 0.5)
        assert res == {"feasibility": 0.0, "e_stationarity": 0.0}

    def test_violation_values(self):
        O = np.ones((1, 2))
        E = np.array([[0.0, 1.0]])
        Z = np.array([[0.7, 0.1]])
        res = kkt_residuals(O, O - E, E, Z, 0.5)
        assert res["e_stationarity"] == pytest.approx(0.4)

    def test_converged_solution(self, planted):
        sol = solve_rpca(planted.O, RpcaConfig(target_rank=3))
        res = kkt_residuals(planted.O, sol.A, sol.E, sol.Z, sol.lam)
        assert res["feasibility"] < 1e-7
        assert res["feasibility"] == pytest.approx(sol.residual, abs=1e-12)
        assert res["e_stationarity"] < 1e-4

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            kkt_residuals(np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2)), 1.0)


class TestCompletion:
    def test_full_mask_is_identity(self):
        O = gen_low_rank(40, 30, 4, PrngStream(2))
        mask = ObservationMask(np.ones(O.shape, dtype=bool))
        sol = solve_completion(O, mask, CompletionConfig(target_rank=4))
        assert nrmse(O, sol.A) < 1e-6

    @pytest.mark.parametrize("seed", [11])
    def test_half_observed_rank5(self, seed):
        stream = PrngStream(seed)
        A = gen_low_rank(100, 100, 5, stream)
        mask = gen_mask(100, 100, 0.5, stream)
        O = np.where(mask.array, A, np.nan)
        sol = solve_completion(O, mask, CompletionConfig(target_rank=5))
        assert sol.converged and nrmse(A, sol.A) < 1e-3

    def test_observed_entries_honoured(self):
        stream = PrngStream(4)
        A = gen_low_rank(30, 20, 2, stream)
        mask = gen_mask(30, 20, 0.6, stream)
        sol = solve_completion(A, mask, CompletionConfig(target_rank=2))
        np.testing.assert_array_equal(sol.B[mask.array], A[mask.array])

    def test_empty_mask(self):
        with pytest.raises(ValueError):
            solve_completion(np.ones((3, 3)), ObservationMask(np.zeros((3, 3), dtype=bool)))

    def test_mask_shape_mismatch(self):
        with pytest.raises(ValueError):
            solve_completion(np.ones((3, 3)), ObservationMask(np.ones((3, 4), dtype=bool)))

    def test_nan_on_observed_entry(self):
        O = np.ones((3, 3))
        O[0, 0] = np.nan
        with pytest.raises(ValueError):
            solve_completion(O, ObservationMask(np.ones((3, 3), dtype=bool)))
