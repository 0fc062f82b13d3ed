import math

import numpy as np
import pytest

from oracles import random_psd, simplex_grid_min, simplex_support_min
from tta_lab import (
    GammaMatrix,
    InvalidInput,
    SingularGamma,
    SolverOptions,
    condition_diagnostics,
    solve,
    solve_closed_form,
    solve_projected,
    uniform_weights,
    weighted_risk,
)

EXACT = SolverOptions(ridge_lambda=0.0)


class TestClosedForm:
    @pytest.mark.parametrize("m", [1, 2, 5, 9])
    def test_identity_gives_uniform(self, m):
        r = solve_closed_form(GammaMatrix(np.eye(m)), EXACT)
        np.testing.assert_allclose(r.weights.weights, 1.0 / m, atol=1e-15)
        assert r.weights.provenance == "closed_form_raw"
        assert r.iterations == 0

    @pytest.mark.parametrize("rho", [-0.95, -0.3, 0.0, 0.4, 0.99])
    def test_exchangeable_pair(self, rho):
        r = solve_closed_form(GammaMatrix([[1.0, rho], [rho, 1.0]]), EXACT)
        np.testing.assert_allclose(r.weights.weights, [0.5, 0.5], atol=1e-12)

    def test_diag_1_4(self):
        # simplex grid at step 1e-4 puts the minimum at (0.8, 0.2)
        r = solve_closed_form(GammaMatrix(np.diag([1.0, 4.0])), EXACT)
        np.testing.assert_allclose(r.weights.weights, [0.8, 0.2], atol=1e-9)
        grid_val, grid_w = simplex_grid_min(np.diag([1.0, 4.0]), 1e-4)
        np.testing.assert_allclose(r.weights.weights, grid_w, atol=1e-3)

    def test_negative_weight_flagged(self):
        r = solve_closed_form(GammaMatrix([[1.0, 2.0], [2.0, 5.0]]), EXACT)
        np.testing.assert_allclose(r.weights.weights, [1.5, -0.5], atol=1e-12)
        assert r.weights.negative_weights_present

    def test_lagrange_multiplier_and_kkt(self, rng):
        for _ in range(20):
            m = int(rng.integers(2, 7))
            gamma = GammaMatrix(random_psd(rng, m))
            opts = SolverOptions(ridge_lambda=1e-6)
            r = solve_closed_form(gamma, opts)
            grad = gamma.regularized(1e-6).entries @ r.weights.weights
            np.testing.assert_allclose(grad, r.lagrange_lambda, atol=1e-8 * max(1, abs(r.lagrange_lambda)))
            assert r.achieved_risk == pytest.approx(r.lagrange_lambda, rel=1e-9)

    def test_singular_without_ridge(self):
        with pytest.raises(SingularGamma):
            solve_closed_form(GammaMatrix(np.ones((2, 2))), EXACT)

    def test_zero_matrix_is_singular_even_with_ridge(self):
        with pytest.raises(SingularGamma):
            solve_closed_form(GammaMatrix(np.zeros((3, 3))))

    def test_ridge_rescues_rank_one(self):
        r = solve_closed_form(GammaMatrix([[1.0, 2.0], [2.0, 4.0]]))
        assert math.isclose(r.weights.weights.sum(), 1.0, abs_tol=1e-12)
        # eigenvalues of the ridged matrix are 5 + 2.5e-8 and 2.5e-8
        assert r.condition_estimate == pytest.approx(2e8, rel=1e-6)
        assert not r.ill_conditioned
        assert solve_closed_form(
            GammaMatrix([[1.0, 2.0], [2.0, 4.0]]), SolverOptions(ridge_lambda=1e-12)
        ).ill_conditioned

    def test_scale_invariance(self, rng):
        gamma = random_psd(rng, 4)
        a = solve_closed_form(GammaMatrix(gamma), SolverOptions(ridge_lambda=1e-4))
        b = solve_closed_form(GammaMatrix(gamma * 3.7e5), SolverOptions(ridge_lambda=1e-4))
        np.testing.assert_allclose(a.weights.weights, b.weights.weights, atol=1e-9)

    def test_invalid_options(self):
        with pytest.raises(InvalidInput):
            SolverOptions(ridge_lambda=-1.0)
        with pytest.raises(InvalidInput):
            SolverOptions(conditioning_threshold=1.0)


class TestProjected:
    def test_noop_when_closed_form_feasible(self, rng):
        gamma = GammaMatrix(np.diag(rng.uniform(0.5, 3, 5)))
        raw = solve_closed_form(gamma)
        proj = solve_projected(gamma)
        np.testing.assert_array_equal(raw.weights.weights, proj.weights.weights)
        assert proj.weights.provenance == "closed_form_projected"

    def test_near_collinear_pair(self):
        g = np.array([[1.0, 0.99], [0.99, 1.0001]])
        r = solve_projected(GammaMatrix(g))
        _, grid_w = simplex_grid_min(g, 1e-4)
        np.testing.assert_allclose(r.weights.weights, grid_w, atol=1e-4)
        np.testing.assert_allclose(r.weights.weights, [0.50248756, 0.49751244], atol=1e-6)

    def test_vertex_solution(self):
        g = np.array([[1.0, 2.0], [2.0, 5.0]])
        r = solve_projected(GammaMatrix(g), EXACT)
        np.testing.assert_allclose(r.weights.weights, [1.0, 0.0], atol=1e-15)
        val, grid_w = simplex_grid_min(g, 1e-4)
        np.testing.assert_allclose(grid_w, [1.0, 0.0])
        assert r.achieved_risk == pytest.approx(val)

    def test_needs_release_step(self):
        # dropping negative coordinates alone ends at risk 0.16497 with strategy 1
        # fixed at zero; the multiplier check must bring it back
        g = np.array(
            [
                [10.4, 7.675, -14.953, 8.098, -12.84],
                [7.675, 7.193, -12.022, 6.744, -11.485],
                [-14.953, -12.022, 23.965, -12.616, 21.286],
                [8.098, 6.744, -12.616, 7.083, -11.022],
                [-12.84, -11.485, 21.286, -11.022, 20.962],
            ]
        )
        r = solve_projected(GammaMatrix(g), EXACT)
        best, w_best = simplex_support_min(g)
        assert r.weights.weights[1] > 0.02
        assert r.achieved_risk <= best + 1e-12
        np.testing.assert_allclose(r.weights.weights, w_best, atol=1e-9)

    def test_matches_support_enumeration(self, rng):
        for _ in range(200):
            m = int(rng.integers(2, 7))
            g = random_psd(rng, m)
            if rng.uniform() < 0.5:
                # strongly shared component drives the raw solution negative
                v = rng.normal(size=m)
                g = g + 20 * np.outer(v, v)
            r = solve_projected(GammaMatrix(g), EXACT)
            best, w_best = simplex_support_min(g)
            assert weighted_risk(GammaMatrix(g), r.weights) <= best + 1e-10 * max(1, best)
            assert np.all(r.weights.weights >= 0)

    def test_dominates_uniform(self, rng):
        for _ in range(50):
            m = int(rng.integers(1, 8))
            gamma = GammaMatrix(random_psd(rng, m, rank=int(rng.integers(1, m + 1))))
            r = solve_projected(gamma)
            reg = gamma.regularized(SolverOptions().ridge_lambda)
            assert r.achieved_risk <= weighted_risk(reg, uniform_weights(m)) + 1e-12
            assert r.achieved_risk == pytest.approx(weighted_risk(reg, r.weights), abs=1e-9)

    def test_permutation_equivariance(self, rng):
        for _ in range(20):
            m = int(rng.integers(2, 7))
            g = random_psd(rng, m)
            perm = rng.permutation(m)
            a = solve_projected(GammaMatrix(g)).weights.weights
            b = solve_projected(GammaMatrix(g[np.ix_(perm, perm)])).weights.weights
            np.testing.assert_allclose(b, a[perm], atol=1e-9)

    def test_dispatch(self):
        g = GammaMatrix([[1.0, 2.0], [2.0, 5.0]])
        assert solve(g).weights.provenance == "closed_form_projected"
        assert solve(g, SolverOptions(projection=False)).weights.provenance == "closed_form_raw"


class TestConditionDiagnostics:
    def test_identity(self):
        assert condition_diagnostics(GammaMatrix(np.eye(3))) == 1.0

    def test_ratio_of_extremes(self):
        assert condition_diagnostics(GammaMatrix(np.diag([1.0, 1e-12]))) == pytest.approx(1e12, rel=1e-9)

    def test_singular_is_infinite(self):
        assert condition_diagnostics(GammaMatrix(np.ones((2, 2)))) == math.inf
        assert condition_diagnostics(GammaMatrix(np.zeros((2, 2)))) == math.inf

    def test_deterministic(self, rng):
        g = GammaMatrix(random_psd(rng, 6))
        assert condition_diagnostics(g) == condition_diagnostics(g)
