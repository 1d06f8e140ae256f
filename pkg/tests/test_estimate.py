"""Hardcore estimator, pseudo-likelihood surface, gradient/Hessian, Newton
minimizer, and contrast diagnostics."""

from __future__ import annotations

import math

import numpy as np
import pytest

from nhgibbs import PointConfiguration, TorusWindow
from nhgibbs.configuration import RectRegion, whole_window
from nhgibbs.errors import InfeasibleAlpha, Undefined
from nhgibbs.estimate import (
    QuadratureSpec,
    contrast_kn,
    estimate_alpha,
    estimate_theta,
    minimize_pll,
    pll,
    pll_gradient,
    pll_gradient_hessian,
    pll_hessian,
    pll_terms,
    pll_value,
    two_step,
)
from nhgibbs.models import (
    HardSphereModel,
    HardSphereSpec,
    KnnModel,
    KnnSpec,
    ModelParams,
    PhiTruncLin,
    PoissonModel,
)
from nhgibbs.oracle import besag_pll_hardsphere

from conftest import hard_sphere_pattern, knn_pattern, rng_for

TORUS = TorusWindow(10.0, "torus")
PLANE = TorusWindow(10.0, "plane")
QUAD = QuadratureSpec(100.0)


class TestQuadrature:
    def test_rect_grid_exact_cover(self):
        g = QuadratureSpec(100.0).grid(TORUS, None)
        assert g.exact_cover
        assert len(g.pts) == 100 * 100
        assert g.integral_over_area(np.ones(len(g.pts))) == 1.0

    def test_ball_grid(self):
        from nhgibbs.configuration import BallRegion

        g = QuadratureSpec(400.0).grid(TORUS, BallRegion(5, 5, 1.5))
        assert not g.exact_cover
        # covered fraction approximates the disk area
        est = g.cellarea * len(g.pts)
        assert est == pytest.approx(math.pi * 1.5 ** 2, rel=0.02)

    def test_self_convergence(self, poisson_model):
        # halving the spacing changes a smooth integral by < 1e-3 relative
        hs = HardSphereModel(HardSphereSpec((0.5,)))
        rng = rng_for(41)
        cfg = hard_sphere_pattern(rng, TORUS, 0.5, 30)
        params = ModelParams(2.0, (0.5,))
        vals = []
        for density in (100.0, 400.0):
            t = pll_terms(hs, cfg, None, 2.0, QuadratureSpec(density))
            vals.append(pll_value(t, params.theta_vec))
        assert abs(vals[1] - vals[0]) < 1e-3 * max(1.0, abs(vals[1]))


class TestEstimateAlpha:
    def test_hard_sphere_nudge(self, hs_model):
        cfg = PointConfiguration.from_points([[0, 0], [0.4, 0]], PLANE)
        ae = estimate_alpha(hs_model, cfg)
        assert ae.alpha_hat == pytest.approx(2.5)
        assert not ae.attained
        assert ae.epsilon > 0
        e = hs_model.window_energy(
            ModelParams(ae.alpha_hat + ae.epsilon, (1.0,)), cfg
        )
        assert math.isfinite(e)
        # sandwich: just below the statistic the energy is infinite
        e_lo = hs_model.window_energy(
            ModelParams(ae.alpha_hat * (1 - 1e-6), (1.0,)), cfg
        )
        assert math.isinf(e_lo)

    def test_knn_attained(self, knn_model):
        cfg = PointConfiguration.from_points(
            [[0, 0], [0.3, 0], [0, 0.3]], PLANE
        )
        ae = estimate_alpha(knn_model, cfg)
        assert ae.alpha_hat == pytest.approx(0.3 * math.sqrt(2))
        assert ae.attained and ae.epsilon == 0.0

    def test_monotone_under_window_nesting(self, hs_model, knn_model):
        rng = rng_for(42)
        for _ in range(10):
            cfg = hard_sphere_pattern(rng, TORUS, 0.5, 40)
            nests = [RectRegion(2, 2, 5, 5), RectRegion(1, 1, 7, 7),
                     whole_window(TORUS)]
            vals = [estimate_alpha(hs_model, cfg, r).alpha_hat for r in nests]
            assert vals[0] <= vals[1] <= vals[2]
        for _ in range(10):
            cfg = knn_pattern(rng, TORUS, 1.0, 2, 5)
            nests = [RectRegion(2, 2, 6, 6), whole_window(TORUS)]
            vals = [estimate_alpha(knn_model, cfg, r).alpha_hat for r in nests]
            assert vals[0] <= vals[1]

    def test_undefined_propagates(self, knn_model):
        cfg = PointConfiguration.from_points([[0, 0], [1, 1]], PLANE)
        with pytest.raises(Undefined):
            estimate_alpha(knn_model, cfg)


class TestPll:
    def test_empty_configuration_is_exactly_one(self, hs_model, poisson_model):
        empty = PointConfiguration.empty(TORUS)
        assert pll(hs_model, empty, None, 2.0, (0.7,), QUAD) == 1.0
        assert pll(poisson_model, empty, None, 0.0, (), QUAD) == 1.0

    def test_knn_cluster_sum_term_vanishes(self, knn_model):
        # a single (k+1)-cluster has no removable points: only the integral
        cfg = PointConfiguration.from_points(
            [[5, 5], [5.3, 5], [5, 5.3]], TORUS
        )
        terms = pll_terms(knn_model, cfg, None, 1.0, QUAD)
        assert len(terms.data_stats) == 0
        v = pll_value(terms, np.array([1.0]))
        w = np.zeros(len(terms.quad_stats))
        f = terms.quad_feasible
        w[f] = np.exp(-terms.quad_stats[f, 0])
        assert v == pytest.approx(float(w.mean()))

    def test_infeasible_alpha_raises(self, hs_model):
        # hardcore radius 1/alpha = 0.5 spans the 0.4 pair separation
        cfg = PointConfiguration.from_points([[0, 0], [0.4, 0]], TORUS)
        with pytest.raises(InfeasibleAlpha):
            pll(hs_model, cfg, None, 2.0, (1.0,), QUAD)

    def test_matches_besag_on_hard_sphere(self, hs_model):
        rng = rng_for(43)
        for trial in range(5):
            cfg = hard_sphere_pattern(rng, TORUS, 0.5, 25)
            theta = (float(rng.uniform(0.1, 1.5)),)
            ours = pll(hs_model, cfg, None, 2.0, theta, QUAD)
            classical = besag_pll_hardsphere(
                hs_model, cfg, None, 2.0, theta, QUAD
            )
            assert ours == pytest.approx(classical, abs=1e-10, rel=1e-10)


class TestGradients:
    def test_finite_differences(self, hs_model, knn_model):
        rng = rng_for(44)
        cases = []
        for _ in range(4):
            cases.append((
                hs_model, 2.0, hard_sphere_pattern(rng, TORUS, 0.5, 25),
                np.array([float(rng.uniform(0.2, 1.0))]),
            ))
            cases.append((
                knn_model, 1.0, knn_pattern(rng, TORUS, 1.0, 2, 4),
                np.array([float(rng.uniform(0.2, 1.5))]),
            ))
        hs2 = HardSphereModel(HardSphereSpec((0.4, 0.9)))
        cases.append((
            hs2, 2.0, hard_sphere_pattern(rng, TORUS, 0.5, 25),
            rng.uniform(0.2, 1.0, 2),
        ))
        for model, alpha, cfg, theta in cases:
            terms = pll_terms(model, cfg, None, alpha, QUAD)
            g = pll_gradient(terms, theta)
            H = pll_hessian(terms, theta)
            for j in range(len(theta)):
                step = 1e-5 * max(abs(theta[j]), 1.0)
                up = theta.copy()
                up[j] += step
                dn = theta.copy()
                dn[j] -= step
                fd = (pll_value(terms, up) - pll_value(terms, dn)) / (2 * step)
                assert g[j] == pytest.approx(fd, abs=1e-6, rel=1e-6)
                fd_h = (pll_gradient(terms, up)[j]
                        - pll_gradient(terms, dn)[j]) / (2 * step)
                assert H[j, j] == pytest.approx(fd_h, abs=1e-5, rel=1e-4)
            assert np.linalg.eigvalsh(H).min() >= -1e-12

    def test_public_wrapper(self, hs_model):
        rng = rng_for(45)
        cfg = hard_sphere_pattern(rng, TORUS, 0.5, 20)
        g, H = pll_gradient_hessian(hs_model, cfg, None, 2.0, (0.5,), QUAD)
        assert g.shape == (1,) and H.shape == (1, 1)


class TestNewton:
    def test_constant_statistic_closed_form(self):
        """With a constant statistic t on the grid and m data points, the
        minimizer satisfies t*exp(-theta t) = (sum of data t)/area, i.e.
        theta = -log(m/(area)) / t when every data statistic equals t."""

        class ConstStat(PoissonModel):
            name = "conststat"
            p = 1

            def stats_batch(self, alpha, pts, cfg):
                pts = np.asarray(pts, dtype=float).reshape(-1, 2)
                return np.ones(len(pts), bool), np.full((len(pts), 1), 2.0)

            def sufficient_statistics(self, alpha, x, cfg):
                from nhgibbs.models import LocalStatistics

                return LocalStatistics(True, np.array([2.0]))

        model = ConstStat()
        rng = rng_for(46)
        cfg = PointConfiguration.from_points(rng.random((30, 2)) * 10, TORUS)
        terms = pll_terms(model, cfg, None, 1.0, QUAD)
        theta, value, gnorm, iters, at_boundary, degen = minimize_pll(
            terms, ((-5.0,), (5.0,))
        )
        # d/dtheta [exp(-2 theta) + 2*30*theta/100] = 0
        # => exp(-2 theta) = 30/100 => theta = -log(0.3)/2
        expect = -math.log(30.0 / 100.0) / 2.0
        assert theta[0] == pytest.approx(expect, abs=1e-8)
        assert gnorm <= 1e-8
        assert not any(at_boundary)

    def test_boundary_flag_when_no_removable_points(self, knn_model):
        cfg = PointConfiguration.from_points(
            [[5, 5], [5.3, 5], [5, 5.3]], TORUS
        )
        res = estimate_theta(knn_model, cfg, None, 1.0, ((0.0,), (2.0,)), QUAD)
        assert res.removable_count == 0
        assert res.degenerate
        assert res.at_boundary == (True,)
        assert res.theta_hat[0] == 2.0  # positive statistics push up

    def test_gradient_norm_at_interior_optimum(self, hs_model):
        rng = rng_for(47)
        cfg = hard_sphere_pattern(rng, TORUS, 0.5, 40)
        res = estimate_theta(hs_model, cfg, None, 2.0, ((-3.0,), (3.0,)), QUAD)
        if not any(res.at_boundary):
            assert res.gradient_norm <= 1e-8


class TestContrast:
    def test_zero_at_equal_arguments(self, hs_model):
        rng = rng_for(48)
        cfg = hard_sphere_pattern(rng, TORUS, 0.5, 25)
        assert contrast_kn(hs_model, cfg, None, 2.0, (0.5,), (0.5,), QUAD) == 0.0

    def test_antisymmetry(self, hs_model):
        rng = rng_for(49)
        cfg = hard_sphere_pattern(rng, TORUS, 0.5, 25)
        a = contrast_kn(hs_model, cfg, None, 2.0, (0.4,), (0.8,), QUAD)
        b = contrast_kn(hs_model, cfg, None, 2.0, (0.8,), (0.4,), QUAD)
        assert a == pytest.approx(-b, rel=1e-12)


class TestTwoStep:
    def test_hard_sphere_end_to_end(self, hs_model):
        rng = rng_for(50)
        cfg = hard_sphere_pattern(rng, TORUS, 0.55, 45)
        res = two_step(hs_model, cfg, ((-1.0,), (2.0,)), QUAD)
        assert res.alpha_hat <= 1 / 0.55 + 1e-9
        assert math.isfinite(res.pll_value)
        assert res.removable_count == len(cfg)
        assert res.n_points == len(cfg)

    def test_plane_mode_minus_sampling(self, hs_model):
        rng = rng_for(51)
        torus_cfg = hard_sphere_pattern(rng, TORUS, 0.55, 40)
        cfg = PointConfiguration.from_points(torus_cfg.coords, PLANE)
        res = two_step(hs_model, cfg, ((-1.0,), (2.0,)), QUAD)
        # minus-sampling keeps only interior removable points
        margin = hs_model.interaction_range(res.alpha_hat + res.epsilon)
        inner = RectRegion(margin, margin, 10 - margin, 10 - margin)
        from nhgibbs.configuration import region_contains

        expect = int(region_contains(inner, cfg.coords, PLANE).sum())
        assert res.removable_count == expect
