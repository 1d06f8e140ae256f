"""Two-step estimation: the hardcore support estimator with its epsilon
nudge, the pseudo-likelihood contrast restricted to removable points, its
gradient and Hessian, a damped-Newton minimizer over the theta box, and the
contrast difference used as a consistency diagnostic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .configuration import (
    BallRegion,
    PointConfiguration,
    RectRegion,
    region_area,
    whole_window,
)
from .errors import InfeasibleAlpha
from .geometry import TorusWindow
from .models import Model, ModelParams


@dataclass(frozen=True)
class QuadratureSpec:
    """Centered regular dummy-point grid with a target density per unit
    area.  Deterministic for a given region."""

    density: float = 400.0

    def __post_init__(self):
        if self.density < 1.0:
            raise ValueError("dummy-point density must be >= 1")

    def grid(self, window: TorusWindow, region=None):
        """Grid points, cell area, and exact region area.

        For rectangles the cells tile the region exactly, so integrals are
        evaluated as region_area * mean(integrand); for balls the grid is a
        masked bounding-box grid.
        """
        if region is None:
            region = whole_window(window)
        if isinstance(region, RectRegion):
            wx = region.x1 - region.x0
            wy = region.y1 - region.y0
            nx = max(1, round(wx * math.sqrt(self.density)))
            ny = max(1, round(wy * math.sqrt(self.density)))
            xs = region.x0 + (np.arange(nx) + 0.5) * (wx / nx)
            ys = region.y0 + (np.arange(ny) + 0.5) * (wy / ny)
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            pts = np.column_stack([gx.ravel(), gy.ravel()])
            return QuadratureGrid(pts, (wx / nx) * (wy / ny), wx * wy, True)
        if isinstance(region, BallRegion):
            r = region.r
            n = max(1, round(2.0 * r * math.sqrt(self.density)))
            step = 2.0 * r / n
            xs = region.cx - r + (np.arange(n) + 0.5) * step
            ys = region.cy - r + (np.arange(n) + 0.5) * step
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            pts = np.column_stack([gx.ravel(), gy.ravel()])
            d2 = (pts[:, 0] - region.cx) ** 2 + (pts[:, 1] - region.cy) ** 2
            pts = pts[d2 <= r * r]
            pts = window.wrap(pts)
            return QuadratureGrid(pts, step * step, math.pi * r * r, False)
        raise TypeError(f"no quadrature rule for region {region!r}")


@dataclass
class QuadratureGrid:
    pts: np.ndarray
    cellarea: float
    area: float
    exact_cover: bool

    def integral_over_area(self, vals: np.ndarray) -> float:
        """(1/|region|) * integral of the sampled integrand."""
        if self.exact_cover:
            return float(vals.mean()) if len(vals) else 0.0
        return float(vals.sum()) * self.cellarea / self.area


class AlphaEstimate(NamedTuple):
    alpha_hat: float
    epsilon: float
    attained: bool


@dataclass
class EstimationResult:
    alpha_hat: float
    epsilon: float
    attained: bool
    theta_hat: tuple
    pll_value: float
    gradient_norm: float
    iterations: int
    at_boundary: tuple
    removable_count: int
    degenerate: bool
    n_points: int
    L: float


def _zero_theta(model: Model, alpha: float) -> ModelParams:
    return ModelParams(alpha, tuple(0.0 for _ in range(model.p)))


def _finite_at(model: Model, alpha: float, cfg, region) -> bool:
    return math.isfinite(model.window_energy(_zero_theta(model, alpha), cfg, region))


def estimate_alpha(model: Model, cfg: PointConfiguration,
                   region=None) -> AlphaEstimate:
    """Support estimator: the infimum of hardcore parameters with finite
    window energy on the region, nudged into feasibility when the infimum is
    not attained."""
    hs = model.hardcore_statistic(cfg, region)
    alpha_hat = hs.value
    if hs.attained:
        if not _finite_at(model, alpha_hat, cfg, region):
            raise InfeasibleAlpha(
                f"energy not finite at the attained statistic {alpha_hat!r}"
            )
        return AlphaEstimate(alpha_hat, 0.0, True)
    eps = max(1e-9 * alpha_hat, 1e-300)
    for _ in range(11):
        if _finite_at(model, alpha_hat + eps, cfg, region):
            return AlphaEstimate(alpha_hat, eps, False)
        eps *= 2.0
    raise InfeasibleAlpha(
        f"no feasible nudge found above alpha_hat = {alpha_hat!r}"
    )


@dataclass
class PllTerms:
    """theta-independent pieces of the pseudo-likelihood on a region."""

    grid: QuadratureGrid
    quad_feasible: np.ndarray   # (q,) bool
    quad_stats: np.ndarray      # (q, p)
    data_stats: np.ndarray      # (n_removable, p)
    removable_ids: tuple
    area: float


def pll_terms(model: Model, cfg: PointConfiguration, region, alpha: float,
              quad: QuadratureSpec) -> PllTerms:
    if not _finite_at(model, alpha, cfg, region):
        raise InfeasibleAlpha(
            f"configuration has infinite energy at alpha = {alpha!r}"
        )
    grid = quad.grid(cfg.window, region)
    feas, T = model.stats_batch(alpha, grid.pts, cfg)
    removable = sorted(model.removable_set(alpha, cfg, region))
    rows = []
    for pid in removable:
        x = cfg.point(pid)
        st = model.sufficient_statistics(alpha, x, cfg.delete(pid))
        if not st.feasible:
            raise InfeasibleAlpha(
                f"removable point {pid} has infinite reinsertion energy"
            )
        rows.append(st.t)
    data_stats = (
        np.array(rows) if rows else np.zeros((0, model.p))
    )
    return PllTerms(
        grid=grid,
        quad_feasible=feas,
        quad_stats=T,
        data_stats=data_stats,
        removable_ids=tuple(removable),
        area=region_area(region, cfg.window),
    )


def _pll_weights(terms: PllTerms, theta: np.ndarray) -> np.ndarray:
    w = np.zeros(len(terms.quad_stats))
    f = terms.quad_feasible
    w[f] = np.exp(-(terms.quad_stats[f] @ theta))
    return w


def pll_value(terms: PllTerms, theta) -> float:
    theta = np.asarray(theta, dtype=float)
    w = _pll_weights(terms, theta)
    integral = terms.grid.integral_over_area(w)
    data = float((terms.data_stats @ theta).sum()) if len(terms.data_stats) else 0.0
    return integral + data / terms.area


def pll_gradient(terms: PllTerms, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    w = _pll_weights(terms, theta)
    p = terms.quad_stats.shape[1]
    g = np.array([
        -terms.grid.integral_over_area(terms.quad_stats[:, j] * w)
        for j in range(p)
    ])
    if len(terms.data_stats):
        g += terms.data_stats.sum(axis=0) / terms.area
    return g


def pll_hessian(terms: PllTerms, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    w = _pll_weights(terms, theta)
    p = terms.quad_stats.shape[1]
    H = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            H[i, j] = H[j, i] = terms.grid.integral_over_area(
                terms.quad_stats[:, i] * terms.quad_stats[:, j] * w
            )
    return H


def pll(model: Model, cfg: PointConfiguration, region, alpha: float, theta,
        quad: QuadratureSpec) -> float:
    """Pseudo-likelihood contrast: dummy-point integral of exp(-h) plus the
    sum of h over removable points, normalized by the region area."""
    return pll_value(pll_terms(model, cfg, region, alpha, quad), theta)


def pll_gradient_hessian(model: Model, cfg: PointConfiguration, region,
                         alpha: float, theta, quad: QuadratureSpec):
    terms = pll_terms(model, cfg, region, alpha, quad)
    return pll_gradient(terms, theta), pll_hessian(terms, theta)


def contrast_kn(model: Model, cfg: PointConfiguration, region, alpha: float,
                theta, theta_star, quad: QuadratureSpec) -> float:
    """Pseudo-likelihood difference K_n at a common hardcore parameter."""
    terms = pll_terms(model, cfg, region, alpha, quad)
    return pll_value(terms, theta) - pll_value(terms, theta_star)


_GRAD_TOL = 1e-8
_MAX_ITER = 100


def _one_signed(col: np.ndarray) -> bool:
    return bool((col >= 0).all() or (col <= 0).all())


def minimize_pll(terms: PllTerms, theta_box) -> tuple:
    """Damped Newton with clamping to the closed theta box; returns
    (theta, value, projected_gradient_norm, iterations, at_boundary,
    degenerate)."""
    lo = np.asarray(theta_box[0], dtype=float)
    hi = np.asarray(theta_box[1], dtype=float)
    if lo.shape != hi.shape or (lo >= hi).any():
        raise ValueError("theta box must have lo < hi componentwise")
    p = len(lo)
    feas_stats = terms.quad_stats[terms.quad_feasible]
    degenerate = len(terms.data_stats) == 0 and all(
        _one_signed(feas_stats[:, j]) for j in range(p)
    )
    theta = 0.5 * (lo + hi)
    value = pll_value(terms, theta)
    iters = 0
    while iters < _MAX_ITER:
        g = pll_gradient(terms, theta)
        pg = g.copy()
        pg[(theta <= lo) & (g > 0)] = 0.0
        pg[(theta >= hi) & (g < 0)] = 0.0
        if float(np.linalg.norm(pg)) <= _GRAD_TOL:
            break
        H = pll_hessian(terms, theta)
        try:
            d = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            d = np.linalg.solve(H + 1e-10 * np.eye(p), -g)
        step = 1.0
        improved = False
        for _ in range(60):
            cand = np.clip(theta + step * d, lo, hi)
            cand_value = pll_value(terms, cand)
            if cand_value < value:
                theta, value = cand, cand_value
                improved = True
                break
            step *= 0.5
        iters += 1
        if not improved:
            break
    g = pll_gradient(terms, theta)
    pg = g.copy()
    pg[(theta <= lo) & (g > 0)] = 0.0
    pg[(theta >= hi) & (g < 0)] = 0.0
    at_boundary = tuple(bool(t <= a or t >= b) for t, a, b in zip(theta, lo, hi))
    return (
        tuple(float(t) for t in theta),
        value,
        float(np.linalg.norm(pg)),
        iters,
        at_boundary,
        degenerate,
    )


def estimate_theta(model: Model, cfg: PointConfiguration, region,
                   alpha: float, theta_box, quad: QuadratureSpec,
                   *, alpha_hat: Optional[float] = None,
                   epsilon: float = 0.0,
                   attained: bool = True) -> EstimationResult:
    """Minimize the pseudo-likelihood over the closed theta box at a fixed
    hardcore parameter."""
    terms = pll_terms(model, cfg, region, alpha, quad)
    theta, value, gnorm, iters, at_boundary, degenerate = minimize_pll(
        terms, theta_box
    )
    return EstimationResult(
        alpha_hat=alpha if alpha_hat is None else alpha_hat,
        epsilon=epsilon,
        attained=attained,
        theta_hat=theta,
        pll_value=value,
        gradient_norm=gnorm,
        iterations=iters,
        at_boundary=at_boundary,
        removable_count=len(terms.data_stats),
        degenerate=degenerate,
        n_points=len(cfg),
        L=cfg.window.L,
    )


def analysis_region(model: Model, cfg: PointConfiguration, alpha: float):
    """None on the torus; the minus-sampled (eroded) window in plane mode."""
    if cfg.window.is_torus:
        return None
    margin = model.interaction_range(alpha)
    rect = whole_window(cfg.window)
    try:
        return rect.erode(margin)
    except ValueError:
        raise InfeasibleAlpha(
            f"window of side {cfg.window.L} vanishes under minus-sampling "
            f"margin {margin}"
        ) from None


def two_step(model: Model, cfg: PointConfiguration, theta_box,
             quad: QuadratureSpec, region=None) -> EstimationResult:
    """Hardcore estimate with nudge, then pseudo-likelihood for theta at the
    plugged-in hardcore parameter.  region=None selects the whole torus
    window, or the minus-sampled window in plane mode."""
    ae = estimate_alpha(model, cfg)
    alpha = ae.alpha_hat + ae.epsilon
    if region is None:
        region = analysis_region(model, cfg, alpha)
    res = estimate_theta(
        model, cfg, region, alpha, theta_box, quad,
        alpha_hat=ae.alpha_hat, epsilon=ae.epsilon, attained=ae.attained,
    )
    return res


def estimate_csv_header(p: int) -> str:
    cols = ["alpha_hat", "epsilon", "attained"]
    cols += [f"theta_hat_{j + 1}" for j in range(p)]
    cols += ["pll", "grad_norm", "iters", "at_boundary", "removable_count",
             "n_points", "L"]
    return ",".join(cols)


def estimate_csv_row(res: EstimationResult) -> str:
    cols = [f"{res.alpha_hat:.12g}", f"{res.epsilon:.12g}",
            "1" if res.attained else "0"]
    cols += [f"{t:.12g}" for t in res.theta_hat]
    cols += [
        f"{res.pll_value:.12g}",
        f"{res.gradient_norm:.6g}",
        str(res.iterations),
        ";".join("1" if b else "0" for b in res.at_boundary),
        str(res.removable_count),
        str(res.n_points),
        f"{res.L:.12g}",
    ]
    return ",".join(cols)


def write_estimate_csv(res: EstimationResult, path) -> None:
    Path(path).write_text(
        estimate_csv_header(len(res.theta_hat)) + "\n"
        + estimate_csv_row(res) + "\n"
    )
