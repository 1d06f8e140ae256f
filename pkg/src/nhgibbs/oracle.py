"""Slow, transparent reference implementations used to validate every fast
path.  Everything here is written as literal loops over the defining sums;
the only code shared with the fast paths is primitive arithmetic and the
cocircular tie-break rule."""

from __future__ import annotations

import math

import numpy as np

from .configuration import BallRegion, PointConfiguration, RectRegion, UnionRegion
from .errors import DuplicatePoint, OutsideWindow, TooLarge, UnknownId
from .geometry import (
    Point,
    Triangulation,
    circumcircle,
    in_circle_perturbed,
    orient_sign,
    perturbation_ranks,
)

INF = math.inf


def _guard(cfg_or_points, limit: int, what: str) -> None:
    n = len(cfg_or_points)
    if n > limit:
        raise TooLarge(f"{what}: {n} points exceeds the oracle guard of {limit}")


def _in_region(region, x, y, window) -> bool:
    if region is None:
        return True
    if isinstance(region, RectRegion):
        return region.x0 <= x <= region.x1 and region.y0 <= y <= region.y1
    if isinstance(region, BallRegion):
        return _dist(window, x, y, region.cx, region.cy) <= region.r
    if isinstance(region, UnionRegion):
        return any(_in_region(p, x, y, window) for p in region.parts)
    raise TypeError(f"unsupported region {region!r}")


def _dist(window, ax, ay, bx, by) -> float:
    dx = bx - ax
    dy = by - ay
    if window.is_torus:
        L = window.L
        dx = dx - L * round(dx / L)
        dy = dy - L * round(dy / L)
    return math.hypot(dx, dy)


def _dist_to_region(region, x, y, window) -> float:
    """Naive distance from (x, y) to the region, probing periodic images."""
    if region is None:
        return 0.0
    if isinstance(region, RectRegion):
        shifts = (-window.L, 0.0, window.L) if window.is_torus else (0.0,)
        best = INF
        for sx in shifts:
            for sy in shifts:
                px, py = x + sx, y + sy
                gx = max(region.x0 - px, px - region.x1, 0.0)
                gy = max(region.y0 - py, py - region.y1, 0.0)
                best = min(best, math.hypot(gx, gy))
        return best
    if isinstance(region, BallRegion):
        return max(0.0, _dist(window, x, y, region.cx, region.cy) - region.r)
    if isinstance(region, UnionRegion):
        return min(_dist_to_region(p, x, y, window) for p in region.parts)
    raise TypeError(f"unsupported region {region!r}")


# ---------------------------------------------------------------------------
# Delaunay by exhaustive triple testing
# ---------------------------------------------------------------------------

def brute_delaunay(cfg: PointConfiguration) -> Triangulation:
    """All C(n,3) triples tested against the empty-open-circumball property,
    with the same symbolic cocircular tie-break as the fast path.  Plane mode
    only, n <= 50."""
    if cfg.window.is_torus:
        raise ValueError("brute_delaunay is defined for plane mode only")
    _guard(cfg, 50, "brute_delaunay")
    pts = cfg.coords
    n = len(pts)
    ranks = perturbation_ranks(pts)
    triples = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                o = orient_sign(pts[i][0], pts[i][1], pts[j][0], pts[j][1],
                                pts[k][0], pts[k][1])
                if o == 0:
                    continue
                a, b, c = (i, j, k) if o > 0 else (i, k, j)
                empty = True
                for m in range(n):
                    if m in (i, j, k):
                        continue
                    if in_circle_perturbed(pts[a], pts[b], pts[c], pts[m],
                                           ranks[a], ranks[b], ranks[c],
                                           ranks[m]):
                        empty = False
                        break
                if empty:
                    triples.append((i, j, k))
    m = len(triples)
    ids = np.zeros((m, 3), dtype=np.int64)
    verts = np.zeros((m, 3, 2))
    centers = np.zeros((m, 2))
    radii = np.zeros(m)
    min_edges = np.zeros(m)
    perims = np.zeros(m)
    for t, (i, j, k) in enumerate(triples):
        ids[t] = (cfg.ids[i], cfg.ids[j], cfg.ids[k])
        verts[t] = pts[[i, j, k]]
        ctr, r = circumcircle(pts[i], pts[j], pts[k])
        centers[t] = ctr
        radii[t] = r
        sides = [
            math.dist(pts[i], pts[j]),
            math.dist(pts[j], pts[k]),
            math.dist(pts[k], pts[i]),
        ]
        min_edges[t] = min(sides)
        perims[t] = sum(sides)
    return Triangulation(
        window=cfg.window, ids=ids, verts=verts, centers=centers,
        radii=radii, min_edges=min_edges, perimeters=perims,
        fingerprint=cfg.fingerprint, n_points=n,
    )


# ---------------------------------------------------------------------------
# Window energies by literal sums
# ---------------------------------------------------------------------------

def brute_window_energy(model, params, cfg: PointConfiguration,
                        region=None) -> float:
    _guard(cfg, 200, "brute_window_energy")
    name = model.name
    if name == "poisson":
        return 0.0
    if name == "hardsphere":
        return _brute_hardsphere(model, params, cfg, region)
    if name == "knn":
        return _brute_knn(model, params, cfg, region)
    if name == "delaunay":
        return _brute_delaunay_energy(model, params, cfg, region)
    raise ValueError(f"unknown model {name!r}")


def _brute_hardsphere(model, params, cfg, region) -> float:
    pts = cfg.coords
    w = cfg.window
    hc = 1.0 / params.alpha
    steps = model.spec.steps
    total = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if not (
                _in_region(region, pts[i][0], pts[i][1], w)
                or _in_region(region, pts[j][0], pts[j][1], w)
            ):
                continue
            d = _dist(w, pts[i][0], pts[i][1], pts[j][0], pts[j][1])
            if d <= hc:
                return INF
            lo = hc
            for s, r_s in enumerate(steps):
                hi = hc + r_s
                if lo < d <= hi:
                    total += params.theta[s]
                    break
                lo = hi
    return total


def _brute_knn(model, params, cfg, region) -> float:
    pts = cfg.coords
    w = cfg.window
    k = model.spec.k
    alpha = params.alpha
    phi = model.spec.phi
    total = 0.0
    for i in range(len(pts)):
        if _dist_to_region(region, pts[i][0], pts[i][1], w) >= alpha:
            continue  # outside the open alpha-dilation of the region
        dists = []
        ball = 1  # the point itself lies in its own closed ball
        for j in range(len(pts)):
            if j == i:
                continue
            d = _dist(w, pts[i][0], pts[i][1], pts[j][0], pts[j][1])
            if d <= alpha:
                ball += 1
            dists.append((d, int(cfg.ids[j])))
        if ball <= k:
            return INF
        dists.sort()
        for d, _ in dists[:k]:
            total += params.theta[0] * float(phi(d))
    return total


def _brute_delaunay_energy(model, params, cfg, region) -> float:
    if len(cfg) == 0:
        return 0.0
    tri = brute_delaunay(cfg)
    r_min = model.spec.min_edge
    total = 0.0
    for t in tri:
        d = _dist_to_region(region, t.circumcenter.x, t.circumcenter.y,
                            cfg.window)
        if d >= t.radius:
            continue  # open circumball misses the region
        if t.radius >= params.alpha or t.min_edge <= r_min:
            return INF
        total += params.theta[0] * t.perimeter
    return total


# ---------------------------------------------------------------------------
# Removability and local energy by whole-window differences
# ---------------------------------------------------------------------------

def brute_removable(model, alpha, x_id: int, cfg: PointConfiguration) -> bool:
    _guard(cfg, 200, "brute_removable")
    if int(x_id) not in set(int(v) for v in cfg.ids):
        raise UnknownId(f"no point with id {x_id}")
    probe = _unit_theta_params(model, alpha)
    return math.isfinite(brute_window_energy(model, probe, cfg.delete(x_id)))


def brute_local_energy(model, params, x, cfg: PointConfiguration) -> float:
    _guard(cfg, 200, "brute_local_energy")
    base = brute_window_energy(model, params, cfg)
    if not math.isfinite(base):
        raise ValueError("base configuration has infinite energy")
    try:
        grown = cfg.insert(x)
    except (DuplicatePoint, OutsideWindow):
        return INF
    total = brute_window_energy(model, params, grown)
    if not math.isfinite(total):
        return INF
    return total - base


def _unit_theta_params(model, alpha):
    from .models import ModelParams

    return ModelParams(alpha, tuple(0.0 for _ in range(model.p)))


# ---------------------------------------------------------------------------
# Classical Besag pseudo-likelihood for the (hereditary) hard-sphere model
# ---------------------------------------------------------------------------

def besag_pll_hardsphere(model, cfg: PointConfiguration, region, alpha: float,
                         theta, quad) -> float:
    """Classical pseudo-likelihood with the sum over ALL points, coded from
    the pairwise definition; the reference for the hereditary case."""
    _guard(cfg, 500, "besag_pll_hardsphere")
    w = cfg.window
    pts = cfg.coords
    hc = 1.0 / alpha
    steps = model.spec.steps
    theta = tuple(float(t) for t in theta)

    def h_at(x, y, skip=-1) -> float:
        acc = 0.0
        for j in range(len(pts)):
            if j == skip:
                continue
            d = _dist(w, x, y, pts[j][0], pts[j][1])
            if d <= hc:
                return INF
            lo = hc
            for s, r_s in enumerate(steps):
                hi = hc + r_s
                if lo < d <= hi:
                    acc += theta[s]
                    break
                lo = hi
        return acc

    g = quad.grid(w, region)
    integral = 0.0
    for gx, gy in g.pts:
        h = h_at(gx, gy)
        integral += 0.0 if math.isinf(h) else math.exp(-h)
    integral *= g.cellarea
    data_sum = 0.0
    for i in range(len(pts)):
        if not _in_region(region, pts[i][0], pts[i][1], w):
            continue
        h = h_at(pts[i][0], pts[i][1], skip=i)
        if math.isinf(h):
            return INF
        data_sum += h
    return (integral + data_sum) / g.area
