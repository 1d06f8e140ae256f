"""Planar and toroidal geometry: metrics, k-nearest neighbors, and a robust
Delaunay triangulation with circumcircle data.

Determinism on degenerate input is obtained by a symbolic perturbation of the
in-circle predicate: points are ranked lexicographically by (x, y, insertion
index) and an exactly cocircular quadruple is resolved as if each point were
pushed down the lifting paraboloid by an infinitesimal amount, larger for
smaller ranks.  A cocircular convex polygon is therefore triangulated as the
fan from its lexicographically smallest vertex, and the triangulation of any
input is unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np
from scipy.spatial import Delaunay as _Qhull
from scipy.spatial import QhullError

from .errors import Collinear, NhGibbsError, NotEnoughPoints, TorusTooSparse

_EPS = float(np.finfo(np.float64).eps) / 2.0  # 2^-53
_CCW_ERR = (3.0 + 16.0 * _EPS) * _EPS
_ICC_ERR = (10.0 + 96.0 * _EPS) * _EPS


class Point(NamedTuple):
    x: float
    y: float


class Neighbor(NamedTuple):
    id: int
    distance: float


@dataclass(frozen=True)
class TorusWindow:
    """Square observation window [0, L)^2, periodic or plain."""

    L: float
    boundary: str = "torus"

    def __post_init__(self) -> None:
        if not (self.L > 0.0 and math.isfinite(self.L)):
            raise ValueError("window side must be positive and finite")
        if self.boundary not in ("torus", "plane"):
            raise ValueError("boundary must be 'torus' or 'plane'")

    @property
    def area(self) -> float:
        return self.L * self.L

    @property
    def is_torus(self) -> bool:
        return self.boundary == "torus"

    def contains(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        return 0.0 <= x < self.L and 0.0 <= y < self.L

    def wrap(self, pts: np.ndarray) -> np.ndarray:
        """Map coordinates into [0, L); identity in plane mode."""
        if not self.is_torus:
            return np.asarray(pts, dtype=float)
        w = np.mod(np.asarray(pts, dtype=float), self.L)
        # mod can return L for tiny negative inputs
        return np.where(w >= self.L, w - self.L, w)

    def delta(self, a, b) -> np.ndarray:
        """Displacement b - a under the window metric (minimal image)."""
        d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if self.is_torus:
            d = d - self.L * np.round(d / self.L)
        return d

    def distance(self, a, b) -> float:
        d = self.delta(a, b)
        return float(math.hypot(d[0], d[1]))

    def distances(self, x, pts: np.ndarray) -> np.ndarray:
        """Distances from a single point x to each row of pts."""
        pts = np.asarray(pts, dtype=float)
        if pts.size == 0:
            return np.zeros(0)
        d = pts - np.asarray(x, dtype=float)
        if self.is_torus:
            d = d - self.L * np.round(d / self.L)
        return np.hypot(d[:, 0], d[:, 1])


def torus_distance(a, b, window: TorusWindow) -> float:
    """Distance between a and b: minimum over periodic images on the torus,
    plain Euclidean in plane mode."""
    return window.distance(a, b)


# ---------------------------------------------------------------------------
# Exact predicates with floating-point filters
# ---------------------------------------------------------------------------

def _sign(v: float) -> int:
    return int(v > 0) - int(v < 0)


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    F = Fraction
    det = (F(bx) - F(ax)) * (F(cy) - F(ay)) - (F(by) - F(ay)) * (F(cx) - F(ax))
    return (det > 0) - (det < 0)


def orient_sign(ax, ay, bx, by, cx, cy) -> int:
    """Sign of twice the signed area of (a, b, c); exact."""
    detleft = (bx - ax) * (cy - ay)
    detright = (by - ay) * (cx - ax)
    det = detleft - detright
    if detleft > 0.0:
        if detright <= 0.0:
            return _sign(det)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return _sign(det)
        detsum = -detleft - detright
    else:
        return -_sign(detright)
    errbound = _CCW_ERR * detsum
    if det >= errbound or -det >= errbound:
        return _sign(det)
    return _orient_exact(ax, ay, bx, by, cx, cy)


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    F = Fraction
    adx, ady = F(ax) - F(dx), F(ay) - F(dy)
    bdx, bdy = F(bx) - F(dx), F(by) - F(dy)
    cdx, cdy = F(cx) - F(dx), F(cy) - F(dy)
    det = (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )
    return (det > 0) - (det < 0)


def incircle_sign(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    """Sign of the in-circle determinant: positive iff d lies strictly inside
    the circumcircle of the counterclockwise triangle (a, b, c); exact."""
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    bdxcdy, cdxbdy = bdx * cdy, cdx * bdy
    cdxady, adxcdy = cdx * ady, adx * cdy
    adxbdy, bdxady = adx * bdy, bdx * ady
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (
        alift * (bdxcdy - cdxbdy)
        + blift * (cdxady - adxcdy)
        + clift * (adxbdy - bdxady)
    )
    permanent = (
        (abs(bdxcdy) + abs(cdxbdy)) * alift
        + (abs(cdxady) + abs(adxcdy)) * blift
        + (abs(adxbdy) + abs(bdxady)) * clift
    )
    errbound = _ICC_ERR * permanent
    if det > errbound or -det > errbound:
        return _sign(det)
    return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


def in_circle_perturbed(pa, pb, pc, pd, ra: int, rb: int, rc: int, rd: int) -> bool:
    """Is d strictly inside the circumcircle of counterclockwise (a, b, c)
    after the symbolic paraboloid perturbation?  ra..rd are the perturbation
    ranks (smaller rank = larger downward push)."""
    s = incircle_sign(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1], pd[0], pd[1])
    if s:
        return s > 0
    # Cocircular: expand in powers of the perturbation, smallest rank first.
    # Coefficient of point p's perturbation is +/- orient of the other three
    # (cofactor of the lifted column).
    terms = sorted(
        (
            (ra, -1, pb, pc, pd),
            (rb, +1, pa, pc, pd),
            (rc, -1, pa, pb, pd),
            (rd, +1, pa, pb, pc),
        )
    )
    for _, coeff, p, q, r in terms:
        o = orient_sign(p[0], p[1], q[0], q[1], r[0], r[1])
        if o:
            return coeff * o > 0
    raise NhGibbsError("perturbed in-circle test on a fully collinear quadruple")


def perturbation_ranks(pts: np.ndarray) -> np.ndarray:
    """Rank points by lexicographic (x, y, insertion index); rank 0 receives
    the largest symbolic perturbation."""
    pts = np.asarray(pts, dtype=float)
    n = len(pts)
    order = np.lexsort((np.arange(n), pts[:, 1], pts[:, 0]))
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(n)
    return ranks


# ---------------------------------------------------------------------------
# Circumcircle
# ---------------------------------------------------------------------------

def circumcircle(a, b, c) -> tuple[Point, float]:
    """Center and radius of the circle through three points.

    Raises Collinear when the points admit no circumcircle (exact test).
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    if orient_sign(ax, ay, bx, by, cx, cy) == 0:
        raise Collinear(f"collinear points {a}, {b}, {c}")
    bx_, by_ = bx - ax, by - ay
    cx_, cy_ = cx - ax, cy - ay
    d = 2.0 * (bx_ * cy_ - by_ * cx_)
    b2 = bx_ * bx_ + by_ * by_
    c2 = cx_ * cx_ + cy_ * cy_
    ux = (cy_ * b2 - by_ * c2) / d
    uy = (bx_ * c2 - cx_ * b2) / d
    return Point(ax + ux, ay + uy), math.hypot(ux, uy)


def _circumdata(verts: np.ndarray):
    """Vectorized circumcenter, radius, shortest side and perimeter for an
    array of triangles with vertex coordinates (m, 3, 2)."""
    v0, v1, v2 = verts[:, 0], verts[:, 1], verts[:, 2]
    B = v1 - v0
    C = v2 - v0
    d = 2.0 * (B[:, 0] * C[:, 1] - B[:, 1] * C[:, 0])
    b2 = np.einsum("ij,ij->i", B, B)
    c2 = np.einsum("ij,ij->i", C, C)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (C[:, 1] * b2 - B[:, 1] * c2) / d
        uy = (B[:, 0] * c2 - C[:, 0] * b2) / d
    centers = v0 + np.stack([ux, uy], axis=1)
    radii = np.hypot(ux, uy)
    e0 = np.hypot(*(v1 - v0).T)
    e1 = np.hypot(*(v2 - v1).T)
    e2 = np.hypot(*(v0 - v2).T)
    sides = np.stack([e0, e1, e2], axis=1)
    return centers, radii, sides.min(axis=1), sides.sum(axis=1)


# ---------------------------------------------------------------------------
# k nearest neighbors
# ---------------------------------------------------------------------------

def k_nearest(x, cfg, k: int) -> list[Neighbor]:
    """The k nearest configuration points to x, ascending by distance, ties
    broken by point id.  x itself (matched by exact coordinates) is never its
    own neighbor."""
    if k < 1:
        raise ValueError("k must be >= 1")
    coords = cfg.coords
    ids = cfg.ids
    x = np.asarray(x, dtype=float)
    dist = cfg.window.distances(x, coords)
    self_mask = (coords[:, 0] == x[0]) & (coords[:, 1] == x[1])
    keep = ~self_mask
    dist, ids_k = dist[keep], ids[keep]
    if len(dist) < k:
        raise NotEnoughPoints(f"need {k} neighbors, only {len(dist)} candidates")
    order = np.lexsort((ids_k, dist))[:k]
    return [Neighbor(int(ids_k[i]), float(dist[i])) for i in order]


# ---------------------------------------------------------------------------
# Triangulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Triangle:
    ids: tuple[int, int, int]
    circumcenter: Point
    radius: float
    min_edge: float
    perimeter: float
    verts: np.ndarray  # (3, 2), geometry consistent with the circumcenter


@dataclass
class Triangulation:
    """Canonical Delaunay triangles of a configuration.

    On the torus every periodic triangle appears exactly once; `verts` and
    `centers` hold the coordinates of one consistent periodic copy (anchored
    at the smallest-id vertex inside the fundamental domain), so each row is
    a plain Euclidean triangle and all torus queries go through the window
    metric.
    """

    window: TorusWindow
    ids: np.ndarray        # (m, 3) point ids
    verts: np.ndarray      # (m, 3, 2)
    centers: np.ndarray    # (m, 2), coordinates of the anchored copy
    radii: np.ndarray      # (m,)
    min_edges: np.ndarray  # (m,)
    perimeters: np.ndarray  # (m,)
    fingerprint: int
    n_points: int

    def __len__(self) -> int:
        return len(self.ids)

    def triangle(self, i: int) -> Triangle:
        return Triangle(
            ids=tuple(int(v) for v in self.ids[i]),
            circumcenter=Point(float(self.centers[i, 0]), float(self.centers[i, 1])),
            radius=float(self.radii[i]),
            min_edge=float(self.min_edges[i]),
            perimeter=float(self.perimeters[i]),
            verts=self.verts[i],
        )

    def __iter__(self) -> Iterator[Triangle]:
        return (self.triangle(i) for i in range(len(self)))

    def id_triples(self) -> set[tuple[int, ...]]:
        return {tuple(sorted(int(v) for v in row)) for row in self.ids}


def _interior_edges(tri: np.ndarray, n_points: int):
    """Pair up directed edges of a triangle array.  Returns (u, v, c, d,
    first_tri, second_tri) for every interior edge, where (u, v, c) is the
    CCW triangle owning directed edge (u, v) and d is the opposite vertex of
    the twin."""
    t = len(tri)
    e_from = tri[:, [0, 1, 2]].reshape(-1)
    e_to = tri[:, [1, 2, 0]].reshape(-1)
    opp = tri[:, [2, 0, 1]].reshape(-1)
    owner = np.repeat(np.arange(t), 3)
    lo = np.minimum(e_from, e_to)
    hi = np.maximum(e_from, e_to)
    key = lo.astype(np.int64) * np.int64(n_points) + hi.astype(np.int64)
    order = np.argsort(key, kind="stable")
    ks = key[order]
    same = ks[:-1] == ks[1:]
    first = order[:-1][same]
    second = order[1:][same]
    # a sorted run of 3+ equal keys would pair overlapping entries
    if np.any(same[:-1] & same[1:]):
        raise NhGibbsError("edge shared by more than two triangles")
    return (
        e_from[first],
        e_to[first],
        opp[first],
        opp[second],
        owner[first],
        owner[second],
    )


def _orient_rows(tri: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Return the triangle array with every row counterclockwise."""
    a, b, c = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
    detl = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
    detr = (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    det = detl - detr
    errbound = _CCW_ERR * (np.abs(detl) + np.abs(detr))
    out = tri.copy()
    sure_cw = det < -errbound
    unsure = ~(np.abs(det) > errbound)
    for i in np.nonzero(unsure)[0]:
        s = orient_sign(*pts[tri[i, 0]], *pts[tri[i, 1]], *pts[tri[i, 2]])
        if s == 0:
            raise NhGibbsError("degenerate (collinear) triangle in triangulation")
        sure_cw[i] = s < 0
    out[sure_cw] = out[sure_cw][:, [0, 2, 1]]
    return out


def _illegal_edges(tri: np.ndarray, pts: np.ndarray, ranks: np.ndarray):
    """Interior edges violating the (perturbed) Delaunay criterion, as a
    deterministically ordered list of flip descriptors."""
    if len(tri) == 0:
        return []
    u, v, c, d, t1, t2 = _interior_edges(tri, len(pts))
    A, B, C, D = pts[u], pts[v], pts[c], pts[d]
    adx, ady = A[:, 0] - D[:, 0], A[:, 1] - D[:, 1]
    bdx, bdy = B[:, 0] - D[:, 0], B[:, 1] - D[:, 1]
    cdx, cdy = C[:, 0] - D[:, 0], C[:, 1] - D[:, 1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    p1, p2 = bdx * cdy, cdx * bdy
    p3, p4 = cdx * ady, adx * cdy
    p5, p6 = adx * bdy, bdx * ady
    det = alift * (p1 - p2) + blift * (p3 - p4) + clift * (p5 - p6)
    permanent = (
        (np.abs(p1) + np.abs(p2)) * alift
        + (np.abs(p3) + np.abs(p4)) * blift
        + (np.abs(p5) + np.abs(p6)) * clift
    )
    errbound = _ICC_ERR * permanent
    illegal = det > errbound
    suspect = ~((det > errbound) | (-det > errbound))
    for i in np.nonzero(suspect)[0]:
        illegal[i] = in_circle_perturbed(
            pts[u[i]], pts[v[i]], pts[c[i]], pts[d[i]],
            ranks[u[i]], ranks[v[i]], ranks[c[i]], ranks[d[i]],
        )
    idx = np.nonzero(illegal)[0]
    flips = [
        (int(u[i]), int(v[i]), int(c[i]), int(d[i]), int(t1[i]), int(t2[i]))
        for i in idx
    ]
    flips.sort()
    return flips


def _legalize(tri: np.ndarray, pts: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    """Lawson flips with the exact perturbed predicate until every interior
    edge is Delaunay.  Converges from any valid triangulation; in practice
    only exact cocircular ties require flips."""
    while True:
        flips = _illegal_edges(tri, pts, ranks)
        if not flips:
            return tri
        u, v, c, d, t1, t2 = flips[0]
        tri = tri.copy()
        tri[t1] = (u, d, c)
        tri[t2] = (d, v, c)


def _raw_triangulate(pts: np.ndarray) -> np.ndarray:
    """Triangle index array for a plane point set: qhull fast path, then an
    exact-predicate audit/repair pass.  Collinear input yields no triangles."""
    n = len(pts)
    if n < 3:
        return np.zeros((0, 3), dtype=np.int64)
    ranks = perturbation_ranks(pts)
    try:
        simplices = _Qhull(pts).simplices.astype(np.int64)
    except QhullError:
        if _all_collinear(pts):
            return np.zeros((0, 3), dtype=np.int64)
        raise
    used = np.zeros(n, dtype=bool)
    used[simplices.reshape(-1)] = True
    if not used.all():
        raise NhGibbsError(
            "triangulation dropped input points (degenerate configuration); "
            "perturb the coordinates slightly"
        )
    tri = _orient_rows(simplices, pts)
    return _legalize(tri, pts, ranks)


def _all_collinear(pts: np.ndarray) -> bool:
    base = pts[0]
    ref = None
    for q in pts[1:]:
        if q[0] != base[0] or q[1] != base[1]:
            ref = q
            break
    if ref is None:
        return True
    for q in pts[1:]:
        if orient_sign(base[0], base[1], ref[0], ref[1], q[0], q[1]) != 0:
            return False
    return True


# Default ghost band half-width as a fraction of L.  Canonical triangles
# have circumradius < L/4, so their vertices stay within L/2 of the anchor
# vertex in the fundamental domain; 0.51 leaves slack for roundoff.  A
# caller that only needs triangles certified up to a smaller radius bound
# may shrink the band: every enumeration failure then still implies a true
# circumradius of at least margin*L/2.
_GHOST_MARGIN = 0.51


def _ghost_cloud(coords: np.ndarray, L: float, margin: float):
    """Periodic images clipped to the margin band around [0, L)^2.  Base
    copies come first, so cloud index < n identifies an unshifted point."""
    parts = [coords]
    owners = [np.arange(len(coords))]
    m = margin * L
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            if i == 0 and j == 0:
                continue
            shifted = coords + np.array([i * L, j * L])
            keep = (
                (shifted[:, 0] > -m)
                & (shifted[:, 0] < L + m)
                & (shifted[:, 1] > -m)
                & (shifted[:, 1] < L + m)
            )
            if keep.any():
                parts.append(shifted[keep])
                owners.append(np.nonzero(keep)[0])
    return np.concatenate(parts), np.concatenate(owners)


def delaunay_triangulate(cfg, margin: float | None = None) -> Triangulation:
    """Delaunay triangulation of a point configuration.

    Plane mode covers the convex hull; torus mode enumerates every periodic
    triangle exactly once and requires every circumradius to stay below L/4,
    else TorusTooSparse is raised.  `margin` shrinks the ghost band when the
    caller only relies on triangles up to radius margin*L/2: any enumeration
    failure (TorusTooSparse) then still certifies a true circumradius of at
    least margin*L/2.
    """
    window = cfg.window
    coords = cfg.coords
    real_ids = cfg.ids
    n = len(coords)
    if margin is None:
        margin = _GHOST_MARGIN
    margin = min(max(margin, 0.02), _GHOST_MARGIN)
    if window.is_torus:
        if n < 3:
            raise TorusTooSparse("periodic triangulation needs at least 3 points")
        cloud, owner = _ghost_cloud(coords, window.L, margin)
        tri = _raw_triangulate(cloud)
        L = window.L
        # Each torus triangle is kept exactly once: the copy whose
        # smallest-id vertex is an unshifted base point.  This is an exact
        # integer test, immune to circumcenters landing on the seam.
        tri_rows = owner[tri]
        tri_ids = real_ids[tri_rows]
        order = np.argsort(tri_ids, axis=1)
        sorted_ids = np.take_along_axis(tri_ids, order, axis=1)
        distinct = (
            (sorted_ids[:, 0] != sorted_ids[:, 1])
            & (sorted_ids[:, 1] != sorted_ids[:, 2])
        )
        anchor_cloud_idx = np.take_along_axis(tri, order[:, :1], axis=1)[:, 0]
        canonical = distinct & (anchor_cloud_idx < n)
        tri = tri[canonical]
        centers, radii, min_edges, perims = _circumdata(cloud[tri])
        if len(radii) and float(radii.max()) >= L / 4.0:
            raise TorusTooSparse(
                f"canonical circumradius {radii.max():.6g} >= L/4 = {L / 4.0:.6g}"
            )
        if len(tri) != 2 * n:
            raise TorusTooSparse(
                f"periodic triangulation produced {len(tri)} canonical "
                f"triangles for {n} points (expected {2 * n})"
            )
        ids = real_ids[owner[tri]]
        verts = cloud[tri]
    else:
        tri = _raw_triangulate(coords)
        ids = real_ids[tri] if len(tri) else np.zeros((0, 3), dtype=np.int64)
        verts = coords[tri] if len(tri) else np.zeros((0, 3, 2))
        if len(tri):
            centers, radii, min_edges, perims = _circumdata(verts)
        else:
            centers = np.zeros((0, 2))
            radii = min_edges = perims = np.zeros(0)
    return Triangulation(
        window=window,
        ids=np.ascontiguousarray(ids, dtype=np.int64),
        verts=np.ascontiguousarray(verts, dtype=float),
        centers=np.ascontiguousarray(centers, dtype=float),
        radii=np.ascontiguousarray(radii, dtype=float),
        min_edges=np.ascontiguousarray(min_edges, dtype=float),
        perimeters=np.ascontiguousarray(perims, dtype=float),
        fingerprint=cfg.fingerprint,
        n_points=n,
    )


def probe_insertion(tri: Triangulation, x):
    """Bowyer-Watson cavity of a virtual insertion at x into a torus
    triangulation: indices of destroyed triangles and the circumradius,
    shortest side and perimeter of each created triangle.

    Returns None when x coincides with an existing vertex (no open circumball
    strictly contains it).
    """
    window = tri.window
    x = np.asarray(x, dtype=float)
    if len(tri) == 0:
        return None
    dist = window.distances(x, tri.centers)
    destroyed = np.nonzero(dist < tri.radii)[0]
    if len(destroyed) == 0:
        return None
    L = window.L
    edge_count: dict[tuple[int, int], int] = {}
    edge_coords: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
    for t in destroyed:
        if window.is_torus:
            shift = L * np.round((x - tri.centers[t]) / L)
        else:
            shift = 0.0
        vs = tri.verts[t] + shift
        idv = tri.ids[t]
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = (int(min(idv[a], idv[b])), int(max(idv[a], idv[b])))
            edge_count[key] = edge_count.get(key, 0) + 1
            edge_coords[key] = (vs[a], vs[b])
    boundary = [k for k, cnt in edge_count.items() if cnt == 1]
    if len(boundary) != len(destroyed) + 2:
        raise NhGibbsError("insertion cavity is not a topological disk")
    radii = np.empty(len(boundary))
    min_edges = np.empty(len(boundary))
    perims = np.empty(len(boundary))
    for i, key in enumerate(sorted(boundary)):
        pu, pv = edge_coords[key]
        try:
            _, r = circumcircle(x, pu, pv)
        except Collinear:
            r = math.inf
        e0 = math.hypot(pu[0] - x[0], pu[1] - x[1])
        e1 = math.hypot(pv[0] - x[0], pv[1] - x[1])
        e2 = math.hypot(pu[0] - pv[0], pu[1] - pv[1])
        radii[i] = r
        min_edges[i] = min(e0, e1, e2)
        perims[i] = e0 + e1 + e2
    return destroyed, radii, min_edges, perims
