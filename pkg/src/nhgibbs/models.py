"""Energy models: hard-sphere pairwise steps, hardcore Delaunay tessellation,
forced-clustering k-nearest-neighbors, and the Poisson null model.

Every model exposes window energy over a region, the local (insertion) energy
of a point, sufficient statistics (the energy is linear in theta at fixed
hardcore parameter), removability, the hardcore support statistic, and a
finite interaction range.  Infinite energy is represented by ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry
from .configuration import (
    PointConfiguration,
    region_contains,
    region_distance,
)
from .errors import (
    ConfigError,
    DuplicatePoint,
    InfeasibleBase,
    OutsideWindow,
    TorusTooSparse,
    Undefined,
)

INF = math.inf


@dataclass(frozen=True)
class ModelParams:
    """Hardcore parameter alpha plus the smooth interaction vector theta."""

    alpha: float
    theta: tuple

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be finite and non-negative")
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))

    @property
    def theta_vec(self) -> np.ndarray:
        return np.asarray(self.theta, dtype=float)


@dataclass
class LocalStatistics:
    """Hardcore feasibility of inserting a point, and when feasible the
    statistic vector t with local energy = theta . t."""

    feasible: bool
    t: Optional[np.ndarray] = None


@dataclass(frozen=True)
class HardcoreStatistic:
    value: float
    attained: bool


# ---------------------------------------------------------------------------
# Bounded potentials for the kNN model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhiConstant:
    value: float = 1.0
    kind: str = field(default="const", init=False)

    def __post_init__(self):
        if self.value == 0:
            raise ValueError("constant potential must be non-null")

    @property
    def bound(self) -> float:
        return abs(self.value)

    def __call__(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.value)


@dataclass(frozen=True)
class PhiTruncLin:
    """max(0, 1 - u/cutoff)."""

    cutoff: float = 1.0
    kind: str = field(default="trunclin", init=False)

    def __post_init__(self):
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")

    @property
    def bound(self) -> float:
        return 1.0

    def __call__(self, u):
        return np.maximum(0.0, 1.0 - np.asarray(u, dtype=float) / self.cutoff)


@dataclass(frozen=True)
class PhiStep:
    """height on [0, cutoff], zero beyond."""

    height: float = 1.0
    cutoff: float = 1.0
    kind: str = field(default="step", init=False)

    def __post_init__(self):
        if self.height == 0:
            raise ValueError("step potential must be non-null")
        if self.cutoff <= 0:
            raise ValueError("cutoff must be positive")

    @property
    def bound(self) -> float:
        return abs(self.height)

    def __call__(self, u):
        return np.where(np.asarray(u, dtype=float) <= self.cutoff, self.height, 0.0)


def parse_phi(kind: str, params: str):
    vals = [float(v) for v in params.split(",")] if params else []
    if kind == "const":
        return PhiConstant(*vals)
    if kind == "trunclin":
        return PhiTruncLin(*vals)
    if kind == "step":
        return PhiStep(*vals)
    raise ConfigError(f"unknown potential family {kind!r}")


# ---------------------------------------------------------------------------
# Model base
# ---------------------------------------------------------------------------

class Model:
    """Common surface; concrete models fill in the geometry-specific parts."""

    name: str = ""
    p: int = 0
    cluster_size: Optional[int] = None  # points per cluster proposal, if any

    # -- contracts implemented per model ------------------------------------

    def window_energy(self, params: ModelParams, cfg: PointConfiguration,
                      region=None) -> float:
        raise NotImplementedError

    def sufficient_statistics(self, alpha: float, x,
                              cfg: PointConfiguration) -> LocalStatistics:
        raise NotImplementedError

    def is_removable(self, alpha: float, x_id: int,
                     cfg: PointConfiguration) -> bool:
        raise NotImplementedError

    def hardcore_statistic(self, cfg: PointConfiguration,
                           region=None) -> HardcoreStatistic:
        raise NotImplementedError

    def interaction_range(self, alpha: float) -> float:
        raise NotImplementedError

    # -- shared derived operations -------------------------------------------

    def local_energy(self, params: ModelParams, x,
                     cfg: PointConfiguration) -> float:
        """Energy of inserting x into cfg, evaluated locally; inf iff the
        insertion violates a hardcore clause."""
        st = self.sufficient_statistics(params.alpha, x, cfg)
        if not st.feasible:
            return INF
        return float(np.dot(params.theta_vec, st.t))

    def removable_set(self, alpha: float, cfg: PointConfiguration,
                      region=None) -> frozenset:
        mask = region_contains(region, cfg.coords, cfg.window)
        return frozenset(
            int(pid)
            for pid, inside in zip(cfg.ids, mask)
            if inside and self.is_removable(alpha, int(pid), cfg)
        )

    def stats_batch(self, alpha: float, pts: np.ndarray,
                    cfg: PointConfiguration):
        """Vectorized sufficient statistics for many insertion points:
        (feasible mask, statistics matrix with zero rows where infeasible)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        feas = np.zeros(len(pts), dtype=bool)
        T = np.zeros((len(pts), self.p))
        for i, x in enumerate(pts):
            st = self.sufficient_statistics(alpha, x, cfg)
            if st.feasible:
                feas[i] = True
                T[i] = st.t
        return feas, T

    def validate_params(self, params: ModelParams) -> None:
        if len(params.theta) != self.p:
            raise ConfigError(
                f"{self.name}: theta has {len(params.theta)} components, "
                f"expected {self.p}"
            )


# ---------------------------------------------------------------------------
# Hard-sphere model with pairwise step interaction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HardSphereSpec:
    """Step radii 0 < r_1 < ... < r_p; the hardcore radius is 1/alpha."""

    steps: tuple

    def __post_init__(self):
        steps = tuple(float(s) for s in self.steps)
        if not steps:
            raise ValueError("at least one step radius required")
        if steps[0] <= 0 or any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("step radii must be strictly increasing and positive")
        object.__setattr__(self, "steps", steps)


class HardSphereModel(Model):
    name = "hardsphere"

    def __init__(self, spec: HardSphereSpec):
        self.spec = spec
        self.p = len(spec.steps)

    def _edges(self, alpha: float) -> np.ndarray:
        hc = 1.0 / alpha
        return np.concatenate([[hc], hc + np.asarray(self.spec.steps)])

    def interaction_range(self, alpha: float) -> float:
        return 1.0 / alpha + self.spec.steps[-1]

    def _pair_counts(self, alpha: float, d: np.ndarray):
        """(hardcore violated?, per-step counts) for a distance array."""
        edges = self._edges(alpha)
        if d.size == 0:
            return False, np.zeros(self.p)
        hard = bool((d <= edges[0]).any())
        idx = np.searchsorted(edges, d, side="left")
        t = np.zeros(self.p)
        inside = (idx >= 1) & (idx <= self.p)
        if inside.any():
            t = np.bincount(idx[inside] - 1, minlength=self.p).astype(float)
        return hard, t

    def window_energy(self, params, cfg, region=None):
        n = len(cfg)
        if n < 2:
            return 0.0
        w = cfg.window
        rng = self.interaction_range(params.alpha)
        near = region_distance(region, cfg.coords, w) <= rng
        if not near.any():
            return 0.0
        sub = cfg.coords[near]
        in_region = region_contains(region, sub, w)
        d = sub[:, None, :] - sub[None, :, :]
        if w.is_torus:
            d = d - w.L * np.round(d / w.L)
        dist = np.hypot(d[..., 0], d[..., 1])
        i, j = np.triu_indices(len(sub), k=1)
        meets = in_region[i] | in_region[j]
        hard, t = self._pair_counts(params.alpha, dist[i[meets], j[meets]])
        if hard:
            return INF
        return float(np.dot(params.theta_vec, t))

    def sufficient_statistics(self, alpha, x, cfg):
        d = cfg.window.distances(x, cfg.coords)
        hard, t = self._pair_counts(alpha, d)
        if hard:
            return LocalStatistics(False)
        return LocalStatistics(True, t)

    def stats_batch(self, alpha, pts, cfg):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        m = len(pts)
        feas = np.ones(m, dtype=bool)
        T = np.zeros((m, self.p))
        if len(cfg) == 0:
            return feas, T
        edges = self._edges(alpha)
        w = cfg.window
        coords = cfg.coords
        chunk = max(1, int(4e6 // max(len(coords), 1)))
        for s in range(0, m, chunk):
            block = pts[s:s + chunk]
            d = block[:, None, :] - coords[None, :, :]
            if w.is_torus:
                d = d - w.L * np.round(d / w.L)
            dist = np.hypot(d[..., 0], d[..., 1])
            feas[s:s + chunk] = ~(dist <= edges[0]).any(axis=1)
            idx = np.searchsorted(edges, dist.ravel(), side="left")
            inside = (idx >= 1) & (idx <= self.p)
            rows = np.repeat(np.arange(len(block)), len(coords))
            np.add.at(T[s:s + chunk], (rows[inside], idx[inside] - 1), 1.0)
        T[~feas] = 0.0
        return feas, T

    def is_removable(self, alpha, x_id, cfg):
        cfg.row_of(x_id)  # raises UnknownId
        return True  # hereditary: deletion cannot create an overlap

    def removable_set(self, alpha, cfg, region=None):
        mask = region_contains(region, cfg.coords, cfg.window)
        return frozenset(int(pid) for pid in cfg.ids[mask])

    def hardcore_statistic(self, cfg, region=None):
        w = cfg.window
        coords = cfg.coords
        if len(cfg) < 2:
            raise Undefined("hard-sphere statistic needs at least two points")
        in_region = region_contains(region, coords, w)
        if not in_region.any():
            raise Undefined("no pair meets the region")
        best = INF
        for i in np.nonzero(in_region)[0]:
            d = w.distances(coords[i], coords)
            d[i] = INF
            best = min(best, float(d.min()))
        if not math.isfinite(best) or best <= 0:
            raise Undefined("degenerate pattern")
        return HardcoreStatistic(1.0 / best, attained=False)


# ---------------------------------------------------------------------------
# Hardcore Delaunay tessellation model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DelaunaySpec:
    """Minimum admissible triangle edge length r; admissible alpha > r."""

    min_edge: float

    def __post_init__(self):
        if self.min_edge <= 0:
            raise ValueError("min_edge must be positive")


class DelaunayModel(Model):
    name = "delaunay"
    p = 1

    def __init__(self, spec: DelaunaySpec):
        self.spec = spec

    def interaction_range(self, alpha: float) -> float:
        return 2.0 * alpha

    def _triangulation(self, alpha: float, cfg: PointConfiguration):
        """Triangulation, or None when the pattern is too sparse for the
        periodic build but provably has a circumradius >= alpha.

        The ghost band only needs to certify triangles up to radius alpha:
        a failed enumeration then implies a true circumradius of at least
        margin*L/2 >= alpha, i.e. infinite energy.
        """
        margin = 1.02 * (2.0 * alpha / cfg.window.L) + 0.005
        try:
            return cfg.triangulation(margin)
        except TorusTooSparse:
            if alpha <= cfg.window.L / 4.0:
                return None
            raise

    def _phi_infinite(self, alpha, radii, min_edges) -> bool:
        return bool(((radii >= alpha) | (min_edges <= self.spec.min_edge)).any())

    def window_energy(self, params, cfg, region=None):
        if len(cfg) == 0:
            return 0.0
        if cfg.window.is_torus and len(cfg) < 3:
            if params.alpha <= cfg.window.L / 4.0:
                return INF
            raise TorusTooSparse("fewer than 3 points on the torus")
        tri = self._triangulation(params.alpha, cfg)
        if tri is None:
            return INF
        if region is None:
            mask = np.ones(len(tri), dtype=bool)
        else:
            d = region_distance(region, tri.centers, cfg.window)
            mask = d < tri.radii
        if self._phi_infinite(params.alpha, tri.radii[mask], tri.min_edges[mask]):
            return INF
        return float(params.theta[0] * tri.perimeters[mask].sum())

    def _feasible(self, alpha: float, cfg: PointConfiguration) -> bool:
        return math.isfinite(
            self.window_energy(ModelParams(alpha, (0.0,)), cfg)
        )

    def sufficient_statistics(self, alpha, x, cfg):
        w = cfg.window
        if w.is_torus:
            if len(cfg) < 3:
                if not self._sparse_is_infinite(alpha, w):
                    raise TorusTooSparse("fewer than 3 points on the torus")
                if len(cfg) == 0:
                    # a lone point leaves holes of radius >= L/4 >= alpha
                    return LocalStatistics(False)
                raise InfeasibleBase("base configuration has infinite energy")
            tri = self._triangulation(alpha, cfg)
            if tri is None:
                raise InfeasibleBase("base configuration has infinite energy")
            probe = geometry.probe_insertion(tri, x)
            if probe is None:
                return LocalStatistics(False)  # coincides with a vertex
            destroyed, radii, min_edges, perims = probe
            if self._phi_infinite(alpha, tri.radii[destroyed],
                                  tri.min_edges[destroyed]):
                raise InfeasibleBase("base configuration has infinite energy")
            if self._phi_infinite(alpha, radii, min_edges):
                return LocalStatistics(False)
            t = perims.sum() - tri.perimeters[destroyed].sum()
            return LocalStatistics(True, np.array([t]))
        return self._stats_plane(alpha, x, cfg)

    def _sparse_is_infinite(self, alpha: float, window) -> bool:
        return alpha <= window.L / 4.0

    def _stats_plane(self, alpha, x, cfg):
        tri_old = cfg.triangulation()
        try:
            cfg2 = cfg.insert(x)
        except (DuplicatePoint, OutsideWindow):
            return LocalStatistics(False)
        tri_new = cfg2.triangulation()
        new_id = cfg.next_id
        created = np.array(
            [i for i in range(len(tri_new)) if new_id in tri_new.ids[i]],
            dtype=int,
        )
        old_triples = tri_old.id_triples()
        new_triples = tri_new.id_triples()
        destroyed_triples = old_triples - new_triples
        destroyed = np.array(
            [
                i for i in range(len(tri_old))
                if tuple(sorted(map(int, tri_old.ids[i]))) in destroyed_triples
            ],
            dtype=int,
        )
        if self._phi_infinite(alpha, tri_old.radii[destroyed],
                              tri_old.min_edges[destroyed]):
            raise InfeasibleBase("base configuration has infinite energy")
        if self._phi_infinite(alpha, tri_new.radii[created],
                              tri_new.min_edges[created]):
            return LocalStatistics(False)
        t = tri_new.perimeters[created].sum() - tri_old.perimeters[destroyed].sum()
        return LocalStatistics(True, np.array([t]))

    def is_removable(self, alpha, x_id, cfg):
        cfg.row_of(x_id)
        cfg2 = cfg.delete(x_id)
        if cfg.window.is_torus and len(cfg2) < 3:
            return not self._sparse_is_infinite(alpha, cfg.window)
        return self._feasible(alpha, cfg2)

    def hardcore_statistic(self, cfg, region=None):
        if len(cfg) < 3:
            raise Undefined("Delaunay statistic needs at least three points")
        try:
            tri = cfg.triangulation()
        except TorusTooSparse as e:
            raise Undefined(f"periodic tessellation not certifiable: {e}") from e
        if region is None:
            mask = np.ones(len(tri), dtype=bool)
        else:
            d = region_distance(region, tri.centers, cfg.window)
            mask = d < tri.radii
        if not mask.any():
            raise Undefined("no triangle meets the region")
        if bool((tri.min_edges[mask] <= self.spec.min_edge).any()):
            raise Undefined(
                "pattern has an edge below the structural minimum: "
                "no admissible hardcore parameter"
            )
        return HardcoreStatistic(float(tri.radii[mask].max()), attained=False)


# ---------------------------------------------------------------------------
# Forced-clustering k-nearest-neighbors model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnnSpec:
    k: int
    phi: object

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


class KnnModel(Model):
    name = "knn"
    p = 1

    def __init__(self, spec: KnnSpec):
        self.spec = spec

    @property
    def cluster_size(self) -> int:
        return self.spec.k + 1

    def interaction_range(self, alpha: float) -> float:
        return 2.0 * alpha

    def _kth_dists(self, cfg: PointConfiguration) -> np.ndarray:
        """k-th nearest neighbor distance of every configuration point."""
        k = self.spec.k
        if len(cfg) < k + 1:
            return np.full(len(cfg), INF)
        dd, _ = cfg.kdtree().query(cfg.coords, k=k + 1)
        return dd[:, k]

    def window_energy(self, params, cfg, region=None):
        n = len(cfg)
        if n == 0:
            return 0.0
        k = self.spec.k
        alpha = params.alpha
        w = cfg.window
        relevant = region_distance(region, cfg.coords, w) < alpha
        if not relevant.any():
            return 0.0
        if n < k + 1:
            return INF
        # the hardcore test compares the same kth-distance floats the
        # support statistic reports, so the attained infimum is feasible
        kth = self._kth_dists(cfg)
        if bool((kth[relevant] > alpha).any()):
            return INF
        dd, _ = cfg.kdtree().query(cfg.coords[relevant], k=k + 1)
        phi_sum = float(self.spec.phi(dd[:, 1:]).sum())
        return float(params.theta[0] * phi_sum)

    def sufficient_statistics(self, alpha, x, cfg):
        # all hardcore comparisons go through the KD-tree distance path so
        # that the exact attained support statistic stays feasible
        k = self.spec.k
        w = cfg.window
        n = len(cfg)
        if n == 0:
            return LocalStatistics(False)  # a lone point has no neighbors
        if n <= k:
            raise InfeasibleBase(
                "a non-empty configuration with at most k points has "
                "infinite energy"
            )
        x = np.asarray(x, dtype=float)
        tree = cfg.kdtree()
        dk, _ = tree.query(x, k=k)
        dk = np.atleast_1d(dk)
        if dk[0] == 0.0:
            return LocalStatistics(False)  # coincident insertion
        if dk[k - 1] > alpha:
            return LocalStatistics(False)
        kth = self._kth_dists(cfg)
        if bool((kth > alpha).any()):
            raise InfeasibleBase(
                "a configuration point lacks its k neighbors within alpha"
            )
        t = float(self.spec.phi(dk).sum())
        near = np.asarray(tree.query_ball_point(x, alpha), dtype=int)
        if len(near):
            du = w.distances(x, cfg.coords[near])
            adopt = du < kth[near]  # a tie leaves the energy unchanged
            if adopt.any():
                t += float(
                    (self.spec.phi(du[adopt]) - self.spec.phi(kth[near][adopt])).sum()
                )
        return LocalStatistics(True, np.array([t]))

    def stats_batch(self, alpha, pts, cfg):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        m = len(pts)
        k = self.spec.k
        feas = np.zeros(m, dtype=bool)
        T = np.zeros((m, 1))
        n = len(cfg)
        if n == 0:
            return feas, T
        if n <= k:
            raise InfeasibleBase(
                "a non-empty configuration with at most k points has "
                "infinite energy"
            )
        tree = cfg.kdtree()
        dd, _ = tree.query(pts, k=k)
        dd = dd.reshape(m, -1)
        feas = (dd[:, k - 1] <= alpha) & (dd[:, 0] > 0.0)
        if not feas.any():
            return feas, T
        kth = self._kth_dists(cfg)
        if bool((kth > alpha).any()):
            raise InfeasibleBase("base configuration has infinite energy")
        T[feas, 0] = self.spec.phi(dd[feas]).sum(axis=1)
        w = cfg.window
        neighbor_lists = tree.query_ball_point(pts, alpha)
        for i in np.nonzero(feas)[0]:
            nbrs = np.asarray(neighbor_lists[i], dtype=int)
            if len(nbrs) == 0:
                continue
            du = w.distances(pts[i], cfg.coords[nbrs])
            adopt = du < kth[nbrs]  # a tie leaves the energy unchanged
            if adopt.any():
                T[i, 0] += float(
                    (self.spec.phi(du[adopt]) - self.spec.phi(kth[nbrs][adopt])).sum()
                )
        return feas, T

    def _removable_rows(self, alpha, cfg) -> np.ndarray:
        """Boolean mask over rows: deleting this point leaves every survivor
        with k neighbors within alpha.  Row i is affected only when i sits
        among the deleted point's neighbors' first k others, in which case
        the criterion shifts to their (k+1)-th neighbor distance."""
        n = len(cfg)
        k = self.spec.k
        if n == 1:
            return np.ones(1, dtype=bool)  # the empty pattern is feasible
        if n <= k + 1:
            return np.zeros(n, dtype=bool)
        dd, ii = cfg.kdtree().query(cfg.coords, k=k + 2)
        removable = np.ones(n, dtype=bool)
        # a survivor that loses one of its first k others falls back on its
        # (k+1)-th other neighbor
        bad_owners = dd[:, k + 1] > alpha
        for col in range(1, k + 1):
            removable[ii[bad_owners, col]] = False
        return removable

    def is_removable(self, alpha, x_id, cfg):
        row = cfg.row_of(x_id)
        return bool(self._removable_rows(alpha, cfg)[row])

    def removable_set(self, alpha, cfg, region=None):
        n = len(cfg)
        if n == 0:
            return frozenset()
        mask = region_contains(region, cfg.coords, cfg.window)
        mask &= self._removable_rows(alpha, cfg)
        return frozenset(int(pid) for pid in cfg.ids[mask])

    def hardcore_statistic(self, cfg, region=None):
        if len(cfg) <= self.spec.k:
            raise Undefined(
                f"kNN statistic needs more than k = {self.spec.k} points"
            )
        kth = self._kth_dists(cfg)
        rdist = region_distance(region, cfg.coords, cfg.window)
        candidates = kth > rdist
        if not candidates.any():
            return HardcoreStatistic(0.0, attained=True)
        return HardcoreStatistic(float(kth[candidates].max()), attained=True)


# ---------------------------------------------------------------------------
# Poisson null model
# ---------------------------------------------------------------------------

class PoissonModel(Model):
    name = "poisson"
    p = 0

    def interaction_range(self, alpha: float) -> float:
        return 0.0

    def window_energy(self, params, cfg, region=None):
        return 0.0

    def sufficient_statistics(self, alpha, x, cfg):
        return LocalStatistics(True, np.zeros(0))

    def is_removable(self, alpha, x_id, cfg):
        cfg.row_of(x_id)
        return True

    def removable_set(self, alpha, cfg, region=None):
        mask = region_contains(region, cfg.coords, cfg.window)
        return frozenset(int(pid) for pid in cfg.ids[mask])

    def stats_batch(self, alpha, pts, cfg):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.ones(len(pts), dtype=bool), np.zeros((len(pts), 0))

    def hardcore_statistic(self, cfg, region=None):
        return HardcoreStatistic(0.0, attained=True)


# ---------------------------------------------------------------------------
# Model spec files (flat key = value)
# ---------------------------------------------------------------------------

@dataclass
class ModelFile:
    model: Model
    params: ModelParams
    alpha_box: Optional[tuple] = None
    theta_box: Optional[tuple] = None


def build_model(kv: dict) -> ModelFile:
    """Construct a model and its parameters from flat key-value entries."""
    try:
        kind = kv["model"]
    except KeyError:
        raise ConfigError("model spec is missing the 'model' key") from None
    if kind == "hardsphere":
        steps = tuple(float(s) for s in kv["steps"].split(","))
        model: Model = HardSphereModel(HardSphereSpec(steps))
    elif kind == "delaunay":
        model = DelaunayModel(DelaunaySpec(float(kv["min_edge"])))
    elif kind == "knn":
        phi = parse_phi(kv.get("phi", "trunclin"), kv.get("phi_params", ""))
        model = KnnModel(KnnSpec(int(kv["k"]), phi))
    elif kind == "poisson":
        model = PoissonModel()
    else:
        raise ConfigError(f"unknown model {kind!r}")
    if "alpha" in kv:
        alpha = float(kv["alpha"])
    elif kind == "poisson":
        alpha = 0.0
    else:
        raise ConfigError("model spec is missing the 'alpha' key")
    if "theta" in kv and kv["theta"]:
        theta = tuple(float(t) for t in kv["theta"].split(","))
    else:
        theta = ()
    params = ModelParams(alpha, theta)
    model.validate_params(params)
    if kind == "delaunay" and alpha <= model.spec.min_edge:
        raise ConfigError("delaunay model requires alpha > min_edge")
    alpha_box = None
    if "alpha_min" in kv and "alpha_max" in kv:
        alpha_box = (float(kv["alpha_min"]), float(kv["alpha_max"]))
    theta_box = None
    if "theta_min" in kv and "theta_max" in kv:
        lo = tuple(float(v) for v in kv["theta_min"].split(","))
        hi = tuple(float(v) for v in kv["theta_max"].split(","))
        if len(lo) != model.p or len(hi) != model.p:
            raise ConfigError("theta bounds must match the theta dimension")
        theta_box = (lo, hi)
    return ModelFile(model, params, alpha_box, theta_box)


def describe_model(model: Model, params: ModelParams) -> dict:
    """Flat key-value description that build_model() round-trips."""
    out = {"model": model.name, "alpha": f"{params.alpha:.17g}"}
    if params.theta:
        out["theta"] = ",".join(f"{t:.17g}" for t in params.theta)
    if isinstance(model, HardSphereModel):
        out["steps"] = ",".join(f"{s:.17g}" for s in model.spec.steps)
    elif isinstance(model, DelaunayModel):
        out["min_edge"] = f"{model.spec.min_edge:.17g}"
    elif isinstance(model, KnnModel):
        out["k"] = str(model.spec.k)
        phi = model.spec.phi
        out["phi"] = phi.kind
        if isinstance(phi, PhiConstant):
            out["phi_params"] = f"{phi.value:.17g}"
        elif isinstance(phi, PhiTruncLin):
            out["phi_params"] = f"{phi.cutoff:.17g}"
        elif isinstance(phi, PhiStep):
            out["phi_params"] = f"{phi.height:.17g},{phi.cutoff:.17g}"
    return out
