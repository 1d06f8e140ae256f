"""Finite point configurations on a square window: edits, restriction,
counting, regions, and CSV serialization."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import geometry
from .errors import DuplicatePoint, OutsideWindow, UnknownId
from .geometry import Point, TorusWindow


class PointConfiguration:
    """A simple point pattern with stable integer ids.

    Configurations are persistent values: every edit returns a new object and
    leaves the input untouched.  Coordinate arrays are marked read-only, and
    derived structures (fingerprint, KD-tree, triangulation) are memoized per
    instance, which is safe precisely because instances never mutate.
    """

    __slots__ = (
        "_coords", "_ids", "window", "_next_id",
        "_fingerprint", "_tree", "_tri", "_row_of",
    )

    def __init__(self, coords: np.ndarray, ids: np.ndarray,
                 window: TorusWindow, next_id: int):
        coords = np.ascontiguousarray(coords, dtype=float).reshape(-1, 2)
        ids = np.ascontiguousarray(ids, dtype=np.int64).reshape(-1)
        if len(coords) != len(ids):
            raise ValueError("coords and ids length mismatch")
        coords.setflags(write=False)
        ids.setflags(write=False)
        self._coords = coords
        self._ids = ids
        self.window = window
        self._next_id = int(next_id)
        self._fingerprint = None
        self._tree = None
        self._tri = None
        self._row_of = None

    # -- construction -------------------------------------------------------

    @classmethod
    def empty(cls, window: TorusWindow) -> "PointConfiguration":
        return cls(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), window, 0)

    @classmethod
    def from_points(cls, points, window: TorusWindow) -> "PointConfiguration":
        coords = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(coords):
            if not np.isfinite(coords).all():
                raise OutsideWindow("non-finite coordinates")
            inside = (
                (coords >= 0.0).all(axis=1) & (coords < window.L).all(axis=1)
            )
            if not inside.all():
                bad = coords[~inside][0]
                raise OutsideWindow(f"point {tuple(bad)} outside [0, {window.L})^2")
            if len(np.unique(coords, axis=0)) != len(coords):
                raise DuplicatePoint("coincident points in input")
        return cls(coords, np.arange(len(coords), dtype=np.int64),
                   window, len(coords))

    # -- basic accessors ----------------------------------------------------

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    @property
    def next_id(self) -> int:
        return self._next_id

    def __len__(self) -> int:
        return len(self._coords)

    @property
    def fingerprint(self) -> int:
        if self._fingerprint is None:
            h = hashlib.blake2b(digest_size=16)
            h.update(self._coords.tobytes())
            h.update(self._ids.tobytes())
            h.update(f"{self.window.L!r}|{self.window.boundary}".encode())
            self._fingerprint = int.from_bytes(h.digest(), "little")
        return self._fingerprint

    def _rows(self) -> dict[int, int]:
        if self._row_of is None:
            self._row_of = {int(pid): i for i, pid in enumerate(self._ids)}
        return self._row_of

    def row_of(self, point_id: int) -> int:
        try:
            return self._rows()[int(point_id)]
        except KeyError:
            raise UnknownId(f"no point with id {point_id}") from None

    def point(self, point_id: int) -> Point:
        r = self.row_of(point_id)
        return Point(float(self._coords[r, 0]), float(self._coords[r, 1]))

    def kdtree(self) -> cKDTree:
        if self._tree is None:
            if self.window.is_torus:
                self._tree = cKDTree(self._coords, boxsize=self.window.L)
            else:
                self._tree = cKDTree(self._coords)
        return self._tree

    def triangulation(self, margin: float | None = None) -> geometry.Triangulation:
        """Memoized Delaunay triangulation.  Successful builds agree for any
        admissible ghost margin, so the first one is cached."""
        if self._tri is None:
            self._tri = geometry.delaunay_triangulate(self, margin)
        return self._tri

    # -- edits (persistent) -------------------------------------------------

    def insert(self, p) -> "PointConfiguration":
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise OutsideWindow("non-finite coordinates")
        if not (0.0 <= x < self.window.L and 0.0 <= y < self.window.L):
            raise OutsideWindow(f"point ({x}, {y}) outside the window")
        if len(self) and bool(
            ((self._coords[:, 0] == x) & (self._coords[:, 1] == y)).any()
        ):
            raise DuplicatePoint(f"point ({x}, {y}) already present")
        coords = np.vstack([self._coords, [[x, y]]])
        ids = np.append(self._ids, self._next_id)
        return PointConfiguration(coords, ids, self.window, self._next_id + 1)

    def insert_many(self, points) -> "PointConfiguration":
        cfg = self
        for p in np.asarray(points, dtype=float).reshape(-1, 2):
            cfg = cfg.insert(p)
        return cfg

    def delete(self, point_id: int) -> "PointConfiguration":
        r = self.row_of(point_id)
        keep = np.ones(len(self), dtype=bool)
        keep[r] = False
        return PointConfiguration(
            self._coords[keep], self._ids[keep], self.window, self._next_id
        )

    def delete_many(self, point_ids) -> "PointConfiguration":
        rows = [self.row_of(pid) for pid in point_ids]
        keep = np.ones(len(self), dtype=bool)
        keep[rows] = False
        return PointConfiguration(
            self._coords[keep], self._ids[keep], self.window, self._next_id
        )

    # -- queries ------------------------------------------------------------

    def count_in_ball(self, center, radius: float) -> int:
        """Points within the CLOSED ball of the window metric."""
        if radius < 0:
            raise ValueError("radius must be >= 0")
        if len(self) == 0:
            return 0
        d = self.window.distances(center, self._coords)
        return int(np.count_nonzero(d <= radius))

    def restrict(self, region) -> "PointConfiguration":
        mask = region_contains(region, self._coords, self.window)
        return PointConfiguration(
            self._coords[mask], self._ids[mask], self.window, self._next_id
        )


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RectRegion:
    """Closed axis-aligned rectangle inside the window (no wrap-around)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 <= self.x1 and self.y0 <= self.y1):
            raise ValueError("empty rectangle")

    def erode(self, margin: float) -> "RectRegion":
        r = RectRegion(
            self.x0 + margin, self.y0 + margin,
            self.x1 - margin, self.y1 - margin,
        )
        return r


@dataclass(frozen=True)
class BallRegion:
    """Closed metric ball."""

    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("negative radius")


@dataclass(frozen=True)
class UnionRegion:
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValueError("empty union")


def whole_window(window: TorusWindow) -> RectRegion:
    return RectRegion(0.0, 0.0, window.L, window.L)


def _axis_gap(p: np.ndarray, a: float, b: float, window: TorusWindow) -> np.ndarray:
    """Distance from coordinates to the interval [a, b] along one axis,
    wrapping on the torus."""
    if window.is_torus:
        t = np.mod(p - a, window.L)
        w = b - a
        return np.where(t <= w, 0.0, np.minimum(t - w, window.L - t))
    return np.maximum(np.maximum(a - p, p - b), 0.0)


def region_contains(region, pts: np.ndarray, window: TorusWindow) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if region is None:
        return np.ones(len(pts), dtype=bool)
    if isinstance(region, RectRegion):
        return (
            (pts[:, 0] >= region.x0) & (pts[:, 0] <= region.x1)
            & (pts[:, 1] >= region.y0) & (pts[:, 1] <= region.y1)
        )
    if isinstance(region, BallRegion):
        d = window.distances((region.cx, region.cy), pts)
        return d <= region.r
    if isinstance(region, UnionRegion):
        m = np.zeros(len(pts), dtype=bool)
        for part in region.parts:
            m |= region_contains(part, pts, window)
        return m
    raise TypeError(f"unsupported region {region!r}")


def region_distance(region, pts: np.ndarray, window: TorusWindow) -> np.ndarray:
    """Metric distance from each point to the region (0 inside)."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if region is None:
        return np.zeros(len(pts))
    if isinstance(region, RectRegion):
        gx = _axis_gap(pts[:, 0], region.x0, region.x1, window)
        gy = _axis_gap(pts[:, 1], region.y0, region.y1, window)
        return np.hypot(gx, gy)
    if isinstance(region, BallRegion):
        d = window.distances((region.cx, region.cy), pts)
        return np.maximum(d - region.r, 0.0)
    if isinstance(region, UnionRegion):
        return np.min(
            [region_distance(p, pts, window) for p in region.parts], axis=0
        )
    raise TypeError(f"unsupported region {region!r}")


def region_area(region, window: TorusWindow) -> float:
    if region is None:
        return window.area
    if isinstance(region, RectRegion):
        return (region.x1 - region.x0) * (region.y1 - region.y0)
    if isinstance(region, BallRegion):
        return math.pi * region.r * region.r
    raise TypeError(f"no closed-form area for region {region!r}")


# ---------------------------------------------------------------------------
# Serialization: pattern.csv (+ .meta sidecar)
# ---------------------------------------------------------------------------

def _meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_suffix(".meta")


def save_pattern(cfg: PointConfiguration, csv_path, meta_path=None) -> None:
    """Write `x,y` rows at 17 significant digits (bit-exact round trip) plus
    the window sidecar."""
    csv_path = Path(csv_path)
    lines = ["x,y"]
    for x, y in cfg.coords:
        lines.append(f"{x:.17g},{y:.17g}")
    csv_path.write_text("\n".join(lines) + "\n")
    mp = Path(meta_path) if meta_path is not None else _meta_path(csv_path)
    mp.write_text(
        f"L = {cfg.window.L:.17g}\nboundary = {cfg.window.boundary}\n"
    )


def load_pattern(csv_path, meta_path=None, boundary=None,
                 window: TorusWindow | None = None) -> PointConfiguration:
    csv_path = Path(csv_path)
    if window is None:
        mp = Path(meta_path) if meta_path is not None else _meta_path(csv_path)
        meta = parse_keyvalue(mp.read_text())
        L = float(meta["L"])
        mode = boundary if boundary is not None else meta.get("boundary", "torus")
        window = TorusWindow(L, mode)
    rows = csv_path.read_text().strip().splitlines()
    if not rows or rows[0].strip().lower() != "x,y":
        raise ValueError(f"{csv_path}: expected 'x,y' header")
    pts = []
    for line in rows[1:]:
        if not line.strip():
            continue
        sx, sy = line.split(",")
        pts.append((float(sx), float(sy)))
    return PointConfiguration.from_points(np.array(pts, dtype=float).reshape(-1, 2), window)


def parse_keyvalue(text: str) -> dict[str, str]:
    """Parse flat `key = value` lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed line {raw!r}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
