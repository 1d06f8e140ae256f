"""Monte Carlo check of the equilibrium identity restricted to removable
points: the expected sum of f(x, gamma - delta_x) over removable points of
the pattern equals the expected integral of f(x, gamma) exp(-h(x, gamma))
over the region.  A passing report is the correctness certificate for the
sampler and the energy code together (necessary, not sufficient: a pattern
with no removable points reduces the identity to 0 = 0)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .configuration import PointConfiguration, region_area
from .errors import ConfigError, EmptySampleSet
from .estimate import QuadratureSpec
from .models import Model, ModelParams


@dataclass(frozen=True)
class TestFunctional:
    """Closed enumeration of bounded test functions f(x, gamma)."""

    __test__ = False  # not a pytest class, despite the name

    kind: str                 # constant_one | statistic_component | empty_ball_indicator
    index: int = 0            # component for statistic_component
    radius: float = 0.0       # radius for empty_ball_indicator

    def __post_init__(self):
        if self.kind not in (
            "constant_one", "statistic_component", "empty_ball_indicator"
        ):
            raise ConfigError(f"unknown functional kind {self.kind!r}")
        if self.kind == "empty_ball_indicator" and self.radius <= 0:
            raise ConfigError("empty-ball radius must be positive")
        if self.kind == "statistic_component" and self.index < 0:
            raise ConfigError("statistic component index must be >= 0")

    def label(self) -> str:
        if self.kind == "constant_one":
            return "constant_one"
        if self.kind == "statistic_component":
            return f"stat:{self.index + 1}"
        return f"empty_ball:{self.radius:g}"


def parse_functional(text: str) -> TestFunctional:
    t = text.strip()
    if t == "constant_one":
        return TestFunctional("constant_one")
    if t.startswith("stat:"):
        return TestFunctional("statistic_component", index=int(t[5:]) - 1)
    if t.startswith("empty_ball:"):
        return TestFunctional("empty_ball_indicator", radius=float(t[11:]))
    raise ConfigError(f"cannot parse functional {text!r}")


@dataclass
class FunctionalReport:
    functional: TestFunctional
    lhs_mean: float
    rhs_mean: float
    lhs_se: float
    rhs_se: float
    z: float
    n_samples: int
    ess: float


@dataclass
class GnzReport:
    rows: list

    def max_abs_z(self) -> float:
        return max(abs(r.z) for r in self.rows)

    def to_csv(self, path) -> None:
        lines = ["functional,lhs_mean,rhs_mean,lhs_se,rhs_se,z,n_samples,ess"]
        for r in self.rows:
            lines.append(
                f"{r.functional.label()},{r.lhs_mean:.12g},{r.rhs_mean:.12g},"
                f"{r.lhs_se:.6g},{r.rhs_se:.6g},{r.z:.6g},{r.n_samples},"
                f"{r.ess:.6g}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


def _lhs_values(functionals, cfg: PointConfiguration, model: Model,
                alpha: float, region) -> np.ndarray:
    """Per-functional sums of f(x, cfg - delta_x) over removable points of
    the region; the local statistics are never evaluated at non-removable
    points, and the reduced configuration is shared across functionals."""
    removable = model.removable_set(alpha, cfg, region)
    out = np.zeros(len(functionals))
    for pid in sorted(removable):
        x = cfg.point(pid)
        reduced = cfg.delete(pid)
        st = None
        for j, f in enumerate(functionals):
            if f.kind == "constant_one":
                out[j] += 1.0
            elif f.kind == "statistic_component":
                if st is None:
                    st = model.sufficient_statistics(alpha, x, reduced)
                out[j] += float(st.t[f.index])
            else:
                if reduced.count_in_ball(x, f.radius) == 0:
                    out[j] += 1.0
    return out


def gnz_lhs(functional: TestFunctional, cfg: PointConfiguration, model: Model,
            alpha: float, region=None) -> float:
    """Sum of f(x, cfg - delta_x) over removable points of the region."""
    return float(_lhs_values([functional], cfg, model, alpha, region)[0])


def _rhs_values(functionals, cfg: PointConfiguration, model: Model,
                params: ModelParams, region, quad: QuadratureSpec):
    """Per-functional quadrature of f(x, cfg) exp(-h(x, cfg)) dx over the
    region, with the convention that an infeasible insertion contributes 0."""
    grid = quad.grid(cfg.window, region)
    feas, T = model.stats_batch(params.alpha, grid.pts, cfg)
    w = np.zeros(len(grid.pts))
    w[feas] = np.exp(-(T[feas] @ params.theta_vec))
    area = region_area(region, cfg.window)
    out = []
    for f in functionals:
        if f.kind == "constant_one":
            vals = w
        elif f.kind == "statistic_component":
            vals = T[:, f.index] * w
        else:
            if len(cfg):
                counts = cfg.kdtree().query_ball_point(
                    grid.pts, f.radius, return_length=True
                )
                vals = np.where(counts == 0, 1.0, 0.0) * w
            else:
                vals = w.copy()
        out.append(area * grid.integral_over_area(vals))
    return out


def gnz_rhs(functional: TestFunctional, cfg: PointConfiguration, model: Model,
            params: ModelParams, region, quad: QuadratureSpec) -> float:
    return _rhs_values([functional], cfg, model, params, region, quad)[0]


def effective_sample_size(series: np.ndarray) -> float:
    """Geyer initial-positive-sequence estimate, clamped to [1, n]."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 2:
        return float(max(n, 1))
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var == 0.0:
        return float(n)
    max_lag = n - 1
    rho = np.empty(max_lag + 1)
    rho[0] = 1.0
    for lag in range(1, max_lag + 1):
        rho[lag] = float(np.dot(x[:-lag], x[lag:])) / (n * var)
    s = 0.0
    for k in range(0, (max_lag - 1) // 2 + 1):
        pair = rho[2 * k] + rho[2 * k + 1] if 2 * k + 1 <= max_lag else rho[2 * k]
        if k > 0 and pair <= 0.0:
            break
        s += pair
    denom = max(2.0 * s - 1.0, 1.0)
    return float(min(max(n / denom, 1.0), n))


def gnz_report(configs, model: Model, params: ModelParams, functionals,
               region=None, quad: QuadratureSpec = QuadratureSpec(100.0)
               ) -> GnzReport:
    """Sample means of both sides of the equilibrium identity with paired
    standard errors; z is the paired difference scaled by its standard error
    corrected by the effective sample size."""
    configs = list(configs)
    if not configs:
        raise EmptySampleSet("no sample configurations")
    functionals = list(functionals)
    n = len(configs)
    lhs = np.zeros((n, len(functionals)))
    rhs = np.zeros((n, len(functionals)))
    for s, cfg in enumerate(configs):
        lhs[s] = _lhs_values(functionals, cfg, model, params.alpha, region)
        rhs[s] = _rhs_values(functionals, cfg, model, params, region, quad)
    rows = []
    for j, f in enumerate(functionals):
        diff = lhs[:, j] - rhs[:, j]
        ess = effective_sample_size(diff)
        lhs_se = float(lhs[:, j].std(ddof=1) / math.sqrt(ess)) if n > 1 else 0.0
        rhs_se = float(rhs[:, j].std(ddof=1) / math.sqrt(ess)) if n > 1 else 0.0
        sd = float(diff.std(ddof=1)) if n > 1 else 0.0
        se = sd / math.sqrt(ess) if sd > 0 else 0.0
        mean_diff = float(diff.mean())
        if se > 0:
            z = mean_diff / se
        else:
            z = 0.0 if mean_diff == 0.0 else math.inf * np.sign(mean_diff)
        rows.append(FunctionalReport(
            functional=f,
            lhs_mean=float(lhs[:, j].mean()),
            rhs_mean=float(rhs[:, j].mean()),
            lhs_se=lhs_se,
            rhs_se=rhs_se,
            z=float(z),
            n_samples=n,
            ess=ess,
        ))
    return GnzReport(rows)
