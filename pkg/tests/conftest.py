"""Shared fixtures: seeded feasible-pattern generators for the three
interacting models and random region helpers."""

from __future__ import annotations

import math

import numpy as np
import pytest

from nhgibbs import PointConfiguration, TorusWindow
from nhgibbs.configuration import BallRegion, RectRegion
from nhgibbs.models import (
    DelaunayModel,
    DelaunaySpec,
    HardSphereModel,
    HardSphereSpec,
    KnnModel,
    KnnSpec,
    ModelParams,
    PhiTruncLin,
    PoissonModel,
)
from nhgibbs.sampler import feasible_initial


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def hard_sphere_pattern(rng, window: TorusWindow, hc: float,
                        n_target: int) -> PointConfiguration:
    """Random sequential adsorption: feasible for hardcore radius hc."""
    pts: list = []
    attempts = 0
    while len(pts) < n_target and attempts < 50 * n_target:
        attempts += 1
        cand = rng.random(2) * window.L
        ok = True
        for p in pts:
            if window.distance(cand, p) <= hc:
                ok = False
                break
        if ok:
            pts.append(cand)
    return PointConfiguration.from_points(np.array(pts), window)


def knn_pattern(rng, window: TorusWindow, alpha: float, k: int,
                n_clusters: int) -> PointConfiguration:
    """Clusters of k+1..k+3 points inside balls of radius alpha/2, so every
    point has at least k others within alpha."""
    pts: list = []
    for _ in range(n_clusters):
        center = rng.random(2) * window.L
        size = k + 1 + int(rng.integers(0, 3))
        for _ in range(size):
            rad = (alpha / 2.0) * math.sqrt(rng.random())
            ang = 2.0 * math.pi * rng.random()
            p = window.wrap(center + np.array(
                [rad * math.cos(ang), rad * math.sin(ang)]
            ))
            pts.append(p)
    return PointConfiguration.from_points(np.array(pts), window)


def delaunay_pattern(rng, window: TorusWindow, model: DelaunayModel,
                     params: ModelParams) -> PointConfiguration:
    """Jittered feasible lattice for the tessellation hardcore."""
    base = feasible_initial(model, params, window)
    jitter = 0.06 * window.L / max(1.0, math.sqrt(len(base)))
    for _ in range(8):
        pts = window.wrap(base.coords + rng.uniform(-jitter, jitter,
                                                    base.coords.shape))
        cfg = PointConfiguration.from_points(pts, window)
        if math.isfinite(model.window_energy(params, cfg)):
            return cfg
        jitter *= 0.5
    return base


def random_region(rng, window: TorusWindow):
    kind = rng.integers(0, 3)
    L = window.L
    if kind == 0:
        return None
    if kind == 1:
        x0, y0 = rng.random(2) * (0.5 * L)
        w, h = 0.2 * L + rng.random(2) * (0.3 * L)
        return RectRegion(x0, y0, min(x0 + w, L), min(y0 + h, L))
    c = rng.random(2) * L
    return BallRegion(float(c[0]), float(c[1]), (0.15 + 0.2 * rng.random()) * L)


# ---------------------------------------------------------------------------
# Picklable workers for the acceptance suite's process pool
# ---------------------------------------------------------------------------

def study_fit_job(job: dict) -> dict:
    """Simulate one pattern and run every per-pattern estimator the
    acceptance criteria need; returns plain floats."""
    from nhgibbs.configuration import RectRegion
    from nhgibbs.estimate import (
        QuadratureSpec, estimate_alpha, estimate_theta, two_step,
    )
    from nhgibbs.models import build_model
    from nhgibbs.sampler import default_sampler_config, run_chain

    mf = build_model(job["model_kv"])
    window = TorusWindow(job["L"], "torus")
    scfg = default_sampler_config(
        mf.model, burn_in=job["burn"], keep=1, thin=1, seed=job["seed"],
        **job.get("overrides", {}),
    )
    samples = run_chain(mf.model, mf.params, window, scfg,
                        initial_spacing=job.get("spacing"))
    cfg = samples.configs[-1]
    quad = QuadratureSpec(job["quad"])
    ae = estimate_alpha(mf.model, cfg)
    nested = []
    for frac in job.get("nest_fracs", ()):
        region = RectRegion(0.0, 0.0, frac * job["L"], frac * job["L"])
        try:
            nested.append(estimate_alpha(mf.model, cfg, region).alpha_hat)
        except Exception:
            nested.append(float("nan"))
    res_known = estimate_theta(
        mf.model, cfg, None, mf.params.alpha, job["theta_box"], quad
    )
    res_plug = two_step(mf.model, cfg, job["theta_box"], quad)
    return {
        "L": job["L"],
        "n": len(cfg),
        "alpha_hat": ae.alpha_hat,
        "attained": ae.attained,
        "epsilon": ae.epsilon,
        "nested": nested,
        "theta_known": res_known.theta_hat,
        "theta_plug": res_plug.theta_hat,
        "alpha_plug": res_plug.alpha_hat,
        "removable_count": res_plug.removable_count,
        "grad_norm": res_plug.gradient_norm,
        "at_boundary": res_plug.at_boundary,
    }


def gnz_pipeline_job(job: dict) -> dict:
    """Run the pinned equilibrium chain for one model and evaluate the
    identity report; returns plain rows."""
    from nhgibbs.estimate import QuadratureSpec
    from nhgibbs.gnz import TestFunctional, gnz_report
    from nhgibbs.models import build_model
    from nhgibbs.sampler import default_sampler_config, run_chain

    mf = build_model(job["model_kv"])
    window = TorusWindow(job["L"], "torus")
    scfg = default_sampler_config(
        mf.model, burn_in=job["burn"], keep=job["keep"], thin=job["thin"],
        seed=job["seed"], **job.get("overrides", {}),
    )
    samples = run_chain(mf.model, mf.params, window, scfg)
    functionals = [TestFunctional("constant_one")] + [
        TestFunctional("statistic_component", index=i)
        for i in range(mf.model.p)
    ]
    report = gnz_report(
        samples.configs, mf.model, mf.params, functionals, None,
        QuadratureSpec(job["quad"]),
    )
    return {
        "model": mf.model.name,
        "rates": samples.acceptance_rates(),
        "rows": [
            (r.functional.label(), r.lhs_mean, r.rhs_mean, r.z, r.ess)
            for r in report.rows
        ],
        "mean_count": float(np.mean([len(c) for c in samples.configs])),
    }


@pytest.fixture
def plane10() -> TorusWindow:
    return TorusWindow(10.0, "plane")


@pytest.fixture
def torus10() -> TorusWindow:
    return TorusWindow(10.0, "torus")


@pytest.fixture
def hs_model() -> HardSphereModel:
    return HardSphereModel(HardSphereSpec((0.5,)))


@pytest.fixture
def hs_params() -> ModelParams:
    return ModelParams(2.0, (0.5,))


@pytest.fixture
def knn_model() -> KnnModel:
    return KnnModel(KnnSpec(2, PhiTruncLin(1.0)))


@pytest.fixture
def knn_params() -> ModelParams:
    return ModelParams(1.0, (1.0,))


@pytest.fixture
def del_model() -> DelaunayModel:
    return DelaunayModel(DelaunaySpec(0.5))


@pytest.fixture
def del_params() -> ModelParams:
    return ModelParams(0.7, (1.0,))


@pytest.fixture
def poisson_model() -> PoissonModel:
    return PoissonModel()
