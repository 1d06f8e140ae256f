"""Birth-death-move Metropolis-Hastings sampling of finite-volume Gibbs
states on the torus, with paired cluster proposals for models whose hardcore
forbids isolated points.

The target is the density exp(-H) against the unit-rate Poisson process on
the window; normalizing constants never appear, only Hastings ratios.  Every
visited state is feasible: proposals that would create infinite energy have
acceptance zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import geometry
from .configuration import (
    BallRegion,
    PointConfiguration,
    UnionRegion,
    parse_keyvalue,
)
from .errors import (
    ConfigError,
    DuplicatePoint,
    NhGibbsError,
    NoFeasibleLattice,
)
from .geometry import TorusWindow
from .models import DelaunayModel, Model, ModelParams, describe_model

KINDS = ("birth", "death", "move", "cluster_birth", "cluster_death")

_CACHE_CHECK_EVERY = 10_000
_CACHE_RTOL = 1e-7


@dataclass(frozen=True)
class SamplerConfig:
    p_birth: float = 0.3
    p_death: float = 0.3
    p_move: float = 0.4
    p_cluster_birth: float = 0.0
    p_cluster_death: float = 0.0
    sigma: Optional[float] = None          # move jitter; default range/10
    cluster_radius: Optional[float] = None  # default alpha/2
    burn_in: int = 10_000
    keep: int = 100
    thin: int = 100
    seed: int = 0

    def probs(self) -> tuple:
        return (self.p_birth, self.p_death, self.p_move,
                self.p_cluster_birth, self.p_cluster_death)

    def validate(self) -> None:
        ps = self.probs()
        if any(p < 0 for p in ps):
            raise ConfigError("proposal probabilities must be non-negative")
        if abs(sum(ps) - 1.0) > 1e-12:
            raise ConfigError("proposal probabilities must sum to 1")
        if (self.p_birth > 0) != (self.p_death > 0):
            raise ConfigError("birth and death must be enabled together")
        if (self.p_cluster_birth > 0) != (self.p_cluster_death > 0):
            raise ConfigError(
                "cluster birth and cluster death must be enabled together"
            )
        if self.sigma is not None and self.sigma <= 0:
            raise ConfigError("move jitter sigma must be positive")
        if self.cluster_radius is not None and self.cluster_radius <= 0:
            raise ConfigError("cluster radius must be positive")
        if self.burn_in < 0 or self.keep < 0 or self.thin < 1:
            raise ConfigError("need burn_in >= 0, keep >= 0, thin >= 1")


def default_sampler_config(model: Model, **overrides) -> SamplerConfig:
    """Model-appropriate proposal mixture: plain birth/death/move, with a
    fifth of the mass moved to each cluster proposal when the model needs
    them for irreducibility."""
    if model.cluster_size is not None:
        base = dict(p_birth=0.2, p_death=0.2, p_move=0.2,
                    p_cluster_birth=0.2, p_cluster_death=0.2)
    else:
        base = dict(p_birth=0.3, p_death=0.3, p_move=0.4,
                    p_cluster_birth=0.0, p_cluster_death=0.0)
    base.update(overrides)
    return SamplerConfig(**base)


@dataclass
class ChainState:
    cfg: PointConfiguration
    energy: float
    step: int
    proposed: dict
    accepted: dict
    rng: np.random.Generator


@dataclass
class SampleSet:
    configs: list
    energies: list
    model_name: str
    params: ModelParams
    sampler_config: SamplerConfig
    window: TorusWindow
    proposed: dict
    accepted: dict

    def acceptance_rates(self) -> dict:
        return {
            k: self.accepted.get(k, 0) / self.proposed[k]
            for k in KINDS
            if self.proposed.get(k, 0) > 0
        }


def metropolis_accept(rng: np.random.Generator, log_ratio: float) -> bool:
    """The acceptance coin; kept as a module function so a deliberately
    corrupted sampler can be injected in diagnostics tests."""
    if log_ratio >= 0.0:
        return True
    return bool(rng.random() < math.exp(log_ratio))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator; independent streams come from
    spawning the seed sequence."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def spawn_seeds(root_seed: int, n: int) -> list:
    return [int(s.generate_state(1)[0]) for s in
            np.random.SeedSequence(root_seed).spawn(n)]


# ---------------------------------------------------------------------------
# Initial states
# ---------------------------------------------------------------------------

def feasible_initial(model: Model, params: ModelParams, window: TorusWindow,
                     seed: int = 0, spacing: Optional[float] = None
                     ) -> PointConfiguration:
    """A configuration with finite energy: empty for models whose empty
    pattern is feasible, a triangular lattice for the tessellation hardcore.

    The default lattice spacing is the midpoint of the admissible interval;
    `spacing` overrides it (a warm start near the equilibrium density cuts
    burn-in substantially)."""
    if not isinstance(model, DelaunayModel):
        return PointConfiguration.empty(window)
    r = model.spec.min_edge
    alpha = params.alpha
    L = window.L
    s_lo, s_hi = r, alpha * math.sqrt(3.0)
    if s_lo >= s_hi:
        raise NoFeasibleLattice(f"no spacing interval: r={r}, alpha={alpha}")
    s0 = 0.5 * (s_lo + s_hi) if spacing is None else spacing
    if not (s_lo < s0 < s_hi):
        raise NoFeasibleLattice(
            f"requested spacing {s0:.6g} outside ({s_lo:.6g}, {s_hi:.6g})"
        )
    n_c = max(1, round(L / s0))
    dx = L / n_c
    if not (s_lo < dx < s_hi):
        raise NoFeasibleLattice(
            f"realized column spacing {dx:.6g} outside ({s_lo:.6g}, {s_hi:.6g})"
        )
    dy_ideal = dx * math.sqrt(3.0) / 2.0
    n_r = max(2, round(L / dy_ideal))
    if n_r % 2:  # row offsets must close up around the torus
        lower, upper = n_r - 1, n_r + 1
        n_r = upper if lower < 2 or abs(L / upper - dy_ideal) < abs(
            L / lower - dy_ideal) else lower
    dy = L / n_r
    pts = []
    for j in range(n_r):
        off = 0.5 * dx if j % 2 else 0.0
        for i in range(n_c):
            pts.append(((i * dx + off) % L, j * dy))
    cfg = PointConfiguration.from_points(np.array(pts), window)
    try:
        energy = model.window_energy(params, cfg)
    except NhGibbsError as e:
        raise NoFeasibleLattice(f"lattice triangulation failed: {e}") from e
    if not math.isfinite(energy):
        raise NoFeasibleLattice(
            f"lattice at spacing ({dx:.6g}, {dy:.6g}) has infinite energy"
        )
    return cfg


# ---------------------------------------------------------------------------
# Cluster proposal machinery
# ---------------------------------------------------------------------------

def disk_intersection_area(centers: np.ndarray, r: float) -> float:
    """Area of the intersection of equal-radius disks (the normalizing
    factor of the cluster-birth proposal density)."""
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    m = len(centers)
    if m == 1:
        return math.pi * r * r
    tol = 1e-9 * r
    verts = []
    for i in range(m):
        for j in range(i + 1, m):
            d = math.dist(centers[i], centers[j])
            if d == 0.0 or d >= 2.0 * r:
                continue
            mid = 0.5 * (centers[i] + centers[j])
            h = math.sqrt(max(r * r - 0.25 * d * d, 0.0))
            ux, uy = (centers[j] - centers[i]) / d
            for s in (1.0, -1.0):
                p = mid + s * h * np.array([-uy, ux])
                if all(
                    math.dist(p, centers[q]) <= r + tol
                    for q in range(m) if q not in (i, j)
                ):
                    verts.append(p)
    if not verts:
        if all(
            math.dist(centers[0], centers[q]) <= tol for q in range(1, m)
        ):
            return math.pi * r * r
        return 0.0
    verts = np.array(verts)
    centroid = verts.mean(axis=0)
    angles = np.arctan2(verts[:, 1] - centroid[1], verts[:, 0] - centroid[0])
    verts = verts[np.argsort(angles, kind="stable")]
    k = len(verts)
    area = 0.0
    for i in range(k):  # shoelace over the vertex polygon
        p, q = verts[i], verts[(i + 1) % k]
        area += 0.5 * (p[0] * q[1] - q[0] * p[1])
    for i in range(k):  # circular segment beyond each polygon edge
        p, q = verts[i], verts[(i + 1) % k]
        seg = _arc_segment_area(p, q, centers, r, tol)
        area += seg
    return area


def _arc_segment_area(p, q, centers, r, tol) -> float:
    """Segment area for the boundary arc from p to q (counterclockwise),
    choosing the circle whose arc stays inside every disk."""
    best = None
    for c in centers:
        if abs(math.dist(p, c) - r) > tol or abs(math.dist(q, c) - r) > tol:
            continue
        a_p = math.atan2(p[1] - c[1], p[0] - c[0])
        a_q = math.atan2(q[1] - c[1], q[0] - c[0])
        phi = (a_q - a_p) % (2.0 * math.pi)
        a_mid = a_p + 0.5 * phi
        mid = (c[0] + r * math.cos(a_mid), c[1] + r * math.sin(a_mid))
        if all(math.dist(mid, ck) <= r + tol for ck in centers):
            seg = 0.5 * r * r * (phi - math.sin(phi))
            if best is None or seg < best:
                best = seg  # the tightest admissible arc is the boundary
    if best is None:
        raise NhGibbsError("disk-intersection boundary arc not found")
    return best


def cluster_pick_probability(model: Model, cfg: PointConfiguration,
                             member_ids) -> float:
    """Probability that the anchored nearest-neighbor rule deletes exactly
    this set: anchors are drawn uniformly, the set is the anchor plus its
    (cluster_size - 1) nearest neighbors."""
    m = model.cluster_size
    member_set = frozenset(int(i) for i in member_ids)
    n = len(cfg)
    if n == 0:
        return 0.0
    hits = 0
    for pid in sorted(member_set):
        x = cfg.point(pid)
        nbrs = geometry.k_nearest(x, cfg, m - 1)
        if frozenset(nb.id for nb in nbrs) | {pid} == member_set:
            hits += 1
    return hits / n


def _unwrap_around(window: TorusWindow, anchor, pts: np.ndarray) -> np.ndarray:
    anchor = np.asarray(anchor, dtype=float)
    return anchor + np.vstack([window.delta(anchor, p) for p in pts])


# ---------------------------------------------------------------------------
# One Metropolis-Hastings step
# ---------------------------------------------------------------------------

def mcmc_step(state: ChainState, model: Model, params: ModelParams,
              window: TorusWindow, scfg: SamplerConfig) -> ChainState:
    """Advance the chain by one proposal (the state object is updated in
    place and returned)."""
    rng = state.rng
    u = rng.random()
    acc = 0.0
    kind = KINDS[-1]
    for k, p in zip(KINDS, scfg.probs()):
        acc += p
        if u < acc:
            kind = k
            break
    state.proposed[kind] = state.proposed.get(kind, 0) + 1
    rng_range = model.interaction_range(params.alpha)
    sigma = (scfg.sigma if scfg.sigma is not None
             else max(rng_range / 10.0, window.L / 100.0))
    rho = (scfg.cluster_radius if scfg.cluster_radius is not None
           else params.alpha / 2.0)
    handler = {
        "birth": _step_birth,
        "death": _step_death,
        "move": _step_move,
        "cluster_birth": _step_cluster_birth,
        "cluster_death": _step_cluster_death,
    }[kind]
    result = handler(state, model, params, window, scfg, sigma, rho, rng_range)
    if result is not None:
        log_ratio, cfg2, energy2 = result
        if metropolis_accept(rng, log_ratio):
            state.cfg = cfg2
            state.energy = energy2
            state.accepted[kind] = state.accepted.get(kind, 0) + 1
    state.step += 1
    if state.step % _CACHE_CHECK_EVERY == 0:
        fresh = model.window_energy(params, state.cfg)
        scale = max(abs(fresh), abs(state.energy), 1.0)
        if not math.isfinite(fresh) or abs(fresh - state.energy) > _CACHE_RTOL * scale:
            raise NhGibbsError(
                f"energy cache drifted: cached {state.energy!r} vs "
                f"recomputed {fresh!r} at step {state.step}"
            )
        state.energy = fresh
    return state


def _energy_after(model, params, state, cfg2, changed_region):
    """Energy of a proposed configuration and the move's energy change.

    The tessellation model is evaluated by full retriangulation of the
    proposal; the pairwise and neighbor models only over a region covering
    every changed term (the two agree by the compatibility of window
    energies).  Returns None when the proposal is infeasible.
    """
    if isinstance(model, DelaunayModel):
        e_new = model.window_energy(params, cfg2)
        if not math.isfinite(e_new):
            return None
        return e_new, e_new - state.energy
    e_old = model.window_energy(params, state.cfg, changed_region)
    e_new = model.window_energy(params, cfg2, changed_region)
    if not math.isfinite(e_new):
        return None
    delta = e_new - e_old
    return state.energy + delta, delta


def _step_birth(state, model, params, window, scfg, sigma, rho, rng_range):
    cfg = state.cfg
    x = state.rng.random(2) * window.L
    if isinstance(model, DelaunayModel):
        try:
            cfg2 = cfg.insert(x)
        except DuplicatePoint:
            return None
        e_new = model.window_energy(params, cfg2)
        if not math.isfinite(e_new):
            return None
        h = e_new - state.energy
    else:
        h = model.local_energy(params, x, cfg)
        if not math.isfinite(h):
            return None
        try:
            cfg2 = cfg.insert(x)
        except DuplicatePoint:
            return None
        e_new = state.energy + h
    n = len(cfg)
    log_ratio = (-h + math.log(window.area / (n + 1))
                 + math.log(scfg.p_death / scfg.p_birth))
    return log_ratio, cfg2, e_new


def _step_death(state, model, params, window, scfg, sigma, rho, rng_range):
    cfg = state.cfg
    n = len(cfg)
    if n == 0:
        return None
    idx = int(state.rng.integers(n))
    pid = int(cfg.ids[idx])
    x = cfg.coords[idx]
    if isinstance(model, DelaunayModel):
        cfg2 = cfg.delete(pid)
        e_new = model.window_energy(params, cfg2)
        if not math.isfinite(e_new):
            return None  # non-removable: the shrunken state is forbidden
        h = state.energy - e_new
    else:
        if not model.is_removable(params.alpha, pid, cfg):
            return None
        cfg2 = cfg.delete(pid)
        h = model.local_energy(params, x, cfg2)
        e_new = state.energy - h
    log_ratio = (h + math.log(n / window.area)
                 + math.log(scfg.p_birth / scfg.p_death))
    return log_ratio, cfg2, e_new


def _step_move(state, model, params, window, scfg, sigma, rho, rng_range):
    cfg = state.cfg
    n = len(cfg)
    if n == 0:
        return None
    idx = int(state.rng.integers(n))
    pid = int(cfg.ids[idx])
    x_old = cfg.coords[idx]
    x_new = window.wrap(x_old + state.rng.normal(0.0, sigma, 2))
    try:
        cfg2 = cfg.delete(pid).insert(x_new)
    except DuplicatePoint:
        return None
    changed = UnionRegion((
        BallRegion(float(x_old[0]), float(x_old[1]), rng_range),
        BallRegion(float(x_new[0]), float(x_new[1]), rng_range),
    ))
    out = _energy_after(model, params, state, cfg2, changed)
    if out is None:
        return None
    e_new, delta = out
    return -delta, cfg2, e_new


def _step_cluster_birth(state, model, params, window, scfg, sigma, rho,
                        rng_range):
    m = model.cluster_size
    if m is None:
        return None
    rng = state.rng
    cfg = state.cfg
    center = rng.random(2) * window.L
    rad = rho * np.sqrt(rng.random(m))
    ang = 2.0 * math.pi * rng.random(m)
    offsets = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    ys = window.wrap(center + offsets)
    try:
        cfg2 = cfg.insert_many(ys)
    except DuplicatePoint:
        return None
    changed = UnionRegion(tuple(
        BallRegion(float(y[0]), float(y[1]), rng_range) for y in ys
    ))
    out = _energy_after(model, params, state, cfg2, changed)
    if out is None:
        return None
    e_new, delta = out
    new_ids = [int(cfg.next_id) + i for i in range(m)]
    p_del = cluster_pick_probability(model, cfg2, new_ids)
    if p_del == 0.0:
        return None
    ys_flat = _unwrap_around(window, center, ys)
    area_y = disk_intersection_area(ys_flat, rho)
    v_rho = math.pi * rho * rho
    log_q = (-math.log(window.area) - m * math.log(v_rho) + math.log(area_y))
    log_ratio = (-delta + math.log(scfg.p_cluster_death) + math.log(p_del)
                 - math.log(scfg.p_cluster_birth) - math.lgamma(m + 1) - log_q)
    return log_ratio, cfg2, e_new


def _step_cluster_death(state, model, params, window, scfg, sigma, rho,
                        rng_range):
    m = model.cluster_size
    if m is None:
        return None
    cfg = state.cfg
    n = len(cfg)
    if n < m:
        return None
    rng = state.rng
    idx = int(rng.integers(n))
    anchor_id = int(cfg.ids[idx])
    anchor = cfg.coords[idx]
    nbrs = geometry.k_nearest(anchor, cfg, m - 1)
    member_ids = [anchor_id] + [nb.id for nb in nbrs]
    p_del = cluster_pick_probability(model, cfg, member_ids)
    coords = np.array([cfg.point(pid) for pid in member_ids])
    ys_flat = _unwrap_around(window, anchor, coords)
    area_y = disk_intersection_area(ys_flat, rho)
    if area_y <= 0.0:
        return None  # the reverse cluster birth could never propose this set
    cfg2 = cfg.delete_many(member_ids)
    changed = UnionRegion(tuple(
        BallRegion(float(c[0]), float(c[1]), rng_range) for c in coords
    ))
    out = _energy_after(model, params, state, cfg2, changed)
    if out is None:
        return None
    e_new, delta = out
    v_rho = math.pi * rho * rho
    log_q = (-math.log(window.area) - m * math.log(v_rho) + math.log(area_y))
    log_ratio = (-delta + math.log(scfg.p_cluster_birth) + math.lgamma(m + 1)
                 + log_q - math.log(scfg.p_cluster_death) - math.log(p_del))
    return log_ratio, cfg2, e_new


# ---------------------------------------------------------------------------
# Chain driver
# ---------------------------------------------------------------------------

def run_chain(model: Model, params: ModelParams, window: TorusWindow,
              scfg: SamplerConfig, validate_every: Optional[int] = None,
              initial_spacing: Optional[float] = None) -> SampleSet:
    """Run burn-in then keep samples at the configured thinning.  Every kept
    configuration is feasible by construction."""
    scfg.validate()
    model.validate_params(params)
    if not window.is_torus:
        raise ConfigError("simulation runs on the torus only")
    if model.cluster_size is not None and scfg.p_cluster_birth == 0.0:
        raise ConfigError(
            f"the {model.name} hardcore forbids isolated points, so a plain "
            "birth-death chain is reducible (single births from the empty "
            "state are always rejected); enable cluster proposals"
        )
    if model.cluster_size is None and scfg.p_cluster_birth > 0.0:
        raise ConfigError(
            f"the {model.name} model defines no cluster proposal"
        )
    if isinstance(model, DelaunayModel) and params.alpha > window.L / 4.0:
        raise ConfigError(
            "tessellation hardcore needs alpha <= L/4 for a certified "
            "periodic triangulation"
        )
    state = ChainState(
        cfg=feasible_initial(model, params, window, scfg.seed,
                             spacing=initial_spacing),
        energy=0.0,
        step=0,
        proposed={},
        accepted={},
        rng=make_rng(scfg.seed),
    )
    state.energy = model.window_energy(params, state.cfg)
    if not math.isfinite(state.energy):
        raise NoFeasibleLattice("initial configuration has infinite energy")
    configs: list = []
    energies: list = []
    total = scfg.burn_in + scfg.keep * scfg.thin
    for step in range(1, total + 1):
        mcmc_step(state, model, params, window, scfg)
        if validate_every and step % validate_every == 0:
            e = model.window_energy(params, state.cfg)
            if not math.isfinite(e):
                raise NhGibbsError(f"infeasible state visited at step {step}")
        if step > scfg.burn_in and (step - scfg.burn_in) % scfg.thin == 0:
            configs.append(state.cfg)
            energies.append(state.energy)
    return SampleSet(
        configs=configs,
        energies=energies,
        model_name=model.name,
        params=params,
        sampler_config=scfg,
        window=window,
        proposed=dict(state.proposed),
        accepted=dict(state.accepted),
    )


# ---------------------------------------------------------------------------
# Sample archive
# ---------------------------------------------------------------------------

def save_archive(samples: SampleSet, model: Model, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, cfg in enumerate(samples.configs):
        path = out / f"sample_{i:05d}.csv"
        lines = ["x,y"] + [f"{x:.17g},{y:.17g}" for x, y in cfg.coords]
        path.write_text("\n".join(lines) + "\n")
    scfg = samples.sampler_config
    lines = []
    for k, v in describe_model(model, samples.params).items():
        lines.append(f"{k} = {v}")
    lines.append(f"L = {samples.window.L:.17g}")
    lines.append(f"boundary = {samples.window.boundary}")
    for name in ("p_birth", "p_death", "p_move", "p_cluster_birth",
                 "p_cluster_death"):
        lines.append(f"{name} = {getattr(scfg, name):.17g}")
    if scfg.sigma is not None:
        lines.append(f"sigma = {scfg.sigma:.17g}")
    if scfg.cluster_radius is not None:
        lines.append(f"cluster_radius = {scfg.cluster_radius:.17g}")
    lines.append(f"burn_in = {scfg.burn_in}")
    lines.append(f"keep = {scfg.keep}")
    lines.append(f"thin = {scfg.thin}")
    lines.append(f"seed = {scfg.seed}")
    lines.append(f"n_samples = {len(samples.configs)}")
    for k in KINDS:
        lines.append(f"proposed_{k} = {samples.proposed.get(k, 0)}")
        lines.append(f"accepted_{k} = {samples.accepted.get(k, 0)}")
    lines.append(
        "energy_trace = " + ",".join(f"{e:.12g}" for e in samples.energies)
    )
    (out / "chain.meta").write_text("\n".join(lines) + "\n")


def load_archive(archive_dir):
    """Configurations plus the parsed chain.meta of a sample archive."""
    from .configuration import load_pattern

    d = Path(archive_dir)
    meta = parse_keyvalue((d / "chain.meta").read_text())
    window = TorusWindow(float(meta["L"]), meta.get("boundary", "torus"))
    files = sorted(d.glob("sample_*.csv"))
    configs = [load_pattern(f, window=window) for f in files]
    return configs, meta
