"""Command-line front end: simulate, estimate, gnz-check, and the
window-ladder consistency study.  Every command is a deterministic function
of its arguments, input files, and seed.

Exit codes: 0 success, 1 diagnostic failure (equilibrium breach), 2 invalid
input, 3 internal assertion.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .configuration import load_pattern, parse_keyvalue
from .errors import (
    ConfigError,
    EmptySampleSet,
    InfeasibleAlpha,
    NhGibbsError,
    NoFeasibleLattice,
    TooLarge,
    Undefined,
)
from .estimate import (
    QuadratureSpec,
    estimate_csv_header,
    estimate_csv_row,
    two_step,
    write_estimate_csv,
)
from .geometry import TorusWindow
from .gnz import gnz_report, parse_functional
from .models import ModelFile, build_model
from .oracle import brute_window_energy
from .sampler import (
    default_sampler_config,
    load_archive,
    run_chain,
    save_archive,
    spawn_seeds,
)

_SEED_ENV = "NHGIBBS_SEED"


def _resolve_seed(args_seed) -> int:
    if args_seed is not None:
        return int(args_seed)
    env = os.environ.get(_SEED_ENV)
    return int(env) if env else 0


def _load_model_file(path) -> ModelFile:
    text = Path(path).read_text()
    return build_model(parse_keyvalue(text))


def _sampler_overrides(args) -> dict:
    out = {}
    for name in ("p_birth", "p_death", "p_move", "p_cluster_birth",
                 "p_cluster_death"):
        v = getattr(args, name, None)
        if v is not None:
            out[name] = v
    if getattr(args, "sigma", None) is not None:
        out["sigma"] = args.sigma
    if getattr(args, "cluster_radius", None) is not None:
        out["cluster_radius"] = args.cluster_radius
    return out


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    mf = _load_model_file(args.model_spec)
    window = TorusWindow(args.window, "torus")
    scfg = default_sampler_config(
        mf.model,
        burn_in=args.burn,
        keep=args.keep,
        thin=args.thin,
        seed=_resolve_seed(args.seed),
        **_sampler_overrides(args),
    )
    samples = run_chain(mf.model, mf.params, window, scfg)
    if args.oracle:
        for i in range(0, len(samples.configs), 10):
            cfg = samples.configs[i]
            fast = mf.model.window_energy(mf.params, cfg)
            slow = brute_window_energy(mf.model, mf.params, cfg)
            ok = (
                math.isinf(fast) and math.isinf(slow)
                or abs(fast - slow) <= 1e-9 * max(abs(fast), abs(slow), 1.0)
            )
            if not ok:
                raise NhGibbsError(
                    f"oracle mismatch on sample {i}: fast {fast!r} vs "
                    f"brute {slow!r}"
                )
    save_archive(samples, mf.model, args.out)
    rates = samples.acceptance_rates()
    summary = " ".join(f"{k}={v:.3f}" for k, v in sorted(rates.items()))
    print(f"wrote {len(samples.configs)} samples to {args.out} ({summary})")
    return 0


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------

def cmd_estimate(args) -> int:
    mf = _load_model_file(args.model_spec)
    if mf.theta_box is None:
        raise ConfigError(
            "model spec must declare theta_min and theta_max for estimation"
        )
    cfg = load_pattern(args.pattern, boundary=args.boundary)
    quad = QuadratureSpec(args.quad)
    res = two_step(mf.model, cfg, mf.theta_box, quad)
    write_estimate_csv(res, args.out)
    flags = []
    if res.degenerate:
        flags.append("degenerate")
    if any(res.at_boundary):
        flags.append("at_boundary")
    note = f" [{' '.join(flags)}]" if flags else ""
    print(
        f"alpha_hat={res.alpha_hat:.6g} eps={res.epsilon:.3g} theta_hat="
        + ",".join(f"{t:.6g}" for t in res.theta_hat)
        + f" removable={res.removable_count}{note} -> {args.out}"
    )
    return 0


# ---------------------------------------------------------------------------
# gnz-check
# ---------------------------------------------------------------------------

def cmd_gnz_check(args) -> int:
    mf = _load_model_file(args.model_spec)
    configs, meta = load_archive(args.samples)
    if not configs:
        raise EmptySampleSet(f"no sample files in {args.samples}")
    files = sorted(Path(args.samples).glob("sample_*.csv"))
    for f, cfg in zip(files, configs):
        if not math.isfinite(mf.model.window_energy(mf.params, cfg)):
            raise ConfigError(
                f"corrupted archive: {f.name} is infeasible under the model"
            )
    functionals = [parse_functional(t) for t in args.functionals.split(",")]
    quad = QuadratureSpec(args.quad)
    report = gnz_report(configs, mf.model, mf.params, functionals, None, quad)
    report.to_csv(args.out)
    worst = report.max_abs_z()
    print(f"max |z| = {worst:.3f} over {len(report.rows)} functionals -> {args.out}")
    return 0 if worst <= args.z_max else 1


# ---------------------------------------------------------------------------
# study
# ---------------------------------------------------------------------------

def _study_worker(job):
    (model_kv, L, burn, thin_extra, seed, quad_density, overrides,
     spacing) = job
    mf = build_model(model_kv)
    window = TorusWindow(L, "torus")
    scfg = default_sampler_config(
        mf.model, burn_in=burn, keep=1, thin=max(1, thin_extra), seed=seed,
        **overrides,
    )
    samples = run_chain(mf.model, mf.params, window, scfg,
                        initial_spacing=spacing)
    cfg = samples.configs[-1]
    res = two_step(mf.model, cfg, mf.theta_box, QuadratureSpec(quad_density))
    return res


def cmd_study(args) -> int:
    kv = parse_keyvalue(Path(args.config).read_text())
    mf = build_model(kv)  # validates the model block
    if mf.theta_box is None:
        raise ConfigError("study config must declare theta_min and theta_max")
    ladder = [float(v) for v in kv["ladder"].split(",")]
    replicates = int(kv.get("replicates", "20"))
    burn = int(kv.get("burn", "5000"))
    thin_extra = int(kv.get("final_thin", "1"))
    quad_density = float(kv.get("quad", "200"))
    root_seed = (int(args.seed) if args.seed is not None
                 else int(kv.get("seed", os.environ.get(_SEED_ENV, "0"))))
    spacing = float(kv["spacing"]) if "spacing" in kv else None
    overrides = {}
    for name in ("p_birth", "p_death", "p_move", "p_cluster_birth",
                 "p_cluster_death", "sigma", "cluster_radius"):
        if name in kv:
            overrides[name] = float(kv[name])
    model_kv = {
        k: v for k, v in kv.items()
        if k in ("model", "alpha", "theta", "steps", "min_edge", "k", "phi",
                 "phi_params", "alpha_min", "alpha_max", "theta_min",
                 "theta_max")
    }
    seeds = spawn_seeds(root_seed, len(ladder) * replicates)
    jobs = []
    for li, L in enumerate(ladder):
        for rep in range(replicates):
            jobs.append((model_kv, L, burn, thin_extra,
                         seeds[li * replicates + rep], quad_density,
                         overrides, spacing))
    threads = args.threads or os.cpu_count() or 1
    if threads > 1 and len(jobs) > 1:
        with Pool(threads) as pool:
            results = pool.map(_study_worker, jobs)
    else:
        results = [_study_worker(j) for j in jobs]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    alpha_star = mf.params.alpha
    theta_star = np.asarray(mf.params.theta, dtype=float)
    p = mf.model.p
    header = (
        "L,replicate,alpha_hat,epsilon,"
        + ",".join(f"theta_hat_{j + 1}" for j in range(p))
        + ",abs_err_alpha,abs_err_theta"
    )
    lines = [header]
    by_L: dict = {}
    i = 0
    for L in ladder:
        for rep in range(replicates):
            res = results[i]
            i += 1
            err_a = abs(res.alpha_hat - alpha_star)
            err_t = float(np.linalg.norm(np.asarray(res.theta_hat) - theta_star))
            by_L.setdefault(L, []).append((res, err_a, err_t))
            lines.append(
                f"{L:g},{rep},{res.alpha_hat:.12g},{res.epsilon:.12g},"
                + ",".join(f"{t:.12g}" for t in res.theta_hat)
                + f",{err_a:.12g},{err_t:.12g}"
            )
    if len(ladder) > 1:
        for L in ladder:
            rows = by_L[L]
            med_a = float(np.median([r[1] for r in rows]))
            med_t = float(np.median([r[2] for r in rows]))
            med_alpha = float(np.median([r[0].alpha_hat for r in rows]))
            med_theta = [
                float(np.median([r[0].theta_hat[j] for r in rows]))
                for j in range(p)
            ]
            lines.append(
                f"{L:g},median,{med_alpha:.12g},,"
                + ",".join(f"{t:.12g}" for t in med_theta)
                + f",{med_a:.12g},{med_t:.12g}"
            )
    (out_dir / "study.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {len(jobs)} fits to {out_dir / 'study.csv'}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nhgibbs",
        description=(
            "Simulate and fit Gibbs point processes with (possibly "
            "non-hereditary) hardcore interactions."
        ),
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an MCMC chain, write an archive")
    sim.add_argument("--model-spec", required=True, help="flat key=value model file")
    sim.add_argument("--window", type=float, required=True, help="torus side L")
    sim.add_argument("--burn", type=int, default=10_000)
    sim.add_argument("--keep", type=int, default=100)
    sim.add_argument("--thin", type=int, default=100)
    sim.add_argument("--seed", type=int, default=None,
                     help=f"chain seed (default: ${_SEED_ENV} or 0)")
    sim.add_argument("--out", required=True, help="archive directory")
    sim.add_argument("--oracle", action="store_true",
                     help="cross-check every 10th sample against the brute-force energy")
    for name in ("p-birth", "p-death", "p-move", "p-cluster-birth",
                 "p-cluster-death"):
        sim.add_argument(f"--{name}", type=float, default=None,
                         dest=name.replace("-", "_"))
    sim.add_argument("--sigma", type=float, default=None, help="move jitter")
    sim.add_argument("--cluster-radius", type=float, default=None)
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="two-step fit of a point pattern")
    est.add_argument("--model-spec", required=True)
    est.add_argument("--pattern", required=True, help="pattern.csv (with .meta sidecar)")
    est.add_argument("--boundary", choices=("torus", "plane"), default=None,
                     help="override the sidecar; plane triggers minus-sampling")
    est.add_argument("--quad", type=float, default=400.0,
                     help="dummy points per unit area")
    est.add_argument("--out", required=True, help="output CSV")
    est.set_defaults(func=cmd_estimate)

    gz = sub.add_parser("gnz-check", help="equilibrium-identity diagnostic")
    gz.add_argument("--model-spec", required=True)
    gz.add_argument("--samples", required=True, help="archive directory")
    gz.add_argument("--functionals", default="constant_one",
                    help="comma list: constant_one, stat:<i>, empty_ball:<r>")
    gz.add_argument("--quad", type=float, default=100.0)
    gz.add_argument("--z-max", type=float, default=4.0)
    gz.add_argument("--out", required=True)
    gz.set_defaults(func=cmd_gnz_check)

    st = sub.add_parser("study", help="window-ladder replicate consistency study")
    st.add_argument("--config", required=True,
                    help="flat key=value file: model keys + ladder, replicates, burn, seed")
    st.add_argument("--out", required=True, help="output directory")
    st.add_argument("--threads", type=int, default=None)
    st.add_argument("--seed", type=int, default=None, help="root seed override")
    st.set_defaults(func=cmd_study)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, Undefined, InfeasibleAlpha, NoFeasibleLattice,
            EmptySampleSet, TooLarge, FileNotFoundError, KeyError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NhGibbsError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
