"""Command-line experiment runner.

``srw <subcommand> --config PATH --seed N --reps N --out DIR`` runs one
experiment and writes its result CSVs plus a JSON metadata file. Outputs
are deterministic for a fixed (config, seed) pair regardless of worker
count (``SRW_WORKERS`` caps parallelism), and every file carries the
12-hex config hash. Exit codes: 0 success, 2 config error, 3 runtime
error; partially written files are removed on failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import platform
import sys
from functools import partial
from pathlib import Path

import numpy as np
import scipy

from .config import (MobilityConfig, ParseError, ValidationError,
                     config_hash, emit_config, parse_config, with_overrides)
from .detection import (DegenerateBound, _one_rep, compute_bound_constants,
                        coverage_rep, mobile_detection_rep,
                        static_detection_rep, survival_from_times)
from .geometry import Point2, RectDomain
from .mobility import ModelVariant, advance_to, init_walker
from .percolation import phase_experiment
from .replication import run_indexed
from .rng import RngStream
from .sampling import sample_ppp
from .stationary import (SpatialHistogram, default_burn_in,
                         default_sample_times, rwp_density,
                         stationary_positions)
from .traces import export_trace

SUBCOMMANDS = ("detect", "mobile-detect", "cover", "stationary",
               "percolate", "trace")

DEFAULT_P_GRID = "0,0.2,0.4,0.6,0.8,1"
_HIST_BINS = 20
_BOUND_MC_REPS = 20_000


def _parse_args(argv):
    ap = argparse.ArgumentParser(
        prog="srw", description="sedentary random waypoint experiments")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", metavar="PATH",
                    help="key=value config file (defaults apply if omitted)")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--reps", type=int, help="override replication count")
    ap.add_argument("--out", metavar="DIR", default=".",
                    help="output directory (created if missing)")
    ap.add_argument("--p-grid", metavar="P0,P1,...", default=DEFAULT_P_GRID,
                    help="thinning probabilities for the percolate subcommand")
    return ap.parse_args(argv)


def _load_config(args) -> MobilityConfig:
    text = ""
    if args.config is not None:
        text = Path(args.config).read_text()
    cfg = parse_config(text)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.reps is not None:
        overrides["reps"] = args.reps
    return with_overrides(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# output plumbing: stage everything in memory, then write, so a failure
# never leaves a half-written CSV behind


def _write_text(path: Path, text: str, written: list) -> None:
    path.write_text(text)
    written.append(path)


def _hash_line(cfg: MobilityConfig) -> str:
    return f"# srw config_hash={config_hash(cfg)}\n"


def _metadata(cfg: MobilityConfig, subcommand: str, extra: dict) -> str:
    from . import __version__
    meta = {
        "subcommand": subcommand,
        "config": emit_config(cfg),
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "reps": cfg.reps,
        "versions": {
            "srw": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }
    meta.update(extra)
    return json.dumps(meta, sort_keys=True, indent=2) + "\n"


def _samples_csv(cfg: MobilityConfig, times: np.ndarray) -> str:
    out = [_hash_line(cfg), "replication,time\n"]
    out.extend(f"{i},{t:.10g}\n" for i, t in enumerate(times))
    return "".join(out)


def _curve_csv(cfg: MobilityConfig, curve) -> str:
    buf = io.StringIO()
    buf.write(_hash_line(cfg))
    curve.write_csv(buf)
    return buf.getvalue()


def _maybe_bound_constants(cfg: MobilityConfig, rng: RngStream):
    """Tail-bound constants, when the variant and domain admit them."""
    variant = ModelVariant(cfg.variant)
    if variant not in (ModelVariant.CARRYOVER, ModelVariant.RESET) \
            or cfg.domain().torus:
        return None
    try:
        return compute_bound_constants(cfg, mc_reps=_BOUND_MC_REPS, rng=rng)
    except DegenerateBound:
        return None


def _run_survival(cfg: MobilityConfig, subcommand: str, out_dir: Path,
                  written: list) -> None:
    model = cfg.build_model()
    dom = cfg.domain()
    rng = RngStream(cfg.seed)
    if subcommand == "detect":
        target = Point2(*dom.center)
        sampler = partial(static_detection_rep, model, cfg.intensity, target,
                          cfg.rho, cfg.t_max)
    elif subcommand == "mobile-detect":
        sampler = partial(mobile_detection_rep, model, model, cfg.intensity,
                          cfg.rho, cfg.t_max)
    else:
        side = min(cfg.a_x, cfg.a_y) / 5.0
        region = RectDomain(side, side, x0=dom.x0 + (cfg.a_x - side) / 2.0,
                            y0=dom.y0 + (cfg.a_y - side) / 2.0)
        sampler = partial(coverage_rep, model, cfg.intensity, region,
                          cfg.r, cfg.eps_value, cfg.t_max)

    times = np.asarray(run_indexed(partial(_one_rep, sampler), cfg.reps,
                                   rng.child(0)))
    curve = survival_from_times(times, cfg.t_grid())
    constants = None
    if subcommand == "detect":
        constants = _maybe_bound_constants(cfg, rng.child(1))
        if constants is not None:
            curve = dataclasses.replace(
                curve, bound=constants.bound_values(cfg.t_grid()))

    stem = subcommand.replace("-", "_")
    extra = {
        "censored_frac": curve.censored_frac,
        "bound_constants": None if constants is None
        else dataclasses.asdict(constants),
    }
    if subcommand == "cover":
        extra["r"] = cfg.r
        extra["eps"] = cfg.eps_value
    else:
        extra["rho"] = cfg.rho
    _write_text(out_dir / f"{cfg.out_prefix}_{stem}_survival.csv",
                _curve_csv(cfg, curve), written)
    _write_text(out_dir / f"{cfg.out_prefix}_{stem}_samples.csv",
                _samples_csv(cfg, times), written)
    _write_text(out_dir / f"{cfg.out_prefix}_{stem}_meta.json",
                _metadata(cfg, subcommand, extra), written)


def _run_stationary(cfg: MobilityConfig, out_dir: Path, written: list) -> None:
    rng = RngStream(cfg.seed)
    sample_times = default_sample_times(cfg, cfg.t_grid_points)
    positions = stationary_positions(cfg, cfg.reps, default_burn_in(cfg),
                                     sample_times, rng.child(0))
    dom = cfg.domain()
    hist = SpatialHistogram.from_points(positions.reshape(-1, 2), dom,
                                        _HIST_BINS, _HIST_BINS)
    density = None
    if ModelVariant(cfg.variant) is ModelVariant.CLASSICAL \
            and cfg.a_x == cfg.a_y and not dom.torus:
        density = partial(rwp_density, a=cfg.a_x)
    buf = io.StringIO()
    buf.write(_hash_line(cfg))
    hist.write_csv(buf, density=density)
    extra = {"n_walkers": cfg.reps, "n_sample_times": len(sample_times),
             "bins": _HIST_BINS}
    _write_text(out_dir / f"{cfg.out_prefix}_stationary_hist.csv",
                buf.getvalue(), written)
    _write_text(out_dir / f"{cfg.out_prefix}_stationary_meta.json",
                _metadata(cfg, "stationary", extra), written)


def _run_percolate(cfg: MobilityConfig, p_grid, out_dir: Path,
                   written: list) -> None:
    rng = RngStream(cfg.seed)
    result = phase_experiment(cfg, p_grid, cfg.reps, rng.child(0))
    out = [_hash_line(cfg),
           "replication,lambda,p,points,largest,crossing_lr,crossing_tb\n"]
    for row in result.rows:
        out.append(f"{row['replication']},{row['lambda']:.10g},"
                   f"{row['p']:.10g},{row['points']},{row['largest']},"
                   f"{row['crossing_lr']},{row['crossing_tb']}\n")
    extra = {
        "p_grid": [float(p) for p in result.p_grid],
        "crossing_thinned": list(result.crossing_thinned),
        "crossing_full": list(result.crossing_full),
        "thinned_radius": result.thinned_radius,
    }
    _write_text(out_dir / f"{cfg.out_prefix}_percolate_clusters.csv",
                "".join(out), written)
    _write_text(out_dir / f"{cfg.out_prefix}_percolate_meta.json",
                _metadata(cfg, "percolate", extra), written)


def _run_trace(cfg: MobilityConfig, out_dir: Path, written: list) -> None:
    rng = RngStream(cfg.seed)
    model = cfg.build_model()
    dom = cfg.domain()
    homes = sample_ppp(cfg.intensity, dom, rng.child(0))
    trajectories = []
    for i, (hx, hy) in enumerate(homes):
        st = rng.child(i + 1)
        state, traj = init_walker(model, Point2(float(hx), float(hy)), st)
        advance_to(state, traj, model, st, cfg.t_max)
        trajectories.append(traj)
    buf = io.StringIO()
    buf.write(_hash_line(cfg))
    export_trace(trajectories, "native", buf)
    extra = {"n_nodes": len(trajectories), "format": "native"}
    _write_text(out_dir / f"{cfg.out_prefix}_trace.txt", buf.getvalue(),
                written)
    _write_text(out_dir / f"{cfg.out_prefix}_trace_meta.json",
                _metadata(cfg, "trace", extra), written)


def run_experiment(cfg: MobilityConfig, subcommand: str, out_dir,
                   p_grid=None) -> list:
    """Run one subcommand, returning the list of files written.

    Raises on failure after removing any partially written outputs."""
    if subcommand not in SUBCOMMANDS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list = []
    try:
        if subcommand in ("detect", "mobile-detect", "cover"):
            _run_survival(cfg, subcommand, out_dir, written)
        elif subcommand == "stationary":
            _run_stationary(cfg, out_dir, written)
        elif subcommand == "percolate":
            grid = [0.0] if p_grid is None else list(p_grid)
            _run_percolate(cfg, grid, out_dir, written)
        else:
            _run_trace(cfg, out_dir, written)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def main(argv=None) -> int:
    args = _parse_args(argv)
    try:
        cfg = _load_config(args)
        p_grid = [float(tok) for tok in args.p_grid.split(",") if tok.strip()]
    except (ParseError, ValidationError, OSError, ValueError) as exc:
        print(f"srw: config error: {exc}", file=sys.stderr)
        return 2
    try:
        written = run_experiment(cfg, args.subcommand, args.out, p_grid)
    except (ParseError, ValidationError) as exc:
        print(f"srw: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"srw: error: {exc}", file=sys.stderr)
        return 3
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
