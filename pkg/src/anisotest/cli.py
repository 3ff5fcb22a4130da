"""Command-line front end.

Subcommands: simulate (model to pattern CSV), test (pattern CSV to test
JSON), replicate (pattern CSV to replicate CSVs), study (config to rates
CSV), summarize (detail JSONs to rates CSV).
"""

import argparse
import glob
import json
import math
import os
import sys
from dataclasses import replace as _dc_replace

import numpy as np

from .geometry import Window
from .io import (
    model_from_dict,
    read_pattern_csv,
    window_from_string,
    write_pattern_csv,
    write_results_csv,
    study_config_from_dict,
)
from .processes import DEFAULT_CHAIN_ITERS, Poisson, Strauss, Thomas, simulate
from .replication import ParametricMC, SRConfig, TilingConfig, make_replicator
from .study import (
    desk_preset,
    paper_preset,
    resolve_threads,
    results_to_rows,
    run_study,
    summarize_details,
    study_gibbs,
    study_lgcp,
    study_plcp,
)
from .estimation import fit_lgcp, fit_strauss, fit_thomas
from .testing import DssGloc, DssKcyl, DssTheta, rng_for, run_isotropy_test

_MODEL_BUILDERS = {
    "poisson": lambda args: Poisson(args.intensity),
    "lgcp": lambda args: _dc_replace(study_lgcp(args.theta), a=args.a),
    "gibbs-lj": lambda args: _dc_replace(study_gibbs(args.theta), a=args.a),
    "plcp": lambda args: _dc_replace(study_plcp(args.theta), a=args.a),
    "thomas": lambda args: Thomas(50.0, args.intensity / 50.0, 0.02),
    "strauss": lambda args: Strauss(args.intensity, 0.5, 0.05),
}


def _window_arg(args):
    if args.window is not None:
        return window_from_string(args.window)
    return Window.square(args.window_side)


def _add_window_flags(parser):
    parser.add_argument("--window", help="window as 'xmin,xmax,ymin,ymax'")
    parser.add_argument(
        "--window-side", type=float, default=1.0, help="side of a square window centred at 0"
    )


def _dss_from_args(args, window):
    r_max = args.r_max if args.r_max is not None else min(window.l1, window.l2) / 4.0
    if args.dss == "gloc":
        return DssGloc(
            eps=args.eps, alpha1=args.alpha1, alpha2=args.alpha2, r_max=r_max, kappa=args.kappa
        )
    if args.dss == "kcyl":
        return DssKcyl(
            zeta=args.zeta, alpha1=args.alpha1, alpha2=args.alpha2, r_max=r_max, kappa=args.kappa
        )
    return DssTheta(h=math.radians(args.bandwidth_deg), p_max=args.p_max, kappa=args.kappa)


def _tiles_to_k(n_tiles):
    k = int(round(math.sqrt(n_tiles)))
    if k * k != n_tiles:
        raise SystemExit(f"--n-tiles must be a perfect square, got {n_tiles}")
    return k


def _replication_from_args(args, pattern):
    if args.method == "tiling":
        return TilingConfig(_tiles_to_k(args.n_tiles))
    if args.method == "sr":
        kwargs = {}
        if args.sr_iters is not None:
            kwargs["iters"] = args.sr_iters
        else:
            side = min(pattern.window.l1, pattern.window.l2)
            kwargs["iters"] = 5000 if side <= 0.75 else 20_000
        return SRConfig(**kwargs)
    if args.method == "mc":
        if args.null_model:
            text = args.null_model
            if os.path.exists(text):
                with open(text) as fh:
                    doc = json.load(fh)
            else:
                doc = json.loads(text)
            return ParametricMC(model_from_dict(doc), args.iters)
        if args.fit:
            fitters = {
                "poisson": lambda p: Poisson(p.intensity),
                "thomas": lambda p: fit_thomas(p).model,
                "lgcp": lambda p: fit_lgcp(p).model,
                "strauss": lambda p: fit_strauss(p).model,
            }
            return ParametricMC(fitters[args.fit](pattern), args.iters)
        raise SystemExit("--method mc needs --null-model or --fit")
    raise SystemExit(f"unknown method {args.method!r}")


def _add_test_flags(parser):
    parser.add_argument("--dss", choices=["gloc", "kcyl", "theta"], default="kcyl")
    parser.add_argument(
        "--stat", choices=["ms", "ms-range-std", "ms-dir-std"], default="ms-range-std"
    )
    parser.add_argument("--method", choices=["tiling", "sr", "mc"], default="tiling")
    parser.add_argument("--n-tiles", type=int, default=16, help="tile count k^2 for tiling")
    parser.add_argument("--n-rep", type=int, default=199, help="number of replicates")
    parser.add_argument("--alpha1", type=float, default=float(np.pi / 6))
    parser.add_argument("--alpha2", type=float, default=float(np.pi / 6 + np.pi / 2))
    parser.add_argument("--zeta", type=float, default=0.15, help="cylinder aspect ratio")
    parser.add_argument("--eps", type=float, default=float(np.pi / 8), help="cone half-angle")
    parser.add_argument("--r-max", type=float, default=None, help="default: window side / 4")
    parser.add_argument("--kappa", type=int, default=36, help="grid resolution")
    parser.add_argument("--bandwidth-deg", type=float, default=7.5)
    parser.add_argument("--p-max", type=int, default=15)
    parser.add_argument("--alpha-level", type=float, default=0.05)
    parser.add_argument(
        "--pvalue-orientation", choices=["standard", "as-printed"], default="standard"
    )
    parser.add_argument("--recentering", choices=["plugin", "loo"], default="plugin")
    parser.add_argument("--sr-iters", type=int, default=None)
    parser.add_argument("--null-model", help="model JSON (inline or a file path) for --method mc")
    parser.add_argument(
        "--fit",
        choices=["poisson", "thomas", "lgcp", "strauss"],
        help="fit this family to the pattern as the mc null model",
    )
    parser.add_argument("--iters", type=int, default=DEFAULT_CHAIN_ITERS, help="chain length")


def cmd_simulate(args):
    win = _window_arg(args)
    if args.model_json:
        spec = model_from_dict(json.loads(args.model_json))
    else:
        spec = _MODEL_BUILDERS[args.model](args)
    rng = rng_for(args.seed)
    pat = simulate(spec, win, rng, iters=args.iters)
    write_pattern_csv(pat, args.out)
    print(f"wrote {pat.n} points to {args.out}")


def cmd_test(args):
    win = _window_arg(args)
    pattern = read_pattern_csv(args.pattern, win)
    dss = _dss_from_args(args, win)
    repl = _replication_from_args(args, pattern)
    result = run_isotropy_test(
        pattern,
        dss,
        args.stat,
        repl,
        args.n_rep,
        alpha_level=args.alpha_level,
        seed=args.seed,
        orientation=args.pvalue_orientation,
        recentering=args.recentering,
    )
    text = result.to_json(indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(
        f"p = {result.p_value:.4f} -> {'reject' if result.reject else 'no rejection of'} "
        f"isotropy at level {args.alpha_level}",
        file=sys.stderr,
    )


def cmd_replicate(args):
    win = _window_arg(args)
    pattern = read_pattern_csv(args.pattern, win)
    repl = _replication_from_args(args, pattern)
    replicator = make_replicator(repl, pattern)
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.n_rep):
        rep = replicator(rng_for(args.seed, 0, 0, i))
        write_pattern_csv(rep, os.path.join(args.out, f"replicate_{i:04d}.csv"))
    print(f"wrote {args.n_rep} replicates to {args.out}")


def cmd_study(args):
    threads = resolve_threads(args.threads)
    if args.config:
        with open(args.config) as fh:
            cfg = study_config_from_dict(json.load(fh))
    elif args.preset == "paper":
        cfg = paper_preset()
    else:
        cfg = desk_preset()
    overrides = {"threads": threads, "master_seed": args.seed}
    if args.n_patterns is not None:
        overrides["n_patterns"] = args.n_patterns
    if args.n_rep is not None:
        overrides["n_replicates"] = args.n_rep
    if args.alpha_level is not None:
        overrides["alpha_level"] = args.alpha_level
    cfg = _dc_replace(cfg, **overrides)
    results = run_study(cfg, details_dir=args.details)
    write_results_csv(results_to_rows(results), args.out)
    print(f"wrote {len(results)} scenario rows to {args.out}")


def cmd_summarize(args):
    paths = []
    for item in args.inputs:
        if os.path.isdir(item):
            paths.extend(sorted(glob.glob(os.path.join(item, "*.json"))))
        else:
            paths.append(item)
    if not paths:
        raise SystemExit("no detail JSON files found")
    rows = summarize_details(paths, alpha_level=args.alpha_level)
    write_results_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anisotest", description="Isotropy testing for spatial point patterns"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a pattern and write it as CSV")
    p_sim.add_argument(
        "--model", choices=list(_MODEL_BUILDERS), default="poisson", help="model template"
    )
    p_sim.add_argument("--model-json", help="full model spec as JSON (overrides --model)")
    p_sim.add_argument("--intensity", type=float, default=400.0)
    p_sim.add_argument("--a", type=float, default=1.0, help="anisotropy in (0, 1]")
    p_sim.add_argument("--theta", type=float, default=float(np.pi / 6))
    p_sim.add_argument("--iters", type=int, default=DEFAULT_CHAIN_ITERS)
    _add_window_flags(p_sim)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_test = sub.add_parser("test", help="run an isotropy test on a pattern CSV")
    p_test.add_argument("pattern")
    _add_window_flags(p_test)
    _add_test_flags(p_test)
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--out", help="write the TestResult JSON here (default: stdout)")
    p_test.set_defaults(func=cmd_test)

    p_rep = sub.add_parser("replicate", help="write replicate patterns as CSVs")
    p_rep.add_argument("pattern")
    _add_window_flags(p_rep)
    p_rep.add_argument("--method", choices=["tiling", "sr", "mc"], default="tiling")
    p_rep.add_argument("--n-tiles", type=int, default=16)
    p_rep.add_argument("--n-rep", type=int, default=9)
    p_rep.add_argument("--sr-iters", type=int, default=None)
    p_rep.add_argument("--null-model")
    p_rep.add_argument("--fit", choices=["poisson", "thomas", "lgcp", "strauss"])
    p_rep.add_argument("--iters", type=int, default=DEFAULT_CHAIN_ITERS)
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--out", required=True, help="output directory")
    p_rep.set_defaults(func=cmd_replicate)

    p_study = sub.add_parser("study", help="run a simulation study")
    p_study.add_argument("--config", help="StudyConfig as JSON")
    p_study.add_argument("--preset", choices=["desk", "paper"], default="desk")
    p_study.add_argument("--seed", type=int, default=0)
    p_study.add_argument("--threads", type=int, default=None)
    p_study.add_argument("--n-patterns", type=int, default=None)
    p_study.add_argument("--n-rep", type=int, default=None)
    p_study.add_argument("--alpha-level", type=float, default=None)
    p_study.add_argument("--details", help="directory for per-test detail JSONs")
    p_study.add_argument("--out", required=True)
    p_study.set_defaults(func=cmd_study)

    p_sum = sub.add_parser("summarize", help="aggregate detail JSONs into a rates CSV")
    p_sum.add_argument("inputs", nargs="+", help="detail JSON files or directories")
    p_sum.add_argument("--alpha-level", type=float, default=0.05)
    p_sum.add_argument("--out", required=True)
    p_sum.set_defaults(func=cmd_summarize)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
