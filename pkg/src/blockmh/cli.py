"""Command-line front end.

Subcommands: generate, sample, exact, check, experiment
{balanced|heterogeneous|bad-init|phase-heatmap}. Values resolve as
defaults < --config JSON file < explicit flags. Exit codes: 0 success,
2 configuration error, 3 guard exceeded, 4 numerical failure.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .analysis import check_conditions, misclassification_loss, \
    mixing_time_budget
from .errors import ConfigError, GuardExceededError, NumericalError
from .experiments import (BadInitConfig, ExactReportConfig,
                          PhaseHeatmapConfig, balanced_config,
                          heterogeneous_config, prepare_output_dir,
                          run_bad_init_study, run_exact_report,
                          run_phase_heatmap_study, run_trajectory_study)
from .initializers import spectral_init, uniform_feasible_init
from .posterior import ModelConfig, log_posterior
from .sampler import run_chain
from .sbm import ConnectivityMatrix, count_statistics, generate_sbm


def _load_config_file(path):
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


def _merge(defaults, file_values, flag_values):
    merged = dict(defaults)
    for source in (file_values, flag_values):
        for key, value in source.items():
            if value is not None:
                merged[key] = value
    return merged


def _parse_sizes(text):
    try:
        sizes = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad sizes list: {text!r}") from exc
    if any(s <= 0 for s in sizes):
        raise ConfigError("community sizes must be positive")
    return sizes


def _cmd_generate(args):
    file_cfg = _load_config_file(args.config)
    cfg = _merge({"n": 100, "k": 2, "p": 0.5, "q": 0.1, "sizes": None,
                  "seed": 0},
                 file_cfg,
                 {"n": args.n, "k": args.k, "p": args.p, "q": args.q,
                  "sizes": args.sizes, "seed": args.seed})
    n, K = cfg["n"], cfg["k"]
    sizes = _parse_sizes(cfg["sizes"]) if isinstance(cfg["sizes"], str) \
        else (cfg["sizes"] or [n // K] * (K - 1) + [n - (K - 1) * (n // K)])
    if sum(sizes) != n or len(sizes) != K:
        raise ConfigError("sizes must have K entries summing to n")
    truth = np.repeat(np.arange(K), sizes)
    cm = ConnectivityMatrix.from_pq(K, cfg["p"], cfg["q"])
    adjacency = generate_sbm(n, cm, truth, seed=cfg["seed"])
    out = prepare_output_dir(args.out, args.force)
    io.write_graph(out / "graph.txt", adjacency)
    io.write_labels(out / "truth_labels.txt", truth)
    io.write_manifest(out / "manifest.json", {
        "command": "generate",
        "config": {"n": n, "K": K, "p": cfg["p"], "q": cfg["q"],
                   "sizes": sizes, "seed": cfg["seed"]},
        "edge_count": adjacency.edge_count,
        "files": ["graph.txt", "truth_labels.txt"],
    })
    print(f"wrote graph with {adjacency.edge_count} edges to {out}")
    return 0


def _resolve_iterations(text, n, K, config, adjacency, init, truth):
    if text != "auto":
        try:
            value = int(text)
        except ValueError as exc:
            raise ConfigError(f"--iters must be an integer or 'auto', "
                              f"got {text!r}") from exc
        if value < 0:
            raise ConfigError("--iters must be nonnegative")
        return value
    if truth is None:
        raise ConfigError("--iters auto needs --truth to gauge the start")
    gamma0 = misclassification_loss(init, truth, K)
    post_init = log_posterior(count_statistics(adjacency, init, K),
                              config).value
    post_truth = log_posterior(count_statistics(adjacency, truth, K),
                               config).value
    # normalized start posterior approximated by anchoring at the reference
    neg_log = max(post_truth + math.lgamma(K + 1) - post_init, 0.0)
    return mixing_time_budget(n, K, gamma0, config.xi, neg_log)


def _cmd_sample(args):
    file_cfg = _load_config_file(args.config)
    cfg = _merge({"k": 2, "alpha": 2.0, "xi": 1.0, "kappa1": 1.0,
                  "kappa2": 1.0, "seed": 0, "init": "spectral",
                  "iters": "auto", "record_every": None, "known_pq": None},
                 file_cfg,
                 {"k": args.k, "alpha": args.alpha, "xi": args.xi,
                  "kappa1": args.kappa1, "kappa2": args.kappa2,
                  "seed": args.seed, "init": args.init, "iters": args.iters,
                  "record_every": args.record_every,
                  "known_pq": args.known_pq})
    adjacency = io.read_graph(args.graph)
    n, K = adjacency.n, cfg["k"]
    truth = io.read_labels(args.truth) if args.truth else None
    connectivity = None
    if cfg["known_pq"]:
        p, q = (float(v) for v in str(cfg["known_pq"]).split(","))
        connectivity = ConnectivityMatrix.from_pq(K, p, q)
    config = ModelConfig(n=n, K=K, alpha=cfg["alpha"], xi=cfg["xi"],
                         kappa1=cfg["kappa1"], kappa2=cfg["kappa2"],
                         connectivity=connectivity)
    method = str(cfg["init"])
    if method == "spectral":
        init = spectral_init(adjacency, K, cfg["alpha"], seed=cfg["seed"])
    elif method == "uniform":
        init = uniform_feasible_init(n, K, cfg["alpha"], seed=cfg["seed"])
    elif method.startswith("labels:"):
        init = io.read_labels(method.split(":", 1)[1])
    else:
        raise ConfigError(f"unknown init method {method!r} "
                          "(spectral | uniform | labels:<path>)")
    iterations = _resolve_iterations(str(cfg["iters"]), n, K, config,
                                     adjacency, init, truth)
    result = run_chain(adjacency, init, config, iterations,
                       record_every=cfg["record_every"], truth=truth,
                       seed=cfg["seed"])
    out = prepare_output_dir(args.out, args.force)
    io.write_trajectory(out / "trajectory.csv", result.trajectory)
    io.write_labels(out / "final_labels.txt", result.labels)
    manifest = {
        "command": "sample",
        "config": {"n": n, "K": K, "alpha": cfg["alpha"], "xi": cfg["xi"],
                   "kappa1": cfg["kappa1"], "kappa2": cfg["kappa2"],
                   "init": method, "iterations": iterations,
                   "record_every": cfg["record_every"] or n,
                   "seed": cfg["seed"],
                   "posterior": ("known-homogeneous" if connectivity
                                 else "collapsed")},
        "final_log_posterior": result.final_log_posterior,
        "accepted_steps": result.accepted_steps,
        "timings": {"chain_seconds": result.seconds},
        "files": ["trajectory.csv", "final_labels.txt"],
    }
    if truth is not None:
        manifest["final_loss"] = misclassification_loss(result.labels, truth,
                                                        K)
        manifest["hitting_time"] = result.hitting_time
        manifest["truth_log_posterior"] = log_posterior(
            count_statistics(adjacency, truth, K), config).value
    io.write_manifest(out / "manifest.json", manifest)
    print(f"ran {iterations} iterations; outputs in {out}")
    return 0


def _cmd_exact(args):
    file_cfg = _load_config_file(args.config)
    defaults = ExactReportConfig()
    cfg = _merge({"n": defaults.n, "sizes": None, "p": defaults.p,
                  "q": defaults.q, "alpha": defaults.alpha,
                  "xi": defaults.xi, "epsilon": defaults.epsilon,
                  "lazy": None, "seed": defaults.seed},
                 file_cfg,
                 {"n": args.n, "sizes": args.sizes, "p": args.p,
                  "q": args.q, "alpha": args.alpha, "xi": args.xi,
                  "epsilon": args.epsilon,
                  "lazy": (None if args.lazy is None else args.lazy),
                  "seed": args.seed})
    n = cfg["n"]
    sizes = _parse_sizes(cfg["sizes"]) if isinstance(cfg["sizes"], str) \
        else (cfg["sizes"] or [n // 2, n - n // 2])
    report_cfg = ExactReportConfig(
        n=n, sizes=sizes, p=cfg["p"], q=cfg["q"], alpha=cfg["alpha"],
        xi=cfg["xi"], epsilon=cfg["epsilon"],
        lazy=True if cfg["lazy"] is None else bool(cfg["lazy"]),
        seed=cfg["seed"])
    report = run_exact_report(report_cfg, out=args.out, force=args.force)
    if args.out is None:
        print(json.dumps(io._jsonable(report), indent=2, sort_keys=True))
    else:
        print(f"exact report for {report['state_count']} states in "
              f"{args.out}")
    return 0


def _cmd_check(args):
    file_cfg = _load_config_file(args.config)
    cfg = _merge({"n": 1000, "k": 2, "p": 0.3, "q": 0.1, "alpha": 2.0,
                  "beta": 1.0, "gamma0": 0.1, "xi": 1.0, "tau": 0.1,
                  "largeness": 10.0, "neg_log_post_z0": None,
                  "epsilon": 0.05},
                 file_cfg,
                 {"n": args.n, "k": args.k, "p": args.p, "q": args.q,
                  "alpha": args.alpha, "beta": args.beta,
                  "gamma0": args.gamma0, "xi": args.xi, "tau": args.tau,
                  "largeness": args.largeness,
                  "neg_log_post_z0": args.neg_log_post_z0,
                  "epsilon": args.epsilon})
    report = check_conditions(
        n=cfg["n"], K=cfg["k"], p=cfg["p"], q=cfg["q"], alpha=cfg["alpha"],
        beta=cfg["beta"], gamma0=cfg["gamma0"], xi=cfg["xi"], tau=cfg["tau"],
        largeness=cfg["largeness"],
        neg_log_posterior_z0=cfg["neg_log_post_z0"],
        epsilon=cfg["epsilon"])
    payload = io._jsonable(report.to_dict())
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2,
                                             sort_keys=True) + "\n")
        print(f"condition report written to {args.out}")
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_experiment(args):
    file_cfg = _load_config_file(args.config)
    kind = args.kind
    common = {"seed": args.seed, "chains": args.chains,
              "paper_scale": True if args.paper_scale else None,
              "xi": args.xi, "alpha": args.alpha}
    common = {k: v for k, v in common.items() if v is not None}
    iters = None
    if args.iters is not None:
        try:
            iters = int(args.iters)
        except ValueError as exc:
            raise ConfigError("experiment --iters must be an integer") from exc
    if kind in ("balanced", "heterogeneous"):
        builder = balanced_config if kind == "balanced" \
            else heterogeneous_config
        allowed = {"seed", "chains", "paper_scale", "xi", "alpha",
                   "iterations"}
        merged = _merge({}, {k: v for k, v in file_cfg.items()
                             if k in allowed}, common)
        if iters is not None:
            merged["iterations"] = iters
        study = builder(**merged)
        manifest = run_trajectory_study(study, args.out, kind,
                                        force=args.force,
                                        workers=args.workers)
        converged = sum(c["converged"] for c in manifest["chains"])
        print(f"{kind}: {converged}/{len(manifest['chains'])} chains "
              f"reached the truth level; outputs in {args.out}")
    elif kind == "bad-init":
        fields = {k: v for k, v in file_cfg.items()
                  if k in BadInitConfig.__dataclass_fields__}
        for key, value in common.items():
            if key == "paper_scale":
                continue  # the instance already matches the reference study
            fields[key] = value
        if iters is not None:
            fields["iterations"] = iters
        cfg = BadInitConfig(**fields)
        manifest = run_bad_init_study(cfg, args.out, force=args.force,
                                      workers=args.workers)
        for summary in manifest["summaries"]:
            print(f"epsilon={summary['epsilon']:+.2f}: "
                  f"{summary['converged']} converged, "
                  f"{summary['stuck']} stuck")
    elif kind == "phase-heatmap":
        fields = {k: v for k, v in file_cfg.items()
                  if k in PhaseHeatmapConfig.__dataclass_fields__}
        for key, value in common.items():
            if key == "chains":
                fields["replicates"] = value
            else:
                fields[key] = value
        if iters is not None:
            fields["iterations"] = iters
        cfg = PhaseHeatmapConfig(**fields)
        manifest = run_phase_heatmap_study(cfg, args.out, force=args.force,
                                           workers=args.workers)
        active = [c for c in manifest["cells"] if not c["skipped"]]
        print(f"phase-heatmap: {len(active)} cells swept; grid.csv in "
              f"{args.out}")
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown experiment {kind!r}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="blockmh",
        description="Bayesian community detection via a tempered single-flip "
                    "Metropolis-Hastings sampler")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out=True):
        p.add_argument("--config", help="JSON config file; flags override")
        p.add_argument("--seed", type=int, help="master seed (64-bit)")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")
            p.add_argument("--force", action="store_true",
                           help="allow writing into a non-empty directory")

    gen = sub.add_parser("generate", help="sample a block-model graph")
    add_common(gen)
    gen.add_argument("--n", type=int)
    gen.add_argument("--k", type=int)
    gen.add_argument("--p", type=float)
    gen.add_argument("--q", type=float)
    gen.add_argument("--sizes", help="comma-separated community sizes")
    gen.set_defaults(func=_cmd_generate)

    samp = sub.add_parser("sample", help="run one chain on a graph file")
    add_common(samp)
    samp.add_argument("--graph", required=True, help="edge-list graph file")
    samp.add_argument("--k", type=int)
    samp.add_argument("--alpha", type=float)
    samp.add_argument("--xi", type=float)
    samp.add_argument("--kappa1", type=float)
    samp.add_argument("--kappa2", type=float)
    samp.add_argument("--truth", help="reference labels file")
    samp.add_argument("--init",
                      help="spectral | uniform | labels:<path>")
    samp.add_argument("--iters", help="iteration count or 'auto'")
    samp.add_argument("--record-every", type=int, dest="record_every")
    samp.add_argument("--known-pq", dest="known_pq",
                      help="p,q for the known-connectivity posterior")
    samp.set_defaults(func=_cmd_sample)

    exact = sub.add_parser("exact",
                           help="exact chain analysis of a small instance")
    exact.add_argument("--config", help="JSON config file; flags override")
    exact.add_argument("--seed", type=int)
    exact.add_argument("--out", help="output directory (default: stdout)")
    exact.add_argument("--force", action="store_true")
    exact.add_argument("--n", type=int)
    exact.add_argument("--sizes")
    exact.add_argument("--p", type=float)
    exact.add_argument("--q", type=float)
    exact.add_argument("--alpha", type=float)
    exact.add_argument("--xi", type=float)
    exact.add_argument("--epsilon", type=float)
    lazy = exact.add_mutually_exclusive_group()
    lazy.add_argument("--lazy", dest="lazy", action="store_true",
                      default=None)
    lazy.add_argument("--no-lazy", dest="lazy", action="store_false")
    exact.set_defaults(func=_cmd_exact)

    check = sub.add_parser("check",
                           help="evaluate the rapid-mixing conditions")
    check.add_argument("--config", help="JSON config file; flags override")
    check.add_argument("--out", help="output file (default: stdout)")
    check.add_argument("--n", type=int)
    check.add_argument("--k", type=int)
    check.add_argument("--p", type=float)
    check.add_argument("--q", type=float)
    check.add_argument("--alpha", type=float)
    check.add_argument("--beta", type=float)
    check.add_argument("--gamma0", type=float)
    check.add_argument("--xi", type=float)
    check.add_argument("--tau", type=float)
    check.add_argument("--largeness", type=float)
    check.add_argument("--neg-log-post-z0", dest="neg_log_post_z0",
                       type=float,
                       help="-log posterior of the start, for the budget")
    check.add_argument("--epsilon", type=float)
    check.set_defaults(func=_cmd_check)

    exp = sub.add_parser("experiment", help="run a study preset")
    exp.add_argument("kind", choices=["balanced", "heterogeneous",
                                      "bad-init", "phase-heatmap"])
    add_common(exp)
    exp.add_argument("--chains", type=int,
                     help="chains per setting (replicates for the heatmap)")
    exp.add_argument("--iters", help="iteration budget override")
    exp.add_argument("--xi", type=float)
    exp.add_argument("--alpha", type=float)
    exp.add_argument("--paper-scale", action="store_true", default=None,
                     help="run at the reference publication sizes")
    exp.add_argument("--workers", type=int, default=1,
                     help="parallel workers for replicates")
    exp.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except GuardExceededError as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
