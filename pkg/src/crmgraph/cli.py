"""Command-line interface.

Subcommands: sample, fit, test-sparsity, ppc, scaling, diag. Exit codes:
0 success, 2 usage error, 1 runtime error.
"""

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import __version__
from .diagnostics import (
    credible_interval,
    posterior_predictive_degrees,
    psrf,
    scaling_experiment,
    sparsity_test,
)
from .errors import CrmGraphError
from .graphio import (
    read_edge_list,
    read_trace_csv,
    write_edge_list,
    write_sidecar,
    write_trace_csv,
)
from .inference import McmcConfig, run_chains
from .params import GgpParams
from .simulate import SimConfig, sample_graph


def _add_model_args(p):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)


def _add_fit_args(p):
    p.add_argument("graph", help="edge-list file to fit")
    p.add_argument("--n-iter", type=int, default=20000)
    p.add_argument("--n-chains", type=int, default=3)
    p.add_argument("--leapfrog-steps", type=int, default=10)
    p.add_argument("--target-accept", type=float, default=0.6)
    p.add_argument("--adapt-iters", type=int, default=None)
    p.add_argument("--rw-sd", type=float, default=0.02)
    p.add_argument("--thin", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--latent-mode", choices=("exact", "mh"), default="exact")
    p.add_argument("--priors", choices=("improper", "lognormal"), default="improper")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="crmgraph",
        description="Sparse random graphs from completely random measures",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a graph and write an edge list")
    _add_model_args(p)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--path", choices=("truncated", "urn", "kallenberg",
                                      "compound-poisson"), default="truncated")
    p.add_argument("--no-self-loops", action="store_true")
    p.add_argument("--out", default="graph.txt")

    p = sub.add_parser("fit", help="run MCMC on an edge-list graph")
    _add_fit_args(p)
    p.add_argument("--out", default="trace.csv")

    p = sub.add_parser("test-sparsity", help="fit, then report Pr(sigma >= 0 | data)")
    _add_fit_args(p)
    p.add_argument("--out", default="sparsity.json")
    p.add_argument("--trace-out", default=None)

    p = sub.add_parser("ppc", help="posterior-predictive degree bands from a trace")
    p.add_argument("trace", help="trace CSV from fit")
    p.add_argument("--graph", default=None, help="observed edge list for overlay")
    p.add_argument("--n-draws", type=int, default=200)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="ppc.csv")

    p = sub.add_parser("scaling", help="edge/node scaling experiment")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--alpha-grid", type=float, nargs="+", required=True)
    p.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--out", default="scaling.csv")

    p = sub.add_parser("diag", help="PSRF and credible intervals from stored traces")
    p.add_argument("trace", help="trace CSV from fit")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--out", default=None, help="optional param,psrf CSV")
    return parser


def _cmd_sample(args):
    cfg = SimConfig(
        params=GgpParams(args.alpha, args.sigma, args.tau),
        truncation_eps=args.eps,
        seed=args.seed,
        path=args.path,
        include_self_loops=not args.no_self_loops,
    )
    z = sample_graph(cfg)
    write_edge_list(z, args.out, header=f"crmgraph sample seed={args.seed}")
    write_sidecar(args.out + ".json", {
        "alpha": args.alpha, "sigma": args.sigma, "tau": args.tau,
        "eps": args.eps, "seed": args.seed, "path": args.path,
        "include_self_loops": not args.no_self_loops,
        "n_nodes": z.n_nodes, "n_edges": z.n_edges,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    })
    print(f"wrote {z.n_nodes} nodes, {z.n_edges} edges to {args.out}")
    return 0


def _fit(args):
    graph = read_edge_list(args.graph).graph
    cfg = McmcConfig(
        n_iter=args.n_iter,
        n_chains=args.n_chains,
        leapfrog_steps=args.leapfrog_steps,
        target_accept=args.target_accept,
        adapt_iters=args.adapt_iters,
        rw_sd=args.rw_sd,
        thin=args.thin,
        seed=args.seed,
        latent_mode=args.latent_mode,
        priors=args.priors,
    )
    return graph, run_chains(graph, cfg)


def _cmd_fit(args):
    _, traces = _fit(args)
    write_trace_csv(traces, args.out)
    print(f"wrote {sum(len(t) for t in traces)} kept samples to {args.out}")
    return 0


def _cmd_test_sparsity(args):
    start = time.time()
    _, traces = _fit(args)
    if args.trace_out:
        write_trace_csv(traces, args.trace_out)
    result = sparsity_test(traces)
    doc = {
        "schema_version": 1,
        "p_sparse": result.p_sparse,
        "ci_sigma": list(result.ci_sigma),
        "max_psrf": result.max_psrf,
        "runtime": time.time() - start,
    }
    if result.warning:
        doc["warning"] = result.warning
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(f"p_sparse={result.p_sparse:.4f} ci_sigma=({result.ci_sigma[0]:.4f}, "
          f"{result.ci_sigma[1]:.4f})")
    return 0


def _cmd_ppc(args):
    traces = read_trace_csv(args.trace)
    observed = read_edge_list(args.graph).graph if args.graph else None
    sim_cfg = SimConfig(params=GgpParams(1.0, 0.0, 1.0), truncation_eps=args.eps,
                        seed=args.seed)
    bands = posterior_predictive_degrees(
        traces, args.n_draws, sim_cfg, observed=observed, seed=args.seed
    )
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        cols = ["degree_bin", "lo", "median", "hi"]
        has_obs = "observed" in bands
        wr.writerow(cols + (["observed"] if has_obs else []))
        for b in range(len(bands["bin_lo"])):
            label = (f"{bands['bin_lo'][b]}" if bands["bin_lo"][b] == bands["bin_hi"][b]
                     else f"{bands['bin_lo'][b]}-{bands['bin_hi'][b]}")
            row = [label, bands["lo"][b], bands["median"][b], bands["hi"][b]]
            if has_obs:
                row.append(bands["observed"][b])
            wr.writerow(row)
    print(f"wrote {len(bands['bin_lo'])} degree bins to {args.out}")
    return 0


def _cmd_scaling(args):
    rows, slope = scaling_experiment(
        args.sigma, args.tau, args.alpha_grid, args.seeds, eps=args.eps
    )
    with open(args.out, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["alpha", "seed", "n_nodes", "n_edges"])
        for r in rows:
            wr.writerow(r)
    print(f"slope={slope:.4f}")
    return 0


def _cmd_diag(args):
    traces = read_trace_csv(args.trace)
    report = psrf(traces)
    print("param,psrf")
    for name, val in report.psrf.items():
        print(f"{name},{val:.6f}")
    print(f"max_psrf={report.max_psrf:.6f}")
    pooled = {
        k: np.concatenate([t[k] for t in traces])
        for k in ("alpha", "sigma", "tau", "w_star")
    }
    for name, samples in pooled.items():
        lo, hi = credible_interval(samples, args.level)
        print(f"ci[{name}]=({lo:.6f}, {hi:.6f})")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["param", "psrf"])
            for name, val in report.psrf.items():
                wr.writerow([name, f"{val:.17g}"])
    return 0


_COMMANDS = {
    "sample": _cmd_sample,
    "fit": _cmd_fit,
    "test-sparsity": _cmd_test_sparsity,
    "ppc": _cmd_ppc,
    "scaling": _cmd_scaling,
    "diag": _cmd_diag,
}


def cli_dispatch(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except (CrmGraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_dispatch())
