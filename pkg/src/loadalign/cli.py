"""Command-line pipeline: simulate -> gibbs -> rsp/procrustes -> summarize.

Every command takes ``--seed`` where randomness exists and reruns
byte-identically (manifests record wall-clock time, which naturally varies).
Exit codes: 0 success, 2 usage error, 1 runtime error.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import _backend, sampleio
from .chains import align_chains
from .core import LoadingsSample
from .procrustes import op_run
from .rsp import RspConfig, rsp_run
from .sampling import (
    FaPriors,
    FaScenario,
    GibbsConfig,
    generate_synthetic,
    gibbs_sample,
    parse_blocks,
)
from .summaries import summarize
from .varimax import VarimaxConfig

from . import __version__


def _outdir(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_dict(args):
    skip = {"func"}
    return {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k not in skip
    }


def cmd_simulate(args):
    started = time.perf_counter()
    out = _outdir(args)
    block_map = parse_blocks(args.blocks, args.p) if args.blocks else None
    scn = FaScenario(
        n=args.n,
        p=args.p,
        q_true=args.q_true,
        block_map=block_map,
        loading_scale=args.loading_scale,
        sigma2=args.sigma2,
        seed=args.seed,
    )
    Y, truth, F = generate_synthetic(scn)
    sampleio.write_matrix_csv(out / "data.csv", Y, "y")
    sampleio.write_sample(out / "loadings_true.csv", truth)
    sampleio.write_matrix_csv(out / "factors_true.csv", F, "f")
    sampleio.write_manifest(
        out / "manifest.json",
        "simulate",
        _config_dict(args),
        inputs={},
        extra={"version": __version__, "block_map": scn.block_map.tolist()},
        started=started,
    )
    return 0


def cmd_gibbs(args):
    started = time.perf_counter()
    out = _outdir(args)
    Y = sampleio.read_matrix_csv(args.data)
    priors = FaPriors(l0=args.l0, L0=args.L0, a0=args.a0, b0=args.b0)
    cfg = GibbsConfig(
        iters=args.iters,
        burnin=args.burnin,
        thin=args.thin,
        seed=args.seed,
        center_data=not args.no_center,
    )
    sample = gibbs_sample(
        Y, args.q, priors, cfg, lower_triangular=args.lower_triangular
    )
    sampleio.write_sample(out / "sample.csv", sample.draws)
    sampleio.write_matrix_csv(out / "sigma2.csv", sample.variances, "sigma2")
    if args.write_factors:
        for t in range(sample.n_draws):
            sampleio.write_matrix_csv(
                out / f"factors_{t + 1}.csv", sample.factors[t], "f"
            )
    sampleio.write_manifest(
        out / "manifest.json",
        "gibbs",
        _config_dict(args),
        inputs={"data": args.data},
        extra={"version": __version__, "kept_draws": sample.n_draws},
        started=started,
    )
    return 0


def _alignment_outputs(out, result, transforms_writer, method, args, started, extra):
    sampleio.write_sample(out / "reordered.csv", result.reordered.draws)
    sampleio.write_sample(out / "reference.csv", result.reference)
    transforms_writer(out)
    sampleio.write_trace(out / "trace.csv", result.objective_trace)
    sampleio.write_manifest(
        out / "manifest.json",
        method,
        _config_dict(args),
        inputs={"sample": args.sample},
        extra={
            "version": __version__,
            "method": method,
            "objective_trace": [float(v) for v in result.objective_trace],
            "converged": bool(result.converged),
            **extra,
        },
        started=started,
    )


def cmd_rsp(args):
    started = time.perf_counter()
    out = _outdir(args)
    if args.threads:
        _backend.set_threads(args.threads)
    draws = sampleio.read_sample(args.sample)
    cfg = RspConfig(
        scheme=args.scheme,
        max_outer_iters=args.max_iter,
        convergence_factor=args.eps_factor,
        sa_loops=args.sa_loops,
        gamma=args.gamma,
        gamma0=args.gamma0,
        rng_seed=args.seed,
        restarts=args.restarts,
        faithful_sa=args.faithful_sa,
    )
    result = rsp_run(LoadingsSample(draws), cfg, VarimaxConfig(eps=args.varimax_eps))
    _alignment_outputs(
        out,
        result,
        lambda o: sampleio.write_transforms(o / "transforms.csv", result.transforms),
        "rsp",
        args,
        started,
        {"outer_iters": result.outer_iters, "threads": args.threads or 0},
    )
    return 0


def cmd_procrustes(args):
    started = time.perf_counter()
    out = _outdir(args)
    if args.threads:
        _backend.set_threads(args.threads)
    draws = sampleio.read_sample(args.sample)
    cfg = RspConfig(
        max_outer_iters=args.max_iter, convergence_factor=args.eps_factor
    )
    result = op_run(
        LoadingsSample(draws),
        cfg,
        VarimaxConfig(eps=args.varimax_eps),
        init_index=args.init_index,
    )
    _alignment_outputs(
        out,
        result,
        lambda o: sampleio.write_rotations(o / "transforms.csv", result.rotations),
        "op",
        args,
        started,
        {"threads": args.threads or 0},
    )
    return 0


def cmd_summarize(args):
    started = time.perf_counter()
    out = _outdir(args)
    draws = sampleio.read_sample(args.sample)
    summary = summarize(LoadingsSample(draws), level=args.level)
    p, q = summary.mean.shape
    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("variable,factor,mean,sd,hpd_lo,hpd_hi,scr_lo,scr_hi\n")
        for r in range(p):
            for j in range(q):
                vals = (
                    summary.mean[r, j],
                    summary.sd[r, j],
                    summary.hpd_lo[r, j],
                    summary.hpd_hi[r, j],
                    summary.scr_lo[r, j],
                    summary.scr_hi[r, j],
                )
                fh.write(
                    f"{r + 1},{j + 1}," + ",".join(sampleio.FMT % v for v in vals) + "\n"
                )
    with open(out / "columns.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("factor,redundant\n")
        for j in range(q):
            flag = "true" if j in summary.redundant_columns else "false"
            fh.write(f"{j + 1},{flag}\n")
    with open(out / "histograms.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("variable,factor,bin_lo,bin_hi,count\n")
        for r in range(p):
            for j in range(q):
                counts, edges = np.histogram(draws[:, r, j], bins=args.hist_bins)
                for b in range(args.hist_bins):
                    fh.write(
                        f"{r + 1},{j + 1},"
                        + sampleio.FMT % edges[b]
                        + ","
                        + sampleio.FMT % edges[b + 1]
                        + f",{counts[b]}\n"
                    )
    sampleio.write_manifest(
        out / "manifest.json",
        "summarize",
        _config_dict(args),
        inputs={"sample": args.sample},
        extra={
            "version": __version__,
            "q_hat": summary.q_hat,
            "redundant_columns": sorted(j + 1 for j in summary.redundant_columns),
        },
        started=started,
    )
    print(f"q_hat = {summary.q_hat}")
    return 0


def cmd_align_chains(args):
    started = time.perf_counter()
    out = _outdir(args)
    samples = [LoadingsSample(sampleio.read_sample(path)) for path in args.chains]
    sps, aligned = align_chains(samples)
    for c, chain in enumerate(aligned.chains):
        sampleio.write_sample(out / f"aligned_{c + 1}.csv", chain.reordered.draws)
    with open(out / "chain_transforms.txt", "w", encoding="utf-8") as fh:
        for c, sp in enumerate(sps):
            s_txt = ", ".join(f"{int(v):+d}" for v in sp.s)
            nu_txt = ", ".join(str(int(v) + 1) for v in sp.nu)
            fh.write(f"chain {c + 1}: s = [{s_txt}], nu = [{nu_txt}]\n")
    sampleio.write_manifest(
        out / "manifest.json",
        "align-chains",
        _config_dict(args),
        inputs={f"chain_{c + 1}": path for c, path in enumerate(args.chains)},
        extra={"version": __version__},
        started=started,
    )
    return 0


def cmd_bench(args):
    from .bench import run_bench

    started = time.perf_counter()
    q_list = [int(v) for v in args.q_list.split(",") if v]
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    rows = run_bench(
        q_list=q_list,
        schemes=schemes,
        repeats=args.repeats,
        T=args.draws,
        p=args.p,
        noise=args.noise,
        sa_loops=args.sa_loops,
        seed=args.seed,
        force_exact=args.force_exact,
    )
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("q,scheme,repeat,iter,objective,elapsed_s\n")
        for row in rows:
            fh.write(
                f"{row['q']},{row['scheme']},{row['repeat']},{row['iter']},"
                + sampleio.FMT % row["objective"]
                + ","
                + sampleio.FMT % row["elapsed_s"]
                + "\n"
            )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="loadalign",
        description="Align posterior factor-loading draws to a common labeling.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="generate a synthetic factor dataset")
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--p", type=int, required=True)
    ps.add_argument("--q-true", type=int, required=True)
    ps.add_argument("--blocks", type=str, default=None,
                    help="per-factor variable ranges, e.g. 1-4,5-8 (default: equal blocks)")
    ps.add_argument("--sigma2", type=float, default=0.36)
    ps.add_argument("--loading-scale", type=float, default=0.8)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out-dir", required=True)
    ps.set_defaults(func=cmd_simulate)

    pg = sub.add_parser("gibbs", help="sample loadings from a conjugate Gibbs chain")
    pg.add_argument("--data", required=True)
    pg.add_argument("--q", type=int, required=True)
    pg.add_argument("--iters", type=int, default=2000)
    pg.add_argument("--burnin", type=int, default=1000)
    pg.add_argument("--thin", type=int, default=1)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--l0", type=float, default=0.0)
    pg.add_argument("--L0", type=float, default=0.0)
    pg.add_argument("--a0", type=float, default=0.001)
    pg.add_argument("--b0", type=float, default=0.001)
    pg.add_argument("--no-center", action="store_true")
    pg.add_argument("--lower-triangular", action="store_true",
                    help="echelon constraint demo; leaves sign switching unresolved")
    pg.add_argument("--write-factors", action="store_true")
    pg.add_argument("--out-dir", required=True)
    pg.set_defaults(func=cmd_gibbs)

    pr = sub.add_parser("rsp", help="varimax + signed-permutation relabeling")
    pr.add_argument("--sample", required=True)
    pr.add_argument("--scheme", choices=["exact", "partial-sa", "full-sa"],
                    default="exact")
    pr.add_argument("--max-iter", type=int, default=100)
    pr.add_argument("--eps-factor", type=float, default=1e-6)
    pr.add_argument("--sa-loops", type=int, default=None)
    pr.add_argument("--gamma", type=float, default=1.0)
    pr.add_argument("--gamma0", type=float, default=1.0)
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--faithful-sa", action="store_true")
    pr.add_argument("--restarts", type=int, default=0)
    pr.add_argument("--varimax-eps", type=float, default=1e-5)
    pr.add_argument("--threads", type=int, default=None)
    pr.add_argument("--out-dir", required=True)
    pr.set_defaults(func=cmd_rsp)

    pp = sub.add_parser("procrustes", help="orthogonal-rotation baseline alignment")
    pp.add_argument("--sample", required=True)
    pp.add_argument("--max-iter", type=int, default=100)
    pp.add_argument("--eps-factor", type=float, default=1e-6)
    pp.add_argument("--init-index", type=int, default=0)
    pp.add_argument("--varimax-eps", type=float, default=1e-5)
    pp.add_argument("--threads", type=int, default=None)
    pp.add_argument("--out-dir", required=True)
    pp.set_defaults(func=cmd_procrustes)

    pm = sub.add_parser("summarize", help="credible summaries of an aligned sample")
    pm.add_argument("--sample", required=True)
    pm.add_argument("--level", type=float, default=0.99)
    pm.add_argument("--hist-bins", type=int, default=30)
    pm.add_argument("--out-dir", required=True)
    pm.set_defaults(func=cmd_summarize)

    pa = sub.add_parser("align-chains", help="bring aligned chains to one labeling")
    pa.add_argument("--out-dir", required=True)
    pa.add_argument("chains", nargs="+", help="two or more reordered sample files")
    pa.set_defaults(func=cmd_align_chains)

    pb = sub.add_parser("bench", help="objective-vs-time comparison of schemes")
    pb.add_argument("--q-list", default="5,10")
    pb.add_argument("--schemes", default="exact,partial-sa,full-sa")
    pb.add_argument("--repeats", type=int, default=5)
    pb.add_argument("--draws", type=int, default=30)
    pb.add_argument("--p", type=int, default=20)
    pb.add_argument("--noise", type=float, default=0.1)
    pb.add_argument("--sa-loops", type=int, default=None)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--force-exact", action="store_true",
                    help="run the exact scheme even for q > 10")
    pb.add_argument("--out", required=True)
    pb.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "align-chains" and len(args.chains) < 2:
        parser.error("align-chains needs at least 2 chain files")
    try:
        return args.func(args)
    except Exception as exc:  # runtime failures -> exit 1, usage already exited 2
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
