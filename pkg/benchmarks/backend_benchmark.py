"""Compare the compiled (numba) and pure-numpy kernel backends.

The numpy path is selected with LOADALIGN_NO_NUMBA=1, which must be set
before the package is imported -- so each backend runs in its own
subprocess.  Reported times cover the alignment loop only (compilation is
warmed up separately); both backends run the identical code path and their
results are checked to match bitwise.

Usage: python3 benchmarks/backend_benchmark.py [--draws 2000] [--p 20] [--q 6]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKER = textwrap.dedent(
    """
    import hashlib, json, sys, time
    import numpy as np
    import loadalign as la
    from loadalign.bench import make_relabel_instance

    T, p, q, seed = (int(v) for v in sys.argv[1:5])
    draws = make_relabel_instance(T, p, q, seed=seed, noise=0.1)
    cfg = la.RspConfig(scheme="exact")
    la.sp_align(draws[:2], cfg)  # warm-up: trigger compilation outside timing
    start = time.perf_counter()
    res = la.sp_align(draws, cfg)
    elapsed = time.perf_counter() - start
    print(json.dumps({
        "backend": la.backend_name(),
        "elapsed_s": elapsed,
        "objective": float(res.objective_trace[-1]),
        "trace": [float(v) for v in res.objective_trace],
        "reference_digest": hashlib.sha256(res.reference.tobytes()).hexdigest(),
    }))
    """
)


def run_backend(disable_numba, args):
    env = dict(os.environ)
    env["LOADALIGN_NO_NUMBA"] = "1" if disable_numba else "0"
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(args.draws), str(args.p),
         str(args.q), str(args.seed)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--draws", type=int, default=2000)
    parser.add_argument("--p", type=int, default=20)
    parser.add_argument("--q", type=int, default=6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    fast = run_backend(False, args)
    slow = run_backend(True, args)
    if fast["trace"] != slow["trace"] or (
        fast["reference_digest"] != slow["reference_digest"]
    ):
        print("MISMATCH: backends disagree", file=sys.stderr)
        return 1

    print(f"instance: T={args.draws} p={args.p} q={args.q} seed={args.seed}")
    for r in (fast, slow):
        print(f"  {r['backend']:>6}: {r['elapsed_s']:8.3f} s   "
              f"final objective {r['objective']:.6g}")
    if slow["elapsed_s"] > 0:
        print(f"  speedup: {slow['elapsed_s'] / fast['elapsed_s']:.1f}x "
              "(identical results)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
