"""Randomized relabeling instances and scheme-vs-scheme timing curves.

Instances plant a block-structured reference, hit it with an independent
random signed permutation per draw, and add Gaussian noise -- small enough
that a good alignment is unambiguous, large enough that the objective stays
off zero.  The benchmark runs the alignment loop per scheme and records the
objective after every outer iteration together with elapsed wall time.
"""

import numpy as np

from . import rsp
from .rsp import RspConfig
from .sampling import default_block_map


def make_relabel_instance(T, p, q, seed, noise=0.1):
    """T draws that are noisy signed-permutations of one planted matrix."""
    if q > p:
        raise ValueError("need q <= p for a sensible instance")
    rng = np.random.default_rng(seed)
    truth = np.zeros((p, q))
    bm = default_block_map(p, q)
    truth[np.arange(p), bm] = 0.8 + rng.uniform(-0.05, 0.05, size=p)
    draws = np.empty((T, p, q))
    for t in range(T):
        perm = rng.permutation(q)
        signs = rng.integers(0, 2, size=q) * 2.0 - 1.0
        draws[t] = truth[:, perm] * signs[None, :]
        draws[t] += rng.normal(scale=noise, size=(p, q))
    return draws


def run_bench(q_list, schemes, repeats, T=30, p=20, noise=0.1,
              sa_loops=None, seed=0, force_exact=False):
    """One row per (q, scheme, repeat, outer iteration): objective + elapsed time.

    The exact scheme is skipped for q > 10 unless forced; its sign
    enumeration is exponential in q and the annealing schemes are the point
    of comparison there.
    """
    rows = []
    for q in q_list:
        for rep in range(repeats):
            draws = make_relabel_instance(T, p, q, seed=(seed, q, rep), noise=noise)
            for scheme in schemes:
                if scheme == "exact" and q > 10 and not force_exact:
                    continue
                cfg = RspConfig(
                    scheme=scheme,
                    sa_loops=sa_loops,
                    rng_seed=seed + 7919 * rep,
                )
                s0, nu0 = rsp._identity_state(T, q)
                state = rsp._relabel_engine(
                    np.ascontiguousarray(draws), cfg, s0, nu0
                )
                trace, times = state[4], state[7]
                for i, (obj, tm) in enumerate(zip(trace, times)):
                    rows.append(
                        {
                            "q": q,
                            "scheme": scheme,
                            "repeat": rep,
                            "iter": i,
                            "objective": float(obj),
                            "elapsed_s": float(tm),
                        }
                    )
    return rows
