"""Bring independently aligned MCMC chains onto one common column labeling.

Each chain's alignment is internally consistent but its labeling is
arbitrary, so chain references are themselves aligned -- by the same
alternating loop used for draws, run on the C reference matrices -- and the
resulting per-chain signed permutation is applied uniformly to every draw of
its chain.  The common labeling is anchored so the chain whose reference
carries the largest total absolute loading mass keeps its labels (lowest
index on ties); any common labeling is equally valid, this one is just
reproducible.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    LoadingsSample,
    SignedPermutation,
    apply_signed_permutation,
    compose,
    invert,
)
from .rsp import DrawTransform, RspConfig, RspResult, sp_align


@dataclass(frozen=True)
class ChainSet:
    chains: list
    per_chain_sp: list


def _chain_parts(chain):
    """(reordered LoadingsSample, reference, source RspResult or None)."""
    if isinstance(chain, RspResult) or (
        hasattr(chain, "reordered") and hasattr(chain, "reference")
    ):
        return chain.reordered, np.asarray(chain.reference, dtype=float), chain
    sample = chain if isinstance(chain, LoadingsSample) else LoadingsSample(chain)
    return sample, sample.draws.mean(axis=0), None


def _apply_to_chain(sample, source, sp):
    """Apply one signed permutation to every draw (and companion) of a chain."""
    draws = np.stack([apply_signed_permutation(d, sp) for d in sample.draws])
    factors = None
    if sample.factors is not None:
        factors = np.stack([apply_signed_permutation(F, sp) for F in sample.factors])
    new_sample = LoadingsSample(draws, factors=factors, variances=sample.variances)
    if source is None or not isinstance(source, RspResult):
        return RspResult(
            reordered=new_sample,
            transforms=[
                DrawTransform(np.eye(sample.q), sp) for _ in range(sample.n_draws)
            ],
            reference=new_sample.draws.mean(axis=0),
            objective_trace=np.asarray([float(np.sum((draws - draws.mean(0)) ** 2))]),
            converged=True,
            outer_iters=0,
        )
    transforms = [
        DrawTransform(tr.rotation, compose(sp, tr.sp)) for tr in source.transforms
    ]
    return RspResult(
        reordered=new_sample,
        transforms=transforms,
        reference=apply_signed_permutation(source.reference, sp),
        objective_trace=source.objective_trace,
        converged=source.converged,
        outer_iters=source.outer_iters,
    )


def align_chains(chains, cfg=None):
    """Return (per-chain SignedPermutation, aligned ChainSet).

    ``chains`` may hold alignment results or plain samples (reference = mean
    of draws).  The per-chain transforms minimize the spread of the C
    references around their common mean; a uniform signed permutation leaves
    each chain's internal objective unchanged, so traces are carried over.
    """
    if len(chains) < 2:
        raise ValueError("need at least 2 chains")
    parts = [_chain_parts(c) for c in chains]
    shapes = {p[0].draws.shape[1:] for p in parts}
    if len(shapes) != 1:
        raise ValueError(f"chains disagree on (p, q): {sorted(shapes)}")

    refs = np.stack([p[1] for p in parts])
    if cfg is None:
        cfg = RspConfig(scheme="exact")
    res = sp_align(refs, cfg)
    sps = [tr.sp for tr in res.transforms]

    # Anchor: re-express so the heaviest chain's transform is the identity.
    # fsum gives the exactly rounded total, so relabeled copies of the same
    # reference tie exactly and the lowest index wins regardless of how the
    # intermediate buffers happen to be aligned.
    anchor = int(np.argmax([math.fsum(np.abs(r).ravel()) for r in refs]))
    undo = invert(sps[anchor])
    final = [compose(undo, sp) for sp in sps]

    aligned = [
        _apply_to_chain(sample, source, sp)
        for (sample, _, source), sp in zip(parts, final)
    ]
    return final, ChainSet(chains=aligned, per_chain_sp=final)
