"""Cross-chain labeling: planted recovery, anchoring, and invariants."""

import numpy as np
import pytest

from loadalign import (
    LoadingsSample,
    RspConfig,
    SignedPermutation,
    align_chains,
    apply_signed_permutation,
    compose,
    rsp_run,
    sp_align,
)
from loadalign.bench import make_relabel_instance

from helpers import all_signed_permutations


def _planted_chains(rng, n_chains=4, T=20, p=8, q=3):
    """Chains that are signed-permuted copies of one aligned sample."""
    base = make_relabel_instance(T, p, q, seed=int(rng.integers(1 << 30)),
                                 noise=0.05)
    base = sp_align(base, RspConfig(scheme="exact")).reordered.draws
    chains, sps = [], []
    for _ in range(n_chains):
        sp = SignedPermutation(
            rng.integers(0, 2, size=q) * 2 - 1, rng.permutation(q)
        )
        sps.append(sp)
        chains.append(np.stack([apply_signed_permutation(d, sp) for d in base]))
    return base, chains, sps


def test_planted_chains_recover_common_labels():
    rng = np.random.default_rng(0)
    base, chains, _ = _planted_chains(rng)
    final, aligned = align_chains(chains)
    means = [c.reordered.draws.mean(axis=0) for c in aligned.chains]
    for m in means[1:]:
        np.testing.assert_allclose(m, means[0], atol=1e-9)
    # every chain is an exact gather of the planted base, so post-alignment
    # draws agree up to one global signed permutation of the base
    best = min(
        np.abs(
            np.stack([apply_signed_permutation(d, sp) for d in base])
            - aligned.chains[0].reordered.draws
        ).max()
        for sp in all_signed_permutations(3)
    )
    assert best == 0.0


def test_already_aligned_chains_get_identity():
    rng = np.random.default_rng(1)
    base = make_relabel_instance(25, 8, 3, seed=3, noise=0.05)
    base = sp_align(base, RspConfig(scheme="exact")).reordered.draws
    chains = [base + 0.001 * rng.normal(size=base.shape) for _ in range(3)]
    final, _ = align_chains(chains)
    for sp in final:
        assert sp.is_identity()


def test_anchor_chain_keeps_its_labels():
    rng = np.random.default_rng(2)
    _, chains, _ = _planted_chains(rng, n_chains=5)
    final, aligned = align_chains(chains)
    # relabeled copies of one reference carry identical absolute mass, so the
    # tie must fall to the first chain -- exactly, not just up to rounding
    assert final[0].is_identity()
    np.testing.assert_array_equal(
        aligned.chains[0].reordered.draws, np.asarray(chains[0])
    )


def _spread(transformed):
    arr = np.asarray(transformed)
    return float(np.sum((arr - arr.mean(axis=0)) ** 2))


def _joint_brute_force(refs, q):
    group = all_signed_permutations(q)
    best = np.inf
    for sp0 in group:
        for sp1 in group:
            for sp2 in group:
                cand = [
                    apply_signed_permutation(refs[0], sp0),
                    apply_signed_permutation(refs[1], sp1),
                    apply_signed_permutation(refs[2], sp2),
                ]
                best = min(best, _spread(cand))
    return best


def test_three_chain_objective_vs_joint_enumeration():
    """On structured references the alternating loop finds the global joint
    optimum; on pure noise it is only guaranteed to sit between the brute
    force optimum and its own identity-labeling start."""
    rng = np.random.default_rng(3)
    q = 2

    base = np.zeros((6, q))
    base[:3, 0] = 0.8
    base[3:, 1] = 0.6
    structured = []
    for _ in range(3):
        sp = SignedPermutation(
            rng.integers(0, 2, size=q) * 2 - 1, rng.permutation(q)
        )
        structured.append(
            apply_signed_permutation(base, sp) + 0.01 * rng.normal(size=base.shape)
        )
    structured = np.stack(structured)
    best = _joint_brute_force(structured, q)
    final, _ = align_chains([np.stack([r, r]) for r in structured])
    achieved = _spread(
        [apply_signed_permutation(structured[c], final[c]) for c in range(3)]
    )
    assert achieved == pytest.approx(best, abs=1e-9)

    noise = rng.normal(size=(3, 5, q))
    best_n = _joint_brute_force(noise, q)
    final_n, _ = align_chains([np.stack([r, r]) for r in noise])
    achieved_n = _spread(
        [apply_signed_permutation(noise[c], final_n[c]) for c in range(3)]
    )
    assert best_n - 1e-9 <= achieved_n <= _spread(noise) + 1e-9


def test_within_chain_objective_unchanged():
    rng = np.random.default_rng(4)
    results = []
    for c in range(3):
        draws = make_relabel_instance(15, 7, 3, seed=10 + c, noise=0.2)
        results.append(rsp_run(draws, RspConfig(scheme="exact")))
    final, aligned = align_chains(results)
    for before, after in zip(results, aligned.chains):
        np.testing.assert_array_equal(
            before.objective_trace, after.objective_trace
        )
        # recompute the spread to confirm the carried trace is still honest
        draws = after.reordered.draws
        psi = float(np.sum((draws - draws.mean(axis=0)) ** 2))
        assert psi == pytest.approx(before.objective_trace[-1], rel=1e-9)


def test_between_chain_spread_shrinks():
    rng = np.random.default_rng(5)
    _, chains, _ = _planted_chains(rng, n_chains=6)
    before = np.stack([np.asarray(c).mean(axis=0) for c in chains])
    final, aligned = align_chains(chains)
    after = np.stack([c.reordered.draws.mean(axis=0) for c in aligned.chains])
    assert after.std(axis=0).max() <= before.std(axis=0).max()
    assert after.std(axis=0).max() < 0.05


def test_transforms_composed_into_results():
    draws = make_relabel_instance(10, 6, 2, seed=6, noise=0.1)
    res = [rsp_run(draws, RspConfig(scheme="exact")) for _ in range(2)]
    sp = SignedPermutation(np.array([-1, 1]), np.array([1, 0]))
    moved = type(res[1])(
        reordered=LoadingsSample(
            np.stack(
                [apply_signed_permutation(d, sp) for d in res[1].reordered.draws]
            )
        ),
        transforms=[
            type(res[1].transforms[0])(tr.rotation, compose(sp, tr.sp))
            for tr in res[1].transforms
        ],
        reference=apply_signed_permutation(res[1].reference, sp),
        objective_trace=res[1].objective_trace,
        converged=res[1].converged,
        outer_iters=res[1].outer_iters,
    )
    final, aligned = align_chains([res[0], moved])
    for chain in aligned.chains:
        # each stored transform still maps the varimax basis to the output
        assert len(chain.transforms) == 10
        np.testing.assert_allclose(
            chain.reference, chain.reordered.draws.mean(axis=0), atol=1e-12
        )


def test_errors():
    draws = make_relabel_instance(5, 4, 2, seed=7, noise=0.1)
    with pytest.raises(ValueError):
        align_chains([draws])
    other = make_relabel_instance(5, 6, 2, seed=8, noise=0.1)
    with pytest.raises(ValueError):
        align_chains([draws, other])
