"""Relabeling of posterior loading draws by signed column permutations.

Pipeline: every draw is varimax-rotated independently, then an alternating
loop matches draws to their running mean.  One half-step re-estimates the
reference as the mean of the currently aligned draws; the other half-step
re-aligns every draw to that reference by the signed permutation minimizing
the squared Frobenius distance, found either exactly (sign enumeration plus
an assignment solve) or by simulated annealing.

The loop objective is

    Psi = sum_t || align(L_t) - Lbar ||_F^2,

recorded once before the first alignment update and once per outer
iteration.  Termination: improvement below ``convergence_factor * T * p * q``
or no transform changed (``converged=True``), else the iteration cap
(``converged=False``).

Annealing draws come from independent per-draw streams seeded as
``(rng_seed, draw_index, outer_iter)``, so results do not depend on thread
count or the order draws are processed in.
"""

import time
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .core import LoadingsSample, SignedPermutation, apply_signed_permutation
from .varimax import VarimaxConfig, varimax_map

_SCHEMES = ("exact", "partial-sa", "full-sa")
_RESTART_SALT = 1000003  # keys restart inits away from per-draw SA streams


@dataclass(frozen=True)
class RspConfig:
    """Knobs for the relabeling loop.

    ``sa_loops=None`` resolves to 20 proposals for the partial scheme and
    100 for the full scheme.  ``restarts`` adds that many extra runs from
    random transform inits on top of the identity-init run; the run with the
    lowest final objective wins.  ``faithful_sa=True`` commits whatever state
    the annealing chain ends in even when it is worse than the incumbent
    transform; by default worse proposals are discarded so the objective
    trace is non-increasing.
    """

    scheme: str = "exact"
    max_outer_iters: int = 100
    convergence_factor: float = 1e-6
    sa_loops: int | None = None
    gamma: float = 1.0
    gamma0: float = 1.0
    rng_seed: int = 0
    restarts: int = 0
    faithful_sa: bool = False

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.convergence_factor < 0:
            raise ValueError("convergence_factor must be >= 0")
        if self.sa_loops is not None and self.sa_loops < 1:
            raise ValueError("sa_loops must be >= 1 when given")
        if self.gamma <= 0 or self.gamma0 <= 0:
            raise ValueError("gamma and gamma0 must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")

    def resolved_sa_loops(self):
        if self.sa_loops is not None:
            return self.sa_loops
        return 20 if self.scheme == "partial-sa" else 100


class DrawTransform(NamedTuple):
    """Per-draw transform: orthogonal rotation followed by a signed permutation."""

    rotation: np.ndarray
    sp: SignedPermutation


@dataclass(frozen=True)
class RspResult:
    reordered: LoadingsSample
    transforms: list
    reference: np.ndarray
    objective_trace: np.ndarray
    converged: bool
    outer_iters: int


def sp_cost(Lt, Lstar, sp):
    """Squared Frobenius distance between the transformed draw and the reference."""
    Lt = np.asarray(Lt, dtype=float)
    Lstar = np.asarray(Lstar, dtype=float)
    if Lt.shape != Lstar.shape:
        raise ValueError(f"shape mismatch: {Lt.shape} vs {Lstar.shape}")
    diff = apply_signed_permutation(Lt, sp) - Lstar
    return float(np.sum(diff * diff))


def build_cost_matrix(Lt, Lstar, signs):
    """Assignment costs C[i, j] = || signs[j] * Lt[:, j] - Lstar[:, i] ||^2.

    Rows index target positions, columns index source columns, and the sign
    vector is indexed by *source* column.  An optimal row->column assignment
    of this matrix is therefore already in ``nu`` form (position i takes
    source column assignment[i]); the matching position signs are
    ``signs[assignment]``.
    """
    Lt = np.asarray(Lt, dtype=float)
    Lstar = np.asarray(Lstar, dtype=float)
    signs = np.asarray(signs, dtype=float)
    if Lt.shape != Lstar.shape:
        raise ValueError(f"shape mismatch: {Lt.shape} vs {Lstar.shape}")
    if signs.shape != (Lt.shape[1],):
        raise ValueError("signs must be a length-q vector")
    a = np.sum(Lstar * Lstar, axis=0)
    b = np.sum(Lt * Lt, axis=0)
    G = Lstar.T @ Lt
    return a[:, None] + b[None, :] - 2.0 * signs[None, :] * G


def _check_exact_q(q):
    if q > 25:
        raise ValueError(
            f"exact sign enumeration is infeasible for q={q} (limit 25); "
            "use an annealing scheme"
        )
    if q > 15:
        warnings.warn(
            f"exact sign enumeration visits 2^{q} assignment problems; "
            "this will be slow",
            RuntimeWarning,
            stacklevel=3,
        )


def sp_step_exact(Lt, Lstar):
    """Globally optimal signed permutation aligning ``Lt`` to ``Lstar``.

    Enumerates all 2^q sign vectors and solves an assignment problem for
    each; cost is ``sp_cost`` of the returned transform.  Refuses q > 25.
    """
    Lt = np.ascontiguousarray(Lt, dtype=float)
    Lstar = np.asarray(Lstar, dtype=float)
    if Lt.shape != Lstar.shape:
        raise ValueError(f"shape mismatch: {Lt.shape} vs {Lstar.shape}")
    q = Lt.shape[1]
    _check_exact_q(q)
    G = Lstar.T @ Lt
    a = np.sum(Lstar * Lstar, axis=0)
    b = np.sum(Lt * Lt, axis=0)
    s, nu, cost = _kernels.sp_exact_kernel(np.ascontiguousarray(G), a, b)
    return SignedPermutation(s.astype(np.int64), nu), float(cost)


def sp_step_sa(Lt, Lstar, init, cfg, draw_index=0, outer_iter=0):
    """One annealing pass from ``init``; returns the chain's final state.

    The proposal stream is ``default_rng((cfg.rng_seed, draw_index,
    outer_iter))``.  The final state may be worse than ``init`` -- the
    relabeling loop, not this step, decides whether to keep it.
    """
    if cfg.scheme not in ("partial-sa", "full-sa"):
        raise ValueError("sp_step_sa requires an annealing scheme in cfg")
    Lt = np.ascontiguousarray(Lt, dtype=float)
    Lstar = np.asarray(Lstar, dtype=float)
    if Lt.shape != Lstar.shape:
        raise ValueError(f"shape mismatch: {Lt.shape} vs {Lstar.shape}")
    q = Lt.shape[1]
    if init.q != q:
        raise ValueError("init has wrong size")
    G = np.ascontiguousarray(Lstar.T @ Lt)
    a = np.sum(Lstar * Lstar, axis=0)
    b = np.sum(Lt * Lt, axis=0)
    B = cfg.resolved_sa_loops()
    rng = np.random.default_rng((cfg.rng_seed, draw_index, outer_iter))
    s0 = init.s.astype(float)
    nu0 = init.nu.astype(np.int64)
    if cfg.scheme == "partial-sa":
        u_flip = rng.random(B)
        u = rng.random(B)
        s, nu, cost = _kernels.sp_partial_sa_kernel(
            G, a, b, s0, nu0, u_flip, u, cfg.gamma, cfg.gamma0
        )
    else:
        flip = rng.integers(0, q, size=B)
        pair_i = rng.integers(0, q, size=B)
        pair_j = rng.integers(0, q, size=B)
        u = rng.random(B)
        s, nu, cost = _kernels.sp_full_sa_kernel(
            G, a, b, s0, nu0, flip, pair_i, pair_j, u, cfg.gamma, cfg.gamma0
        )
    return SignedPermutation(s.astype(np.int64), nu), float(cost)


def rlme_step(sample, transforms):
    """Reference update: the mean of the draws after applying their transforms."""
    draws = sample.draws if isinstance(sample, LoadingsSample) else np.asarray(sample, float)
    if draws.ndim == 2:
        draws = draws[None]
    T = draws.shape[0]
    if len(transforms) != T:
        raise ValueError("need one transform per draw")
    acc = np.zeros(draws.shape[1:])
    for t in range(T):
        tr = transforms[t]
        sp = tr.sp if isinstance(tr, DrawTransform) else tr
        acc += apply_signed_permutation(draws[t], sp)
    return acc / T


def _identity_state(T, q):
    s = np.ones((T, q))
    nu = np.tile(np.arange(q, dtype=np.int64), (T, 1))
    return s, nu


def _random_state(T, q, seed, restart):
    rng = np.random.default_rng((seed, _RESTART_SALT, restart))
    s = rng.integers(0, 2, size=(T, q)).astype(float) * 2.0 - 1.0
    nu = np.empty((T, q), dtype=np.int64)
    for t in range(T):
        nu[t] = rng.permutation(q)
    return s, nu


def _sa_proposal_block(seed, outer, T, B, q, full):
    """Per-draw proposal randomness for one outer iteration, stacked T x B."""
    u = np.empty((T, B))
    if full:
        flip = np.empty((T, B), dtype=np.int64)
        pair_i = np.empty((T, B), dtype=np.int64)
        pair_j = np.empty((T, B), dtype=np.int64)
    else:
        u_flip = np.empty((T, B))
    for t in range(T):
        rng = np.random.default_rng((seed, t, outer))
        if full:
            flip[t] = rng.integers(0, q, size=B)
            pair_i[t] = rng.integers(0, q, size=B)
            pair_j[t] = rng.integers(0, q, size=B)
        else:
            u_flip[t] = rng.random(B)
        u[t] = rng.random(B)
    if full:
        return flip, pair_i, pair_j, u
    return u_flip, u


def _relabel_engine(tilde, cfg, s0, nu0):
    """The alternating loop on already-rotated draws; returns raw state arrays."""
    start = time.perf_counter()
    T, p, q = tilde.shape
    s_cur, nu_cur = s0, nu0
    aligned = np.empty_like(tilde)
    _kernels.apply_transforms_kernel(tilde, s_cur, nu_cur, aligned)
    ref = aligned.mean(axis=0)
    psi = float(np.sum((aligned - ref) ** 2))
    trace = [psi]
    times = [time.perf_counter() - start]
    threshold = cfg.convergence_factor * T * p * q
    B = cfg.resolved_sa_loops()
    converged = False
    outer_done = 0
    for outer in range(1, cfg.max_outer_iters + 1):
        outer_done = outer
        out_s = np.empty((T, q))
        out_nu = np.empty((T, q), dtype=np.int64)
        out_cost = np.empty(T)
        if q == 1:
            # Sign-only problem: the optimum is the sign of <L_t, ref>.
            G = np.einsum("trj,rj->t", tilde, ref)
            out_s[:, 0] = np.where(G >= 0.0, 1.0, -1.0)
            out_nu[:, 0] = 0
        else:
            LstarT = np.ascontiguousarray(ref.T)
            a = np.sum(ref * ref, axis=0)
            if cfg.scheme == "exact":
                _kernels.sp_exact_map(tilde, LstarT, a, out_s, out_nu, out_cost)
            elif cfg.scheme == "partial-sa":
                u_flip, u = _sa_proposal_block(cfg.rng_seed, outer, T, B, q, full=False)
                _kernels.sp_partial_sa_map(
                    tilde, LstarT, a, s_cur, nu_cur, u_flip, u,
                    cfg.gamma, cfg.gamma0, cfg.faithful_sa, out_s, out_nu, out_cost,
                )
            else:
                flip, pi, pj, u = _sa_proposal_block(cfg.rng_seed, outer, T, B, q, full=True)
                _kernels.sp_full_sa_map(
                    tilde, LstarT, a, s_cur, nu_cur, flip, pi, pj, u,
                    cfg.gamma, cfg.gamma0, cfg.faithful_sa, out_s, out_nu, out_cost,
                )
        changed = bool(np.any(out_s != s_cur)) or bool(np.any(out_nu != nu_cur))
        s_cur, nu_cur = out_s, out_nu
        _kernels.apply_transforms_kernel(tilde, s_cur, nu_cur, aligned)
        ref = aligned.mean(axis=0)
        psi_new = float(np.sum((aligned - ref) ** 2))
        trace.append(psi_new)
        times.append(time.perf_counter() - start)
        improvement = psi - psi_new
        psi = psi_new
        if improvement < threshold or not changed:
            converged = True
            break
    return s_cur, nu_cur, aligned, ref, np.asarray(trace), converged, outer_done, times


def _run_with_restarts(tilde, cfg):
    T, _, q = tilde.shape
    if cfg.scheme == "exact" and q > 1:
        _check_exact_q(q)
    best = None
    for restart in range(cfg.restarts + 1):
        if restart == 0:
            s0, nu0 = _identity_state(T, q)
        else:
            s0, nu0 = _random_state(T, q, cfg.rng_seed, restart)
        out = _relabel_engine(tilde, cfg, s0, nu0)
        if best is None or out[4][-1] < best[4][-1]:
            best = out
    return best


def _wrap_result(sample, rotations, state):
    s_cur, nu_cur, aligned, ref, trace, converged, outer_iters, _times = state
    T = aligned.shape[0]
    transforms = [
        DrawTransform(
            rotation=np.asarray(rotations[t]),
            sp=SignedPermutation(s_cur[t].astype(np.int64), nu_cur[t]),
        )
        for t in range(T)
    ]
    factors = None
    if sample.factors is not None:
        factors = transform_factors(sample.factors, transforms)
    reordered = LoadingsSample(aligned, factors=factors, variances=sample.variances)
    return RspResult(
        reordered=reordered,
        transforms=transforms,
        reference=ref,
        objective_trace=trace,
        converged=converged,
        outer_iters=outer_iters,
    )


def sp_align(sample, cfg=RspConfig()):
    """Run only the alternating alignment loop (no varimax pre-rotation).

    Rotations in the returned transforms are identity matrices.  Useful when
    the draws are already rotated, e.g. when aligning per-chain references.
    """
    if not isinstance(sample, LoadingsSample):
        sample = LoadingsSample(sample)
    q = sample.q
    state = _run_with_restarts(sample.draws, cfg)
    eye = np.eye(q)
    return _wrap_result(sample, [eye] * sample.n_draws, state)


def rsp_run(sample, cfg=RspConfig(), varimax_cfg=VarimaxConfig()):
    """Varimax-rotate every draw, then align the rotated draws.

    The returned transforms pair each draw's varimax rotation with its final
    signed permutation; ``reordered`` holds the fully transformed draws
    (factors, when present, are transported the same way; per-variable
    variances are unaffected by column relabeling and pass through).
    """
    if not isinstance(sample, LoadingsSample):
        sample = LoadingsSample(sample)
    rotated_sample, rotations = varimax_map(sample, varimax_cfg)
    state = _run_with_restarts(rotated_sample.draws, cfg)
    return _wrap_result(sample, rotations, state)


def transform_factors(factors, transforms):
    """Transport factor draws through per-draw transforms: F_t R_t then relabel."""
    F = np.asarray(factors, dtype=float)
    if F.ndim != 3:
        raise ValueError("factors must be T x n x q")
    if F.shape[0] != len(transforms):
        raise ValueError("need one transform per factor draw")
    out = np.empty_like(F)
    for t, tr in enumerate(transforms):
        rotated = F[t] @ tr.rotation
        out[t] = rotated[:, tr.sp.nu] * tr.sp.s[None, :].astype(float)
    return out
