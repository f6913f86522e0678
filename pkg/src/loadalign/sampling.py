"""Synthetic factor-model data and a conjugate Gibbs sampler.

Model: Y_i = Lambda F_i + eps_i with F_i ~ N(0, I_q) and independent
idiosyncratic noise eps_i ~ N(0, diag(sigma2)).  The sampler alternates the
standard full conditionals:

  F_i | .  ~ N(V Lambda' Sigma^-1 y_i, V),       V = (I + Lambda' Sigma^-1 Lambda)^-1
  row r of Lambda | .  ~ N(A_r^-1 b_r, A_r^-1),  A_r = F'F / sigma2_r + L0 I,
                                                 b_r = F' y_(r) / sigma2_r + L0 l0 1
  sigma2_r | .  ~ InvGamma((a0 + n)/2, (b0 + ssr_r)/2)

Loadings are left fully unconstrained -- the point of the downstream
relabeling machinery.  An optional echelon constraint (zeroing loadings above
the diagonal) is provided only to demonstrate that it still leaves sign
switching, not as a supported inference path.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import LoadingsSample


def ledermann_bound(p):
    """Largest generically identifiable factor count: (2p+1-sqrt(8p+1))/2."""
    return (2 * p + 1 - math.sqrt(8 * p + 1)) / 2


def parse_blocks(spec, p):
    """Parse "1-4,5-8" into a per-variable factor index map (-1 = no factor).

    Each comma-separated group is one factor's variable range, 1-based and
    inclusive; a single number is a one-variable block.  Ranges must stay in
    1..p and may not overlap.
    """
    block_map = np.full(p, -1, dtype=np.int64)
    if not spec:
        raise ValueError("empty block specification")
    for j, group in enumerate(spec.split(",")):
        group = group.strip()
        if "-" in group:
            lo_s, hi_s = group.split("-", 1)
            lo, hi = int(lo_s), int(hi_s)
        else:
            lo = hi = int(group)
        if not 1 <= lo <= hi <= p:
            raise ValueError(f"block {group!r} out of range for p={p}")
        if np.any(block_map[lo - 1 : hi] >= 0):
            raise ValueError(f"block {group!r} overlaps an earlier block")
        block_map[lo - 1 : hi] = j
    return block_map


def default_block_map(p, q_true):
    """Contiguous equal blocks, first variables first (remainder to early factors)."""
    sizes = np.full(q_true, p // q_true, dtype=np.int64)
    sizes[: p % q_true] += 1
    return np.repeat(np.arange(q_true, dtype=np.int64), sizes)


@dataclass(frozen=True)
class FaScenario:
    """A synthetic-data scenario: block-structured true loadings plus noise."""

    n: int
    p: int
    q_true: int
    block_map: np.ndarray | None = None
    loading_scale: float = 0.8
    sigma2: float | np.ndarray = 0.36
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if self.q_true < 1:
            raise ValueError("q_true must be >= 1")
        if self.q_true >= ledermann_bound(self.p):
            raise ValueError(
                f"q_true={self.q_true} is not below the identifiability bound "
                f"{ledermann_bound(self.p):.3f} for p={self.p}"
            )
        bm = self.block_map
        if bm is None:
            bm = default_block_map(self.p, self.q_true)
        bm = np.asarray(bm, dtype=np.int64)
        if bm.shape != (self.p,):
            raise ValueError("block_map must have one entry per variable")
        if bm.max(initial=-1) >= self.q_true or bm.min(initial=0) < -1:
            raise ValueError("block_map entries must be -1 or valid factor indices")
        object.__setattr__(self, "block_map", bm)
        s2 = np.asarray(self.sigma2, dtype=float)
        if s2.ndim == 0:
            s2 = np.full(self.p, float(s2))
        if s2.shape != (self.p,) or np.any(s2 <= 0):
            raise ValueError("sigma2 must be positive (scalar or length p)")
        object.__setattr__(self, "sigma2", s2)


def generate_synthetic(scn):
    """Draw (data, true loadings, true factors) from the scenario.

    Nonzero true loadings sit at ``loading_scale`` plus U(-0.05, 0.05) jitter;
    everything off-block is exactly zero.  Draw order (jitter, factors, noise)
    is fixed so a seed pins the whole dataset.
    """
    rng = np.random.default_rng(scn.seed)
    truth = np.zeros((scn.p, scn.q_true))
    on = scn.block_map >= 0
    truth[on, scn.block_map[on]] = scn.loading_scale + rng.uniform(
        -0.05, 0.05, size=int(on.sum())
    )
    F = rng.standard_normal((scn.n, scn.q_true))
    eps = rng.standard_normal((scn.n, scn.p)) * np.sqrt(scn.sigma2)[None, :]
    Y = F @ truth.T + eps
    return Y, truth, F


@dataclass(frozen=True)
class FaPriors:
    """Loading rows ~ N(l0, L0^-1 I) (L0=0 improper flat); sigma2 ~ IG(a0/2, b0/2)."""

    l0: float = 0.0
    L0: float = 0.0
    a0: float = 0.001
    b0: float = 0.001

    def __post_init__(self):
        if self.L0 < 0:
            raise ValueError("L0 must be >= 0")
        if self.a0 <= 0 or self.b0 <= 0:
            raise ValueError("a0 and b0 must be positive")


@dataclass(frozen=True)
class GibbsConfig:
    iters: int = 2000
    burnin: int = 1000
    thin: int = 1
    seed: int = 0
    center_data: bool = True

    def __post_init__(self):
        if not self.iters > self.burnin >= 0:
            raise ValueError("need iters > burnin >= 0")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")


def standardize(Y):
    """Column-wise zero mean, unit (population) variance."""
    Y = np.asarray(Y, dtype=float)
    sd = Y.std(axis=0)
    if np.any(sd == 0):
        raise ValueError("constant data column; cannot standardize")
    return (Y - Y.mean(axis=0)) / sd


def gibbs_sample(Y, q, priors=FaPriors(), cfg=GibbsConfig(), lower_triangular=False):
    """Posterior loading draws (with factors and variances) for a q-factor model.

    Returns ``floor((iters - burnin) / thin)`` retained draws.  With the
    improper L0=0 prior the loading conditional needs n > q observations.
    ``lower_triangular=True`` zeroes loadings above the diagonal (an echelon
    identification attempt kept for demonstration; sign switching remains).
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ValueError("Y must be an n x p data matrix")
    if not np.all(np.isfinite(Y)):
        raise ValueError("data contain non-finite entries")
    n, p = Y.shape
    if q < 1:
        raise ValueError("q must be >= 1")
    if q >= p:
        raise ValueError(f"q={q} must be smaller than p={p}")
    if priors.L0 == 0 and n <= q:
        raise ValueError("improper loading prior (L0=0) requires n > q")

    X = standardize(Y) if cfg.center_data else Y.copy()
    rng = np.random.default_rng(cfg.seed)

    lam = np.zeros((p, q))
    sigma2 = np.ones(p)
    eye_q = np.eye(q)
    kept = (cfg.iters - cfg.burnin) // cfg.thin
    draws = np.empty((kept, p, q))
    factors = np.empty((kept, n, q))
    variances = np.empty((kept, p))

    k = 0
    for it in range(1, cfg.iters + 1):
        # F | lam, sigma2
        lam_w = lam / sigma2[:, None]  # Sigma^-1 Lambda
        V = np.linalg.inv(eye_q + lam.T @ lam_w)
        mean_F = X @ lam_w @ V
        F = mean_F + rng.standard_normal((n, q)) @ np.linalg.cholesky(V).T

        # Lambda | F, sigma2, row-wise
        if lower_triangular:
            lam = np.zeros((p, q))
            for r in range(p):
                kr = min(r + 1, q)
                Fk = F[:, :kr]
                A_r = Fk.T @ Fk / sigma2[r] + priors.L0 * np.eye(kr)
                b_r = Fk.T @ X[:, r] / sigma2[r] + priors.L0 * priors.l0
                L_r = np.linalg.cholesky(A_r)
                m_r = np.linalg.solve(A_r, b_r)
                lam[r, :kr] = m_r + np.linalg.solve(
                    L_r.T, rng.standard_normal(kr)
                )
        else:
            G = F.T @ F
            A = G[None, :, :] / sigma2[:, None, None] + priors.L0 * eye_q[None, :, :]
            b = (F.T @ X).T / sigma2[:, None] + priors.L0 * priors.l0
            mean_L = np.linalg.solve(A, b[:, :, None])[:, :, 0]
            Lchol = np.linalg.cholesky(A)
            noise = np.linalg.solve(
                np.transpose(Lchol, (0, 2, 1)),
                rng.standard_normal((p, q))[:, :, None],
            )[:, :, 0]
            lam = mean_L + noise

        # sigma2 | lam, F
        resid = X - F @ lam.T
        ssr = np.sum(resid * resid, axis=0)
        shape = (priors.a0 + n) / 2.0
        rate = (priors.b0 + ssr) / 2.0
        sigma2 = rate / rng.standard_gamma(shape, size=p)

        if it > cfg.burnin and (it - cfg.burnin) % cfg.thin == 0:
            draws[k] = lam
            factors[k] = F
            variances[k] = sigma2
            k += 1

    assert k == kept
    return LoadingsSample(draws, factors=factors, variances=variances)
