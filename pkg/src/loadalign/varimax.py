"""Varimax rotation of loading matrices by Kaiser pairwise planar sweeps.

The criterion maximized is the sum over columns of the variance of squared
loadings,

    (1/4) * sum_j [ sum_r L[r,j]^4 - (1/p) (sum_r L[r,j]^2)^2 ],

evaluated on raw rows by default; ``normalize=True`` divides each row by its
norm before the sweeps and rescales afterwards (classic Kaiser
normalization).  The output is canonical only up to a signed column
permutation -- resolving that residual ambiguity is the relabeling engine's
job, not this module's.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import varimax_map_kernel, varimax_objective_kernel, varimax_sweeps
from .core import LoadingsSample, _as_matrix


@dataclass(frozen=True)
class VarimaxConfig:
    eps: float = 1e-5
    max_sweeps: int = 1000
    normalize: bool = False

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")


@dataclass(frozen=True)
class VarimaxResult:
    rotated: np.ndarray
    rotation: np.ndarray
    objective: float
    sweeps: int


def varimax_objective(L):
    """The varimax criterion of a single loading matrix."""
    return float(varimax_objective_kernel(_as_matrix(L)))


def varimax_rotate(L, cfg=VarimaxConfig()):
    """Rotate one p x q matrix to (a local maximum of) simple structure.

    Returns rotated = L @ rotation with rotation orthogonal.  q = 1 has no
    rotational freedom and returns the input unchanged.
    """
    A = _as_matrix(L)
    p, q = A.shape
    if p < 2:
        raise ValueError("need at least two rows to rotate")
    if q == 1:
        return VarimaxResult(A.copy(), np.eye(1), varimax_objective(A), 0)
    if cfg.normalize:
        norms = np.sqrt(np.sum(A * A, axis=1))
        scale = np.where(norms > 0, norms, 1.0)
        _, R, sweeps = varimax_sweeps(np.ascontiguousarray(A / scale[:, None]),
                                      cfg.eps, cfg.max_sweeps)
        rotated = A @ R
    else:
        rotated, R, sweeps = varimax_sweeps(A, cfg.eps, cfg.max_sweeps)
    return VarimaxResult(rotated, R, float(varimax_objective_kernel(rotated)), int(sweeps))


def varimax_map(sample, cfg=VarimaxConfig()):
    """Rotate every draw of a sample independently.

    Returns (rotated LoadingsSample, list of per-draw rotation matrices).
    Draws are processed in parallel; results do not depend on thread count.
    """
    if not isinstance(sample, LoadingsSample):
        sample = LoadingsSample(np.asarray(sample))
    draws = sample.draws
    T, p, q = draws.shape
    if p < 2:
        raise ValueError("need at least two rows to rotate")
    if q == 1 or cfg.normalize:
        # normalize path reuses the single-matrix wrapper (rescale logic)
        results = [varimax_rotate(draws[t], cfg) for t in range(T)]
        rotated = np.stack([r.rotated for r in results])
        rotations = [r.rotation for r in results]
    else:
        rotated = np.empty_like(draws)
        rotations_arr = np.empty((T, q, q))
        sweeps = np.empty(T, dtype=np.int64)
        varimax_map_kernel(draws, cfg.eps, cfg.max_sweeps, rotated, rotations_arr, sweeps)
        rotations = list(rotations_arr)
    out = LoadingsSample(rotated, factors=sample.factors, variances=sample.variances)
    return out, rotations
