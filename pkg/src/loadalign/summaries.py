"""Posterior summaries over aligned loading draws.

Provides per-entry means/sds, highest-posterior-density intervals, Besag-style
simultaneous credible bands built from joint rank order statistics, and the
effective-column count q_hat (fitted columns minus columns whose simultaneous
bands all contain zero -- an overfitting diagnostic).
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import LoadingsSample

DEFAULT_LEVEL = 0.99


@dataclass(frozen=True)
class CredibleSummary:
    mean: np.ndarray
    sd: np.ndarray
    hpd_lo: np.ndarray
    hpd_hi: np.ndarray
    scr_lo: np.ndarray
    scr_hi: np.ndarray
    level: float
    redundant_columns: frozenset
    q_hat: int


class ScrResult(NamedTuple):
    """Per-scalar simultaneous bands plus the audit fields of the construction."""

    lo: np.ndarray
    hi: np.ndarray
    t_star: int
    coverage: int


def hpd_interval(x, level):
    """Shortest window of consecutive sorted draws holding ``level`` mass.

    The window spans ``floor(level*T) + 1`` order statistics (capped at T),
    so its empirical mass is at least ``level``; ties in width are broken by
    the lowest start index.  Input order does not matter.
    """
    x = np.sort(np.asarray(x, dtype=float).ravel())
    T = x.shape[0]
    if T == 0:
        raise ValueError("empty draw vector")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    m = min(int(np.floor(level * T)) + 1, T)
    widths = x[m - 1:] - x[: T - m + 1]
    start = int(np.argmin(widths))  # argmin takes the first minimum
    return float(x[start]), float(x[start + m - 1])


def simultaneous_credible_region(sample, level=DEFAULT_LEVEL):
    """Simultaneous bands over ``m`` scalars from a T x m draw matrix.

    Bands are the order statistics of rank ``t_star`` from each end, where
    ``t_star`` is the largest rank such that at least ``ceil(level*T)`` draws
    fall inside every scalar's band simultaneously.  Returns the bands plus
    ``t_star`` and the recounted joint coverage for audit.
    """
    X = np.asarray(sample, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("sample must be a T x m matrix")
    T, m = X.shape
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if T < 2.0 / level:
        raise ValueError(f"too few draws (T={T}) for level {level}")

    S = np.sort(X, axis=0)
    # For draw value v in scalar u: v is inside the rank-t band iff
    # t <= min(#draws <= v, #draws >= v).  The joint depth of a draw is the
    # minimum over scalars; the rank t* is then the n_req-th largest depth.
    depth = np.empty((T, m), dtype=np.int64)
    for u in range(m):
        col = S[:, u]
        le = np.searchsorted(col, X[:, u], side="right")
        ge = T - np.searchsorted(col, X[:, u], side="left")
        depth[:, u] = np.minimum(le, ge)
    joint = depth.min(axis=1)

    n_req = int(np.ceil(level * T))
    order = np.sort(joint)[::-1]
    t_star = int(order[n_req - 1])
    t_star = max(1, min(t_star, (T + 1) // 2))
    coverage = int(np.count_nonzero(joint >= t_star))
    lo = S[t_star - 1, :]
    hi = S[T - t_star, :]
    return ScrResult(lo=lo, hi=hi, t_star=t_star, coverage=coverage)


def effective_columns(scr_lo, scr_hi, zero_rule="all"):
    """Redundant columns and the effective column count.

    A column is redundant when its simultaneous bands contain zero -- all of
    them under the default rule, at least one under ``zero_rule="any"`` (a
    stricter diagnostic, not used by the pipeline).
    """
    lo = np.asarray(scr_lo, dtype=float)
    hi = np.asarray(scr_hi, dtype=float)
    if lo.shape != hi.shape or lo.ndim != 2:
        raise ValueError("bands must be two p x q matrices")
    if zero_rule not in ("all", "any"):
        raise ValueError("zero_rule must be 'all' or 'any'")
    contains0 = (lo <= 0.0) & (hi >= 0.0)
    if zero_rule == "all":
        flags = contains0.all(axis=0)
    else:
        flags = contains0.any(axis=0)
    redundant = frozenset(int(j) for j in np.nonzero(flags)[0])
    return redundant, lo.shape[1] - len(redundant)


def _extract_draws(result):
    if hasattr(result, "reordered"):
        return result.reordered.draws
    if isinstance(result, LoadingsSample):
        return result.draws
    draws = np.asarray(result, dtype=float)
    if draws.ndim == 2:
        draws = draws[None]
    return draws


def summarize(result, level=DEFAULT_LEVEL):
    """Assemble all per-entry summaries for an alignment result or raw sample.

    The simultaneous bands treat the p x q entries as one joint family of
    p*q scalars.
    """
    draws = _extract_draws(result)
    T, p, q = draws.shape
    mean = draws.mean(axis=0)
    sd = draws.std(axis=0, ddof=1) if T > 1 else np.zeros((p, q))

    hpd_lo = np.empty((p, q))
    hpd_hi = np.empty((p, q))
    for r in range(p):
        for j in range(q):
            hpd_lo[r, j], hpd_hi[r, j] = hpd_interval(draws[:, r, j], level)

    flat = draws.reshape(T, p * q)
    scr = simultaneous_credible_region(flat, level)
    scr_lo = scr.lo.reshape(p, q)
    scr_hi = scr.hi.reshape(p, q)
    redundant, q_hat = effective_columns(scr_lo, scr_hi)
    return CredibleSummary(
        mean=mean,
        sd=sd,
        hpd_lo=hpd_lo,
        hpd_hi=hpd_hi,
        scr_lo=scr_lo,
        scr_hi=scr_hi,
        level=level,
        redundant_columns=redundant,
        q_hat=q_hat,
    )
