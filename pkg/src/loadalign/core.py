"""Core containers and the signed-permutation action on loading matrices.

A signed permutation is a sign vector ``s`` in {-1,+1}^q together with a
permutation ``nu`` of ``0..q-1`` (0-based throughout the Python API; the CLI
serializes permutations 1-based).  Applied to a p x q matrix ``L`` it
produces the matrix whose column ``j`` is ``s[j] * L[:, nu[j]]`` -- i.e. the
transform *pulls* source column ``nu[j]``, sign-flipped, into slot ``j``.
This is the indexing the relabeling cost function uses, and it is pinned by
the worked 3x2 example in the test suite.

The matrix ``Q = diag(s) @ P(nu)`` (one nonzero ``s[i]`` per row ``i`` at
column ``nu[i]``) is the conventional matrix form of the same object; note
that with the pull convention above ``apply_signed_permutation(L, sp)``
equals ``L @ Q.T``, not ``L @ Q``.
"""

from dataclasses import dataclass, field

import numpy as np


def _as_matrix(L, name="L"):
    A = np.asarray(L, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def _check_permutation(nu):
    nu = np.asarray(nu, dtype=np.int64)
    q = nu.shape[0]
    if nu.ndim != 1 or q == 0:
        raise ValueError("permutation must be a non-empty 1-D index vector")
    seen = np.zeros(q, dtype=bool)
    for v in nu:
        if v < 0 or v >= q or seen[v]:
            raise ValueError(f"invalid permutation {nu.tolist()}")
        seen[v] = True
    return nu


@dataclass(frozen=True)
class SignedPermutation:
    """Sign vector plus column permutation; immutable value object."""

    s: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.int64)
        nu = _check_permutation(self.nu)
        if s.shape != nu.shape:
            raise ValueError("s and nu must have the same length")
        if not np.all(np.abs(s) == 1):
            raise ValueError("sign entries must be +1 or -1")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "nu", nu)

    @property
    def q(self):
        return self.s.shape[0]

    @classmethod
    def identity(cls, q):
        return cls(np.ones(q, dtype=np.int64), np.arange(q, dtype=np.int64))

    def is_identity(self):
        return bool(np.all(self.s == 1) and np.all(self.nu == np.arange(self.q)))

    def __eq__(self, other):
        if not isinstance(other, SignedPermutation):
            return NotImplemented
        return np.array_equal(self.s, other.s) and np.array_equal(self.nu, other.nu)

    def __hash__(self):
        return hash((self.s.tobytes(), self.nu.tobytes()))


def permutation_to_matrix(nu):
    """Return P with ``P[i, nu[i]] = 1`` and zeros elsewhere."""
    nu = _check_permutation(nu)
    q = nu.shape[0]
    P = np.zeros((q, q))
    P[np.arange(q), nu] = 1.0
    return P


def signed_permutation_to_matrix(sp):
    """Return ``Q = diag(s) @ P(nu)`` -- one nonzero (+-1) per row and column."""
    Q = permutation_to_matrix(sp.nu)
    Q *= sp.s[:, None]
    return Q


def apply_signed_permutation(L, sp):
    """Reorder/flip the columns of ``L``: output column j is ``s[j] * L[:, nu[j]]``.

    Equivalent to ``L @ signed_permutation_to_matrix(sp).T``, evaluated as a
    gather so the result is entry-exact (no floating-point products).
    """
    A = _as_matrix(L)
    if A.shape[1] != sp.q:
        raise ValueError(f"column count {A.shape[1]} does not match sp of size {sp.q}")
    return A[:, sp.nu] * sp.s[None, :].astype(float)


def invert(sp):
    """The group inverse: matrix form satisfies ``Q(inv) = Q(sp).T``."""
    q = sp.q
    nu_inv = np.empty(q, dtype=np.int64)
    nu_inv[sp.nu] = np.arange(q)
    s_inv = sp.s[nu_inv]
    return SignedPermutation(s_inv, nu_inv)


def compose(sp1, sp2):
    """The signed permutation whose matrix is ``Q(sp1) @ Q(sp2)``.

    Note the action convention: ``apply(apply(L, a), b) == apply(L, compose(b, a))``.
    """
    if sp1.q != sp2.q:
        raise ValueError("size mismatch")
    nu = sp2.nu[sp1.nu]
    s = sp1.s * sp2.s[sp1.nu]
    return SignedPermutation(s, nu)


def frobenius_sq_distance(A, B):
    """Sum of squared entrywise differences; zero iff the matrices are equal."""
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    d = A - B
    return float(np.sum(d * d))


@dataclass
class LoadingsSample:
    """A sequence of T loading-matrix draws stored as one T x p x q tensor.

    ``factors`` (T x n x q) and ``variances`` (T x p) are optional companions
    produced by the bundled sampler.
    """

    draws: np.ndarray
    factors: np.ndarray | None = None
    variances: np.ndarray | None = None

    def __post_init__(self):
        draws = np.ascontiguousarray(np.asarray(self.draws, dtype=float))
        if draws.ndim == 2:
            draws = draws[None, :, :]
        if draws.ndim != 3 or draws.shape[0] < 1:
            raise ValueError("draws must be a T x p x q array with T >= 1")
        if not np.all(np.isfinite(draws)):
            raise ValueError("draws contain non-finite entries")
        self.draws = draws
        if self.factors is not None:
            F = np.ascontiguousarray(np.asarray(self.factors, dtype=float))
            if F.ndim != 3 or F.shape[0] != draws.shape[0] or F.shape[2] != draws.shape[2]:
                raise ValueError("factors must be T x n x q matching the draws")
            self.factors = F
        if self.variances is not None:
            V = np.asarray(self.variances, dtype=float)
            if V.shape != (draws.shape[0], draws.shape[1]):
                raise ValueError("variances must be T x p")
            if np.any(V <= 0):
                raise ValueError("variances must be strictly positive")
            self.variances = V

    @property
    def n_draws(self):
        return self.draws.shape[0]

    @property
    def p(self):
        return self.draws.shape[1]

    @property
    def q(self):
        return self.draws.shape[2]

    def __len__(self):
        return self.n_draws
