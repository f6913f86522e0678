"""Independent reference implementations the tests check the package against.

Everything here is deliberately brute-force: group enumeration instead of
assignment solves, angle grids instead of closed forms.  Keep these free of
any imports from the package internals beyond the public containers.
"""

from itertools import permutations, product

import numpy as np

from loadalign import SignedPermutation, apply_signed_permutation


def all_signed_permutations(q):
    """Every (s, nu) in the full group of size 2^q * q!, as a reusable list."""
    return [
        SignedPermutation(np.array(s), np.array(nu))
        for nu in permutations(range(q))
        for s in product((1, -1), repeat=q)
    ]


def brute_force_sp(Lt, Lstar):
    """Exhaustive minimizer of ||apply(Lt, sp) - Lstar||_F^2."""
    best, best_cost = None, np.inf
    for sp in all_signed_permutations(Lt.shape[1]):
        diff = apply_signed_permutation(Lt, sp) - Lstar
        cost = float(np.sum(diff * diff))
        if cost < best_cost:
            best, best_cost = sp, cost
    return best, best_cost


def brute_force_assignment(C):
    """Exhaustive minimum-cost bijection."""
    n = C.shape[0]
    best, best_cost = None, np.inf
    for perm in permutations(range(n)):
        cost = sum(C[i, perm[i]] for i in range(n))
        if cost < best_cost:
            best, best_cost = perm, cost
    return np.array(best), float(best_cost)


def rotation_grid_2d(n_angles=3600):
    """All 2x2 rotations and reflections on an angle grid."""
    mats = []
    for theta in np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False):
        c, s = np.cos(theta), np.sin(theta)
        mats.append(np.array([[c, -s], [s, c]]))
        mats.append(np.array([[c, s], [s, -c]]))  # reflection
    return mats
