"""Hot numeric kernels: assignment solver, varimax sweeps, SP-step search.

Every function here is plain Python over numpy arrays with explicit loops,
compiled with ``@njit`` when numba is active (see _backend).  The map-style
drivers parallelize over draws with ``prange``; each loop iteration writes
only to its own output slice, so results are bitwise identical for any
thread count.

Conventions used throughout (see core module):
  * a transform is (s, nu) acting as  out[:, j] = s[j] * L[:, nu[j]]
  * its cost against a reference Lstar decomposes as
        cost = sum(a) + sum(b) - 2 * sum_j s[j] * G[j, nu[j]]
    with G = Lstar.T @ L, a[i] = ||Lstar[:, i]||^2, b[j] = ||L[:, j]||^2.
"""

import numpy as np

from ._backend import njit, prange


# ---------------------------------------------------------------------------
# linear assignment (shortest augmenting path, O(q^3))
# ---------------------------------------------------------------------------

@njit(cache=True)
def lap_solve(C):
    """Minimum-cost bijection rows -> columns of a square cost matrix.

    Returns (row_to_col, total_cost).  Deterministic: ties are resolved by
    the fixed scan order of the augmenting-path search.
    """
    n = C.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    # p[j] = row currently assigned to column j; n acts as "free" marker and
    # column n as the virtual start of each augmenting path.
    p = np.full(n + 1, n, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        p[n] = i
        j0 = n
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=np.bool_)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = -1
            for j in range(n):
                if not used[j]:
                    cur = C[i0, j] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == n:
                break
        while j0 != n:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=np.int64)
    total = 0.0
    for j in range(n):
        row_to_col[p[j]] = j
        total += C[p[j], j]
    return row_to_col, total


# ---------------------------------------------------------------------------
# varimax pairwise sweeps
# ---------------------------------------------------------------------------

@njit(cache=True)
def varimax_objective_kernel(L):
    p, q = L.shape
    total = 0.0
    for j in range(q):
        s2 = 0.0
        s4 = 0.0
        for r in range(p):
            x2 = L[r, j] * L[r, j]
            s2 += x2
            s4 += x2 * x2
        total += s4 - s2 * s2 / p
    return 0.25 * total


@njit(cache=True)
def varimax_sweeps(L, eps, max_sweeps):
    """Kaiser pairwise rotations maximizing the varimax criterion.

    Rotates each column pair by the closed-form optimal planar angle; a full
    sweep visits all q(q-1)/2 pairs.  Stops when a sweep improves the
    criterion by less than ``eps`` relative.  Returns (rotated, R, sweeps)
    with rotated = L @ R.
    """
    p, q = L.shape
    A = L.copy()
    R = np.eye(q)
    if q < 2:
        return A, R, 0
    prev = varimax_objective_kernel(A)
    sweeps = 0
    for _ in range(max_sweeps):
        sweeps += 1
        for j in range(q - 1):
            for k in range(j + 1, q):
                Au = 0.0
                Bv = 0.0
                Cc = 0.0
                Dd = 0.0
                for r in range(p):
                    x = A[r, j]
                    y = A[r, k]
                    ur = x * x - y * y
                    vr = 2.0 * x * y
                    Au += ur
                    Bv += vr
                    Cc += ur * ur - vr * vr
                    Dd += 2.0 * ur * vr
                num = Dd - 2.0 * Au * Bv / p
                den = Cc - (Au * Au - Bv * Bv) / p
                phi = 0.25 * np.arctan2(num, den)
                if phi == 0.0:  # degenerate pair (e.g. zero columns): leave as-is
                    continue
                c = np.cos(phi)
                s = np.sin(phi)
                for r in range(p):
                    x = A[r, j]
                    y = A[r, k]
                    A[r, j] = c * x + s * y
                    A[r, k] = -s * x + c * y
                for r in range(q):
                    x = R[r, j]
                    y = R[r, k]
                    R[r, j] = c * x + s * y
                    R[r, k] = -s * x + c * y
        cur = varimax_objective_kernel(A)
        if cur - prev < eps * max(prev, 1e-30):
            break
        prev = cur
    return A, R, sweeps


@njit(parallel=True, cache=True)
def varimax_map_kernel(draws, eps, max_sweeps, out_rot, out_R, out_sweeps):
    T = draws.shape[0]
    for t in prange(T):
        rot, R, sw = varimax_sweeps(draws[t], eps, max_sweeps)
        out_rot[t] = rot
        out_R[t] = R
        out_sweeps[t] = sw


# ---------------------------------------------------------------------------
# SP step: exact scheme
# ---------------------------------------------------------------------------

@njit(cache=True)
def sp_exact_kernel(G, a, b):
    """Global minimizer over all 2^q sign vectors x q! permutations.

    Enumerates data-column sign vectors; for each, the optimal permutation
    is an assignment problem.  Returns (s, nu, cost) with s indexed by
    output position (s[j] pairs with source column nu[j]).
    """
    q = G.shape[0]
    C = np.empty((q, q))
    best_cost = np.inf
    best_perm = np.empty(q, dtype=np.int64)
    best_sd = np.empty(q)
    for m in range(1 << q):
        for j in range(q):
            sd_j = -1.0 if (m >> j) & 1 else 1.0
            for i in range(q):
                C[i, j] = a[i] + b[j] - 2.0 * sd_j * G[i, j]
        perm, total = lap_solve(C)
        if total < best_cost:
            best_cost = total
            best_perm[:] = perm
            for j in range(q):
                best_sd[j] = -1.0 if (m >> j) & 1 else 1.0
    s = np.empty(q)
    for i in range(q):
        s[i] = best_sd[best_perm[i]]
    return s, best_perm, best_cost


@njit(parallel=True, cache=True)
def sp_exact_map(tilde, LstarT, a, out_s, out_nu, out_cost):
    T = tilde.shape[0]
    for t in prange(T):
        Lt = tilde[t]
        G = LstarT @ Lt
        b = np.sum(Lt * Lt, axis=0)
        s, nu, cost = sp_exact_kernel(G, a, b)
        out_s[t] = s
        out_nu[t] = nu
        out_cost[t] = cost


# ---------------------------------------------------------------------------
# SP step: simulated annealing schemes
# ---------------------------------------------------------------------------

@njit(cache=True)
def _state_cost(G, suma, sumb, s, nu):
    q = s.shape[0]
    acc = 0.0
    for j in range(q):
        acc += s[j] * G[j, nu[j]]
    return suma + sumb - 2.0 * acc


@njit(cache=True)
def sp_partial_sa_kernel(G, a, b, s0, nu0, u_flip, u_acc, gamma, gamma0):
    """Partial SA: flip one sign, then solve the assignment problem for nu.

    The position to flip is drawn with probability proportional to that
    position's share of the current cost, plus a small uniform floor so
    every index stays reachable.  Misaligned positions therefore attract
    nearly all proposals, while a chain sitting at a good state proposes
    close to uniformly.  The proposal signs are position-indexed, so the
    cost matrix row i uses s*[i]; the assignment solution is already in
    (s, nu) form.
    """
    q = G.shape[0]
    suma = np.sum(a)
    sumb = np.sum(b)
    s = s0.copy()
    nu = nu0.copy()
    cost = _state_cost(G, suma, sumb, s, nu)
    terms = np.empty(q)
    for j in range(q):
        terms[j] = a[j] + b[nu[j]] - 2.0 * s[j] * G[j, nu[j]]
    C = np.empty((q, q))
    B = u_flip.shape[0]
    for loop in range(B):
        temp = gamma / np.log((loop + 1) + gamma0)
        floor = 0.05 * max(cost, 1e-12) / q
        wsum = 0.0
        for j in range(q):
            wsum += max(terms[j], 0.0) + floor
        target = u_flip[loop] * wsum
        idx = q - 1
        acc = 0.0
        for j in range(q):
            acc += max(terms[j], 0.0) + floor
            if target < acc:
                idx = j
                break
        s_star = s.copy()
        s_star[idx] = -s_star[idx]
        for i in range(q):
            for j in range(q):
                C[i, j] = a[i] + b[j] - 2.0 * s_star[i] * G[i, j]
        nu_star, cost_star = lap_solve(C)
        if cost_star <= cost or u_acc[loop] < np.exp(-(cost_star - cost) / temp):
            s = s_star
            nu = nu_star
            cost = cost_star
            for j in range(q):
                terms[j] = a[j] + b[nu[j]] - 2.0 * s[j] * G[j, nu[j]]
    return s, nu, cost


@njit(cache=True)
def sp_full_sa_kernel(G, a, b, s0, nu0, flip_idx, pair_i, pair_j, u_acc, gamma, gamma0):
    """Full SA: flip one sign and swap one randomly chosen pair of nu entries.

    The pair indices are drawn with replacement, so a coincident pair
    degenerates to a pure sign-flip proposal.  Without those moves the
    walk would change the permutation's parity on every step and could
    never fix a lone sign error at small q.
    """
    q = G.shape[0]
    suma = np.sum(a)
    sumb = np.sum(b)
    s = s0.copy()
    nu = nu0.copy()
    cost = _state_cost(G, suma, sumb, s, nu)
    B = flip_idx.shape[0]
    for loop in range(B):
        temp = gamma / np.log((loop + 1) + gamma0)
        s_star = s.copy()
        s_star[flip_idx[loop]] = -s_star[flip_idx[loop]]
        nu_star = nu.copy()
        pi = pair_i[loop]
        pj = pair_j[loop]
        tmp = nu_star[pi]
        nu_star[pi] = nu_star[pj]
        nu_star[pj] = tmp
        cost_star = _state_cost(G, suma, sumb, s_star, nu_star)
        if cost_star <= cost or u_acc[loop] < np.exp(-(cost_star - cost) / temp):
            s = s_star
            nu = nu_star
            cost = cost_star
    return s, nu, cost


@njit(parallel=True, cache=True)
def sp_partial_sa_map(tilde, LstarT, a, s_cur, nu_cur, u_flip, u_acc,
                      gamma, gamma0, faithful, out_s, out_nu, out_cost):
    T = tilde.shape[0]
    for t in prange(T):
        Lt = tilde[t]
        G = LstarT @ Lt
        b = np.sum(Lt * Lt, axis=0)
        s, nu, cost = sp_partial_sa_kernel(
            G, a, b, s_cur[t], nu_cur[t], u_flip[t], u_acc[t], gamma, gamma0)
        if not faithful:
            inc = _state_cost(G, np.sum(a), np.sum(b), s_cur[t], nu_cur[t])
            if cost > inc:  # commit guard: keep the incumbent
                s = s_cur[t].copy()
                nu = nu_cur[t].copy()
                cost = inc
        out_s[t] = s
        out_nu[t] = nu
        out_cost[t] = cost


@njit(parallel=True, cache=True)
def sp_full_sa_map(tilde, LstarT, a, s_cur, nu_cur, flip_idx, pair_i, pair_j, u_acc,
                   gamma, gamma0, faithful, out_s, out_nu, out_cost):
    T = tilde.shape[0]
    for t in prange(T):
        Lt = tilde[t]
        G = LstarT @ Lt
        b = np.sum(Lt * Lt, axis=0)
        s, nu, cost = sp_full_sa_kernel(
            G, a, b, s_cur[t], nu_cur[t], flip_idx[t], pair_i[t], pair_j[t],
            u_acc[t], gamma, gamma0)
        if not faithful:
            inc = _state_cost(G, np.sum(a), np.sum(b), s_cur[t], nu_cur[t])
            if cost > inc:
                s = s_cur[t].copy()
                nu = nu_cur[t].copy()
                cost = inc
        out_s[t] = s
        out_nu[t] = nu
        out_cost[t] = cost


@njit(parallel=True, cache=True)
def apply_transforms_kernel(tilde, s_all, nu_all, out):
    """out[t, :, j] = s_all[t, j] * tilde[t, :, nu_all[t, j]] for every draw."""
    T, p, q = tilde.shape
    for t in prange(T):
        for j in range(q):
            src = nu_all[t, j]
            sj = s_all[t, j]
            for r in range(p):
                out[t, r, j] = sj * tilde[t, r, src]
