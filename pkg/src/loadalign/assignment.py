"""Linear assignment: minimum-cost bijection between row and column indices.

Solved with a shortest-augmenting-path method (Hungarian family, O(q^3)).
When several assignments attain the optimum, ``solve_assignment`` returns
the lexicographically smallest row -> column mapping so downstream
reorderings are reproducible.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import lap_solve

# A cost matrix is any square, finite, real ndarray; alias for signatures.
CostMatrix = np.ndarray


@dataclass(frozen=True)
class AssignmentSolution:
    assignment: np.ndarray  # assignment[i] = column given to row i
    total_cost: float


def solve_assignment(C):
    """Solve the q x q assignment problem to global optimality.

    Returns the lexicographically smallest optimal mapping: for each row in
    order, the smallest column that can still be completed to an optimal
    assignment (checked by re-solving the remaining subproblem).
    """
    C = np.ascontiguousarray(np.asarray(C, dtype=float))
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] == 0:
        raise ValueError(f"cost matrix must be square and non-empty, got {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix contains non-finite entries")
    n = C.shape[0]
    _, best_total = lap_solve(C)
    tol = 1e-9 * max(1.0, abs(best_total))

    avail = list(range(n))
    chosen = np.empty(n, dtype=np.int64)
    prefix = 0.0
    for i in range(n):
        for j in avail:
            rest_rows = np.arange(i + 1, n)
            rest_cols = np.array([c for c in avail if c != j], dtype=np.int64)
            if rest_rows.size:
                sub = np.ascontiguousarray(C[np.ix_(rest_rows, rest_cols)])
                _, rest = lap_solve(sub)
            else:
                rest = 0.0
            if prefix + C[i, j] + rest <= best_total + tol:
                chosen[i] = j
                prefix += C[i, j]
                avail.remove(j)
                break
        else:  # pragma: no cover - the incumbent column always qualifies
            raise RuntimeError("no column preserves optimality; numerical breakdown")
    total = float(np.sum(C[np.arange(n), chosen]))
    return AssignmentSolution(chosen, total)
