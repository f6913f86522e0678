"""Assignment solver against exhaustive search."""

import numpy as np
import pytest

from loadalign import solve_assignment

from helpers import brute_force_assignment


def test_zero_cost_cycle():
    C = np.array([[9.0, 0.0, 0.0], [0.0, 9.0, 0.0], [0.0, 0.0, 9.0]])
    sol = solve_assignment(C)
    assert sol.total_cost == 0.0
    assert np.all(sol.assignment != np.arange(3))  # must avoid the diagonal


def test_two_by_two_identity():
    sol = solve_assignment(np.array([[1.0, 2.0], [2.0, 1.0]]))
    np.testing.assert_array_equal(sol.assignment, [0, 1])
    assert sol.total_cost == pytest.approx(2.0)


def test_matches_brute_force():
    rng = np.random.default_rng(123)
    for trial in range(150):
        n = int(rng.integers(1, 7))
        C = rng.normal(size=(n, n)) * 10
        sol = solve_assignment(C)
        _, best = brute_force_assignment(C)
        assert sol.total_cost == pytest.approx(best, abs=1e-9), f"trial {trial}"
        # the returned assignment really attains the reported cost
        attained = float(C[np.arange(n), sol.assignment].sum())
        assert attained == pytest.approx(sol.total_cost, abs=1e-12)
        assert sorted(sol.assignment) == list(range(n))


def test_lexicographic_tie_break():
    # Every assignment of a constant matrix costs the same; the smallest
    # row->column mapping is the identity.
    sol = solve_assignment(np.full((4, 4), 2.5))
    np.testing.assert_array_equal(sol.assignment, np.arange(4))

    # Two optimal assignments: (0,1) and (1,0) both cost 2.  Lexicographic
    # order prefers row 0 taking column 0.
    C = np.array([[1.0, 1.0], [1.0, 1.0]])
    np.testing.assert_array_equal(solve_assignment(C).assignment, [0, 1])


def test_row_and_column_constant_shift():
    """Adding a constant to one row/column shifts the cost, not the argmin."""
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        C = rng.normal(size=(n, n))
        base = solve_assignment(C)
        shifted = C.copy()
        shifted[int(rng.integers(n)), :] += 3.7
        shifted[:, int(rng.integers(n))] -= 1.2
        sol = solve_assignment(shifted)
        assert sol.total_cost == pytest.approx(
            base.total_cost + 3.7 - 1.2, abs=1e-9
        )
        np.testing.assert_array_equal(sol.assignment, base.assignment)


def test_input_validation():
    with pytest.raises(ValueError):
        solve_assignment(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        solve_assignment(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        solve_assignment(np.array([[np.inf, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        solve_assignment(np.array([[np.nan, 1.0], [1.0, 0.0]]))
