"""Signed-permutation algebra and the sample container."""

import numpy as np
import pytest

from loadalign import (
    LoadingsSample,
    SignedPermutation,
    apply_signed_permutation,
    compose,
    frobenius_sq_distance,
    invert,
    permutation_to_matrix,
    signed_permutation_to_matrix,
)

from helpers import all_signed_permutations


def random_sp(rng, q):
    s = rng.integers(0, 2, size=q) * 2 - 1
    return SignedPermutation(s, rng.permutation(q))


def test_matrix_form_worked_example():
    # q=3, signs (-1,-1,+1), sources (3,1,2) 1-based: one nonzero per row,
    # row i has s[i] in column nu[i].
    sp = SignedPermutation(np.array([-1, -1, 1]), np.array([2, 0, 1]))
    expected = np.array(
        [
            [0.0, 0.0, -1.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        ]
    )
    np.testing.assert_array_equal(signed_permutation_to_matrix(sp), expected)


def test_apply_worked_example():
    L = np.array([[0.02, 0.01], [-0.84, 0.06], [-0.05, 0.86]])
    sp = SignedPermutation(np.array([1, -1]), np.array([1, 0]))
    out = apply_signed_permutation(L, sp)
    expected = np.array([[0.01, -0.02], [0.06, 0.84], [0.86, 0.05]])
    np.testing.assert_array_equal(out, expected)  # gather is entry-exact


def test_apply_matches_matrix_action():
    rng = np.random.default_rng(42)
    for _ in range(50):
        q = int(rng.integers(1, 6))
        L = rng.normal(size=(int(rng.integers(1, 8)), q))
        sp = random_sp(rng, q)
        Q = signed_permutation_to_matrix(sp)
        np.testing.assert_allclose(
            apply_signed_permutation(L, sp), L @ Q.T, atol=1e-14
        )


def test_permutation_to_matrix_is_row_indicator():
    nu = np.array([2, 0, 1])
    P = permutation_to_matrix(nu)
    assert P.shape == (3, 3)
    for i, j in enumerate(nu):
        assert P[i, j] == 1.0
    assert P.sum() == 3.0


def test_compose_is_matrix_product():
    rng = np.random.default_rng(7)
    for _ in range(100):
        q = int(rng.integers(1, 6))
        a, b = random_sp(rng, q), random_sp(rng, q)
        Qa = signed_permutation_to_matrix(a)
        Qb = signed_permutation_to_matrix(b)
        np.testing.assert_array_equal(
            signed_permutation_to_matrix(compose(a, b)), Qa @ Qb
        )


def test_apply_composition_order():
    # Applying a then b equals applying compose(b, a) in one shot.
    rng = np.random.default_rng(3)
    for _ in range(50):
        q = int(rng.integers(1, 5))
        L = rng.normal(size=(6, q))
        a, b = random_sp(rng, q), random_sp(rng, q)
        two_step = apply_signed_permutation(apply_signed_permutation(L, a), b)
        one_step = apply_signed_permutation(L, compose(b, a))
        np.testing.assert_allclose(two_step, one_step, atol=1e-14)


def test_invert_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(100):
        q = int(rng.integers(1, 7))
        sp = random_sp(rng, q)
        assert compose(sp, invert(sp)).is_identity()
        assert compose(invert(sp), sp).is_identity()
        np.testing.assert_array_equal(
            signed_permutation_to_matrix(invert(sp)),
            signed_permutation_to_matrix(sp).T,
        )


def test_group_closure_against_enumeration():
    # Composition of any two q=3 elements lands back in the enumerated group.
    group = {sp for sp in all_signed_permutations(3)}
    assert len(group) == 2**3 * 6
    some = list(group)[:8]
    for a in some:
        for b in some:
            assert compose(a, b) in group


def test_identity_constructor():
    sp = SignedPermutation.identity(4)
    assert sp.is_identity()
    L = np.arange(12.0).reshape(3, 4)
    np.testing.assert_array_equal(apply_signed_permutation(L, sp), L)


def test_validation_rejects_bad_input():
    with pytest.raises(ValueError):
        SignedPermutation(np.array([1, 2]), np.array([0, 1]))  # bad sign
    with pytest.raises(ValueError):
        SignedPermutation(np.array([1, 1]), np.array([0, 0]))  # repeated source
    with pytest.raises(ValueError):
        SignedPermutation(np.array([1, 1]), np.array([0, 2]))  # out of range
    with pytest.raises(ValueError):
        SignedPermutation(np.array([1]), np.array([0, 1]))  # length mismatch
    with pytest.raises(ValueError):
        apply_signed_permutation(
            np.ones((3, 3)), SignedPermutation.identity(2)
        )


def test_equality_and_hash():
    a = SignedPermutation(np.array([1, -1]), np.array([1, 0]))
    b = SignedPermutation(np.array([1, -1]), np.array([1, 0]))
    c = SignedPermutation(np.array([-1, 1]), np.array([1, 0]))
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert len({a, b, c}) == 2


def test_frobenius_sq_distance():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    B = np.zeros((2, 2))
    assert frobenius_sq_distance(A, B) == pytest.approx(30.0)
    assert frobenius_sq_distance(A, A) == 0.0


def test_loadings_sample_container():
    draws = np.random.default_rng(0).normal(size=(5, 4, 2))
    sample = LoadingsSample(draws)
    assert (sample.n_draws, sample.p, sample.q) == (5, 4, 2)
    assert len(sample) == 5

    single = LoadingsSample(draws[0])
    assert single.draws.shape == (1, 4, 2)

    with pytest.raises(ValueError):
        LoadingsSample(np.array([np.nan]).reshape(1, 1, 1))
    with pytest.raises(ValueError):
        LoadingsSample(draws, factors=np.zeros((5, 10, 3)))  # q mismatch
    with pytest.raises(ValueError):
        LoadingsSample(draws, variances=np.zeros((5, 4)))  # not positive
    ok = LoadingsSample(
        draws,
        factors=np.zeros((5, 10, 2)),
        variances=np.ones((5, 4)),
    )
    assert ok.factors.shape == (5, 10, 2)
