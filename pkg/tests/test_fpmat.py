"""Subspace enumeration and mod-p linear algebra, checked against brute force."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgroupgen.fpmat import (
    FpMatrix,
    Subspace,
    act_on_subspace,
    enumerate_subspaces,
    enumerate_supplements,
    gaussian_binomial,
    nullspace,
    rank,
    rref,
    solve,
)


def brute_subspace_keys(ambient, dim, p):
    """Oracle: canonical keys of all dim-subspaces, via rref over all row tuples."""
    vectors = list(itertools.product(range(p), repeat=ambient))
    seen = set()
    for rows in itertools.combinations(vectors, dim) if dim else [()]:
        red, pivots = rref(np.array(rows, dtype=np.int64).reshape(dim, ambient), p) if dim else (
            np.zeros((0, ambient), dtype=np.int64),
            (),
        )
        if len(pivots) == dim:
            seen.add(red.tobytes())
    return seen


SMALL_CASES = [(2, 1, 2), (3, 1, 2), (3, 2, 2), (4, 2, 2), (2, 1, 3), (3, 2, 3), (3, 1, 5)]


@pytest.mark.parametrize("ambient,dim,p", SMALL_CASES)
def test_enumerate_subspaces_matches_brute_force(ambient, dim, p):
    oracle = brute_subspace_keys(ambient, dim, p)
    got = [s.basis.tobytes() for s in enumerate_subspaces(ambient, dim, p)]
    assert len(got) == len(set(got)), "enumeration emitted duplicates"
    assert set(got) == oracle
    assert len(got) == gaussian_binomial(ambient, dim, p)


def test_enumeration_order_is_deterministic():
    a = [s.key() for s in enumerate_subspaces(4, 2, 3)]
    b = [s.key() for s in enumerate_subspaces(4, 2, 3)]
    assert a == b
    pivot_patterns = [s.pivots for s in enumerate_subspaces(4, 2, 3)]
    assert pivot_patterns == sorted(pivot_patterns)


@pytest.mark.parametrize("ambient,nuc_rows,codim,p", [
    (3, [[0, 0, 1]], 1, 2),
    (3, [[0, 1, 0], [0, 0, 1]], 1, 3),
    (3, [[0, 1, 0], [0, 0, 1]], 2, 3),
    (4, [[0, 0, 1, 0], [0, 0, 0, 1]], 2, 2),
])
def test_supplements_match_brute_force(ambient, nuc_rows, codim, p):
    nucleus = Subspace.from_rows(nuc_rows, ambient, p)
    dim = ambient - codim
    oracle = set()
    for key in brute_subspace_keys(ambient, dim, p):
        basis = np.frombuffer(key, dtype=np.int64).reshape(dim, ambient)
        s = Subspace.from_rows(basis, ambient, p)
        if s.sum(nucleus).dim == ambient:
            oracle.add(key)
    got = {s.basis.tobytes() for s in enumerate_supplements(nucleus, codim)}
    assert got == oracle
    assert all(len(k) for k in got) or dim == 0


def test_supplement_count_formula():
    # supplements of an m-dim nucleus with codim s: [m choose s]_p * p^(s*(n-m))
    for (n, m, s, p) in [(4, 2, 1, 2), (4, 2, 2, 2), (5, 2, 2, 3), (4, 3, 2, 3)]:
        nucleus = Subspace.from_rows(np.eye(n, dtype=np.int64)[n - m:], n, p)
        count = sum(1 for _ in enumerate_supplements(nucleus, s))
        assert count == gaussian_binomial(m, s, p) * p ** (s * (n - m))


matrices = st.integers(min_value=0, max_value=6).flatmap(
    lambda n: st.integers(min_value=1, max_value=6).flatmap(
        lambda m: st.sampled_from([2, 3, 5]).flatmap(
            lambda p: st.lists(
                st.lists(st.integers(0, p - 1), min_size=m, max_size=m),
                min_size=max(n, 1), max_size=max(n, 1),
            ).map(lambda rows: (np.array(rows, dtype=np.int64), p))
        )
    )
)


@given(matrices)
@settings(max_examples=150, deadline=None)
def test_rref_properties(mp):
    a, p = mp
    red, pivots = rref(a, p)
    assert len(pivots) == red.shape[0] <= min(a.shape)
    red2, pivots2 = rref(red, p)
    assert pivots2 == pivots and np.array_equal(red2, red)
    # every original row lies in the row space of the reduction
    space = Subspace.from_rows(red, a.shape[1], p) if len(pivots) else Subspace.zero(a.shape[1], p)
    for row in a:
        assert space.contains(row)


@given(matrices)
@settings(max_examples=150, deadline=None)
def test_nullspace_is_kernel(mp):
    a, p = mp
    ns = nullspace(a, p)
    assert ns.shape[0] + rank(a, p) == a.shape[1]
    if ns.size:
        assert not ((a @ ns.T) % p).any()


@given(matrices)
@settings(max_examples=100, deadline=None)
def test_solve_consistent_systems(mp):
    a, p = mp
    rng = np.random.default_rng(0)
    x0 = rng.integers(0, p, size=a.shape[1])
    b = (a @ x0) % p
    x = solve(a, b, p)
    assert x is not None
    assert np.array_equal((a @ x) % p, b)


def random_invertible(n, p, rng):
    while True:
        m = FpMatrix(rng.integers(0, p, size=(n, n)), p)
        if m.is_invertible():
            return m


@pytest.mark.parametrize("n,p", [(2, 2), (3, 2), (3, 3), (4, 3), (2, 5)])
def test_matrix_inverse_and_action_law(n, p):
    rng = np.random.default_rng(42)
    ident = FpMatrix.identity(n, p)
    for _ in range(10):
        a = random_invertible(n, p, rng)
        b = random_invertible(n, p, rng)
        assert a @ a.inverse() == ident
        u = Subspace.from_rows(rng.integers(0, p, size=(2, n)), n, p)
        # right action: acting by a then b equals acting by the product a@b
        assert act_on_subspace(a @ b, u) == act_on_subspace(b, act_on_subspace(a, u))
        assert act_on_subspace(ident, u) == u
        assert act_on_subspace(a, u).dim == u.dim


def test_singular_inverse_raises():
    with pytest.raises(ValueError):
        FpMatrix([[1, 1], [1, 1]], 2).inverse()


@pytest.mark.parametrize("n,p", [(3, 2), (4, 3)])
def test_sum_intersection_dimension_formula(n, p):
    rng = np.random.default_rng(7)
    for _ in range(25):
        u = Subspace.from_rows(rng.integers(0, p, size=(2, n)), n, p)
        w = Subspace.from_rows(rng.integers(0, p, size=(2, n)), n, p)
        s, i = u.sum(w), u.intersection(w)
        assert u.dim + w.dim == s.dim + i.dim
        assert s.contains_space(u) and s.contains_space(w)
        assert u.contains_space(i) and w.contains_space(i)


def test_gaussian_binomial_recurrence_and_symmetry():
    for p in (2, 3, 5):
        for n in range(1, 8):
            for k in range(n + 1):
                assert gaussian_binomial(n, k, p) == gaussian_binomial(n, n - k, p)
                if 0 < k:
                    assert gaussian_binomial(n, k, p) == (
                        gaussian_binomial(n - 1, k - 1, p) + p ** k * gaussian_binomial(n - 1, k, p)
                    )
