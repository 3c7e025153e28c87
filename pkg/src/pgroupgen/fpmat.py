"""Linear algebra over the prime field F_p with canonical subspace handling."""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence

import numpy as np

Array = np.ndarray


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def inv_mod(x: int, p: int) -> int:
    return pow(int(x), p - 2, p)


def as_fp_array(rows, p: int) -> Array:
    a = np.array(rows, dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError("expected a matrix (2-d array)")
    return np.mod(a, p)


def rref(mat, p: int) -> tuple[Array, tuple[int, ...]]:
    """Reduced row echelon form mod p; returns (nonzero rows, pivot columns)."""
    a = as_fp_array(mat, p).copy()
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        pr = r
        while pr < nrows and a[pr, c] == 0:
            pr += 1
        if pr == nrows:
            continue
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        a[r] = (a[r] * inv_mod(a[r, c], p)) % p
        for i in range(nrows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % p
        pivots.append(c)
        r += 1
    return a[: len(pivots)].copy(), tuple(pivots)


def rank(mat, p: int) -> int:
    return len(rref(mat, p)[1])


def nullspace(mat, p: int) -> Array:
    """Basis rows x of {x : mat @ x = 0 mod p} (kernel on column vectors)."""
    a = as_fp_array(mat, p)
    red, pivots = rref(a, p)
    ncols = a.shape[1]
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-red[i, f]) % p
    return basis


def solve(mat, rhs, p: int) -> Array | None:
    """One solution x of mat @ x = rhs mod p, or None if inconsistent."""
    a = as_fp_array(mat, p)
    b = np.mod(np.array(rhs, dtype=np.int64).reshape(-1), p)
    if b.shape[0] != a.shape[0]:
        raise ValueError("rhs length mismatch")
    aug = np.hstack([a, b.reshape(-1, 1)])
    red, pivots = rref(aug, p)
    ncols = a.shape[1]
    if ncols in pivots:
        return None
    x = np.zeros(ncols, dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = red[i, ncols]
    return x


class FpMatrix:
    """Immutable matrix over F_p; rows act on row vectors from the right."""

    __slots__ = ("p", "a", "_key")

    def __init__(self, rows, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        a = as_fp_array(rows, p)
        a.setflags(write=False)
        self.p = p
        self.a = a
        self._key = (p, a.shape, a.tobytes())

    @classmethod
    def identity(cls, n: int, p: int) -> "FpMatrix":
        return cls(np.eye(n, dtype=np.int64), p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    def __matmul__(self, other: "FpMatrix") -> "FpMatrix":
        if self.p != other.p:
            raise ValueError("field mismatch")
        return FpMatrix((self.a @ other.a) % self.p, self.p)

    def __eq__(self, other) -> bool:
        return isinstance(other, FpMatrix) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"FpMatrix(p={self.p}, {self.a.tolist()})"

    def transpose(self) -> "FpMatrix":
        return FpMatrix(self.a.T, self.p)

    def rank(self) -> int:
        return rank(self.a, self.p)

    def is_invertible(self) -> bool:
        n, m = self.a.shape
        return n == m and self.rank() == n

    def inverse(self) -> "FpMatrix":
        n, m = self.a.shape
        if n != m:
            raise ValueError("not square")
        aug = np.hstack([self.a, np.eye(n, dtype=np.int64)])
        red, pivots = rref(aug, self.p)
        if len(pivots) < n or pivots[:n] != tuple(range(n)):
            raise ValueError("matrix is singular")
        return FpMatrix(red[:, n:], self.p)


class Subspace:
    """Row space in canonical RREF form; hashable, order-stable."""

    __slots__ = ("p", "ambient", "basis", "pivots", "_key")

    def __init__(self, basis: Array, pivots: tuple[int, ...], ambient: int, p: int):
        basis = np.asarray(basis, dtype=np.int64)
        basis.setflags(write=False)
        self.p = p
        self.ambient = ambient
        self.basis = basis
        self.pivots = pivots
        self._key = (p, ambient, pivots, basis.tobytes())

    @classmethod
    def from_rows(cls, rows, ambient: int, p: int) -> "Subspace":
        a = as_fp_array(rows, p) if len(rows) else np.zeros((0, ambient), dtype=np.int64)
        if a.shape[1] != ambient:
            raise ValueError("row length mismatch")
        red, pivots = rref(a, p)
        return cls(red, pivots, ambient, p)

    @classmethod
    def zero(cls, ambient: int, p: int) -> "Subspace":
        return cls(np.zeros((0, ambient), dtype=np.int64), (), ambient, p)

    @classmethod
    def full(cls, ambient: int, p: int) -> "Subspace":
        return cls(np.eye(ambient, dtype=np.int64), tuple(range(ambient)), ambient, p)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def contains(self, vec) -> bool:
        v = np.mod(np.array(vec, dtype=np.int64).reshape(-1), self.p)
        for i, pc in enumerate(self.pivots):
            if v[pc]:
                v = (v - v[pc] * self.basis[i]) % self.p
        return not v.any()

    def contains_space(self, other: "Subspace") -> bool:
        return all(self.contains(row) for row in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        self._check_compatible(other)
        stacked = np.vstack([self.basis, other.basis])
        return Subspace.from_rows(stacked, self.ambient, self.p)

    def intersection(self, other: "Subspace") -> "Subspace":
        self._check_compatible(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient, self.p)
        stacked = np.vstack([self.basis, other.basis])
        left_kernel = nullspace(stacked.T, self.p)
        rows = (left_kernel[:, : self.dim] @ self.basis) % self.p
        return Subspace.from_rows(rows, self.ambient, self.p)

    def _check_compatible(self, other: "Subspace") -> None:
        if self.p != other.p or self.ambient != other.ambient:
            raise ValueError("subspaces live in different spaces")

    def __eq__(self, other) -> bool:
        return isinstance(other, Subspace) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Subspace(p={self.p}, ambient={self.ambient}, basis={self.basis.tolist()})"

    def key(self) -> bytes:
        return self.basis.tobytes() + bytes([self.dim])


def act_on_subspace(mat: FpMatrix, sub: Subspace) -> Subspace:
    """Image of sub under the right action of mat on row vectors."""
    if mat.p != sub.p or mat.shape[0] != sub.ambient:
        raise ValueError("incompatible action")
    rows = (sub.basis @ mat.a) % sub.p
    return Subspace.from_rows(rows, mat.shape[1], sub.p)


def gaussian_binomial(n: int, k: int, p: int) -> int:
    """Number of k-dimensional subspaces of F_p^n (exact integer)."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    assert num % den == 0
    return num // den


def _free_cells(pivots: Sequence[int], ambient: int) -> list[tuple[int, int]]:
    pset = set(pivots)
    cells = []
    for i, pc in enumerate(pivots):
        for j in range(pc + 1, ambient):
            if j not in pset:
                cells.append((i, j))
    return cells


def enumerate_subspaces(ambient: int, dim: int, p: int) -> Iterator[Subspace]:
    """All dim-subspaces of F_p^ambient.

    Order: pivot-column patterns lexicographically, then the tuple of free
    entries counting up in base p (first free cell most significant).
    """
    if dim == 0:
        yield Subspace.zero(ambient, p)
        return
    for pivots in itertools.combinations(range(ambient), dim):
        cells = _free_cells(pivots, ambient)
        template = np.zeros((dim, ambient), dtype=np.int64)
        for i, pc in enumerate(pivots):
            template[i, pc] = 1
        for values in itertools.product(range(p), repeat=len(cells)):
            m = template.copy()
            for (i, j), v in zip(cells, values):
                m[i, j] = v
            yield Subspace(m, pivots, ambient, p)


def enumerate_supplements(nucleus: Subspace, codim: int) -> Iterator[Subspace]:
    """Proper subspaces U of codimension codim with U + nucleus = everything.

    Enumeration order matches enumerate_subspaces.
    """
    ambient, p = nucleus.ambient, nucleus.p
    if codim < 1 or codim > ambient:
        raise ValueError("codimension out of range")
    dim = ambient - codim
    if dim + nucleus.dim < ambient:
        return
    for sub in enumerate_subspaces(ambient, dim, p):
        stacked = np.vstack([nucleus.basis, sub.basis])
        if rank(stacked, p) == ambient:
            yield sub
