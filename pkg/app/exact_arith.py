"""Арифметика F_p и точная линейная алгебра подпространств.

Все подпространства хранятся в приведённом ступенчатом виде (RREF) строками
numpy int64; все длины модулей дальше считаются как разности размерностей.
"""
import bisect
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_P = 32003
# p^2 обязано помещаться в int64 вместе с запасом на сумму
MAX_PRIME = 1 << 24
_FLOAT_EXACT = (1 << 53) - 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def inverse_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("zero has no inverse mod p")
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class PrimeField:
    p: int = DEFAULT_P

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValidationError(f"p={self.p} is not prime")
        if self.p >= MAX_PRIME:
            raise ValidationError(f"p={self.p} exceeds {MAX_PRIME}")


def _as_matrix(vectors, ambient_dim: int) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        arr = vectors
        if arr.ndim == 1:
            arr = arr.reshape(1, -1) if arr.size else np.zeros((0, ambient_dim), dtype=np.int64)
    else:
        rows = list(vectors)
        for row in rows:
            if len(row) != ambient_dim:
                raise ValidationError(
                    f"vector of length {len(row)} in ambient dimension {ambient_dim}"
                )
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), ambient_dim)
    if arr.shape[1] != ambient_dim:
        raise ValidationError(f"vectors of length {arr.shape[1]} in ambient dimension {ambient_dim}")
    return arr.astype(np.int64, copy=False)


def _matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Точное a @ b mod p через float64 BLAS, блоками по внутреннему индексу."""
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise ValidationError(f"shape mismatch {a.shape} @ {b.shape}")
    out = np.zeros((m, n), dtype=np.int64)
    if k == 0 or m == 0 or n == 0:
        return out
    chunk = max(1, _FLOAT_EXACT // max(1, (p - 1) ** 2))
    af = a.astype(np.float64)
    bf = b.astype(np.float64)
    for start in range(0, k, chunk):
        part = af[:, start:start + chunk] @ bf[start:start + chunk]
        out = (out + np.mod(part, p).astype(np.int64)) % p
    return out


def _row_reduce(matrix: np.ndarray, p: int) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Gauss–Jordan mod p; возвращает ненулевые строки RREF и столбцы опорных."""
    a = np.array(matrix, dtype=np.int64) % p
    if a.ndim != 2:
        raise ValidationError("row reduction expects a 2-d matrix")
    rows, cols = a.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = inverse_mod(int(a[r, c]), p)
        if inv != 1:
            a[r, c:] = (a[r, c:] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit, c:] = (a[hit, c:] - np.outer(col[hit], a[r, c:])) % p
        pivots.append(c)
        r += 1
    return a[:r].copy(), tuple(pivots)


def rank_mod(matrix: np.ndarray, p: int) -> int:
    """Ранг mod p (только прямой ход)."""
    a = np.array(matrix, dtype=np.int64) % p
    if a.ndim != 2 or a.size == 0:
        return 0
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = inverse_mod(int(a[r, c]), p)
        below = a[r + 1:, c]
        hit = np.flatnonzero(below)
        if hit.size:
            factors = (below[hit] * inv) % p
            a[r + 1 + hit, c:] = (a[r + 1 + hit, c:] - np.outer(factors, a[r, c:])) % p
        r += 1
    return r


@dataclass(frozen=True, eq=False)
class Subspace:
    basis: np.ndarray
    pivots: Tuple[int, ...]
    ambient_dim: int
    p: int

    @property
    def dim(self) -> int:
        return len(self.pivots)

    @classmethod
    def zero(cls, ambient_dim: int, p: int = DEFAULT_P) -> "Subspace":
        return cls(np.zeros((0, ambient_dim), dtype=np.int64), (), ambient_dim, p)

    @classmethod
    def full(cls, ambient_dim: int, p: int = DEFAULT_P) -> "Subspace":
        return cls.tail(ambient_dim, 0, p)

    @classmethod
    def tail(cls, ambient_dim: int, start: int, p: int = DEFAULT_P) -> "Subspace":
        """Координатное подпространство e_start, ..., e_{n-1}."""
        start = max(0, min(start, ambient_dim))
        basis = np.eye(ambient_dim, dtype=np.int64)[start:]
        return cls(basis, tuple(range(start, ambient_dim)), ambient_dim, p)

    def reduce(self, vectors) -> np.ndarray:
        """Остатки векторов по модулю подпространства (нули в опорных столбцах)."""
        v = _as_matrix(vectors, self.ambient_dim) % self.p
        if self.dim == 0 or v.shape[0] == 0:
            return v
        return (v - _matmul_mod(v[:, list(self.pivots)], self.basis, self.p)) % self.p

    def contains(self, vectors) -> bool:
        return not np.any(self.reduce(vectors))

    def issubspace(self, other: "Subspace") -> bool:
        return other.contains(self.basis)

    def tail_start(self) -> int:
        """Наименьшее s, для которого e_s..e_{n-1} лежат в подпространстве."""
        s = self.ambient_dim
        j = self.dim - 1
        while j >= 0 and self.pivots[j] == s - 1:
            s -= 1
            j -= 1
        return s

    def head(self, s: int) -> "Subspace":
        # корректно только при s >= tail_start()
        k = bisect.bisect_left(self.pivots, s)
        return Subspace(self.basis[:k, :s].copy(), self.pivots[:k], s, self.p)

    @staticmethod
    def with_tail(head: "Subspace", ambient_dim: int) -> "Subspace":
        s = head.ambient_dim
        k = head.dim
        basis = np.zeros((k + ambient_dim - s, ambient_dim), dtype=np.int64)
        basis[:k, :s] = head.basis
        basis[k:, s:] = np.eye(ambient_dim - s, dtype=np.int64)
        return Subspace(basis, head.pivots + tuple(range(s, ambient_dim)), ambient_dim, head.p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ambient_dim == other.ambient_dim
            and self.p == other.p
            and self.pivots == other.pivots
            and np.array_equal(self.basis, other.basis)
        )

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def echelonize(vectors, ambient_dim: int, p: int = DEFAULT_P) -> Subspace:
    mat = _as_matrix(vectors, ambient_dim)
    if mat.shape[0] == 0:
        return Subspace.zero(ambient_dim, p)
    rref, pivots = _row_reduce(mat, p)
    return Subspace(rref, pivots, ambient_dim, p)


def left_kernel(matrix: np.ndarray, p: int = DEFAULT_P) -> Subspace:
    """{v : v @ matrix = 0}."""
    mat = np.asarray(matrix, dtype=np.int64)
    m, k = mat.shape
    if k == 0 or not np.any(mat % p):
        return Subspace.full(m, p)
    rref, pivots = _row_reduce(mat.T, p)
    pivset = set(pivots)
    free = [c for c in range(m) if c not in pivset]
    if not free:
        return Subspace.zero(m, p)
    vecs = np.zeros((len(free), m), dtype=np.int64)
    vecs[np.arange(len(free)), free] = 1
    vecs[:, list(pivots)] = (-rref[:, free].T) % p
    return echelonize(vecs, m, p)


def map_preimage(rows: np.ndarray, target: Subspace) -> Subspace:
    """{v : v @ rows ∈ target}."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim != 2 or rows.shape[1] != target.ambient_dim:
        raise ValidationError(
            f"map of shape {rows.shape} does not land in ambient dimension {target.ambient_dim}"
        )
    return left_kernel(target.reduce(rows), target.p)


def joint_preimage(maps: Sequence[np.ndarray], target: Subspace, source_dim: int) -> Subspace:
    """Пересечение прообразов одного target под несколькими отображениями."""
    if not maps:
        return Subspace.full(source_dim, target.p)
    blocks = []
    for rows in maps:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.shape != (source_dim, target.ambient_dim):
            raise ValidationError(f"map of shape {rows.shape}, expected {(source_dim, target.ambient_dim)}")
        blocks.append(target.reduce(rows))
    return left_kernel(np.hstack(blocks), target.p)


def subspace_combine(a: Subspace, b: Subspace, mode: str) -> Subspace:
    if a.ambient_dim != b.ambient_dim or a.p != b.p:
        raise ValidationError("subspaces live in different ambient spaces")
    if mode not in ("sum", "intersect"):
        raise ValidationError(f"unknown combine mode {mode!r}")
    n = a.ambient_dim
    # общий координатный хвост выносим за скобки
    s = max(a.tail_start(), b.tail_start())
    ah, bh = a.head(s), b.head(s)
    if mode == "sum":
        head = echelonize(np.vstack([ah.basis, bh.basis]), s, a.p)
    elif ah.dim == 0 or bh.dim == 0:
        head = Subspace.zero(s, a.p)
    else:
        coeffs = map_preimage(ah.basis, bh)
        head = echelonize(_matmul_mod(coeffs.basis, ah.basis, a.p), s, a.p)
    return Subspace.with_tail(head, n)


class SpanBuilder:
    """Инкрементальная ступенчатая оболочка: добавляем блоки строк, читаем размерность."""

    def __init__(self, ambient_dim: int, p: int = DEFAULT_P):
        self.ambient_dim = ambient_dim
        self.p = p
        self._basis = np.zeros((0, ambient_dim), dtype=np.int64)
        self._pivots: Tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        return len(self._pivots)

    @property
    def pivots(self) -> Tuple[int, ...]:
        return self._pivots

    def pivots_from(self, start: int) -> int:
        """Число опорных столбцов с индексом >= start."""
        return self.dim - bisect.bisect_left(self._pivots, start)

    def add(self, rows) -> int:
        rows = _as_matrix(rows, self.ambient_dim) % self.p
        if rows.shape[0] == 0:
            return self.dim
        if self.dim:
            rows = self.subspace().reduce(rows)
        rows = rows[np.any(rows, axis=1)]
        if rows.shape[0] == 0:
            return self.dim
        new, new_pivots = _row_reduce(rows, self.p)
        old = self._basis
        if self.dim:
            old = (old - _matmul_mod(old[:, list(new_pivots)], new, self.p)) % self.p
        pivots = self._pivots + new_pivots
        order = np.argsort(pivots, kind="stable")
        self._basis = np.vstack([old, new])[order]
        self._pivots = tuple(pivots[i] for i in order)
        logger.debug("span grew to %d of %d", self.dim, self.ambient_dim)
        return self.dim

    def subspace(self) -> Subspace:
        return Subspace(self._basis.copy(), self._pivots, self.ambient_dim, self.p)

