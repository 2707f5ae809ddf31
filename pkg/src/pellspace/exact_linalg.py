"""Exact integer and rational linear algebra.

Vectors are plain tuples (``IntVec`` holds Python ints, ``RatVec`` holds
``fractions.Fraction``); matrices are immutable :class:`IntMatrix` values.
Nothing in here touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

IntVec = tuple[int, ...]
RatVec = tuple[Fraction, ...]


class LinalgError(ValueError):
    pass


class DimensionMismatch(LinalgError):
    pass


class NotUnimodular(LinalgError):
    pass


class DependentGenerators(LinalgError):
    pass


class NotInCone(LinalgError):
    """Raised when a target is not a nonnegative combination of the generators."""

    def __init__(self, message: str, coefficients: RatVec | None = None):
        super().__init__(message)
        self.coefficients = coefficients


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows * self.cols != len(self.entries):
            raise DimensionMismatch(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]]) -> IntMatrix:
        rows = [tuple(int(x) for x in r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise DimensionMismatch("ragged rows")
        return cls(len(rows), ncols, tuple(x for r in rows for x in r))

    @classmethod
    def from_columns(cls, cols: Iterable[Sequence[int]]) -> IntMatrix:
        return cls.from_rows(zip(*cols)) if cols else cls(0, 0, ())

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> IntVec:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> IntVec:
        return self.entries[j::self.cols] if self.cols else ()

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> IntMatrix:
        return IntMatrix.from_rows(self.column(j) for j in range(self.cols))

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        return mat_mul(self, other)

    def apply(self, v: Sequence) -> tuple:
        """Matrix-vector product ``A v`` (entries of ``v`` may be Fractions)."""
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector of length {len(v)} against {self.cols} columns")
        return tuple(sum(a * x for a, x in zip(self.row(i), v)) for i in range(self.rows))

    def row_apply(self, v: Sequence) -> tuple:
        """Row vector times matrix, ``v A``."""
        if len(v) != self.rows:
            raise DimensionMismatch(f"vector of length {len(v)} against {self.rows} rows")
        return tuple(sum(x * a for x, a in zip(v, self.column(j))) for j in range(self.cols))

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == IntMatrix.identity(self.rows)

    def determinant(self) -> int:
        return adjugate_det(self)[1]


def mat_mul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    if A.cols != B.rows:
        raise DimensionMismatch(f"cannot multiply {A.rows}x{A.cols} by {B.rows}x{B.cols}")
    bcols = [B.column(j) for j in range(B.cols)]
    out = []
    for i in range(A.rows):
        r = A.row(i)
        out.extend(sum(a * b for a, b in zip(r, c)) for c in bcols)
    return IntMatrix(A.rows, B.cols, tuple(out))


def adjugate_det(A: IntMatrix) -> tuple[IntMatrix, int]:
    """Return ``(adj(A), det(A))`` via fraction-free Gauss-Jordan elimination.

    Every intermediate division is exact (Bareiss), so the whole computation
    stays in the integers.  For singular ``A`` the adjugate is not produced and
    the zero matrix is returned with determinant 0.
    """
    n = A.rows
    if A.cols != n:
        raise DimensionMismatch("adjugate of a non-square matrix")
    if n == 0:
        return IntMatrix(0, 0, ()), 1
    M = [list(A.row(i)) + [int(i == j) for j in range(n)] for i in range(n)]
    sign = 1
    prev = 1
    for k in range(n):
        piv = next((r for r in range(k, n) if M[r][k] != 0), None)
        if piv is None:
            return IntMatrix(n, n, (0,) * (n * n)), 0
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        pk = M[k]
        akk = pk[k]
        for i in range(n):
            if i == k:
                continue
            ri = M[i]
            aik = ri[k]
            M[i] = [(akk * x - aik * y) // prev for x, y in zip(ri, pk)]
        prev = akk
    # After the sweep every left diagonal entry equals the last pivot D and the
    # right block is D * A^{-1}.
    D = M[n - 1][n - 1]
    det = sign * D
    adj = [[sign * x for x in M[i][n:]] for i in range(n)]
    return IntMatrix.from_rows(adj), det


def int_inverse(A: IntMatrix) -> IntMatrix:
    adj, det = adjugate_det(A)
    if det not in (1, -1):
        raise NotUnimodular(f"determinant {det} is not a unit")
    return IntMatrix(adj.rows, adj.cols, tuple(det * x for x in adj.entries))


def rational_rank(rows: Sequence[Sequence]) -> int:
    """Rank over Q of a matrix given as a list of rows (ints or Fractions)."""
    M = [[Fraction(x) for x in r] for r in rows]
    if not M:
        return 0
    ncols = len(M[0])
    rank = 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        p = M[rank]
        for r in range(rank + 1, len(M)):
            f = M[r][c]
            if f:
                f /= p[c]
                M[r] = [x - f * y for x, y in zip(M[r], p)]
        rank += 1
        if rank == len(M):
            break
    return rank


def solve_linear(generators: Sequence[Sequence], target: Sequence) -> RatVec | None:
    """Solve ``sum(lam_i * g_i) = target`` exactly.

    Returns ``None`` when the target is outside the span.  Raises
    :class:`DependentGenerators` if the generators are linearly dependent.
    """
    k = len(generators)
    n = len(target)
    if any(len(g) != n for g in generators):
        raise DimensionMismatch("generator length differs from target length")
    # augmented n x (k+1) system, columns are the generators
    M = [[Fraction(g[i]) for g in generators] + [Fraction(target[i])] for i in range(n)]
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, n) if M[i][c] != 0), None)
        if piv is None:
            raise DependentGenerators("generators are linearly dependent")
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(n):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        r += 1
    if any(M[i][k] != 0 for i in range(r, n)):
        return None
    return tuple(M[i][k] for i in range(k))


def solve_simplicial_membership(generators: Sequence[Sequence[int]], target: Sequence) -> RatVec:
    """Coefficients of ``target`` in the simplicial cone spanned by ``generators``.

    Raises :class:`NotInCone` if the target is outside the span or needs a
    negative coefficient.
    """
    lam = solve_linear(generators, target)
    if lam is None:
        raise NotInCone("target is not in the linear span of the generators")
    if any(x < 0 for x in lam):
        raise NotInCone("target needs a negative coefficient", lam)
    return lam


def primitive(v: Sequence[int]) -> IntVec:
    """Divide an integer vector by the gcd of its entries."""
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        raise ValueError("the zero vector has no primitive representative")
    return tuple(int(x) // g for x in v)


def clear_denominators(v: Sequence[Fraction]) -> IntVec:
    """Smallest positive integer multiple of a rational vector, made primitive."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    return primitive([int(Fraction(x) * den) for x in v])
