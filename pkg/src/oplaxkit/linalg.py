"""Dense exact linear algebra over Q and F_p.

Everything downstream (structure constants, coherence equations, homotopy hom
spaces) reduces to the operations here: matrix product, rank, kernel bases,
linear solves, inverses. Arithmetic is exact, pivoting is deterministic
(first nonzero in column order), so every result is reproducible bit for bit.

The F_p hot loops are served by the compiled ``_rowred`` extension when it is
available; setting ``OPLAXKIT_PURE=1`` in the environment forces the
pure-Python twin (used by the benchmark and as an installation fallback).
"""

from __future__ import annotations

import os
from fractions import Fraction

from . import _rowred_py
from .field import Field, FieldMismatch, check_same_field

if os.environ.get("OPLAXKIT_PURE"):
    _fp_kernel = _rowred_py
    HAVE_COMPILED_KERNEL = False
else:
    try:
        from . import _rowred as _fp_kernel  # type: ignore[attr-defined]

        HAVE_COMPILED_KERNEL = True
    except ImportError:
        _fp_kernel = _rowred_py
        HAVE_COMPILED_KERNEL = False


class DimensionMismatch(ValueError):
    pass


class Matrix:
    """Immutable dense matrix with raw scalar entries over a fixed field.

    Zero rows or columns are legal; empty matrices compose formally.
    """

    __slots__ = ("field", "rows", "cols", "entries", "_hash")

    def __init__(self, field: Field, rows: int, cols: int, entries):
        if rows < 0 or cols < 0:
            raise DimensionMismatch("negative dimension")
        entries = tuple(entries)
        if len(entries) != rows * cols:
            raise DimensionMismatch(f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *_):
        raise AttributeError("Matrix is immutable")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def from_rows(field: Field, rows_data) -> "Matrix":
        rows_data = [list(r) for r in rows_data]
        r = len(rows_data)
        c = len(rows_data[0]) if rows_data else 0
        if any(len(row) != c for row in rows_data):
            raise DimensionMismatch("ragged rows")
        return Matrix(field, r, c, [field.coerce(v) for row in rows_data for v in row])

    @staticmethod
    def zeros(field: Field, rows: int, cols: int) -> "Matrix":
        return Matrix(field, rows, cols, [field.zero] * (rows * cols))

    @staticmethod
    def identity(field: Field, n: int) -> "Matrix":
        z, o = field.zero, field.one
        return Matrix(field, n, n, [o if i == j else z for i in range(n) for j in range(n)])

    @staticmethod
    def column(field: Field, values) -> "Matrix":
        vals = [field.coerce(v) for v in values]
        return Matrix(field, len(vals), 1, vals)

    # -- basic protocol -------------------------------------------------------

    def __getitem__(self, rc):
        r, c = rc
        return self.entries[r * self.cols + c]

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.field == other.field
            and self.rows == other.rows
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.field, self.rows, self.cols, self.entries))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        body = "; ".join(
            " ".join(str(self.entries[r * self.cols + c]) for c in range(self.cols)) for r in range(self.rows)
        )
        return f"Matrix({self.field}, {self.rows}x{self.cols}, [{body}])"

    def is_zero(self) -> bool:
        return all(not v for v in self.entries)

    def row(self, r: int) -> tuple:
        return self.entries[r * self.cols : (r + 1) * self.cols]

    def col(self, c: int) -> tuple:
        return tuple(self.entries[r * self.cols + c] for r in range(self.rows))

    # -- arithmetic -----------------------------------------------------------

    def _check_same_shape(self, other: "Matrix"):
        check_same_field(self.field, other.field)
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch(f"{self.rows}x{self.cols} vs {other.rows}x{other.cols}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        f = self.field
        return Matrix(f, self.rows, self.cols, [f.add(a, b) for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        f = self.field
        return Matrix(f, self.rows, self.cols, [f.sub(a, b) for a, b in zip(self.entries, other.entries)])

    def __neg__(self) -> "Matrix":
        f = self.field
        return Matrix(f, self.rows, self.cols, [f.neg(a) for a in self.entries])

    def scale(self, s) -> "Matrix":
        f = self.field
        s = f.coerce(s)
        return Matrix(f, self.rows, self.cols, [f.mul(s, a) for a in self.entries])

    def __matmul__(self, other: "Matrix") -> "Matrix":
        check_same_field(self.field, other.field)
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        f = self.field
        n, m, k = self.rows, self.cols, other.cols
        if f.p is not None:
            out = _fp_kernel.matmul_mod(f.p, n, m, k, list(self.entries), list(other.entries))
            return Matrix(f, n, k, out)
        a, b = self.entries, other.entries
        out = [Fraction(0)] * (n * k)
        for i in range(n):
            for t in range(m):
                x = a[i * m + t]
                if x:
                    for j in range(k):
                        y = b[t * k + j]
                        if y:
                            out[i * k + j] += x * y
        return Matrix(f, n, k, out)

    def transpose(self) -> "Matrix":
        return Matrix(
            self.field,
            self.cols,
            self.rows,
            [self.entries[r * self.cols + c] for c in range(self.cols) for r in range(self.rows)],
        )

    def hstack(self, other: "Matrix") -> "Matrix":
        check_same_field(self.field, other.field)
        if self.rows != other.rows:
            raise DimensionMismatch("hstack with different row counts")
        ents = []
        for r in range(self.rows):
            ents.extend(self.row(r))
            ents.extend(other.row(r))
        return Matrix(self.field, self.rows, self.cols + other.cols, ents)

    def vstack(self, other: "Matrix") -> "Matrix":
        check_same_field(self.field, other.field)
        if self.cols != other.cols:
            raise DimensionMismatch("vstack with different column counts")
        return Matrix(self.field, self.rows + other.rows, self.cols, self.entries + other.entries)


def rref(a: Matrix) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form and pivot columns."""
    f = a.field
    if f.p is not None:
        ents, piv = _fp_kernel.rref_mod(f.p, a.rows, a.cols, list(a.entries))
    else:
        ents, piv = _rowred_py.rref_frac(a.rows, a.cols, list(a.entries))
    return Matrix(f, a.rows, a.cols, ents), tuple(piv)


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def solve(a: Matrix, b: Matrix) -> Matrix | None:
    """First solution of A x = b in column-echelon order (free variables 0).

    ``b`` may have several columns; returns None when any column is
    inconsistent.
    """
    check_same_field(a.field, b.field)
    if a.rows != b.rows:
        raise DimensionMismatch(f"solve: A has {a.rows} rows, b has {b.rows}")
    r, piv = rref(a.hstack(b))
    n = a.cols
    if any(c >= n for c in piv):
        return None
    f = a.field
    out = [f.zero] * (n * b.cols)
    for row_idx, c in enumerate(piv):
        for j in range(b.cols):
            out[c * b.cols + j] = r[row_idx, n + j]
    return Matrix(f, n, b.cols, out)


def kernel_basis(a: Matrix) -> Matrix:
    """Columns form a basis of the right kernel {x : A x = 0}."""
    r, piv = rref(a)
    f = a.field
    free = [c for c in range(a.cols) if c not in piv]
    ents = [f.zero] * (a.cols * len(free))
    for j, fc in enumerate(free):
        ents[fc * len(free) + j] = f.one
        for row_idx, pc in enumerate(piv):
            ents[pc * len(free) + j] = f.neg(r[row_idx, fc])
    return Matrix(f, a.cols, len(free), ents)


def inverse(a: Matrix) -> Matrix | None:
    """Two-sided inverse of a square matrix, or None."""
    if a.rows != a.cols:
        return None
    x = solve(a, Matrix.identity(a.field, a.rows))
    if x is None:
        return None
    return x


def extend_to_basis(spanning: Matrix, candidates: Matrix) -> list[int]:
    """Indices of candidate columns that extend ``spanning`` to a larger span.

    Greedy in column order, so the choice is deterministic. ``spanning`` and
    ``candidates`` must have equal row counts.
    """
    check_same_field(spanning.field, candidates.field)
    if spanning.rows != candidates.rows:
        raise DimensionMismatch("extend_to_basis: row mismatch")
    chosen: list[int] = []
    current = spanning
    cur_rank = rank(current)
    for j in range(candidates.cols):
        col = Matrix(candidates.field, candidates.rows, 1, candidates.col(j))
        trial = current.hstack(col)
        r = rank(trial)
        if r > cur_rank:
            chosen.append(j)
            current, cur_rank = trial, r
    return chosen


def in_span(spanning: Matrix, vec: Matrix) -> bool:
    """Whether the column vector lies in the column span."""
    return solve(spanning, vec) is not None


__all__ = [
    "Matrix",
    "DimensionMismatch",
    "FieldMismatch",
    "rref",
    "rank",
    "solve",
    "kernel_basis",
    "inverse",
    "extend_to_basis",
    "in_span",
    "HAVE_COMPILED_KERNEL",
]
