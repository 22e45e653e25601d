"""Exact arithmetic over the Gaussian rationals Q[i] and dense exact linear algebra.

Every certification path in this package runs on the types defined here.
Floating point enters only through the explicit conversion helpers
(`rationalize`, `ExactMatrix.to_complex`, `exact_from_float_matrix`).
"""

from __future__ import annotations

from fractions import Fraction
from math import isfinite

import numpy as np

__all__ = [
    "NonFiniteInput",
    "NonHermitianInput",
    "GaussianRational",
    "ExactMatrix",
    "PsdCheck",
    "psd_check_exact",
    "rationalize",
    "exact_from_float_matrix",
    "rref_exact",
    "rank_exact",
    "nullspace_exact",
    "solve_exact",
    "independent_rows",
    "affine_least_squares",
    "hermitian_coordinates",
    "hermitian_from_coordinates",
    "hermitian_coordinate_weights",
    "hermitian_basis",
]


class NonFiniteInput(ValueError):
    """A float that should become a rational is NaN or infinite."""


class NonHermitianInput(ValueError):
    """An operation that requires an exactly Hermitian matrix got something else."""


def _frac(x) -> Fraction:
    """Coerce to Fraction, refusing floats (which hide rounding decisions)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError(
            "floats are not accepted implicitly; use rationalize() to pick a denominator"
        )
    return Fraction(x)


class GaussianRational:
    """A complex number re + im*i with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @staticmethod
    def _coerce(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x)
        return NotImplemented

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        """|z|^2 as an exact rational."""
        return self.re * self.re + self.im * self.im

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        d = o.norm2()
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o.__truediv__(self)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"G({self.re})"
        return f"G({self.re}, {self.im})"


_ZERO = GaussianRational(0)
_ONE = GaussianRational(1)


def _entry(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction, str)):
        return GaussianRational(x)
    if isinstance(x, tuple) and len(x) == 2:
        return GaussianRational(x[0], x[1])
    raise TypeError(f"cannot use {type(x).__name__} as an exact matrix entry")


class ExactMatrix:
    """A dense matrix over the Gaussian rationals.  Immutable."""

    __slots__ = ("rows", "cols", "_e")

    def __init__(self, entries):
        rows = tuple(tuple(_entry(x) for x in row) for row in entries)
        if not rows or not rows[0]:
            raise ValueError("empty matrix")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", ncols)
        object.__setattr__(self, "_e", rows)

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "ExactMatrix":
        cols = rows if cols is None else cols
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def column(cls, entries) -> "ExactMatrix":
        return cls([[x] for x in entries])

    @classmethod
    def from_blocks(cls, grid) -> "ExactMatrix":
        """Assemble from a 2d grid of ExactMatrix blocks (shapes must tile)."""
        out = []
        for block_row in grid:
            height = block_row[0].rows
            if any(b.rows != height for b in block_row):
                raise ValueError("inconsistent block heights")
            for i in range(height):
                row = []
                for b in block_row:
                    row.extend(b._e[i])
                out.append(row)
        return cls(out)

    @classmethod
    def block_diag(cls, blocks) -> "ExactMatrix":
        blocks = list(blocks)
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        grid = [[_ZERO] * m for _ in range(n)]
        r = c = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    grid[r + i][c + j] = b._e[i][j]
            r += b.rows
            c += b.cols
        return cls(grid)

    # -- accessors ---------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij) -> GaussianRational:
        i, j = ij
        return self._e[i][j]

    def row_list(self) -> list[list[GaussianRational]]:
        """Mutable nested-list copy, for elimination algorithms."""
        return [list(r) for r in self._e]

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "ExactMatrix":
        return ExactMatrix([r[c0:c1] for r in self._e[r0:r1]])

    # -- arithmetic --------------------------------------------------------

    def _same_shape(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        self._same_shape(other)
        return ExactMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self._e, other._e)
            ]
        )

    def __sub__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        self._same_shape(other)
        return ExactMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self._e, other._e)
            ]
        )

    def __neg__(self):
        return ExactMatrix([[-a for a in r] for r in self._e])

    def __mul__(self, scalar):
        s = _entry(scalar) if not isinstance(scalar, GaussianRational) else scalar
        return ExactMatrix([[a * s for a in r] for r in self._e])

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other._e))
        return ExactMatrix(
            [
                [sum((a * b for a, b in zip(row, col)), _ZERO) for col in cols]
                for row in self._e
            ]
        )

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self._e == other._e

    def __hash__(self):
        return hash(self._e)

    @property
    def h(self) -> "ExactMatrix":
        """Conjugate transpose."""
        return ExactMatrix(
            [[self._e[i][j].conjugate() for i in range(self.rows)] for j in range(self.cols)]
        )

    @property
    def t(self) -> "ExactMatrix":
        return ExactMatrix(
            [[self._e[i][j] for i in range(self.rows)] for j in range(self.cols)]
        )

    def conj(self) -> "ExactMatrix":
        return ExactMatrix([[a.conjugate() for a in r] for r in self._e])

    def trace(self) -> GaussianRational:
        if self.rows != self.cols:
            raise ValueError("trace of a non-square matrix")
        return sum((self._e[i][i] for i in range(self.rows)), _ZERO)

    def kron(self, other: "ExactMatrix") -> "ExactMatrix":
        out = []
        for i in range(self.rows):
            for k in range(other.rows):
                row = []
                for j in range(self.cols):
                    a = self._e[i][j]
                    row.extend(a * b for b in other._e[k])
                out.append(row)
        return ExactMatrix(out)

    def is_hermitian(self) -> bool:
        if self.rows != self.cols:
            return False
        for i in range(self.rows):
            if self._e[i][i].im != 0:
                return False
            for j in range(i + 1, self.cols):
                if self._e[i][j] != self._e[j][i].conjugate():
                    return False
        return True

    def is_zero(self) -> bool:
        return all(not a for r in self._e for a in r)

    def to_complex(self) -> np.ndarray:
        return np.array(
            [[complex(a) for a in r] for r in self._e], dtype=np.complex128
        )

    def max_denominator(self) -> int:
        return max(
            max(a.re.denominator, a.im.denominator) for r in self._e for a in r
        )

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols})"


# -- conversion from floating point ---------------------------------------


def rationalize(x: float, max_denominator: int) -> Fraction:
    """Nearest rational with denominator <= max_denominator."""
    if not isfinite(x):
        raise NonFiniteInput(f"cannot rationalize {x!r}")
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    return Fraction(x).limit_denominator(max_denominator)


def exact_from_float_matrix(arr, max_denominator: int) -> ExactMatrix:
    """Rationalize a complex floating matrix entrywise."""
    arr = np.asarray(arr, dtype=np.complex128)
    return ExactMatrix(
        [
            [
                GaussianRational(
                    rationalize(float(z.real), max_denominator),
                    rationalize(float(z.imag), max_denominator),
                )
                for z in row
            ]
            for row in arr
        ]
    )


# -- positive semidefiniteness with certificate ----------------------------


class PsdCheck:
    """Outcome of an exact PSD test.

    When `is_psd`, the pivoted factorization P M P* = L D L* is returned
    (`permutation`, `lower`, `pivots`).  Otherwise `witness` is a column
    vector v with v* M v = `witness_value` < 0.
    """

    def __init__(self, is_psd, permutation=None, lower=None, pivots=None,
                 witness=None, witness_value=None):
        self.is_psd = is_psd
        self.permutation = permutation
        self.lower = lower
        self.pivots = pivots
        self.witness = witness
        self.witness_value = witness_value

    def __bool__(self):
        return self.is_psd


def psd_check_exact(m: ExactMatrix) -> PsdCheck:
    """Decide M >= 0 exactly via LDL* with largest-magnitude diagonal pivoting.

    Zero pivots are accepted only when the entire residual block is zero;
    a negative pivot (or a nonzero residual with all-zero diagonal) yields
    an explicit negativity witness.
    """
    if not m.is_hermitian():
        raise NonHermitianInput("psd_check_exact requires an exactly Hermitian matrix")
    d = m.rows
    s = m.row_list()
    perm = list(range(d))
    lower = [[_ONE if i == j else _ZERO for j in range(d)] for i in range(d)]
    pivots: list[Fraction] = []

    def swap(k, p):
        perm[k], perm[p] = perm[p], perm[k]
        s[k], s[p] = s[p], s[k]
        for row in s:
            row[k], row[p] = row[p], row[k]
        for row in lower:
            row[k], row[p] = row[p], row[k]
        lower[k], lower[p] = lower[p], lower[k]

    def witness_from(local_vec, k):
        # Solve L* v = w where w is zero on the first k coordinates and
        # equals local_vec on the trailing block; then v*(PMP*)v = w*(D+S)w.
        w = [_ZERO] * d
        for idx, val in enumerate(local_vec):
            w[k + idx] = val
        v = [_ZERO] * d
        for i in range(d - 1, -1, -1):
            acc = w[i]
            for j in range(i + 1, d):
                acc = acc - lower[j][i].conjugate() * v[j]
            v[i] = acc
        # Undo the permutation: quadratic form of M at u with u[perm[i]] = v[i].
        u = [_ZERO] * d
        for i in range(d):
            u[perm[i]] = v[i]
        return ExactMatrix.column(u)

    for k in range(d):
        # Largest-magnitude remaining diagonal entry (diagonals are real).
        p = max(range(k, d), key=lambda i: abs(s[i][i].re))
        if s[p][p].re < 0:
            swap(k, p)
            val = s[k][k].re
            wit = witness_from([_ONE], k)
            return PsdCheck(False, witness=wit, witness_value=val)
        if s[p][p].re == 0:
            # All remaining diagonals are zero: PSD iff the block vanishes.
            for i in range(k, d):
                for j in range(k, d):
                    if s[i][j]:
                        vec = [_ZERO] * (d - k)
                        vec[i - k] = s[i][j]
                        vec[j - k] = vec[j - k] - _ONE
                        val = -2 * s[i][j].norm2()
                        wit = witness_from(vec, k)
                        return PsdCheck(False, witness=wit, witness_value=val)
            pivots.extend([Fraction(0)] * (d - k))
            break
        swap(k, p)
        piv = s[k][k]
        pivots.append(piv.re)
        for i in range(k + 1, d):
            lower[i][k] = s[i][k] / piv
        for i in range(k + 1, d):
            for j in range(k + 1, d):
                s[i][j] = s[i][j] - lower[i][k] * piv * lower[j][k].conjugate()
    return PsdCheck(
        True,
        permutation=tuple(perm),
        lower=ExactMatrix(lower),
        pivots=tuple(pivots),
    )


# -- elimination-based linear algebra over Q[i] -----------------------------


def rref_exact(m: ExactMatrix) -> tuple[ExactMatrix, tuple[int, ...]]:
    """Reduced row echelon form; returns (R, pivot column indices)."""
    rows = m.row_list()
    nr, nc = m.rows, m.cols
    pivots = []
    r = 0
    for c in range(nc):
        pr = next((i for i in range(r, nr) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = _ONE / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nr):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return ExactMatrix(rows), tuple(pivots)


def rank_exact(m: ExactMatrix) -> int:
    return len(rref_exact(m)[1])


def nullspace_exact(m: ExactMatrix) -> list[ExactMatrix]:
    """Basis of the right kernel, as column vectors (deterministic order)."""
    red, pivots = rref_exact(m)
    pivot_set = set(pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    basis = []
    for f in free:
        v = [_ZERO] * m.cols
        v[f] = _ONE
        for r, c in enumerate(pivots):
            v[c] = -red[r, f]
        basis.append(ExactMatrix.column(v))
    return basis


def solve_exact(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix | None:
    """One exact solution of A x = b (columns of b solved jointly), or None."""
    if a.rows != b.rows:
        raise ValueError("incompatible shapes")
    aug = ExactMatrix.from_blocks([[a, b]])
    red, pivots = rref_exact(aug)
    if any(p >= a.cols for p in pivots):
        return None
    sol = [[_ZERO] * b.cols for _ in range(a.cols)]
    for r, c in enumerate(pivots):
        for j in range(b.cols):
            sol[c][j] = red[r, a.cols + j]
    return ExactMatrix(sol)


def independent_rows(m: ExactMatrix) -> tuple[int, ...]:
    """Indices of a maximal linearly independent subset of rows (first wins)."""
    return rref_exact(m.t)[1]


def affine_least_squares(
    a_rows: list[list[Fraction]],
    b: list[Fraction],
    x0: list[Fraction],
    weights: list[Fraction] | None = None,
) -> list[Fraction]:
    """Minimize sum_i w_i (x_i - x0_i)^2 subject to A x = b, exactly.

    All data is real rational.  The system must be consistent; redundant
    rows are allowed and are dropped via exact rank selection.
    """
    n = len(x0)
    if weights is None:
        weights = [Fraction(1)] * n
    winv = [Fraction(1) / w for w in weights]
    amat = ExactMatrix([[GaussianRational(x) for x in row] for row in a_rows])
    keep = independent_rows(amat)
    rows = [a_rows[i] for i in keep]
    rhs = [b[i] - sum(a_rows[i][j] * x0[j] for j in range(n)) for i in keep]
    k = len(rows)
    # Gram matrix A W^-1 A* restricted to the independent rows.
    gram = [
        [
            sum(rows[p][j] * winv[j] * rows[q][j] for j in range(n))
            for q in range(k)
        ]
        for p in range(k)
    ]
    mu = solve_exact(
        ExactMatrix([[GaussianRational(g) for g in row] for row in gram]),
        ExactMatrix.column([GaussianRational(v) for v in rhs]),
    )
    if mu is None:
        raise ValueError("degenerate constraint system")
    x = list(x0)
    for j in range(n):
        x[j] = x0[j] + winv[j] * sum(rows[p][j] * mu[p, 0].re for p in range(k))
    # The projection must satisfy every original row, including dropped ones.
    for row, target in zip(a_rows, b):
        if sum(row[j] * x[j] for j in range(n)) != target:
            raise ValueError("inconsistent affine constraints")
    return x


# -- real coordinates for Hermitian matrices --------------------------------
#
# Order: diagonal entries first (real), then for each i<j in lex order the
# real and imaginary parts of the (i, j) entry.


def hermitian_coordinates(m: ExactMatrix) -> list[Fraction]:
    if not m.is_hermitian():
        raise NonHermitianInput("coordinates are defined for Hermitian matrices")
    s = m.rows
    coords = [m[i, i].re for i in range(s)]
    for i in range(s):
        for j in range(i + 1, s):
            coords.append(m[i, j].re)
            coords.append(m[i, j].im)
    return coords


def hermitian_from_coordinates(s: int, coords) -> ExactMatrix:
    coords = [Fraction(c) for c in coords]
    if len(coords) != s * s:
        raise ValueError(f"expected {s * s} coordinates, got {len(coords)}")
    grid = [[_ZERO] * s for _ in range(s)]
    for i in range(s):
        grid[i][i] = GaussianRational(coords[i])
    k = s
    for i in range(s):
        for j in range(i + 1, s):
            grid[i][j] = GaussianRational(coords[k], coords[k + 1])
            grid[j][i] = grid[i][j].conjugate()
            k += 2
    return ExactMatrix(grid)


def hermitian_coordinate_weights(s: int) -> list[Fraction]:
    """Weights making coordinate dot products equal Frobenius inner products."""
    return [Fraction(1)] * s + [Fraction(2)] * (s * s - s)


def hermitian_basis(s: int) -> list[ExactMatrix]:
    """Basis of s x s Hermitian matrices in upper-triangle order.

    For each i <= j: E_ii when i = j, otherwise the symmetric pair
    E_ij + E_ji followed by -i E_ij + i E_ji.  For s = 2 this is the
    order (E_11, symmetric, antisymmetric, E_22).
    """
    out = []
    for i in range(s):
        for j in range(i, s):
            if i == j:
                grid = [[1 if (r, c) == (i, i) else 0 for c in range(s)] for r in range(s)]
                out.append(ExactMatrix(grid))
            else:
                sym = [[0] * s for _ in range(s)]
                sym[i][j] = GaussianRational(1)
                sym[j][i] = GaussianRational(1)
                anti = [[0] * s for _ in range(s)]
                anti[i][j] = GaussianRational(0, -1)
                anti[j][i] = GaussianRational(0, 1)
                out.append(ExactMatrix(sym))
                out.append(ExactMatrix(anti))
    return out
