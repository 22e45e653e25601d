"""Magic squares over matrix algebras and the constructions that preserve them.

A quantum magic square is an n x n array of s x s PSD Hermitian blocks whose
rows and columns each sum to the identity.  Squares carry either an exact
(Gaussian-rational) or a floating representation; the two never mix silently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .exact import ExactMatrix, GaussianRational, psd_check_exact

__all__ = [
    "ShapeMismatch",
    "SizeMismatch",
    "NotAnIsometry",
    "MixedRepresentation",
    "InvalidMagicSquare",
    "CompletionNotPSD",
    "Violation",
    "ValidationReport",
    "MagicSquare",
    "validate_magic",
    "validate_quantum_permutation",
    "compress",
    "direct_sum",
    "embed_pad",
    "complete_corner",
    "constant_square",
    "permutations_lex",
    "perm_rank",
    "perm_unrank",
    "perm_matrix_exact",
    "perm_matrix_float",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-9


class ShapeMismatch(ValueError):
    """Blocks do not form an n x n array of equal square matrices."""


class SizeMismatch(ValueError):
    """Two squares that must share a parameter do not."""


class NotAnIsometry(ValueError):
    """V*V differs from the identity beyond tolerance."""


class MixedRepresentation(TypeError):
    """Exact and floating data met in one operation; convert explicitly."""


class InvalidMagicSquare(ValueError):
    """Construction-time validation failed; carries the report."""

    def __init__(self, report):
        super().__init__(f"not a magic square: {report.violations}")
        self.report = report


class CompletionNotPSD(ValueError):
    """A block completed by complete_corner is not PSD."""

    def __init__(self, offending):
        super().__init__(f"completed blocks not PSD at {sorted(offending)}")
        self.offending = offending


# -- permutations -----------------------------------------------------------


def permutations_lex(n: int) -> list[tuple[int, ...]]:
    """All permutations of {0..n-1} in lexicographic one-line order."""
    return list(itertools.permutations(range(n)))


def perm_rank(sigma: tuple[int, ...]) -> int:
    """Lexicographic rank of a permutation (0-based)."""
    n = len(sigma)
    remaining = sorted(sigma)
    if remaining != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {sigma}")
    rank = 0
    for i, v in enumerate(sigma):
        rank += remaining.index(v) * factorial(n - 1 - i)
        remaining.remove(v)
    return rank


def perm_unrank(n: int, rank: int) -> tuple[int, ...]:
    if not 0 <= rank < factorial(n):
        raise ValueError(f"rank {rank} out of range for n={n}")
    remaining = list(range(n))
    out = []
    for i in range(n):
        f = factorial(n - 1 - i)
        out.append(remaining.pop(rank // f))
        rank %= f
    return tuple(out)


def perm_matrix_exact(sigma: tuple[int, ...]) -> ExactMatrix:
    """Matrix with a 1 at (i, sigma(i)) for each i."""
    n = len(sigma)
    return ExactMatrix([[1 if sigma[i] == j else 0 for j in range(n)] for i in range(n)])


def perm_matrix_float(sigma: tuple[int, ...]) -> np.ndarray:
    n = len(sigma)
    p = np.zeros((n, n))
    p[range(n), sigma] = 1.0
    return p


# -- block coercion ---------------------------------------------------------

_EXACT_SCALARS = (int, Fraction, GaussianRational)


def _coerce_block(b):
    """Return (block, is_exact) for a single block of raw input."""
    if isinstance(b, ExactMatrix):
        return b, True
    if isinstance(b, np.ndarray):
        return np.asarray(b, dtype=np.complex128), False
    rows = list(b)
    flat = [x for row in rows for x in row]
    if all(isinstance(x, _EXACT_SCALARS) for x in flat):
        return ExactMatrix(rows), True
    return np.array(rows, dtype=np.complex128), False


def _coerce_blocks(blocks):
    """Normalize raw input into (n, s, exact, tuple-of-tuples of blocks)."""
    outer = [list(row) for row in blocks]
    n = len(outer)
    if n == 0 or any(len(row) != n for row in outer):
        raise ShapeMismatch("blocks must form an n x n array")
    coerced, tags = [], []
    for row in outer:
        crow = []
        for b in row:
            cb, tag = _coerce_block(b)
            crow.append(cb)
            tags.append(tag)
        coerced.append(crow)
    if len(set(tags)) > 1:
        raise MixedRepresentation("blocks mix exact and floating entries")
    exact = tags[0]
    shapes = {
        (b.rows, b.cols) if exact else b.shape for row in coerced for b in row
    }
    if len(shapes) != 1:
        raise ShapeMismatch(f"inconsistent block shapes: {sorted(shapes)}")
    (r, c) = shapes.pop()
    if r != c:
        raise ShapeMismatch("blocks must be square")
    return n, r, exact, tuple(tuple(row) for row in coerced)


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str  # "not_hermitian" | "block_not_psd" | "row_sum" | "col_sum"
    location: tuple
    margin: object  # numeric residual / eigenvalue, or exact witness value


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    tol: float
    violations: tuple[Violation, ...] = field(default_factory=tuple)


def _psd_violation(block, exact, loc, tol):
    if exact:
        if not block.is_hermitian():
            return Violation("not_hermitian", loc, "exact")
        res = psd_check_exact(block)
        if not res.is_psd:
            return Violation("block_not_psd", loc, res.witness_value)
        return None
    herm_resid = float(np.abs(block - block.conj().T).max())
    if herm_resid > tol:
        return Violation("not_hermitian", loc, herm_resid)
    lam = float(np.linalg.eigvalsh((block + block.conj().T) / 2).min())
    if lam < -tol:
        return Violation("block_not_psd", loc, lam)
    return None


def validate_magic(blocks, *, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check the magic-square axioms; report every violation with its margin."""
    n, s, exact, grid = _coerce_blocks(blocks)
    violations = []
    for i in range(n):
        for j in range(n):
            v = _psd_violation(grid[i][j], exact, (i, j), tol)
            if v:
                violations.append(v)
    ident = ExactMatrix.identity(s) if exact else np.eye(s)
    for i in range(n):
        rs = grid[i][0]
        for j in range(1, n):
            rs = rs + grid[i][j]
        if exact:
            if rs != ident:
                violations.append(Violation("row_sum", (i,), "exact"))
        else:
            resid = float(np.abs(rs - ident).max())
            if resid > tol:
                violations.append(Violation("row_sum", (i,), resid))
    for j in range(n):
        cs = grid[0][j]
        for i in range(1, n):
            cs = cs + grid[i][j]
        if exact:
            if cs != ident:
                violations.append(Violation("col_sum", (j,), "exact"))
        else:
            resid = float(np.abs(cs - ident).max())
            if resid > tol:
                violations.append(Violation("col_sum", (j,), resid))
    return ValidationReport(not violations, tol, tuple(violations))


class MagicSquare:
    """A validated quantum magic square.  Immutable."""

    __slots__ = ("n", "s", "exact", "blocks")

    def __init__(self, blocks, *, tol: float = DEFAULT_TOL):
        n, s, exact, grid = _coerce_blocks(blocks)
        report = validate_magic(grid, tol=tol)
        if not report.ok:
            raise InvalidMagicSquare(report)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "exact", exact)
        object.__setattr__(self, "blocks", grid)

    def __setattr__(self, name, value):
        raise AttributeError("MagicSquare is immutable")

    def block(self, i: int, j: int):
        return self.blocks[i][j]

    def to_float(self) -> "MagicSquare":
        if not self.exact:
            return self
        return MagicSquare(
            [[b.to_complex() for b in row] for row in self.blocks]
        )

    def __eq__(self, other):
        if not isinstance(other, MagicSquare):
            return NotImplemented
        if (self.n, self.s, self.exact) != (other.n, other.s, other.exact):
            return False
        if self.exact:
            return self.blocks == other.blocks
        return all(
            np.array_equal(a, b)
            for ra, rb in zip(self.blocks, other.blocks)
            for a, b in zip(ra, rb)
        )

    def __repr__(self):
        tag = "exact" if self.exact else "float"
        return f"MagicSquare(n={self.n}, s={self.s}, {tag})"


def validate_quantum_permutation(
    a: MagicSquare, *, tol: float = DEFAULT_TOL
) -> ValidationReport:
    """Check projector and row/column orthogonality identities on a magic square.

    Both identity families are verified independently even though orthogonality
    follows from projectivity for magic squares.
    """
    violations = []

    def resid(m):
        if a.exact:
            return None if m.is_zero() else "exact"
        r = float(np.linalg.norm(m))
        return None if r <= tol else r

    for i in range(a.n):
        for j in range(a.n):
            b = a.block(i, j)
            r = resid(b @ b - b)
            if r is not None:
                violations.append(Violation("projector", (i, j), r))
    for i in range(a.n):
        for j in range(a.n):
            for k in range(j + 1, a.n):
                r = resid(a.block(i, j) @ a.block(i, k))
                if r is not None:
                    violations.append(Violation("row_orthogonality", (i, j, k), r))
                r = resid(a.block(j, i) @ a.block(k, i))
                if r is not None:
                    violations.append(Violation("col_orthogonality", (i, j, k), r))
    return ValidationReport(not violations, tol, tuple(violations))


# -- constructions ----------------------------------------------------------


def compress(a: MagicSquare, v, *, tol: float = DEFAULT_TOL) -> MagicSquare:
    """Compress every block by an isometry: blocks become V* a_ij V."""
    if isinstance(v, ExactMatrix):
        if not a.exact:
            raise MixedRepresentation("exact isometry on a floating square")
        if v.h @ v != ExactMatrix.identity(v.cols):
            raise NotAnIsometry("V*V != I exactly")
        return MagicSquare(
            [[v.h @ b @ v for b in row] for row in a.blocks], tol=tol
        )
    v = np.asarray(v, dtype=np.complex128)
    if a.exact:
        raise MixedRepresentation("floating isometry on an exact square")
    if v.shape[0] != a.s:
        raise NotAnIsometry(f"isometry domain {v.shape} does not match block size {a.s}")
    resid = float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max())
    if resid > tol:
        raise NotAnIsometry(f"V*V - I residual {resid:.2e} exceeds tol")
    return MagicSquare(
        [[v.conj().T @ b @ v for b in row] for row in a.blocks], tol=tol
    )


def direct_sum(a: MagicSquare, b: MagicSquare, *, tol: float = DEFAULT_TOL) -> MagicSquare:
    """Blockwise diag(a_ij, b_ij); block size adds."""
    if a.n != b.n:
        raise SizeMismatch(f"direct_sum needs equal n, got {a.n} and {b.n}")
    if a.exact != b.exact:
        raise MixedRepresentation("direct_sum across representations")
    if a.exact:
        grid = [
            [ExactMatrix.block_diag([x, y]) for x, y in zip(ra, rb)]
            for ra, rb in zip(a.blocks, b.blocks)
        ]
    else:
        grid = [
            [
                np.block(
                    [
                        [x, np.zeros((a.s, b.s))],
                        [np.zeros((b.s, a.s)), y],
                    ]
                )
                for x, y in zip(ra, rb)
            ]
            for ra, rb in zip(a.blocks, b.blocks)
        ]
    return MagicSquare(grid, tol=tol)


def embed_pad(a: MagicSquare, *, tol: float = DEFAULT_TOL) -> MagicSquare:
    """Extend to size n+1 by adjoining an identity corner: [[A, 0], [0, I_s]]."""
    if a.exact:
        zero, ident = ExactMatrix.zeros(a.s), ExactMatrix.identity(a.s)
    else:
        zero, ident = np.zeros((a.s, a.s)), np.eye(a.s)
    grid = [list(row) + [zero] for row in a.blocks]
    grid.append([zero] * a.n + [ident])
    return MagicSquare(grid, tol=tol)


def complete_corner(corner, *, tol: float = DEFAULT_TOL) -> MagicSquare:
    """Fill a 2x2 corner to the unique 3x3 magic square it determines.

    a_i3 and a_3j absorb the row/column defects and a_33 = a_11+a_12+a_21+a_22-I.
    Raises CompletionNotPSD listing every completed block that fails PSD.
    """
    rows = [list(r) for r in corner]
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ShapeMismatch("corner must be a 2x2 array of blocks")
    coerced = [[_coerce_block(b) for b in r] for r in rows]
    tags = {t for r in coerced for (_, t) in r}
    if len(tags) > 1:
        raise MixedRepresentation("corner mixes exact and floating blocks")
    exact = tags.pop()
    c = [[b for (b, _) in r] for r in coerced]
    s = c[0][0].rows if exact else c[0][0].shape[0]
    ident = ExactMatrix.identity(s) if exact else np.eye(s)
    grid = [
        [c[0][0], c[0][1], ident - c[0][0] - c[0][1]],
        [c[1][0], c[1][1], ident - c[1][0] - c[1][1]],
        [
            ident - c[0][0] - c[1][0],
            ident - c[0][1] - c[1][1],
            c[0][0] + c[0][1] + c[1][0] + c[1][1] - ident,
        ],
    ]
    completed = [(0, 2), (1, 2), (2, 0), (2, 1), (2, 2)]
    offending = [
        loc for loc in completed
        if _psd_violation(grid[loc[0]][loc[1]], exact, loc, tol) is not None
    ]
    if offending:
        raise CompletionNotPSD(offending)
    return MagicSquare(grid, tol=tol)


def constant_square(n: int, s: int, *, exact: bool = True) -> MagicSquare:
    """The square with every block (1/n) I_s."""
    if exact:
        b = ExactMatrix.identity(s) * Fraction(1, n)
    else:
        b = np.eye(s) / n
    return MagicSquare([[b for _ in range(n)] for _ in range(n)])
