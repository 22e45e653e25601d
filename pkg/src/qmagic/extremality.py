"""Splitting of dilations and the one-step dilation extension.

A projector u compressed from a contraction w through an isometry v,
u = v* w v with 0 <= w <= I, forces w to be block diagonal in the basis
[v, v_perp]: w = diag(u, p) with 0 <= p <= I.  Applied entrywise to a
magic square dilating a quantum permutation matrix this shows that
quantum permutation matrices only admit trivial dilations.

The extension step goes the other way: given a member square A of size s
(with a_11 - a_11^2 != 0) and a feasibility witness X with
phi(A) + X >= 0, factor phi(A) + X = B B*, read off the factor blocks
b_ij, and assemble a square A' of size s+1 whose top-left corner
compresses back to A and whose coupling column is nonzero.  A, being a
proper compression of A', is then not an Arveson extreme point.  The
pipeline is numeric throughout: matrix square roots leave the rationals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .obstruction import phi_matrix
from .structures import MagicSquare

SPLIT_TOL = 1e-8
RANK_CUTOFF = 1e-10


class InvariantViolated(ValueError):
    """An input triple fails its defining inequalities or identities."""


class DegenerateTopLeft(ValueError):
    """a_11 - a_11^2 vanishes, so no coupling vector exists."""


class RelationViolated(ValueError):
    """The Gram factor blocks do not satisfy the required products."""


# -- splitting ---------------------------------------------------------------


@dataclass(frozen=True)
class DilationTriple:
    """A projector u, a contraction 0 <= w <= I, and an isometry v with
    u = v* w v."""

    u: np.ndarray
    w: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class SplitResult:
    p: np.ndarray  # complement corner, 0 <= p <= I for valid inputs
    residual: float  # off-block mass of w in the [v, v_perp] basis
    basis: np.ndarray  # the unitary [v, v_perp]


def _complete_isometry(v: np.ndarray) -> np.ndarray:
    t, s = v.shape
    q, _ = np.linalg.qr(v, mode="complete")
    return np.hstack([v, q[:, s:]])


def _min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2).min())


def validate_triple(d: DilationTriple, tol: float = SPLIT_TOL) -> None:
    """Check the three defining conditions of a dilation triple."""
    u = np.asarray(d.u, dtype=np.complex128)
    w = np.asarray(d.w, dtype=np.complex128)
    v = np.asarray(d.v, dtype=np.complex128)
    s = u.shape[0]
    t = w.shape[0]
    if u.shape != (s, s) or w.shape != (t, t) or v.shape != (t, s) or t < s:
        raise InvariantViolated(f"shapes u{u.shape}, w{w.shape}, v{v.shape}")
    herm = max(float(np.abs(u - u.conj().T).max()), float(np.abs(w - w.conj().T).max()))
    if herm > tol:
        raise InvariantViolated(f"hermiticity residual {herm:.2e}")
    proj = float(np.abs(u @ u - u).max())
    if proj > tol:
        raise InvariantViolated(f"u is not a projector, residual {proj:.2e}")
    iso = float(np.abs(v.conj().T @ v - np.eye(s)).max())
    if iso > tol:
        raise InvariantViolated(f"v is not an isometry, residual {iso:.2e}")
    lo = _min_eig(w)
    hi = _min_eig(np.eye(t) - w)
    if lo < -tol or hi < -tol:
        raise InvariantViolated(f"w outside [0, I]: eigenvalue bounds {lo:.2e}, {hi:.2e}")
    corner = float(np.abs(v.conj().T @ w @ v - u).max())
    if corner > tol:
        raise InvariantViolated(f"v* w v != u, residual {corner:.2e}")


def split_decompose(d: DilationTriple, tol: float = SPLIT_TOL) -> SplitResult:
    """Split w = diag(u, p) in the basis [v, v_perp].

    Valid triples split with off-block residual at roundoff scale; the
    returned p satisfies 0 <= p <= I up to the same scale.  Inputs that
    fail the triple invariants raise InvariantViolated.
    """
    validate_triple(d, tol)
    w = np.asarray(d.w, dtype=np.complex128)
    v = np.asarray(d.v, dtype=np.complex128)
    s = v.shape[1]
    basis = _complete_isometry(v)
    tilted = basis.conj().T @ w @ basis
    off = tilted[s:, :s]
    residual = float(np.abs(off).max()) if off.size else 0.0
    p = tilted[s:, s:]
    return SplitResult(p=p, residual=residual, basis=basis)


@dataclass(frozen=True)
class SplitReport:
    """Entrywise splitting of a magic square dilating a quantum permutation."""

    ok: bool
    worst_residual: float
    corners: dict  # (i, j) -> complement block c_ij
    basis: np.ndarray


def arveson_split_check(
    u_square: MagicSquare, a_square, v, tol: float = SPLIT_TOL
) -> SplitReport:
    """Certify that a dilation of a quantum permutation matrix is trivial.

    Requires u_ij = v* a_ij v entrywise with every u_ij a projector and
    every a_ij in [0, I].  The report confirms a_ij = diag(u_ij, c_ij)
    in the common basis [v, v_perp].
    """
    n = u_square.n
    if isinstance(a_square, MagicSquare):
        blocks = [[np.asarray(a_square.to_float().block(i, j)) for j in range(n)] for i in range(n)]
    else:
        blocks = [[np.asarray(b, dtype=np.complex128) for b in row] for row in a_square]
    v = np.asarray(v, dtype=np.complex128)
    uf = u_square.to_float()
    worst = 0.0
    corners = {}
    basis = _complete_isometry(v)
    s = v.shape[1]
    for i in range(n):
        for j in range(n):
            triple = DilationTriple(np.asarray(uf.block(i, j)), blocks[i][j], v)
            result = split_decompose(triple, tol)
            worst = max(worst, result.residual)
            corners[(i, j)] = result.basis.conj().T @ blocks[i][j] @ result.basis
            corners[(i, j)] = corners[(i, j)][s:, s:]
    return SplitReport(ok=worst <= tol, worst_residual=worst, corners=corners, basis=basis)


# -- the extension step ------------------------------------------------------


@dataclass(frozen=True)
class ExtensionStep:
    """One dilation-extension move from size s to size s + 1."""

    square: MagicSquare  # the input A
    b_blocks: dict  # (i, j) -> t x s Gram factor block
    v: np.ndarray  # coupling vector, v* b_11* b_11 v = 1
    p_blocks: dict  # (i, j) -> pseudo-inverse of a_ij^(1/2)
    c: np.ndarray  # 3 x 3 nonnegative completion weights
    row_sums: tuple  # s_{i*}
    col_sums: tuple  # s_{*j}
    total: float  # s = sum_j (1 - s_{*j})
    extended: MagicSquare  # A' of block size s + 1


def _sqrt_and_pinv(block: np.ndarray, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    lam, vecs = np.linalg.eigh((block + block.conj().T) / 2)
    lam = np.clip(lam, 0, None)
    top = float(lam.max()) if lam.size else 0.0
    keep = lam > cutoff * max(top, 1e-300)
    root = (vecs * np.sqrt(lam)) @ vecs.conj().T
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, lam, 1.0)), 0.0)
    pinv = (vecs * inv) @ vecs.conj().T
    return root, pinv


def _sum_kernel_projector(n: int, s: int) -> np.ndarray:
    """Projector onto the orthocomplement of the row/column sum functionals.

    For any Gram matrix of factor blocks with vanishing row and column
    sums, the vectors sum_j e_i (x) e_j (x) xi and sum_i e_i (x) e_j (x) xi
    lie in the kernel.  Compressing onto their orthocomplement before
    factoring removes roundoff mass along these directions, which would
    otherwise surface as sqrt(eps)-size residuals in the sum identities.
    """
    d = n * n * s
    cols = np.zeros((d, 2 * n * s), dtype=np.complex128)
    for i in range(n):
        for idx in range(s):
            for j in range(n):
                cols[(i * n + j) * s + idx, 2 * (i * s + idx)] = 1.0
                cols[(j * n + i) * s + idx, 2 * (i * s + idx) + 1] = 1.0
    u, sv, _ = np.linalg.svd(cols, full_matrices=False)
    q = u[:, sv > 1e-9 * sv[0]]
    return np.eye(d) - q @ q.conj().T


def extend_dilation_step(
    a: MagicSquare,
    x: np.ndarray,
    tol: float = SPLIT_TOL,
    rank_cutoff: float = RANK_CUTOFF,
) -> ExtensionStep:
    """Extend a 3x3 member square by one dimension using a witness X.

    Factors phi(A) + X = B B* by eigendecomposition, verifies the block
    relations b_ik* b_il = delta a_ik - a_ik a_il (rows), the column
    analogue, and the vanishing row/column sums, then assembles

        a'_ij = [[a_ij,            b_ij* b_11 v],
                 [v* b_11* b_ij,   v* b_11* b_ij p_ij^2 b_ij* b_11 v + c_ij]]

    with the completion weights c_ij = (1 - s_i*)(1 - s_*j)/s.  The
    output validates as a magic square of block size s + 1 and its
    top-left corner compresses back to A.
    """
    flo = a.to_float() if a.exact else a
    n, s = a.n, a.s
    if n != 3:
        raise ValueError(f"the extension step is defined for n=3, got n={n}")
    blocks = [[np.asarray(flo.block(i, j)) for j in range(n)] for i in range(n)]
    a11 = blocks[0][0]
    h = a11 - a11 @ a11
    lam_h, vec_h = np.linalg.eigh((h + h.conj().T) / 2)
    if float(lam_h.max()) <= 1e-8:
        raise DegenerateTopLeft(
            f"a_11 - a_11^2 has top eigenvalue {float(lam_h.max()):.2e}"
        )

    x = np.asarray(x, dtype=np.complex128)
    m = phi_matrix(flo) + x
    m = (m + m.conj().T) / 2
    lam, vecs = np.linalg.eigh(m)
    if float(lam.min()) < -1e-6:
        raise RelationViolated(f"phi(A) + X has eigenvalue {float(lam.min()):.2e}")
    # A Gram matrix of the required form kills the sum functionals exactly,
    # so compress onto their orthocomplement before factoring; the drift
    # this introduces is itself a sum-identity residual and is gated below.
    pi = _sum_kernel_projector(n, s)
    mt = pi @ m @ pi
    mt = (mt + mt.conj().T) / 2
    drift = float(np.abs(mt - m).max())
    lam, vecs = np.linalg.eigh(mt)
    keep = lam > rank_cutoff * max(float(lam.max()), 1e-300)
    factor = vecs[:, keep] * np.sqrt(lam[keep])  # m = factor factor* up to drift
    b = {}
    for i in range(n):
        for j in range(n):
            r = (i * n + j) * s
            b[(i, j)] = factor[r : r + s, :].conj().T  # t x s

    worst = drift
    where = ("sum", "kernel")
    for i in range(n):
        for k in range(n):
            for l in range(n):
                target = -blocks[i][k] @ blocks[i][l]
                if k == l:
                    target = blocks[i][k] + target
                resid = float(np.abs(b[(i, k)].conj().T @ b[(i, l)] - target).max())
                if resid > worst:
                    worst, where = resid, ("row", i, k, l)
    for j in range(n):
        for i in range(n):
            for k in range(n):
                if i == k:
                    continue
                target = -blocks[i][j] @ blocks[k][j]
                resid = float(np.abs(b[(i, j)].conj().T @ b[(k, j)] - target).max())
                if resid > worst:
                    worst, where = resid, ("column", j, i, k)
    for i in range(n):
        srow = sum(b[(i, j)] for j in range(n))
        scol = sum(b[(j, i)] for j in range(n))
        resid = max(float(np.abs(srow).max()), float(np.abs(scol).max()))
        if resid > worst:
            worst, where = resid, ("sum", i)
    if worst > tol:
        raise RelationViolated(f"factor relations fail at {where}, residual {worst:.2e}")

    v = vec_h[:, -1] / np.sqrt(lam_h[-1])
    p = {}
    g = np.zeros((n, n))
    w = {}
    for i in range(n):
        for j in range(n):
            _, pinv = _sqrt_and_pinv(blocks[i][j], rank_cutoff)
            p[(i, j)] = pinv
            w[(i, j)] = b[(i, j)].conj().T @ (b[(0, 0)] @ v)
            g[i, j] = float(np.linalg.norm(pinv @ w[(i, j)]) ** 2)
    row_sums = tuple(float(g[i, :].sum()) for i in range(n))
    col_sums = tuple(float(g[:, j].sum()) for j in range(n))
    total = float(n - g.sum())
    c = np.zeros((n, n))
    if total > 1e-12:
        for i in range(n):
            for j in range(n):
                c[i, j] = (1 - row_sums[i]) * (1 - col_sums[j]) / total

    extended = []
    for i in range(n):
        row = []
        for j in range(n):
            top = np.hstack([blocks[i][j], w[(i, j)].reshape(s, 1)])
            bottom = np.hstack(
                [w[(i, j)].conj().reshape(1, s), [[g[i, j] + c[i, j]]]]
            )
            row.append(np.vstack([top, bottom]))
        extended.append(row)
    big = MagicSquare(extended, tol=tol)
    return ExtensionStep(
        square=a,
        b_blocks=b,
        v=v,
        p_blocks=p,
        c=c,
        row_sums=row_sums,
        col_sums=col_sums,
        total=total,
        extended=big,
    )


# -- samplers for property suites --------------------------------------------


def make_projector_dilation(
    rng: np.random.Generator, s: int, t: int
) -> DilationTriple:
    """A genuine projector dilation: w a projector on t dims, v an isometry
    mixing range(w) and ker(w) columns so that u = v* w v is a projector."""
    from .sampling import random_unitary

    basis = random_unitary(rng, t)
    rank = int(rng.integers(1, t))
    w = basis[:, :rank] @ basis[:, :rank].conj().T
    k = int(rng.integers(0, s + 1))  # columns taken from range(w)
    k = min(k, rank)
    k = max(k, s - (t - rank))  # remaining columns must fit in ker(w)
    cols = np.hstack([basis[:, :k], basis[:, rank : rank + (s - k)]])
    mix = random_unitary(rng, s)
    v = cols @ mix
    u = v.conj().T @ w @ v
    return DilationTriple(u=u, w=w, v=v)
