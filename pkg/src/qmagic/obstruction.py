"""Membership obstruction for the matrix convex hull of quantum permutations.

For a magic square A = (a_ij) with s x s blocks, stack the blocks into

    col(A)  = sum_ij e_i (x) e_j (x) a_ij              (n^2 s  x  s)
    diag(A) = blockdiag(a_11, a_12, ..., a_nn)         (n^2 s  x  n^2 s)

with index pairs ordered lexicographically, and set

    phi(A) = diag(A) - col(A) col(A)*.

For n >= 3 there is a correction term supported on off-diagonal slots,

    psi(A) = sum_{i!=j, k!=l} E_ij (x) E_kl (x)
             (-alpha I + beta a_ik + beta a_jl + gamma a_il + gamma a_jk),

    alpha = 1/((n-1)(n-2)),  beta = (n-1)/(n(n-2)),  gamma = 1/(n(n-2)),

chosen so that (phi(A) + psi(A))(e (x) e_i (x) I_s) = 0 for the all-ones
vector e.  Write Z for the zero-diagonal matrices in Mat_n and Z_e for
the subspace of Z annihilating e on both sides.  If A admits a dilation
to a quantum permutation matrix then both of the following hold:

    weak:    exists X in (Z (x) Z (x) Mat_s)_her      phi(A) + X >= 0
    strong:  exists X in (Z_e (x) Z_e (x) Mat_s)_her  phi(A) + psi(A) + X >= 0

and the two formulas are equivalent for every magic square.  Hence an
infeasibility certificate for either pencil proves that A is not in the
matrix convex hull.  Certificates are located numerically and then
re-verified over Q[i]: a Hermitian Y >= 0 with trace(Y B_j) = 0 for
every direction B_j and trace(Y B_0) < 0, all in exact arithmetic.

A "yes" from the obstruction check is not a membership proof; it only
reports that this particular obstruction is silent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np

from .exact import (
    ExactMatrix,
    GaussianRational,
    affine_least_squares,
    hermitian_basis,
    hermitian_coordinate_weights,
    hermitian_coordinates,
    hermitian_from_coordinates,
    nullspace_exact,
    psd_check_exact,
    rationalize,
)
from .sdp import DEFAULT_EPS, SdpProblem, SdpResult, Status, solve_feasibility
from .structures import DEFAULT_TOL, MagicSquare, complete_corner

if TYPE_CHECKING:
    from .semiclassical import CommutingDilation

WEAK = "weak"
STRONG = "strong"

DENOMINATOR_LADDER = (10**3, 10**6, 10**9)


class NotDefinedForSmallN(ValueError):
    """The requested construction needs a larger square side."""


class CertificateNotFound(RuntimeError):
    """The obstruction pencil is feasible; no dual certificate exists."""


class CertificateSearchInconclusive(RuntimeError):
    """The solver could not resolve the pencil either way."""


class CertificationFailed(ValueError):
    """Exact verification of a rationalized certificate broke.

    `condition` names the first failing check ("psd" or "negativity"),
    `margin` quantifies it: a negative quadratic form value for "psd",
    the nonnegative exact pairing trace(Y B_0) for "negativity".  A
    larger denominator bound or a better numeric Y may still succeed.
    """

    def __init__(self, condition: str, margin):
        super().__init__(f"exact certification failed at {condition} (margin {margin})")
        self.condition = condition
        self.margin = margin


# -- stacked column, block diagonal, phi, psi --------------------------------


def col_and_diag(a: MagicSquare):
    """Stacked column col(A) and block diagonal diag(A), lexicographic order.

    Exact squares give exact matrices, float squares give complex arrays.
    """
    n, s = a.n, a.s
    if a.exact:
        col = ExactMatrix.from_blocks(
            [[a.block(i, j)] for i in range(n) for j in range(n)]
        )
        diag = ExactMatrix.block_diag(
            a.block(i, j) for i in range(n) for j in range(n)
        )
        return col, diag
    d = n * n * s
    col = np.zeros((d, s), dtype=np.complex128)
    diag = np.zeros((d, d), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            blk = np.asarray(a.block(i, j))
            r = (i * n + j) * s
            col[r : r + s, :] = blk
            diag[r : r + s, r : r + s] = blk
    return col, diag


def phi_matrix(a: MagicSquare):
    """diag(A) - col(A) col(A)*, Hermitian of size n^2 s."""
    col, diag = col_and_diag(a)
    if a.exact:
        return diag - col @ col.h
    return diag - col @ col.conj().T


def psi_matrix(a: MagicSquare):
    """The off-diagonal correction term; defined for n >= 3.

    Supported only on slots E_ij (x) E_kl with i != j and k != l, and
    built so that (phi(A) + psi(A)) kills e (x) e_i (x) I_s for all i.
    """
    n, s = a.n, a.s
    if n < 3:
        raise NotDefinedForSmallN(f"correction term needs n >= 3, got n={n}")
    alpha = Fraction(1, (n - 1) * (n - 2))
    beta = Fraction(n - 1, n * (n - 2))
    gamma = Fraction(1, n * (n - 2))
    d = n * n * s
    if a.exact:
        eye = ExactMatrix.identity(s)
        grid = [[GaussianRational(0)] * d for _ in range(d)]
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for k in range(n):
                    for l in range(n):
                        if k == l:
                            continue
                        blk = (
                            (-alpha) * eye
                            + beta * (a.block(i, k) + a.block(j, l))
                            + gamma * (a.block(i, l) + a.block(j, k))
                        )
                        r0 = (i * n + k) * s
                        c0 = (j * n + l) * s
                        for r in range(s):
                            for c in range(s):
                                grid[r0 + r][c0 + c] = blk[r, c]
        return ExactMatrix(grid)
    out = np.zeros((d, d), dtype=np.complex128)
    eye = np.eye(s)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for k in range(n):
                for l in range(n):
                    if k == l:
                        continue
                    blk = (
                        -float(alpha) * eye
                        + float(beta) * (np.asarray(a.block(i, k)) + np.asarray(a.block(j, l)))
                        + float(gamma) * (np.asarray(a.block(i, l)) + np.asarray(a.block(j, k)))
                    )
                    out[(i * n + k) * s : (i * n + k + 1) * s,
                        (j * n + l) * s : (j * n + l + 1) * s] = blk
    return out


# -- variable spaces ---------------------------------------------------------


def _unit(n: int, i: int, j: int) -> ExactMatrix:
    return ExactMatrix(
        [[1 if (r, c) == (i, j) else 0 for c in range(n)] for r in range(n)]
    )


def z_basis(n: int) -> list[ExactMatrix]:
    """Basis of the zero-diagonal matrices: E_ij for i != j, lex order."""
    if n < 2:
        raise NotDefinedForSmallN(f"zero-diagonal space is trivial for n={n}")
    return [_unit(n, i, j) for i in range(n) for j in range(n) if i != j]


def ze_basis(n: int) -> list[ExactMatrix]:
    """Exact basis of zero-diagonal matrices with vanishing row and column sums.

    Computed as the rational nullspace of the row/column sum functionals on
    the off-diagonal coordinates; the complex dimension is n^2 - 3n + 1.
    """
    if n < 3:
        raise NotDefinedForSmallN(f"need n >= 3 for a nonzero space, got n={n}")
    slots = [(i, j) for i in range(n) for j in range(n) if i != j]
    rows = []
    for i in range(n):
        rows.append([1 if p == i else 0 for (p, q) in slots])
    for j in range(n):
        rows.append([1 if q == j else 0 for (p, q) in slots])
    kernel = nullspace_exact(ExactMatrix(rows))
    out = []
    for vec in kernel:
        grid = [[GaussianRational(0)] * n for _ in range(n)]
        for idx, (p, q) in enumerate(slots):
            grid[p][q] = vec[idx, 0]
        out.append(ExactMatrix(grid))
    expected = n * n - 3 * n + 1
    if len(out) != expected:
        raise RuntimeError(f"kernel dimension {len(out)}, expected {expected}")
    e = ExactMatrix.column([1] * n)
    for z in out:
        if not (z @ e).is_zero() or not (z.h @ e).is_zero():
            raise RuntimeError("basis element does not annihilate the all-ones vector")
    return out


def _hermitian_generator_3() -> ExactMatrix:
    """The Hermitian generator of the n=3 doubly-null space, [[0,i,-i],...]."""
    z = GaussianRational(0)
    pi = GaussianRational(0, 1)
    mi = GaussianRational(0, -1)
    return ExactMatrix([[z, pi, mi], [mi, z, pi], [pi, mi, z]])


# -- the two pencils ---------------------------------------------------------


@dataclass(frozen=True)
class ObstructionProblem:
    """A feasibility pencil B_0 + sum_j x_j B_j >= 0 over a tensor space.

    `directions_exact` carries the B_j over Q[i], aligned one-to-one with
    `pencil.directions`; `b0_exact` is present only for exact squares.
    """

    square: MagicSquare
    mode: str
    pencil: SdpProblem
    b0_exact: ExactMatrix | None
    directions_exact: tuple[ExactMatrix, ...]

    @property
    def dim(self) -> int:
        return self.pencil.dim

    def labels(self) -> list[str]:
        return [f"B{j + 1}" for j in range(len(self.directions_exact))]


@dataclass(frozen=True)
class ObstructionCertificate:
    """An exact dual certificate of non-membership.

    y_exact >= 0 with trace(y B_j) = 0 for every pencil direction and
    trace(y B_0) < 0, everything over Q[i].
    """

    n: int
    s: int
    mode: str
    y_exact: ExactMatrix
    pairings: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ObstructionCheckResult:
    verdict: str  # "yes" | "no" | "inconclusive"
    problem: ObstructionProblem
    solver: SdpResult
    x: np.ndarray | None = None  # numeric X with B0 + X >= -eps on "yes"
    y: np.ndarray | None = None  # numeric dual witness on "no"


def _weak_directions(n: int, s: int) -> list[ExactMatrix]:
    """Hermitian basis of Z (x) Z (x) Her_s, real dimension (n^2-n)^2 s^2.

    Ordered slot pairs come in conjugate-transpose partners
    ((i,j),(k,l)) <-> ((j,i),(l,k)); each canonical pair contributes the
    symmetric and antisymmetric Hermitian combinations for every block
    basis element.
    """
    herm = hermitian_basis(s)
    slots = [(i, j) for i in range(n) for j in range(n) if i != j]
    iunit = GaussianRational(0, 1)
    seen = set()
    out = []
    for ij in slots:
        for kl in slots:
            partner = ((ij[1], ij[0]), (kl[1], kl[0]))
            if partner in seen:
                continue
            seen.add((ij, kl))
            t2 = _unit(n, *ij).kron(_unit(n, *kl))
            for h in herm:
                t = t2.kron(h)
                out.append(t + t.h)
                ti = iunit * t
                out.append(ti + ti.h)
    return out


def _strong_candidates(n: int, s: int) -> list[ExactMatrix]:
    """Hermitian spanning set of Z_e (x) Z_e (x) Her_s.

    For n = 3 the doubly-null space has the Hermitian generator g, so
    g (x) g (x) h is already Hermitian and the set is a basis in the
    fixed block order (diagonal units and symmetric/antisymmetric
    off-diagonal pairs).  For n >= 4 the generators are not Hermitian
    and the symmetric/antisymmetric combinations overshoot by a factor
    of two; the pencil deduplication keeps a basis.
    """
    herm = hermitian_basis(s)
    if n == 3:
        g = _hermitian_generator_3()
        gg = g.kron(g)
        return [gg.kron(h) for h in herm]
    iunit = GaussianRational(0, 1)
    out = []
    for za in ze_basis(n):
        for zb in ze_basis(n):
            t2 = za.kron(zb)
            for h in herm:
                t = t2.kron(h)
                out.append(t + t.h)
                ti = iunit * t
                out.append(ti + ti.h)
    return out


def build_obstruction(a: MagicSquare, mode: str = STRONG) -> ObstructionProblem:
    """Assemble the weak or strong feasibility pencil for a magic square.

    Weak uses constant part phi(A) with variables in Z (x) Z (x) Her_s;
    strong uses phi(A) + psi(A) with variables in Z_e (x) Z_e (x) Her_s.
    In strong mode the kernel identity on e (x) e_i (x) I_s is verified
    at build time.
    """
    if mode not in (WEAK, STRONG):
        raise ValueError(f"mode must be {WEAK!r} or {STRONG!r}, got {mode!r}")
    n, s = a.n, a.s
    if mode == WEAK and n < 2:
        raise NotDefinedForSmallN("weak pencil needs n >= 2")
    if mode == WEAK:
        b0 = phi_matrix(a)
        candidates = _weak_directions(n, s)
        expected = (n * n - n) ** 2 * s * s
    else:
        b0 = phi_matrix(a) + psi_matrix(a)
        candidates = _strong_candidates(n, s)
        expected = (n * n - 3 * n + 1) ** 2 * s * s
    exact = a.exact
    f0 = b0.to_complex() if exact else b0
    pencil = SdpProblem(f0, [c.to_complex() for c in candidates])
    if len(pencil.directions) != expected:
        raise RuntimeError(
            f"pencil has {len(pencil.directions)} directions, expected {expected}"
        )
    dirs_exact = tuple(candidates[k] for k in pencil.kept)
    if mode == STRONG:
        _check_kernel_identity(b0, n, s, exact)
    return ObstructionProblem(
        square=a,
        mode=mode,
        pencil=pencil,
        b0_exact=b0 if exact else None,
        directions_exact=dirs_exact,
    )


def _check_kernel_identity(b0, n: int, s: int, exact: bool) -> None:
    """(phi + psi)(e (x) e_i (x) I_s) = 0 for every i."""
    for i in range(n):
        if exact:
            eye = ExactMatrix.identity(s)
            zero = ExactMatrix.zeros(s, s)
            vec = ExactMatrix.from_blocks(
                [[eye if k == i else zero] for j in range(n) for k in range(n)]
            )
            if not (b0 @ vec).is_zero():
                raise RuntimeError(f"kernel identity broken at i={i}")
        else:
            vec = np.zeros((n * n * s, s), dtype=np.complex128)
            for j in range(n):
                vec[(j * n + i) * s : (j * n + i + 1) * s, :] = np.eye(s)
            resid = float(np.abs(b0 @ vec).max())
            scale = 1.0 + float(np.abs(b0).max())
            if resid > 1e-8 * scale:
                raise RuntimeError(f"kernel identity residual {resid:.2e} at i={i}")


# -- decision procedure ------------------------------------------------------


def check_mconv_obstruction(
    a: MagicSquare, mode: str = STRONG, eps: float = DEFAULT_EPS
) -> ObstructionCheckResult:
    """Decide feasibility of the obstruction pencil for a magic square.

    "no" proves the square is not in the matrix convex hull of the
    quantum permutation matrices and comes with a numeric dual witness.
    "yes" only reports that the obstruction is silent (the pencil is
    feasible, with a numeric X achieving B0 + X >= -eps); it does not
    prove membership.  Weak and strong verdicts agree on every square.
    """
    problem = build_obstruction(a, mode)
    res = solve_feasibility(problem.pencil, eps)
    if res.status is Status.FEASIBLE:
        x = np.zeros((problem.dim, problem.dim), dtype=np.complex128)
        for xi, d in zip(res.x, problem.pencil.directions):
            x = x + float(xi) * d
        return ObstructionCheckResult("yes", problem, res, x=x)
    if res.status is Status.INFEASIBLE:
        return ObstructionCheckResult("no", problem, res, y=res.y)
    return ObstructionCheckResult("inconclusive", problem, res)


# -- the separating example --------------------------------------------------


def _gr(re, im=0) -> GaussianRational:
    return GaussianRational(Fraction(*re) if isinstance(re, tuple) else Fraction(re),
                            Fraction(*im) if isinstance(im, tuple) else Fraction(im))


def _corner_block(rows) -> ExactMatrix:
    """(1/3) I + (9/62) H for a 2x2 Hermitian H given entrywise."""
    h = ExactMatrix(rows)
    return Fraction(1, 3) * ExactMatrix.identity(2) + Fraction(9, 62) * h


def counterexample_m2_3() -> MagicSquare:
    """An exact 3x3 magic square with 2x2 blocks that fails the obstruction.

    The four upper-left blocks are small Hermitian perturbations of I/3;
    the remaining row and column are completed by the unique magic
    completion.  The square is a valid magic square over Q[i] but is not
    semiclassical and admits an exact dual certificate in both modes.
    """
    a11 = _corner_block(
        [
            [_gr((-34, 93)), _gr((4, 5), (2, 13))],
            [_gr((4, 5), (-2, 13)), _gr((7, 16))],
        ]
    )
    a12 = _corner_block(
        [
            [_gr((5, 6)), _gr((1, 3), (-20, 81))],
            [_gr((1, 3), (20, 81)), _gr((-41, 55))],
        ]
    )
    a21 = _corner_block(
        [
            [_gr((-2, 3)), _gr((-25, 92), (-3, 7))],
            [_gr((-25, 92), (3, 7)), _gr((1, 34))],
        ]
    )
    a22 = _corner_block(
        [
            [_gr((29, 30)), _gr((6, 35), (-1, 1))],
            [_gr((6, 35), (1, 1)), _gr((-5, 8))],
        ]
    )
    return complete_corner([[a11, a12], [a21, a22]])


# -- dual certificates -------------------------------------------------------


@dataclass(frozen=True)
class DualWitness:
    """Numeric dual candidate with its verification residuals."""

    y: np.ndarray
    trace_b0: float
    pairing_max: float
    min_eigenvalue: float


def find_dual_certificate(
    problem: ObstructionProblem, eps: float = DEFAULT_EPS
) -> DualWitness:
    """Search for a numeric Y >= 0, trace 1, orthogonal to every direction,
    with trace(Y B_0) < 0.

    Only strong-mode problems are accepted (the variable count is small).
    The polished solver dual is blended with a multiple of I/d to move Y
    strictly inside the cone; the blend keeps the pairings unchanged
    because every direction is traceless.
    """
    if problem.mode != STRONG:
        raise ValueError("dual certificate search expects a strong-mode problem")
    res = solve_feasibility(problem.pencil, eps)
    if res.status is Status.FEASIBLE:
        raise CertificateNotFound(
            f"pencil is feasible (lambda_min {res.t_star:.3e}); no certificate exists"
        )
    if res.status is Status.INCONCLUSIVE:
        raise CertificateSearchInconclusive(f"solver diagnostics: {res.residuals}")
    d = problem.dim
    f0 = problem.pencil.f0
    y = res.y
    p0 = float(np.real(np.trace(y @ f0)))
    t0 = float(np.real(np.trace(f0)))
    drift = t0 / d - p0
    # keep at least half of the negative pairing after blending
    bound = 0.5 * (-p0) / drift if drift > 0 else 0.05
    theta = min(0.05, bound)
    theta = max(theta, min(bound, 4 * d * eps))
    y = (1 - theta) * y + theta * np.eye(d) / d
    y = (y + y.conj().T) / 2
    pairings = [float(np.real(np.trace(y @ b))) for b in problem.pencil.directions]
    return DualWitness(
        y=y,
        trace_b0=float(np.real(np.trace(y @ f0))),
        pairing_max=max((abs(p) for p in pairings), default=0.0),
        min_eigenvalue=float(np.linalg.eigvalsh(y).min()),
    )


def exact_certify(
    y_num: np.ndarray, problem: ObstructionProblem, max_denominator: int
) -> ObstructionCertificate:
    """Turn a numeric dual candidate into an exact certificate over Q[i].

    Entries are rationalized with the given denominator bound and the
    result symmetrized exactly.  The matrix is then projected exactly
    onto the affine space {trace(Y B_j) = 0 for all j} before the PSD
    check, because positivity is the fragile condition and the
    projection is a small perturbation when the residuals are tiny.
    Verification is exact: Y >= 0 by rational LDL* and trace(Y B_0) < 0.
    """
    if problem.b0_exact is None:
        raise ValueError("exact certification needs an exact square")
    y_num = np.asarray(y_num, dtype=np.complex128)
    d = problem.dim
    if y_num.shape != (d, d):
        raise ValueError(f"certificate has shape {y_num.shape}, expected {(d, d)}")
    grid = [
        [
            GaussianRational(
                rationalize(float(y_num[i, j].real), max_denominator),
                rationalize(float(y_num[i, j].imag), max_denominator),
            )
            for j in range(d)
        ]
        for i in range(d)
    ]
    raw = ExactMatrix(grid)
    y = Fraction(1, 2) * (raw + raw.h)

    weights = hermitian_coordinate_weights(d)
    coords = hermitian_coordinates(y)
    rows = []
    for b in problem.directions_exact:
        bc = hermitian_coordinates(b)
        rows.append([w * c for w, c in zip(weights, bc)])
    targets = [Fraction(0)] * len(rows)
    projected = affine_least_squares(rows, targets, coords, weights=weights)
    y = hermitian_from_coordinates(d, projected)

    pairings = {}
    for label, b in zip(problem.labels(), problem.directions_exact):
        bc = hermitian_coordinates(b)
        yc = hermitian_coordinates(y)
        pairings[label] = sum(
            (w * u * v for w, u, v in zip(weights, yc, bc)), Fraction(0)
        )
    check = psd_check_exact(y)
    if not check.is_psd:
        raise CertificationFailed("psd", check.witness_value)
    p0 = (y @ problem.b0_exact).trace()
    if p0.im != 0:
        raise CertificationFailed("negativity", p0)
    if p0.re >= 0:
        raise CertificationFailed("negativity", p0.re)
    pairings["B0"] = p0.re
    return ObstructionCertificate(
        n=problem.square.n,
        s=problem.square.s,
        mode=problem.mode,
        y_exact=y,
        pairings=pairings,
    )


def certify_with_ladder(
    y_num: np.ndarray,
    problem: ObstructionProblem,
    ladder: tuple[int, ...] = DENOMINATOR_LADDER,
) -> ObstructionCertificate:
    """Try exact certification with increasing denominator bounds.

    Returns the first certificate that verifies; the smallest passing
    bound keeps serialized certificates readable.
    """
    last = None
    for bound in ladder:
        try:
            return exact_certify(y_num, problem, bound)
        except CertificationFailed as err:
            last = err
    raise last


def verify_certificate(cert: ObstructionCertificate, a: MagicSquare) -> dict:
    """Re-verify a certificate against a square by exact arithmetic alone.

    Rebuilds the pencil, recomputes every pairing, and reruns the exact
    PSD check.  No numeric solver is involved.  Returns a report dict
    with an overall `ok` flag.
    """
    if not a.exact:
        raise ValueError("exact verification needs an exact square")
    if (a.n, a.s) != (cert.n, cert.s):
        raise ValueError(
            f"certificate is for n={cert.n}, s={cert.s}, square has n={a.n}, s={a.s}"
        )
    problem = build_obstruction(a, cert.mode)
    y = cert.y_exact
    report = {"ok": True}
    if not y.is_hermitian():
        return {"ok": False, "hermitian": False}
    check = psd_check_exact(y)
    report["psd"] = check.is_psd
    pair_ok = True
    for label, b in zip(problem.labels(), problem.directions_exact):
        p = (y @ b).trace()
        zero = p.re == 0 and p.im == 0
        pair_ok = pair_ok and zero
        stored = cert.pairings.get(label)
        if stored is not None and GaussianRational._coerce(stored) != p:
            pair_ok = False
    report["pairings_zero"] = pair_ok
    p0 = (y @ problem.b0_exact).trace()
    report["trace_b0"] = p0.re
    report["negativity"] = p0.im == 0 and p0.re < 0
    stored = cert.pairings.get("B0")
    if stored is not None and GaussianRational._coerce(stored) != p0:
        report["negativity"] = False
    report["ok"] = bool(report["psd"] and pair_ok and report["negativity"])
    return report


# -- feasibility witnesses from dilations ------------------------------------


@dataclass(frozen=True)
class MemberWitness:
    """Numeric X with phi(A) + X = B B* >= 0 built from a dilation."""

    x: np.ndarray
    blocks: dict  # (i, j) -> the corner block b_ij of the dilated generator


def member_witness_from_dilation(dilation: "CommutingDilation") -> MemberWitness:
    """Reconstruct the feasibility witness of a dilated square.

    Complete the isometry V to a unitary W = [V, V_perp] and read off the
    corner blocks b_ij = (W* u_ij W)[s:, :s].  They satisfy
    b_ij* b_ij = a_ij - a_ij^2, and stacking them into B gives an
    explicit X = B B* - phi(A) supported on the off-diagonal slots with
    phi(A) + X >= 0.
    """
    a = dilation.compressed()
    n, s = a.n, a.s
    v = np.asarray(dilation.v, dtype=np.complex128)
    t = v.shape[0]
    q, _ = np.linalg.qr(v, mode="complete")
    # columns s: of q are orthonormal and orthogonal to range(v)
    w = np.hstack([v, q[:, s:]])
    blocks = {}
    bcol = np.zeros((n * n * s, t - s), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            u = np.asarray(dilation.u.block(i, j), dtype=np.complex128)
            tilted = w.conj().T @ u @ w
            b = tilted[s:, :s]
            blocks[(i, j)] = b
            r = (i * n + j) * s
            bcol[r : r + s, :] = b.conj().T
    phi = phi_matrix(a.to_float() if a.exact else a)
    x = bcol @ bcol.conj().T - phi
    return MemberWitness(x=x, blocks=blocks)
