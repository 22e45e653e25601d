"""Semiclassicality: the membership LMI, interior decomposition formula,
and synthesis of commuting quantum-permutation dilations.

A square A is semiclassical when A = sum_pi P_pi (x) q_pi with PSD weights
q_pi summing to the identity.  The LMI encodes exactly this: its pencil is
PSD at t = 0 iff such weights exist, with zero diagonal blocks forcing the
equality constraints.  The pencil is never positive definite, so membership
is decided by the eps-resolution semantics of the solver plus, for exact
input, an exact rational repair of the recovered weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import numpy as np

from .exact import (
    ExactMatrix,
    affine_least_squares,
    exact_from_float_matrix,
    hermitian_basis,
    hermitian_coordinate_weights,
    hermitian_coordinates,
    hermitian_from_coordinates,
    psd_check_exact,
)
from .sdp import SdpProblem, SdpResult, Status, solve_feasibility, DEFAULT_EPS
from .structures import (
    DEFAULT_TOL,
    MagicSquare,
    permutations_lex,
    perm_rank,
)

__all__ = [
    "TooLarge",
    "BoundViolated",
    "SemiclassicalDecomposition",
    "CommutingDilation",
    "CheckResult",
    "MapReport",
    "build_semiclassical_lmi",
    "check_semiclassical",
    "interior_map_decomposition",
    "synthesize_commuting_dilation",
    "verify_positive_unital_map",
    "MAX_LMI_N",
    "REPAIR_DENOMINATORS",
]

MAX_LMI_N = 5
REPAIR_DENOMINATORS = (10**3, 10**6, 10**9)


class TooLarge(ValueError):
    """n! exceeds the LMI guard."""


class BoundViolated(ValueError):
    """The interior sufficient condition fails; lists offending permutations."""

    def __init__(self, violations):
        super().__init__(
            "interior bound violated at " + ", ".join(str(p) for p, _ in violations)
        )
        self.violations = violations


@dataclass(frozen=True)
class SemiclassicalDecomposition:
    """PSD weights q_pi (summing to I_s) indexed by permutations of {0..n-1}."""

    n: int
    s: int
    exact: bool
    weights: dict

    def blocks(self) -> list:
        """Raw blocks of sum_pi P_pi (x) q_pi, without validation."""
        zero = ExactMatrix.zeros(self.s) if self.exact else np.zeros((self.s, self.s), dtype=complex)
        out = []
        for i in range(self.n):
            row = []
            for j in range(self.n):
                acc = zero
                for sigma, q in self.weights.items():
                    if sigma[i] == j:
                        acc = acc + q
                row.append(acc)
            out.append(row)
        return out

    def reconstruct(self, tol: float = DEFAULT_TOL) -> MagicSquare:
        """Assemble sum_pi P_pi (x) q_pi as a validated magic square."""
        return MagicSquare(self.blocks(), tol=tol)


@dataclass(frozen=True)
class CommutingDilation:
    """A quantum permutation matrix U with commuting entries and an isometry V
    compressing it back to the source square: V* u_ij V = a_ij."""

    u: MagicSquare
    v: np.ndarray
    decomposition: SemiclassicalDecomposition

    def compressed(self) -> MagicSquare:
        from .structures import compress

        return compress(self.u, self.v)


@dataclass(frozen=True)
class CheckResult:
    verdict: str  # "yes" | "no" | "inconclusive"
    decomposition: SemiclassicalDecomposition | None = None
    dual: SdpResult | None = None
    residuals: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MapReport:
    """Finite verification of the positive unital *-linear map conditions."""

    ok: bool
    positivity: tuple  # (sigma, ok, margin) per permutation
    unitality_residual: object
    generator_residuals: dict  # (i, j) -> residual of sum_{sigma(i)=j} q - a_ij


# -- the membership LMI -----------------------------------------------------


def _lmi_layout(n: int, s: int):
    """Block-row offsets (units of s) for sizes [1, 1, n!, n, n]."""
    nf = factorial(n)
    off = [0, 1, 2, 2 + nf, 2 + nf + n]
    return off, (2 + nf + 2 * n)


def build_semiclassical_lmi(a: MagicSquare) -> SdpProblem:
    """Pencil whose PSD-ness at t = 0 is equivalent to semiclassicality.

    Dimension (n! + 2n + 2) s.  Constant part: identity coupling in the two
    leading scalar slots plus the blocks a_ij in the (4,5) band; directions
    (one per permutation and Hermitian basis element) subtract the same
    couplings so that PSD-ness forces sum q_pi = I, q_pi >= 0 and
    sum_pi P_pi (x) q_pi = A.
    """
    n, s = a.n, a.s
    if n > MAX_LMI_N:
        raise TooLarge(f"n = {n} exceeds the n! guard ({MAX_LMI_N})")
    nf = factorial(n)
    off, t_blocks = _lmi_layout(n, s)
    dim = t_blocks * s
    numeric = a.to_float() if a.exact else a

    def put(mat, bi, bj, block):
        r, c = bi * s, bj * s
        mat[r : r + s, c : c + s] += block

    f0 = np.zeros((dim, dim), dtype=np.complex128)
    eye = np.eye(s)
    put(f0, off[0], off[1], eye)
    put(f0, off[1], off[0], eye)
    for i in range(n):
        for j in range(n):
            blk = numeric.block(i, j)
            put(f0, off[3] + i, off[4] + j, blk)
            put(f0, off[4] + j, off[3] + i, blk.conj().T)

    basis = [h.to_complex() for h in hermitian_basis(s)]
    dirs = []
    for sigma in permutations_lex(n):
        rho = perm_rank(sigma)
        for h in basis:
            d = np.zeros((dim, dim), dtype=np.complex128)
            put(d, off[0], off[1], -h)
            put(d, off[1], off[0], -h)
            put(d, off[2] + rho, off[2] + rho, h)
            for i in range(n):
                put(d, off[3] + i, off[4] + sigma[i], -h)
                put(d, off[4] + sigma[i], off[3] + i, -h)
            dirs.append(d)
    return SdpProblem(f0, dirs)


def _weights_from_x(n: int, s: int, x: np.ndarray) -> dict:
    basis = [h.to_complex() for h in hermitian_basis(s)]
    out = {}
    k = 0
    for sigma in permutations_lex(n):
        q = np.zeros((s, s), dtype=np.complex128)
        for h in basis:
            q = q + float(x[k]) * h
            k += 1
        out[sigma] = q
    return out


def _exact_repair(a: MagicSquare, weights: dict, max_denominator: int):
    """Rationalize numeric weights and project them exactly onto the affine
    set {sum q = I, sum_pi P_pi (x) q_pi = A}; None if PSD breaks."""
    n, s = a.n, a.s
    perms = permutations_lex(n)
    s2 = s * s
    x0: list[Fraction] = []
    for sigma in perms:
        q = exact_from_float_matrix(weights[sigma], max_denominator)
        q = (q + q.h) * Fraction(1, 2)
        x0.extend(hermitian_coordinates(q))
    nvars = len(perms) * s2
    rows, rhs = [], []
    ident_coords = hermitian_coordinates(ExactMatrix.identity(s))
    for c in range(s2):
        row = [Fraction(0)] * nvars
        for k in range(len(perms)):
            row[k * s2 + c] = Fraction(1)
        rows.append(row)
        rhs.append(ident_coords[c])
    for i in range(n):
        for j in range(n):
            target = hermitian_coordinates(a.block(i, j))
            for c in range(s2):
                row = [Fraction(0)] * nvars
                for k, sigma in enumerate(perms):
                    if sigma[i] == j:
                        row[k * s2 + c] = Fraction(1)
                rows.append(row)
                rhs.append(target[c])
    w = hermitian_coordinate_weights(s) * len(perms)
    try:
        x = affine_least_squares(rows, rhs, x0, weights=w)
    except ValueError:
        return None
    out = {}
    for k, sigma in enumerate(perms):
        q = hermitian_from_coordinates(s, x[k * s2 : (k + 1) * s2])
        if not psd_check_exact(q).is_psd:
            return None
        out[sigma] = q
    return out


def check_semiclassical(a: MagicSquare, eps: float = DEFAULT_EPS) -> CheckResult:
    """Decide semiclassicality through the LMI.

    Yes carries a decomposition (exactly repaired when A is exact); No
    carries the solver's dual certificate; boundary cases the margins
    cannot settle come back Inconclusive.
    """
    problem = build_semiclassical_lmi(a)
    res = solve_feasibility(problem, eps=eps)
    if res.status is Status.INFEASIBLE:
        return CheckResult("no", dual=res, residuals=res.residuals)

    if res.status is Status.FEASIBLE:
        weights = _weights_from_x(a.n, a.s, res.x)
        if not a.exact:
            dec = SemiclassicalDecomposition(a.n, a.s, False, weights)
            recon = dec.blocks()
            resid = max(
                float(np.abs(recon[i][j] - a.block(i, j)).max())
                for i in range(a.n)
                for j in range(a.n)
            )
            return CheckResult(
                "yes", decomposition=dec,
                residuals={**res.residuals, "reconstruction": resid},
            )
        for max_den in REPAIR_DENOMINATORS:
            repaired = _exact_repair(a, weights, max_den)
            if repaired is not None:
                dec = SemiclassicalDecomposition(a.n, a.s, True, repaired)
                return CheckResult(
                    "yes", decomposition=dec,
                    residuals={**res.residuals, "repair_denominator": max_den},
                )
        return CheckResult("inconclusive", residuals=res.residuals)

    # Solver could not resolve; exact repair may still settle membership.
    if a.exact and res.residuals.get("primal_lambda_min", -1) > -1e-4:
        # a nearly feasible point exists; try to rationalize it into the set
        x = res.x
        if x is None:
            x = np.zeros(len(problem.directions))
        weights = _weights_from_x(a.n, a.s, x)
        for max_den in REPAIR_DENOMINATORS:
            repaired = _exact_repair(a, weights, max_den)
            if repaired is not None:
                dec = SemiclassicalDecomposition(a.n, a.s, True, repaired)
                return CheckResult(
                    "yes", decomposition=dec,
                    residuals={**res.residuals, "repair_denominator": max_den},
                )
    return CheckResult("inconclusive", residuals=res.residuals)


# -- closed-form interior decomposition -------------------------------------


def interior_map_decomposition(a: MagicSquare) -> SemiclassicalDecomposition:
    """The closed-form decomposition valid on the interior ball.

    Requires sum_k a_{k, pi(k)} >= ((n-2)/(n-1)) I for every permutation;
    then q_pi = (sum_k a_{k, pi(k)} - ((n-2)/(n-1)) I) / ((n-2)! n).
    No SDP involved; exact on exact input.
    """
    n, s = a.n, a.s
    if n == 1:
        ident = ExactMatrix.identity(s) if a.exact else np.eye(s, dtype=complex)
        return SemiclassicalDecomposition(1, s, a.exact, {(0,): ident})
    bound = Fraction(n - 2, n - 1)
    scale = Fraction(1, factorial(n - 2) * n)
    ident = ExactMatrix.identity(s) if a.exact else np.eye(s, dtype=complex)
    sums = {}
    violations = []
    for sigma in permutations_lex(n):
        acc = a.block(0, sigma[0])
        for k in range(1, n):
            acc = acc + a.block(k, sigma[k])
        shifted = acc - ident * bound if a.exact else acc - float(bound) * ident
        if a.exact:
            chk = psd_check_exact(shifted)
            if not chk.is_psd:
                violations.append((sigma, chk.witness_value))
                continue
        else:
            lam = float(np.linalg.eigvalsh((shifted + shifted.conj().T) / 2).min())
            if lam < -DEFAULT_TOL:
                violations.append((sigma, lam))
                continue
        sums[sigma] = shifted
    if violations:
        raise BoundViolated(violations)
    weights = {
        sigma: (m * scale if a.exact else float(scale) * m)
        for sigma, m in sums.items()
    }
    return SemiclassicalDecomposition(n, s, a.exact, weights)


# -- dilation synthesis ------------------------------------------------------


def synthesize_commuting_dilation(dec: SemiclassicalDecomposition) -> CommutingDilation:
    """Build U = diag-block quantum permutation and V stacked from q_pi^(1/2).

    U is exact 0/1 data rendered as floats; V is numeric (square roots leave
    the rationals), but V* u_ij V = a_ij holds through the exact identity
    sum_{pi(i)=j} q_pi = a_ij.
    """
    n, s = dec.n, dec.s
    perms = permutations_lex(n)
    nf = len(perms)
    blocks = []
    for i in range(n):
        row = []
        for j in range(n):
            d = np.zeros(nf * s)
            for k, sigma in enumerate(perms):
                if sigma[i] == j:
                    d[k * s : (k + 1) * s] = 1.0
            row.append(np.diag(d) + 0j)
        blocks.append(row)
    u = MagicSquare(blocks)
    v = np.zeros((nf * s, s), dtype=np.complex128)
    for k, sigma in enumerate(perms):
        q = dec.weights[sigma]
        qc = q.to_complex() if dec.exact else np.asarray(q, dtype=np.complex128)
        lam, w = np.linalg.eigh((qc + qc.conj().T) / 2)
        root = (w * np.sqrt(np.clip(lam, 0, None))) @ w.conj().T
        v[k * s : (k + 1) * s, :] = root
    return CommutingDilation(u, v, dec)


def verify_positive_unital_map(
    dec: SemiclassicalDecomposition, a: MagicSquare, tol: float = DEFAULT_TOL
) -> MapReport:
    """Check the three finite conditions carried by a decomposition:
    positivity of each q_pi, unitality of their sum, and the generator
    identities sum_{pi(i)=j} q_pi = a_ij.  Exact decompositions are held
    to zero residual; float ones to tol."""
    exact = dec.exact and a.exact
    positivity = []
    for sigma, q in dec.weights.items():
        if dec.exact:
            chk = psd_check_exact(q)
            positivity.append((sigma, chk.is_psd, chk.witness_value if not chk.is_psd else Fraction(0)))
        else:
            lam = float(np.linalg.eigvalsh((q + np.asarray(q).conj().T) / 2).min())
            positivity.append((sigma, lam >= -tol, lam))

    total = None
    for q in dec.weights.values():
        total = q if total is None else total + q
    if dec.exact:
        unit = total - ExactMatrix.identity(dec.s)
        unit_resid = Fraction(0) if unit.is_zero() else max(
            abs(unit[i, j].re) + abs(unit[i, j].im)
            for i in range(dec.s) for j in range(dec.s)
        )
    else:
        unit_resid = float(np.abs(total - np.eye(dec.s)).max())

    recon = dec.blocks()
    gen = {}
    for i in range(a.n):
        for j in range(a.n):
            if exact:
                diff = recon[i][j] - a.block(i, j)
                gen[(i, j)] = Fraction(0) if diff.is_zero() else max(
                    abs(diff[r, c].re) + abs(diff[r, c].im)
                    for r in range(dec.s) for c in range(dec.s)
                )
            else:
                lhs = recon[i][j]
                lhs = lhs.to_complex() if dec.exact else lhs
                rhs = a.block(i, j)
                rhs = rhs.to_complex() if a.exact else rhs
                gen[(i, j)] = float(np.abs(lhs - rhs).max())

    ok = (
        all(p[1] for p in positivity)
        and (unit_resid == 0 if dec.exact else unit_resid <= tol)
        and all((r == 0 if exact else float(r) <= tol) for r in gen.values())
    )
    return MapReport(ok, tuple(positivity), unit_resid, gen)
