from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmagic.exact import (
    ExactMatrix,
    GaussianRational,
    NonFiniteInput,
    NonHermitianInput,
    affine_least_squares,
    exact_from_float_matrix,
    hermitian_coordinate_weights,
    hermitian_coordinates,
    hermitian_from_coordinates,
    independent_rows,
    nullspace_exact,
    psd_check_exact,
    rank_exact,
    rationalize,
    rref_exact,
    solve_exact,
)

G = GaussianRational
F = Fraction

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=20)


def gr(re, im=0):
    return G(F(re), F(im))


class TestGaussianRational:
    def test_canonical_form(self):
        z = G(F(2, 4), F(-3, 6))
        assert z.re == F(1, 2) and z.im == F(-1, 2)

    def test_rejects_bare_floats(self):
        with pytest.raises(TypeError):
            G(0.5)

    @given(rationals, rationals, rationals, rationals)
    def test_division_inverts_multiplication(self, a, b, c, d):
        z, w = G(a, b), G(c, d)
        if not w:
            return
        assert (z * w) / w == z

    @given(rationals, rationals, rationals, rationals)
    def test_conjugation_is_multiplicative(self, a, b, c, d):
        z, w = G(a, b), G(c, d)
        assert (z * w).conjugate() == z.conjugate() * w.conjugate()

    def test_norm2(self):
        assert G(F(3, 5), F(4, 5)).norm2() == 1

    def test_mixing_with_ints_and_fractions(self):
        assert 1 + G(F(1, 2)) == G(F(3, 2))
        assert F(1, 3) * G(0, 1) == G(0, F(1, 3))


class TestExactMatrix:
    def test_matmul_matches_numpy(self):
        rng = np.random.default_rng(7)
        a = ExactMatrix([[gr(rng.integers(-5, 5), rng.integers(-5, 5)) for _ in range(3)] for _ in range(2)])
        b = ExactMatrix([[gr(rng.integers(-5, 5), rng.integers(-5, 5)) for _ in range(4)] for _ in range(3)])
        assert np.allclose((a @ b).to_complex(), a.to_complex() @ b.to_complex())

    def test_blocks_round_trip(self):
        a = ExactMatrix([[1, 2], [3, 4]])
        b = ExactMatrix([[5], [6]])
        c = ExactMatrix([[7, 8]])
        d = ExactMatrix([[9]])
        m = ExactMatrix.from_blocks([[a, b], [c, d]])
        assert m.block(0, 2, 0, 2) == a
        assert m.block(0, 2, 2, 3) == b
        assert m.block(2, 3, 0, 2) == c

    def test_kron_mixed_product(self):
        a = ExactMatrix([[1, 2], [0, 1]])
        b = ExactMatrix([[gr(0, 1)], [gr(1)]])
        c = ExactMatrix([[3, 0], [1, 1]])
        d = ExactMatrix([[gr(2, -1)]])
        assert a.kron(b) @ c.kron(d) == (a @ c).kron(b @ d)

    def test_hermitian_detection(self):
        assert ExactMatrix([[1, gr(0, 1)], [gr(0, -1), 2]]).is_hermitian()
        assert not ExactMatrix([[1, gr(0, 1)], [gr(0, 1), 2]]).is_hermitian()
        assert not ExactMatrix([[gr(0, 1)]]).is_hermitian()

    def test_conjugate_transpose(self):
        m = ExactMatrix([[gr(1, 2), gr(3)], [gr(0, -1), gr(4, 4)]])
        assert m.h.h == m
        assert (m @ m.h).is_hermitian()

    def test_immutable(self):
        m = ExactMatrix.identity(2)
        with pytest.raises(AttributeError):
            m.rows = 3


class TestPsdCheck:
    def test_zero_1x1(self):
        res = psd_check_exact(ExactMatrix([[0]]))
        assert res.is_psd and res.pivots == (F(0),)

    def test_indefinite_diagonal_witness(self):
        m = ExactMatrix([[1, 0], [0, -1]])
        res = psd_check_exact(m)
        assert not res.is_psd
        assert res.witness_value == -1
        v = res.witness
        assert (v.h @ m @ v)[0, 0] == gr(-1)

    def test_counterexample_block_a11_is_psd(self):
        third = F(1, 3)
        c = F(9, 62)
        m = ExactMatrix(
            [
                [gr(third + c * F(-34, 93)), gr(c * F(4, 5), c * F(2, 13))],
                [gr(c * F(4, 5), -c * F(2, 13)), gr(third + c * F(7, 16))],
            ]
        )
        assert psd_check_exact(m).is_psd

    def test_zero_diagonal_nonzero_offdiagonal(self):
        m = ExactMatrix([[0, gr(1, 2)], [gr(1, -2), 0]])
        res = psd_check_exact(m)
        assert not res.is_psd
        v = res.witness
        val = (v.h @ m @ v)[0, 0]
        assert val.im == 0 and val.re < 0 and val.re == res.witness_value

    def test_psd_block_with_zero_pivot(self):
        # rank-1 PSD with a zero row that must be tolerated
        m = ExactMatrix([[1, 0, gr(0, 1)], [0, 0, 0], [gr(0, -1), 0, 1]])
        res = psd_check_exact(m)
        assert res.is_psd
        assert min(res.pivots) == 0

    def test_factorization_reconstructs(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            d = int(rng.integers(1, 5))
            g = ExactMatrix(
                [
                    [gr(F(int(rng.integers(-4, 5)), int(rng.integers(1, 4))),
                        F(int(rng.integers(-4, 5)), int(rng.integers(1, 4))))
                     for _ in range(d)]
                    for _ in range(d)
                ]
            )
            m = g.h @ g
            res = psd_check_exact(m)
            assert res.is_psd
            assert all(p >= 0 for p in res.pivots)
            perm, low, piv = res.permutation, res.lower, res.pivots
            dd = ExactMatrix([[piv[i] if i == j else 0 for j in range(d)] for i in range(d)])
            pmp = ExactMatrix([[m[perm[i], perm[j]] for j in range(d)] for i in range(d)])
            assert pmp == low @ dd @ low.h

    def test_agrees_with_numeric_eigenvalues(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            raw = [[gr(F(int(rng.integers(-6, 7)), int(rng.integers(1, 5))),
                       F(int(rng.integers(-6, 7)), int(rng.integers(1, 5))))
                    for _ in range(4)] for _ in range(4)]
            for i in range(4):
                raw[i][i] = gr(raw[i][i].re)
                for j in range(i + 1, 4):
                    raw[j][i] = raw[i][j].conjugate()
            m = ExactMatrix(raw)
            lam = float(np.linalg.eigvalsh(m.to_complex()).min())
            if abs(lam) < 1e-6:
                continue
            assert psd_check_exact(m).is_psd == (lam > 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            psd_check_exact(ExactMatrix([[0, 1], [2, 0]]))


class TestRationalize:
    def test_trivial_values(self):
        assert rationalize(0.5, 10) == F(1, 2)
        assert rationalize(0.3333333333, 100) == F(1, 3)

    def test_golden_ratio_convergent(self):
        assert rationalize(0.6180339887, 1000) == F(610, 987)

    def test_brute_force_small_denominators(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            x = float(rng.uniform(-2, 2))
            got = rationalize(x, 40)
            best = min(
                (F(p, q) for q in range(1, 41) for p in range(int(x * q) - 2, int(x * q) + 3)),
                key=lambda r: abs(float(r) - x),
            )
            assert abs(float(got) - x) <= abs(float(best) - x) + 1e-15

    @given(st.integers(min_value=-(2**20), max_value=2**20), st.integers(min_value=1, max_value=2**20))
    @settings(max_examples=200)
    def test_recovers_exactly_representable_ratios(self, p, q):
        assert rationalize(p / q, q) == F(p, q)

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteInput):
            rationalize(float("nan"), 10)
        with pytest.raises(NonFiniteInput):
            rationalize(float("inf"), 10)


class TestElimination:
    def test_nullspace_full_rank(self):
        assert nullspace_exact(ExactMatrix.identity(3)) == []

    def test_nullspace_sum_constraint(self):
        basis = nullspace_exact(ExactMatrix([[1, 1, 1]]))
        assert len(basis) == 2
        for v in basis:
            assert sum((v[i, 0] for i in range(3)), gr(0)) == gr(0)

    def test_nullspace_vectors_in_kernel(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            m = ExactMatrix([[gr(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
                              for _ in range(5)] for _ in range(3)])
            basis = nullspace_exact(m)
            assert len(basis) == 5 - rank_exact(m)
            for v in basis:
                assert (m @ v).is_zero()

    def test_solve_and_inconsistency(self):
        a = ExactMatrix([[1, 2], [3, 4]])
        b = ExactMatrix.column([gr(5), gr(6)])
        x = solve_exact(a, b)
        assert a @ x == b
        bad = ExactMatrix([[1, 1], [2, 2]])
        assert solve_exact(bad, ExactMatrix.column([0, 1])) is None

    def test_independent_rows(self):
        m = ExactMatrix([[1, 0], [2, 0], [0, 1]])
        assert independent_rows(m) == (0, 2)

    def test_rref_idempotent(self):
        m = ExactMatrix([[2, 4, 6], [1, 2, 4]])
        red, piv = rref_exact(m)
        again, piv2 = rref_exact(red)
        assert red == again and piv == piv2


class TestAffineProjection:
    def test_projects_onto_plane(self):
        # min (x-1)^2 + (y-1)^2 s.t. x + y = 1
        x = affine_least_squares([[F(1), F(1)]], [F(1)], [F(1), F(1)])
        assert x == [F(1, 2), F(1, 2)]

    def test_redundant_rows_allowed(self):
        rows = [[F(1), F(1)], [F(2), F(2)]]
        x = affine_least_squares(rows, [F(1), F(2)], [F(0), F(0)])
        assert x[0] + x[1] == 1

    def test_inconsistent_rejected(self):
        with pytest.raises(ValueError):
            affine_least_squares([[F(1), F(1)], [F(1), F(1)]], [F(1), F(2)], [F(0), F(0)])

    def test_weighted_optimality(self):
        # stationarity: residual must be W-orthogonal to the constraint nullspace
        rng = np.random.default_rng(9)
        for _ in range(10):
            rows = [[F(int(rng.integers(-3, 4))) for _ in range(4)] for _ in range(2)]
            if rank_exact(ExactMatrix([[GaussianRational(c) for c in r] for r in rows])) < 2:
                continue
            x0 = [F(int(rng.integers(-5, 6)), 2) for _ in range(4)]
            w = [F(1), F(2), F(1), F(2)]
            b = [F(int(rng.integers(-2, 3))) for _ in range(2)]
            try:
                x = affine_least_squares(rows, b, x0, weights=w)
            except ValueError:
                continue
            for v in nullspace_exact(ExactMatrix([[GaussianRational(c) for c in r] for r in rows])):
                dot = sum(w[j] * (x[j] - x0[j]) * v[j, 0].re for j in range(4))
                assert dot == 0


class TestHermitianCoordinates:
    def test_round_trip(self):
        m = ExactMatrix([[gr(1), gr(F(1, 2), F(-1, 3))], [gr(F(1, 2), F(1, 3)), gr(-2)]])
        assert hermitian_from_coordinates(2, hermitian_coordinates(m)) == m

    def test_weighted_dot_equals_frobenius(self):
        a = ExactMatrix([[gr(2), gr(1, 1)], [gr(1, -1), gr(0)]])
        b = ExactMatrix([[gr(-1), gr(0, 2)], [gr(0, -2), gr(3)]])
        ca, cb = hermitian_coordinates(a), hermitian_coordinates(b)
        w = hermitian_coordinate_weights(2)
        dot = sum(wi * x * y for wi, x, y in zip(w, ca, cb))
        assert dot == (a @ b).trace().re

    def test_rejects_non_hermitian(self):
        with pytest.raises(NonHermitianInput):
            hermitian_coordinates(ExactMatrix([[0, 1], [2, 0]]))


def test_exact_from_float_matrix():
    arr = np.array([[0.5 + 0.25j, 1.0], [0.0, -2.0]])
    m = exact_from_float_matrix(arr, 100)
    assert m[0, 0] == gr(F(1, 2), F(1, 4))
    assert m[1, 1] == gr(-2)
