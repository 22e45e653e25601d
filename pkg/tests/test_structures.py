from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmagic.exact import ExactMatrix
from qmagic.sampling import (
    outer_direct_sum,
    projector_at_angle,
    qpm_from_projector,
    random_commuting_qpm,
    random_exact_decomposition,
    random_isometry,
    random_member_square,
    square_from_decomposition,
)
from qmagic.structures import (
    CompletionNotPSD,
    InvalidMagicSquare,
    MagicSquare,
    MixedRepresentation,
    NotAnIsometry,
    ShapeMismatch,
    SizeMismatch,
    complete_corner,
    compress,
    constant_square,
    direct_sum,
    embed_pad,
    perm_matrix_exact,
    perm_matrix_float,
    perm_rank,
    perm_unrank,
    permutations_lex,
    validate_magic,
    validate_quantum_permutation,
)

F = Fraction


class TestPermutations:
    def test_lex_order(self):
        perms = permutations_lex(3)
        assert perms[0] == (0, 1, 2)
        assert perms[-1] == (2, 1, 0)
        assert perms == sorted(perms)
        assert len(perms) == 6

    @given(st.integers(min_value=1, max_value=6), st.data())
    def test_rank_unrank_round_trip(self, n, data):
        import math

        rank = data.draw(st.integers(min_value=0, max_value=math.factorial(n) - 1))
        sigma = perm_unrank(n, rank)
        assert perm_rank(sigma) == rank

    def test_rank_is_lex_position(self):
        for n in (2, 3, 4):
            for k, sigma in enumerate(permutations_lex(n)):
                assert perm_rank(sigma) == k

    def test_matrix_forms_agree(self):
        sigma = (2, 0, 1)
        assert np.array_equal(
            perm_matrix_exact(sigma).to_complex().real, perm_matrix_float(sigma)
        )
        # one 1 per row and column
        p = perm_matrix_float(sigma)
        assert np.array_equal(p.sum(axis=0), np.ones(3))
        assert np.array_equal(p.sum(axis=1), np.ones(3))


class TestValidateMagic:
    def test_constant_square_ok(self):
        report = validate_magic(constant_square(3, 2).blocks)
        assert report.ok and report.violations == ()

    def test_two_by_two_form_ok(self):
        a = ExactMatrix([[F(1, 4), 0], [0, F(3, 4)]])
        one = ExactMatrix.identity(2)
        assert validate_magic([[a, one - a], [one - a, a]]).ok

    def test_block_exceeding_identity_flagged(self):
        a = ExactMatrix([[F(5, 4), 0], [0, F(3, 4)]])
        one = ExactMatrix.identity(2)
        report = validate_magic([[a, one - a], [one - a, a]])
        assert not report.ok
        locs = {(v.kind, v.location) for v in report.violations}
        assert ("block_not_psd", (0, 1)) in locs
        assert ("block_not_psd", (1, 0)) in locs

    def test_row_sum_violation_located(self):
        bad = [[np.eye(1), np.eye(1)], [np.zeros((1, 1)), np.eye(1) * 0.5]]
        report = validate_magic(bad)
        kinds = {v.kind for v in report.violations}
        assert "row_sum" in kinds and "col_sum" in kinds

    def test_ragged_rejected(self):
        with pytest.raises(ShapeMismatch):
            validate_magic([[np.eye(1)], [np.eye(1), np.eye(1)]])

    def test_mixed_representation_rejected(self):
        one = ExactMatrix.identity(1)
        with pytest.raises(MixedRepresentation):
            validate_magic([[one, np.eye(1)], [np.eye(1), one]])

    def test_floating_tolerance(self):
        eps = 1e-12
        blocks = [[np.eye(1) * (0.5 + eps), np.eye(1) * (0.5 + eps)],
                  [np.eye(1) * (0.5 - eps), np.eye(1) * (0.5 - eps)]]
        assert validate_magic(blocks).ok
        assert not validate_magic(blocks, tol=1e-14).ok


class TestValidateQuantumPermutation:
    def test_classical_permutation(self):
        sigma = (1, 2, 0)
        p = perm_matrix_exact(sigma)
        square = MagicSquare(
            [[ExactMatrix([[p[i, j]]]) for j in range(3)] for i in range(3)]
        )
        assert validate_quantum_permutation(square).ok

    def test_angle_pair_is_qpm_and_noncommuting(self):
        u = qpm_from_projector(np.diag([1.0, 0.0]) + 0j)
        w = qpm_from_projector(projector_at_angle(np.pi / 5))
        big = outer_direct_sum(u, w)
        assert validate_quantum_permutation(big).ok
        comms = [
            np.linalg.norm(
                big.block(0, 0) @ big.block(2, 2) - big.block(2, 2) @ big.block(0, 0)
            )
        ]
        assert max(comms) > 1e-3

    def test_angle_zero_commutes(self):
        u = qpm_from_projector(np.diag([1.0, 0.0]) + 0j)
        w = qpm_from_projector(projector_at_angle(0.0))
        big = outer_direct_sum(u, w)
        blocks = [big.block(i, j) for i in range(4) for j in range(4)]
        worst = max(
            np.linalg.norm(a @ b - b @ a) for a in blocks for b in blocks
        )
        assert worst < 1e-12

    def test_constant_square_fails_projector_identity(self):
        report = validate_quantum_permutation(constant_square(3, 2))
        assert not report.ok
        proj_fail = {v.location for v in report.violations if v.kind == "projector"}
        assert proj_fail == {(i, j) for i in range(3) for j in range(3)}

    def test_commuting_generator_small_n(self):
        rng = np.random.default_rng(0)
        for n in (2, 3):
            q = random_commuting_qpm(rng, n, 4)
            assert validate_quantum_permutation(q).ok
            blocks = [q.block(i, j) for i in range(n) for j in range(n)]
            worst = max(
                np.linalg.norm(a @ b - b @ a) for a in blocks for b in blocks
            )
            assert worst < 1e-10


class TestCompress:
    def test_identity_isometry(self):
        a = constant_square(3, 2, exact=False)
        assert compress(a, np.eye(2)) == a

    def test_corner_extraction(self):
        rng = np.random.default_rng(1)
        a = random_member_square(rng, 3, 2)
        b = constant_square(3, 3, exact=False)
        big = direct_sum(a, b)
        v = np.vstack([np.eye(2), np.zeros((3, 2))]) + 0j
        back = compress(big, v)
        for i in range(3):
            for j in range(3):
                assert np.allclose(back.block(i, j), a.block(i, j))

    def test_compression_stays_magic(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            u = random_commuting_qpm(rng, 3, 5)
            v = random_isometry(rng, 5, 2)
            assert validate_magic(compress(u, v).blocks).ok

    def test_non_isometry_rejected(self):
        a = constant_square(2, 2, exact=False)
        with pytest.raises(NotAnIsometry):
            compress(a, np.eye(2) * 2)

    def test_exact_compression(self):
        a = constant_square(2, 2)
        v = ExactMatrix([[1], [0]])
        out = compress(a, v)
        assert out.s == 1 and out.exact

    def test_mixed_rejected(self):
        with pytest.raises(MixedRepresentation):
            compress(constant_square(2, 2), np.eye(2))


class TestDirectSum:
    def test_constant_doubles(self):
        out = direct_sum(constant_square(3, 2), constant_square(3, 1))
        assert out.s == 3 and out.n == 3
        assert out == constant_square(3, 3)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatch):
            direct_sum(constant_square(2, 2), constant_square(3, 2))

    def test_qpm_closure(self):
        rng = np.random.default_rng(3)
        u = random_commuting_qpm(rng, 3, 2)
        w = random_commuting_qpm(rng, 3, 3)
        assert validate_quantum_permutation(direct_sum(u, w)).ok

    def test_invalid_summand_cannot_be_built(self):
        with pytest.raises(InvalidMagicSquare):
            MagicSquare([[np.eye(1), np.eye(1)], [np.eye(1), np.eye(1)]])


class TestEmbedPad:
    def test_pad_constant(self):
        out = embed_pad(constant_square(3, 2))
        assert out.n == 4 and validate_magic(out.blocks).ok
        assert out.block(3, 3) == ExactMatrix.identity(2)
        assert out.block(0, 3).is_zero()

    def test_double_pad(self):
        out = embed_pad(embed_pad(constant_square(2, 1, exact=False)))
        assert out.n == 4 and validate_magic(out.blocks).ok


class TestCompleteCorner:
    def test_uniform_corner_gives_constant_square(self):
        third = ExactMatrix.identity(2) * F(1, 3)
        out = complete_corner([[third, third], [third, third]])
        assert out == constant_square(3, 2)

    def test_right_inverse_of_corner_extraction(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            a = square_from_decomposition(random_exact_decomposition(rng, 3, 2))
            corner = [[a.block(0, 0), a.block(0, 1)], [a.block(1, 0), a.block(1, 1)]]
            assert complete_corner(corner) == a

    def test_infeasible_corner_reported(self):
        one = ExactMatrix.identity(2)
        with pytest.raises(CompletionNotPSD) as exc:
            complete_corner([[one, one], [one * 0, one * 0]])
        assert (0, 2) in exc.value.offending

    def test_bad_shape(self):
        with pytest.raises(ShapeMismatch):
            complete_corner([[ExactMatrix.identity(2)]])


class TestExactDecompositionSampler:
    def test_weights_are_psd_and_sum_to_identity(self):
        from qmagic.exact import psd_check_exact

        rng = np.random.default_rng(5)
        q = random_exact_decomposition(rng, 3, 2)
        total = ExactMatrix.zeros(2)
        for m in q.values():
            assert psd_check_exact(m).is_psd
            total = total + m
        assert total == ExactMatrix.identity(2)

    def test_square_is_magic(self):
        rng = np.random.default_rng(6)
        a = square_from_decomposition(random_exact_decomposition(rng, 2, 2))
        assert a.n == 2 and a.exact
