import numpy as np
import pytest

from opcalc import (
    TensorOperator,
    commutator,
    eigen_decompose,
    embed_slot,
    gen_matrix,
    kron,
    matrix_exp,
    matrix_from_json,
    matrix_to_json,
    nabla,
    opnorm,
    pair,
    rel_err,
)
from opcalc.errors import DimensionMismatch, NonDiagonalizable, SlotOutOfRange


def nested_commutator(a, b, n):
    """Brute-force oracle: ad_a^n(b) by n explicit commutators."""
    x = b
    for _ in range(n):
        x = a @ x - x @ a
    return x


class TestEigenDecompose:
    def test_diagonal(self):
        spec, v, vinv = eigen_decompose(np.diag([1.0, 2.0]))
        assert sorted(spec.eigenvalues.real) == [1.0, 2.0]
        assert rel_err(v @ vinv, np.eye(2)) < 1e-14

    def test_jordan_block_rejected(self):
        with pytest.raises(NonDiagonalizable):
            eigen_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_hermitian_reconstruction(self):
        a = gen_matrix("hermitian", 4, 0)
        spec, v, vinv = eigen_decompose(a)
        assert rel_err((v * spec.eigenvalues) @ vinv, a) <= 1e-10

    def test_conditioning_reported(self):
        spec, _, _ = eigen_decompose(gen_matrix("hermitian", 3, 1))
        assert spec.conditioning < 10.0  # unitary basis


class TestKron:
    def test_identities(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_diagonal(self):
        out = kron(np.diag([2.0, 3.0]), np.eye(2))
        assert np.allclose(out, np.diag([2.0, 2.0, 3.0, 3.0]))

    def test_spectrum_multiplicative(self):
        # oracle: eigendecomposition of both sides
        x = gen_matrix("random", 2, 3)
        y = gen_matrix("random", 2, 4)
        got = np.sort_complex(np.linalg.eigvals(kron(x, y)))
        expected = np.sort_complex(
            np.multiply.outer(np.linalg.eigvals(x), np.linalg.eigvals(y)).ravel()
        )
        assert np.max(np.abs(got - expected)) < 1e-8


class TestSlots:
    def test_embed_definition(self):
        a = gen_matrix("random", 2, 5)
        assert np.allclose(embed_slot(a, 1, 0).matrix, np.kron(a, np.eye(2)))
        assert np.allclose(embed_slot(a, 1, 1).matrix, np.kron(np.eye(2), a))

    def test_embed_range(self):
        a = gen_matrix("random", 2, 5)
        with pytest.raises(SlotOutOfRange):
            embed_slot(a, 1, 2)
        with pytest.raises(SlotOutOfRange):
            nabla(a, 2, 0)

    def test_distinct_slots_commute(self):
        a = gen_matrix("random", 2, 6)
        b = gen_matrix("random", 2, 7)
        x = embed_slot(a, 1, 0)
        y = embed_slot(b, 1, 1)
        defect = opnorm(commutator(x.matrix, y.matrix))
        assert defect <= 1e-13 * opnorm(x.matrix) * opnorm(y.matrix)

    def test_middle_slot_pairing(self):
        # slot-1 lift of a paired with (b1, b2) interleaves as b1 a b2
        a = gen_matrix("random", 2, 8)
        b1 = gen_matrix("random", 2, 9)
        b2 = gen_matrix("random", 2, 10)
        assert rel_err(pair(embed_slot(a, 2, 1), [b1, b2]), b1 @ a @ b2) < 1e-13

    def test_telescoping(self):
        a = gen_matrix("random", 2, 11)
        n = 3
        for j in range(1, n + 1):
            total = embed_slot(a, n, n)
            for k in range(j, n + 1):
                total = total + nabla(a, n, k)
            # pure additions of Kronecker matrices: machine precision
            assert opnorm(total.matrix - embed_slot(a, n, j - 1).matrix) <= 1e-14


class TestPair:
    def test_elementary_tensor(self):
        a0 = gen_matrix("random", 2, 12)
        a1 = gen_matrix("random", 2, 13)
        b = gen_matrix("random", 2, 14)
        t = TensorOperator(np.kron(a0, a1), 2, 2)
        assert rel_err(pair(t, [b]), a0 @ b @ a1) < 1e-13

    def test_unit_tensor(self):
        b = gen_matrix("random", 3, 15)
        t = TensorOperator(np.eye(9), 3, 2)
        assert rel_err(pair(t, [b]), b) < 1e-14

    def test_single_slot(self):
        a = gen_matrix("random", 3, 16)
        t = TensorOperator(a, 3, 1)
        assert np.array_equal(pair(t, []), a)

    def test_bilinearity(self):
        rng = np.random.default_rng(17)
        t1 = TensorOperator(rng.standard_normal((4, 4)) + 0j, 2, 2)
        t2 = TensorOperator(rng.standard_normal((4, 4)) + 0j, 2, 2)
        b1 = rng.standard_normal((2, 2)) + 0j
        b2 = rng.standard_normal((2, 2)) + 0j
        lhs = pair(t1 + t2, [b1 + 2.0 * b2])
        rhs = pair(t1, [b1]) + 2.0 * pair(t1, [b2]) + pair(t2, [b1]) + 2.0 * pair(t2, [b2])
        assert rel_err(lhs, rhs) < 1e-12

    def test_dimension_mismatch(self):
        t = TensorOperator(np.eye(4), 2, 2)
        with pytest.raises(DimensionMismatch):
            pair(t, [np.eye(3)])
        with pytest.raises(DimensionMismatch):
            pair(t, [np.eye(2), np.eye(2)])

    def test_adjoint_action(self):
        # nabla powers pair to iterated commutators (brute-force oracle)
        for d in (2, 3, 4):
            a = gen_matrix("random", d, 18 + d)
            b = gen_matrix("random", d, 25 + d)
            nab = nabla(a, 1, 1)
            for n in range(1, 6):
                got = pair(nab.power(n), [b])
                want = nested_commutator(a, b, n)
                assert rel_err(got, want) < 1e-12

    def test_binomial_rewrite(self):
        # a^m b expanded against commutator terms, m = 4 (direct product oracle)
        a = gen_matrix("random", 3, 20)
        b = gen_matrix("random", 3, 21)
        m = 4
        lhs = np.linalg.matrix_power(a, m) @ b
        rhs = np.zeros_like(lhs)
        from math import comb

        for j in range(m + 1):
            rhs = rhs + comb(m, j) * nested_commutator(a, b, j) @ np.linalg.matrix_power(a, m - j)
        assert rel_err(lhs, rhs) < 1e-12

    def test_multinomial_rewrite(self):
        # a^m b1 b2 = sum over alpha of multinomials of ad powers (oracle: direct)
        from math import factorial

        a = gen_matrix("random", 2, 22)
        b1 = gen_matrix("random", 2, 23)
        b2 = gen_matrix("random", 2, 24)
        m = 3
        lhs = np.linalg.matrix_power(a, m) @ b1 @ b2
        rhs = np.zeros_like(lhs)
        for a1 in range(m + 1):
            for a2 in range(m + 1 - a1):
                coeff = factorial(m) // (factorial(a1) * factorial(a2) * factorial(m - a1 - a2))
                rhs = rhs + coeff * (
                    nested_commutator(a, b1, a1)
                    @ nested_commutator(a, b2, a2)
                    @ np.linalg.matrix_power(a, m - a1 - a2)
                )
        assert rel_err(lhs, rhs) < 1e-12


class TestMatrixExp:
    def test_zero(self):
        assert np.array_equal(matrix_exp(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        out = matrix_exp(np.diag([0.0, 1.0]))
        assert rel_err(out, np.diag([1.0, np.e])) < 1e-14

    def test_nilpotent(self):
        out = matrix_exp(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert rel_err(out, np.array([[1.0, 1.0], [0.0, 1.0]])) < 1e-15

    def test_normal_against_eig(self):
        a = gen_matrix("hermitian", 4, 25)
        spec, v, vinv = eigen_decompose(a)
        oracle = (v * np.exp(spec.eigenvalues)) @ vinv
        assert rel_err(matrix_exp(a), oracle) <= 1e-12


class TestJson:
    def test_roundtrip(self):
        m = gen_matrix("random", 3, 26)
        assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)

    def test_shape_guard(self):
        with pytest.raises(DimensionMismatch):
            matrix_from_json({"dim": 2, "re": [1.0, 2.0], "im": [0.0, 0.0]})


class TestTensorOperatorType:
    def test_dimension_invariant(self):
        with pytest.raises(DimensionMismatch):
            TensorOperator(np.eye(5), 2, 2)  # 5 != 2**2

    def test_algebra_mismatch(self):
        t1 = TensorOperator(np.eye(4), 2, 2)
        t2 = TensorOperator(np.eye(4), 4, 1)
        with pytest.raises(DimensionMismatch):
            _ = t1 + t2


class TestConcurrency:
    def test_parallel_invocations_agree(self):
        # pure functions of immutable inputs: concurrent calls must match
        from concurrent.futures import ThreadPoolExecutor

        from opcalc import dd_contour, exp_function

        f = exp_function()
        a = gen_matrix("random", 3, 27)
        b = gen_matrix("random", 3, 28)
        nodes = [0.1, 0.4 + 0.2j, -0.3]

        def work(_):
            return (
                pair(nabla(a, 1, 1).power(2), [b]),
                dd_contour(f, nodes),
            )

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(work, range(16)))
        ref_pair, ref_dd = results[0]
        for got_pair, got_dd in results[1:]:
            assert np.array_equal(got_pair, ref_pair)
            assert got_dd == ref_dd
