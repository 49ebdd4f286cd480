import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrac.core import (
    I2,
    X,
    Y,
    Z,
    BinaryPovm,
    BlochVector,
    DensityMatrix,
    InvalidLevelError,
    NotAStateError,
    PureState,
    QuantumError,
    bloch_to_density,
    density_to_bloch,
    gell_mann_basis,
    hermitian_eigh,
    ket,
    measure_prob,
    partial_trace,
    povm_canonical_form,
    random_binary_povm,
    random_pure_state,
    tensor,
)
from qrac.schemes import encode_ambainis2, encode_chuang3

PLUS = PureState(np.array([1, 1]) / math.sqrt(2))
MINUS = PureState(np.array([1, -1]) / math.sqrt(2))


def random_mixed(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


class TestGellMann:
    def test_qubit_basis_is_pauli(self):
        basis = gell_mann_basis(2)
        for got, want in zip(basis, (X, Y, Z)):
            np.testing.assert_array_equal(got, want)

    @pytest.mark.parametrize("level", [2, 3, 4, 5])
    def test_generator_properties(self, level):
        basis = gell_mann_basis(level)
        assert len(basis) == level**2 - 1
        for lam in basis:
            assert np.allclose(lam, lam.conj().T, atol=1e-12)
            assert abs(np.trace(lam)) < 1e-12

    def test_level4_all_225_inner_products(self):
        basis = gell_mann_basis(4)
        gram = np.array([[np.trace(a @ b) for b in basis] for a in basis])
        assert gram.shape == (15, 15)
        np.testing.assert_allclose(gram, 2 * np.eye(15), atol=1e-12)

    @pytest.mark.parametrize("bad", [0, 1, -3])
    def test_invalid_level(self, bad):
        with pytest.raises(InvalidLevelError):
            gell_mann_basis(bad)


class TestBloch:
    def test_maximally_mixed_is_origin(self):
        np.testing.assert_allclose(density_to_bloch(I2 / 2).coords, 0, atol=1e-15)

    def test_computational_basis_on_z_axis(self):
        np.testing.assert_allclose(density_to_bloch(ket("0")).coords, [0, 0, 1], atol=1e-15)
        rho = bloch_to_density(BlochVector([0, 0, -1], 2))
        np.testing.assert_allclose(rho.matrix, ket("1").projector(), atol=1e-15)

    def test_chuang_state_on_cube_diagonal(self):
        r = density_to_bloch(encode_chuang3("000")).coords
        np.testing.assert_allclose(r, np.ones(3) / math.sqrt(3), atol=1e-12)

    @pytest.mark.parametrize("level", [2, 3, 4])
    def test_zero_vector_gives_identity(self, level):
        rho = bloch_to_density(np.zeros(level**2 - 1))
        np.testing.assert_allclose(rho.matrix, np.eye(level) / level, atol=1e-15)

    def test_level4_not_a_state(self):
        # lambda_8 = diag(1, 1, -2, 0)/sqrt(3); I/4 + t/2 * lambda_8 has eigenvalue 1/4 - t/sqrt(3)
        e = np.zeros(15)
        e[12 + 1] = 1.0  # diagonal generators sit at indices 12, 13, 14
        np.testing.assert_allclose(np.diag(gell_mann_basis(4)[13]), np.array([1, 1, -2, 0]) / math.sqrt(3))
        with pytest.raises(NotAStateError) as info:
            bloch_to_density(e)
        assert info.value.min_eigenvalue == pytest.approx(0.25 - 1 / math.sqrt(3), abs=1e-12)

        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            try:
                bloch_to_density(mid * e)
                lo = mid
            except NotAStateError:
                hi = mid
        assert lo == pytest.approx(math.sqrt(3) / 4, abs=1e-9)

    @pytest.mark.parametrize("level", [2, 4])
    def test_round_trip(self, level, rng):
        for _ in range(200):
            rho = random_mixed(level, rng)
            back = bloch_to_density(density_to_bloch(rho))
            assert np.max(np.abs(back.matrix - rho.matrix)) < 1e-10

    def test_purity_norm_equivalence(self, rng):
        for _ in range(200):
            pure = random_pure_state(2, rng).density()
            assert pure.is_pure()
            assert abs(density_to_bloch(pure).norm - 1) < 1e-9
            mixed = random_mixed(2, rng)
            assert mixed.is_pure() == (abs(density_to_bloch(mixed).norm - 1) < 1e-9)

    def test_product_of_pure_qubits_norm(self, rng):
        # Tr(rho^2) = 1/N + |r|^2 / 2 gives |r| = sqrt(2 (1 - 1/4)) for pure two-qubit states
        for _ in range(20):
            a, b = random_pure_state(2, rng), random_pure_state(2, rng)
            r = density_to_bloch(tensor(a, b))
            assert r.norm == pytest.approx(math.sqrt(1.5), abs=1e-9)

    @given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3))
    @settings(max_examples=200, deadline=None)
    def test_ball_is_state_space_for_qubits(self, coords):
        r = np.array(coords)
        if np.linalg.norm(r) > 1:
            r = r / np.linalg.norm(r)
        back = density_to_bloch(bloch_to_density(r)).coords
        np.testing.assert_allclose(back, r, atol=1e-12)


class TestMeasureProb:
    def test_identity_effect(self, rng):
        for _ in range(10):
            assert measure_prob(np.eye(2), random_mixed(2, rng)) == pytest.approx(1.0, abs=1e-12)

    def test_ambainis_success(self):
        p = measure_prob(ket("0").projector(), encode_ambainis2("00"))
        assert p == pytest.approx(math.cos(math.pi / 8) ** 2, abs=1e-12)
        assert p == pytest.approx(0.8535534, abs=1e-7)

    @pytest.mark.parametrize("level", [2, 4])
    def test_bloch_formula(self, level, rng):
        for _ in range(200):
            rho = random_pure_state(level, rng).density()
            sigma = random_pure_state(level, rng).density()
            direct = measure_prob(sigma, rho)
            via_bloch = 1 / level + 0.5 * density_to_bloch(rho).dot(density_to_bloch(sigma))
            assert abs(direct - via_bloch) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(QuantumError):
            measure_prob(np.eye(4), ket("0"))


class TestPovm:
    def test_completeness_and_defaults(self):
        p = BinaryPovm(ket("0").projector())
        np.testing.assert_allclose(p.e1, ket("1").projector())
        assert p.is_projective()

    def test_rejects_bad_effects(self):
        with pytest.raises(QuantumError):
            BinaryPovm(np.diag([1.2, 0.0]))
        with pytest.raises(QuantumError):
            BinaryPovm(np.eye(2) / 2, np.eye(2) / 3)
        with pytest.raises(QuantumError):
            BinaryPovm(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_canonical_projective(self):
        alphas, vecs = povm_canonical_form(BinaryPovm(ket("0").projector()))
        np.testing.assert_allclose(alphas, [1, 0], atol=1e-15)
        np.testing.assert_allclose(vecs[:, 0], [1, 0], atol=1e-15)

    def test_canonical_degenerate_uses_computational_basis(self):
        alphas, vecs = povm_canonical_form(BinaryPovm(np.eye(2) / 2))
        np.testing.assert_allclose(alphas, [0.5, 0.5])
        np.testing.assert_allclose(vecs, np.eye(2), atol=1e-15)

    def test_canonical_mixed_weights(self):
        e0 = 0.8 * PLUS.projector() + 0.3 * MINUS.projector()
        alphas, vecs = povm_canonical_form(BinaryPovm(e0))
        np.testing.assert_allclose(alphas, [0.8, 0.3], atol=1e-12)
        np.testing.assert_allclose(vecs[:, 0], PLUS.amplitudes, atol=1e-12)

    def test_canonical_reconstruction(self, rng):
        for _ in range(1000):
            povm = random_binary_povm(int(rng.choice([2, 4])), rng)
            alphas, vecs = povm_canonical_form(povm)
            assert np.all(np.diff(alphas) <= 0)
            assert np.max(np.abs(vecs.conj().T @ vecs - np.eye(povm.dim))) < 1e-10
            rebuilt = (vecs * alphas) @ vecs.conj().T
            assert np.max(np.abs(rebuilt - povm.e0)) < 1e-10

    def test_degenerate_block_is_deterministic(self):
        u = np.linalg.qr(np.array([[1, 2, 0], [0, 1, 1], [1, 0, 1]], dtype=complex))[0]
        a = u @ np.diag([0.7, 0.7, 0.1]) @ u.conj().T
        v1 = hermitian_eigh(a)[1]
        v2 = hermitian_eigh(a.copy())[1]
        np.testing.assert_array_equal(v1, v2)
        assert abs(v1[0, 0].imag) < 1e-15 and v1[0, 0].real > 0

    def test_outcome_probabilities_sum_to_one(self, rng):
        for _ in range(200):
            dim = int(rng.choice([2, 4]))
            povm = random_binary_povm(dim, rng)
            rho = random_mixed(dim, rng)
            assert abs(measure_prob(povm.e0, rho) + measure_prob(povm.e1, rho) - 1) < 1e-10


class TestComposite:
    def test_tensor_of_mixed(self):
        out = tensor(DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(2))
        np.testing.assert_allclose(out.matrix, np.eye(4) / 4)

    def test_tensor_of_basis_states(self):
        np.testing.assert_allclose(tensor(ket("0"), ket("1")).matrix, ket("01").projector())

    def test_partial_trace_of_bell_state(self):
        bell = PureState(np.array([1, 0, 0, 1]) / math.sqrt(2))
        for keep in (0, 1):
            np.testing.assert_allclose(partial_trace(bell, keep=keep).matrix, np.eye(2) / 2, atol=1e-15)

    def test_partial_trace_of_product(self, rng):
        a, b = random_mixed(2, rng), random_mixed(2, rng)
        prod = tensor(a, b)
        assert np.max(np.abs(partial_trace(prod, keep=0).matrix - a.matrix)) < 1e-12
        assert np.max(np.abs(partial_trace(prod, keep=1).matrix - b.matrix)) < 1e-12
        np.testing.assert_allclose(partial_trace(np.eye(4) / 4).matrix, np.eye(2) / 2)

    def test_partial_trace_bad_dims(self):
        with pytest.raises(QuantumError):
            partial_trace(np.eye(4) / 4, dims=(3, 2))


def test_state_constructors_validate():
    with pytest.raises(NotAStateError):
        PureState([1, 1])
    with pytest.raises(NotAStateError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(NotAStateError):
        DensityMatrix(np.eye(2))


def test_objects_are_immutable():
    rho = ket("0").density()
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 0
