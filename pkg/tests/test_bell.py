import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seedless_di.bell import (
    BinaryMeasurement,
    HypothesisError,
    S_CLAMP,
    SQRT8,
    ShiftedChshParams,
    bell_state,
    chsh_operator,
    chsh_value,
    devices_from_angles,
    optimal_devices,
    predictability_observable,
    projective_qubit_measurement,
    random_projective_devices,
    s_grid,
    shifted_chsh_operator,
    verify_tensor_product_inequality,
    verify_operator_inequality,
    werner_state,
)
from seedless_di.linalg import ginibre_state, kron, min_eigenvalue

X = np.array([[0, 1], [1, 0]], dtype=complex)


class TestKron:
    def test_identity(self):
        np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_projectors(self):
        p = np.diag([1.0, 0.0])
        np.testing.assert_array_equal(kron(p, p), np.diag([1.0, 0, 0, 0]))

    def test_double_bit_flip(self):
        v00 = np.array([1, 0, 0, 0], dtype=complex)
        v11 = kron(X, X) @ v00
        np.testing.assert_array_equal(v11, np.array([0, 0, 0, 1], dtype=complex))


class TestMeasurements:
    def test_projective_from_angle(self):
        m = projective_qubit_measurement(0.3)
        assert m.projective
        np.testing.assert_allclose(m.element0 + m.element1, np.eye(2), atol=1e-14)

    def test_completeness_violation_rejected(self):
        with pytest.raises(ValueError, match="sum to identity"):
            BinaryMeasurement(2, np.eye(2), np.eye(2))

    def test_negative_element_rejected(self):
        e0 = np.diag([1.5, 0.0])
        with pytest.raises(ValueError, match="positive semidefinite"):
            BinaryMeasurement(2, e0, np.eye(2) - e0)

    def test_non_projective_flag_enforced(self):
        e0 = np.diag([0.7, 0.3])
        BinaryMeasurement(2, e0, np.eye(2) - e0)  # fine unflagged
        with pytest.raises(ValueError, match="idempotent"):
            BinaryMeasurement(2, e0, np.eye(2) - e0, projective=True)


class TestShiftParams:
    @pytest.mark.parametrize("s", [2.1, 2.5, 2.8, 2.82842])
    def test_coefficient_identities(self, s):
        p = ShiftedChshParams(s)
        root = np.sqrt(2.0 - p.s**2 / 4.0)
        assert abs(p.mu - 2.0 / root) <= 1e-12
        assert abs(p.nu - (p.s / 4.0) / root) <= 1e-12
        assert p.mu > 0 and p.nu > 0

    def test_clamped_lower_end(self):
        p = ShiftedChshParams(2.0 + 1e-9)
        assert p.s == 2.0 + S_CLAMP
        assert abs(p.mu - 2.0) < 1e-5
        assert abs(p.nu - 0.5) < 1e-5

    def test_endpoints_accepted_and_clamped(self):
        assert ShiftedChshParams(2.0).s == 2.0 + S_CLAMP
        assert ShiftedChshParams(SQRT8).s == SQRT8 - S_CLAMP

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            ShiftedChshParams(1.9)
        with pytest.raises(ValueError):
            ShiftedChshParams(2.9)


class TestChshValue:
    def test_optimal_angles_reach_quantum_maximum(self):
        assert abs(chsh_value(bell_state(), optimal_devices()) - SQRT8) < 1e-12

    def test_product_state_respects_classical_bound(self, rng):
        state = kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])).astype(complex)
        for _ in range(25):
            assert chsh_value(state, random_projective_devices(rng)) <= 2.0 + 1e-9

    def test_maximally_mixed_state_gives_zero(self, rng):
        state = np.eye(4) / 4.0
        assert abs(chsh_value(state, random_projective_devices(rng))) < 1e-12

    def test_linearity_in_state(self, rng):
        dev = random_projective_devices(rng)
        r1 = ginibre_state(4, rng=rng)
        r2 = ginibre_state(4, rng=rng)
        lam = 0.37
        mixed = lam * r1 + (1 - lam) * r2
        lhs = chsh_value(mixed, dev)
        rhs = lam * chsh_value(r1, dev) + (1 - lam) * chsh_value(r2, dev)
        assert abs(lhs - rhs) <= 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            chsh_value(np.eye(2) / 2.0, optimal_devices())


class TestShiftedOperator:
    def test_expectation_identity_vs_chsh(self, rng):
        # tr(rho S) = mu - nu * CHSH(rho) for any state, devices, s
        for _ in range(20):
            dev = random_projective_devices(rng)
            rho = ginibre_state(4, rng=rng)
            p = ShiftedChshParams(rng.uniform(2.0 + 1e-6, SQRT8 - 1e-6))
            lhs = np.trace(rho @ shifted_chsh_operator(p, dev)).real
            rhs = p.mu - p.nu * chsh_value(rho, dev)
            assert abs(lhs - rhs) <= 1e-10

    def test_hermitian(self, rng):
        dev = random_projective_devices(rng)
        s_op = shifted_chsh_operator(ShiftedChshParams(2.5), dev)
        assert np.abs(s_op - s_op.conj().T).max() <= 1e-12

    def test_expectation_at_optimal_devices(self):
        p = ShiftedChshParams(2.5)
        val = np.trace(bell_state() @ shifted_chsh_operator(p, optimal_devices())).real
        assert abs(val - (p.mu - p.nu * SQRT8)) < 1e-12
        assert abs(val - 0.3511) < 1e-4

    def test_no_violation_gives_mu(self, rng):
        p = ShiftedChshParams(2.3)
        dev = random_projective_devices(rng)
        val = np.trace((np.eye(4) / 4.0) @ shifted_chsh_operator(p, dev)).real
        assert abs(val - p.mu) < 1e-12


class TestOperatorInequality:
    def test_optimal_devices_pass(self):
        assert verify_operator_inequality(ShiftedChshParams(2.5), optimal_devices())["pass"]

    def test_degenerate_settings_pass(self):
        dev = devices_from_angles([0.7, 0.7], [1.1, 2.2])
        assert verify_operator_inequality(ShiftedChshParams(2.6), dev)["pass"]

    def test_broken_shift_fails(self):
        p = ShiftedChshParams(2.5)
        dev = optimal_devices()
        damaged = shifted_chsh_operator(p, dev) - 0.5 * np.eye(4)
        c_op = predictability_observable(dev)
        assert min_eigenvalue(damaged - c_op) < -1e-9 or min_eigenvalue(damaged + c_op) < -1e-9

    def test_grid_sweep(self, rng):
        for s in s_grid(10):
            for _ in range(10):
                report = verify_operator_inequality(ShiftedChshParams(float(s)), random_projective_devices(rng))
                assert report["pass"], report

    def test_predictability_bounded_by_shift_expectation(self, rng):
        for _ in range(30):
            dev = random_projective_devices(rng)
            rho = ginibre_state(4, rng=rng)
            p = ShiftedChshParams(rng.uniform(2.0 + 1e-6, SQRT8 - 1e-6))
            bias = abs(np.trace(rho @ predictability_observable(dev)).real)
            assert bias <= np.trace(rho @ shifted_chsh_operator(p, dev)).real + 1e-9


@settings(max_examples=30, deadline=None)
@given(
    a0=st.floats(0, 2 * np.pi),
    a1=st.floats(0, 2 * np.pi),
    b0=st.floats(0, 2 * np.pi),
    b1=st.floats(0, 2 * np.pi),
    s=st.floats(2.001, 2.8),
)
def test_inequality_holds_for_arbitrary_angles(a0, a1, b0, b1, s):
    dev = devices_from_angles([a0, a1], [b0, b1])
    assert verify_operator_inequality(ShiftedChshParams(s), dev)["pass"]


class TestTensorProductInequality:
    def test_zero_case(self):
        pairs = [(np.zeros((2, 2)), np.eye(2))] * 3
        report = verify_tensor_product_inequality(pairs)
        assert report["pass"]
        assert abs(report["minEig_plus"] - 1.0) < 1e-12

    def test_diagonal_boundary_case(self):
        pairs = [(np.diag([1.0, -1.0]), np.eye(2))] * 2
        report = verify_tensor_product_inequality(pairs)
        assert report["pass"]
        assert abs(report["minEig_plus"]) < 1e-12
        assert abs(report["minEig_minus"]) < 1e-12

    def test_random_square_construction(self, rng):
        # S = C^2 + eps I satisfies the premise once eps >= 1/4
        for _ in range(10):
            pairs = []
            for _ in range(rng.integers(2, 5)):
                d = int(rng.integers(2, 4))
                g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                c = (g + g.conj().T) / 2
                c = c / max(np.abs(np.linalg.eigvalsh(c)).max(), 1e-9)
                pairs.append((c, c @ c + 0.3 * np.eye(d)))
            assert verify_tensor_product_inequality(pairs)["pass"]

    def test_premise_violation_is_reported_distinctly(self):
        bad = [(np.diag([2.0, 0.0]), np.eye(2))]
        with pytest.raises(HypothesisError):
            verify_tensor_product_inequality(bad)

    def test_dimension_guard(self):
        pairs = [(np.zeros((8, 8)), np.eye(8))] * 5  # 8^5 = 32768 > 4096
        with pytest.raises(ValueError, match="guard"):
            verify_tensor_product_inequality(pairs)


def test_werner_state_interpolates_chsh():
    for w in (0.0, 0.4, 1.0):
        val = chsh_value(werner_state(w), optimal_devices())
        assert abs(val - w * SQRT8) < 1e-12


def test_chsh_operator_norm_bound(rng):
    # operator 2-norm of the CHSH combination never exceeds the quantum maximum
    for _ in range(10):
        op = chsh_operator(random_projective_devices(rng))
        eigs = np.linalg.eigvalsh(op)
        assert np.abs(eigs).max() <= SQRT8 + 1e-9
