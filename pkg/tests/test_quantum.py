import numpy as np
import pytest

from seedless_di.bell import (
    OPTIMAL_ALICE_ANGLES,
    OPTIMAL_BOB_ANGLES,
    SQRT8,
    ShiftedChshParams,
    bell_state,
    devices_from_angles,
    optimal_devices,
    random_projective_devices,
)
from seedless_di.extractor import ExtractorTable, small_certified_table, xor_table
from seedless_di.linalg import kron, kron_all
from seedless_di.quantum import (
    ClassicalQuantumOutput,
    TripartiteState,
    build_rho_ke,
    eve_copy_state,
    load_fixture,
    product_round_fixture,
    purified_state,
    random_tripartite_state,
    save_fixture,
    parity_bound,
    mbit_bound,
    trace_distance_to_ideal,
    verify_bound,
)

Z_DEVICES = devices_from_angles(OPTIMAL_ALICE_ANGLES, OPTIMAL_BOB_ANGLES)


def _ket(dim, idx):
    v = np.zeros((dim, dim), dtype=complex)
    v[idx, idx] = 1.0
    return v


class TestTripartiteState:
    def test_guard_and_validation(self, rng):
        with pytest.raises(ValueError, match="guard"):
            TripartiteState.qubit_rounds(6, 4, np.eye(4**6 * 4) / (4**6 * 4))
        bad = np.eye(4, dtype=complex) / 2.0  # trace 2
        with pytest.raises(ValueError, match="trace"):
            TripartiteState.qubit_rounds(1, 1, bad)
        non_psd = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
        with pytest.raises(ValueError, match="negative eigenvalue"):
            TripartiteState.qubit_rounds(1, 1, non_psd)

    def test_reductions(self, rng):
        st = random_tripartite_state(2, 2, rng)
        ab = st.reduced_ab()
        ae = st.reduced_ae()
        assert ab.shape == (16, 16) and ae.shape == (8, 8)
        assert np.trace(ab).real == pytest.approx(1.0, abs=1e-10)
        assert np.trace(ae).real == pytest.approx(1.0, abs=1e-10)


class TestBuildRhoKe:
    def test_deterministic_single_round(self):
        rho = kron_all([_ket(2, 0), _ket(2, 0), _ket(2, 0)])
        st = TripartiteState.qubit_rounds(1, 2, rho)
        out = build_rho_ke(st, [Z_DEVICES], ExtractorTable(1, 1, np.array([0, 1])))
        np.testing.assert_allclose(out.blocks[0], _ket(2, 0), atol=1e-12)
        np.testing.assert_allclose(out.blocks[1], np.zeros((2, 2)), atol=1e-12)

    def test_unbiased_coin(self):
        rho = kron_all([np.eye(2) / 2.0, _ket(2, 0), np.eye(1)])
        st = TripartiteState.qubit_rounds(1, 1, rho)
        out = build_rho_ke(st, [Z_DEVICES], ExtractorTable(1, 1, np.array([0, 1])))
        assert out.blocks[0][0, 0].real == pytest.approx(0.5, abs=1e-12)
        assert out.blocks[1][0, 0].real == pytest.approx(0.5, abs=1e-12)
        assert trace_distance_to_ideal(out) == pytest.approx(0.0, abs=1e-12)

    def test_eve_copy_is_fully_predictable(self):
        st = eve_copy_state(2)
        out = build_rho_ke(st, [Z_DEVICES] * 2, xor_table(2))
        for block in out.blocks:
            off_diag = block - np.diag(np.diag(block))
            assert np.abs(off_diag).max() < 1e-12
        assert trace_distance_to_ideal(out) == pytest.approx(1.0, abs=1e-10)

    def test_block_normalisation(self, rng):
        st = random_tripartite_state(2, 4, rng)
        out = build_rho_ke(st, [random_projective_devices(rng) for _ in range(2)], xor_table(2))
        total = sum(np.trace(b).real for b in out.blocks)
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_requires_projective_alice(self, rng):
        st = random_tripartite_state(1, 1, rng)
        from seedless_di.bell import BinaryMeasurement, RoundDevices

        fuzzy = BinaryMeasurement(2, np.diag([0.7, 0.3]), np.diag([0.3, 0.7]))
        sharp = Z_DEVICES.alice[0]
        dev = RoundDevices(2, 2, (fuzzy, sharp), Z_DEVICES.bob)
        with pytest.raises(ValueError, match="projective"):
            build_rho_ke(st, [dev], ExtractorTable(1, 1, np.array([0, 1])))


class TestTraceDistance:
    def test_ideal_output(self):
        rho_e = np.diag([0.25, 0.75]).astype(complex)
        out = ClassicalQuantumOutput(1, (rho_e / 2.0, rho_e / 2.0))
        assert trace_distance_to_ideal(out) == pytest.approx(0.0, abs=1e-14)

    def test_deterministic_bit(self):
        rho_e = np.eye(1, dtype=complex)
        out = ClassicalQuantumOutput(1, (rho_e, np.zeros((1, 1))))
        assert trace_distance_to_ideal(out) == pytest.approx(1.0, abs=1e-14)


class TestErrorBounds:
    def test_single_round_value(self):
        fx = product_round_fixture(bell_state(), 1)
        assert parity_bound(fx, [optimal_devices()], 2.5) == pytest.approx(0.3511, abs=1e-4)

    def test_product_factorises(self):
        v1 = parity_bound(product_round_fixture(bell_state(), 1), [optimal_devices()], 2.5)
        v2 = parity_bound(product_round_fixture(bell_state(), 2), [optimal_devices()] * 2, 2.5)
        assert v2 == pytest.approx(v1**2, rel=1e-10)

    def test_monotone_tightening_in_rounds(self):
        vals = [
            parity_bound(product_round_fixture(bell_state(), n), [optimal_devices()] * n, 2.6)
            for n in (1, 2, 3)
        ]
        assert vals[0] < 1.0
        assert vals[0] > vals[1] > vals[2] > 0.0

    def test_no_violation_is_vacuous(self, rng):
        fx = product_round_fixture(np.eye(4) / 4.0, 1)
        val = parity_bound(fx, [random_projective_devices(rng)], 2.0 + 1e-6)
        assert val == pytest.approx(2.0, abs=1e-4)

    def test_mbit_bound_product_closed_form(self):
        fx = product_round_fixture(bell_state(), 6)
        from seedless_di.extractor import search_extractor

        g, cert, _ = search_extractor(6, 1, rng_seed=3)
        got = mbit_bound(fx, [optimal_devices()] * 6, 2.8, g)
        p = ShiftedChshParams(2.8)
        expected = 36 * np.sqrt(2.0) ** (1 - 6) * (1.0 + p.mu - p.nu * SQRT8) ** 6
        assert got == pytest.approx(expected, rel=1e-9)

    def test_mbit_bound_chsh_zero_vacuous(self):
        fx = product_round_fixture(np.eye(4) / 4.0, 3)
        g = small_certified_table(3, 1)
        val = mbit_bound(fx, [Z_DEVICES] * 3, 2.2, g)
        assert val >= 1.0

    def test_mbit_bound_rejects_wide_output(self):
        fx = product_round_fixture(bell_state(), 2)
        with pytest.raises(ValueError, match="m_out < n_in"):
            mbit_bound(fx, [optimal_devices()] * 2, 2.5, ExtractorTable(2, 2, np.arange(4)))

    def test_certification_gate_rejects_bad_table(self):
        # constant map at n=6, m=5: deviation 62 exceeds the 36 sqrt(2) bound
        from seedless_di.quantum import _require_certified

        bad = ExtractorTable(6, 5, np.zeros(64, dtype=np.int64))
        with pytest.raises(ValueError, match="certification"):
            _require_certified(bad)


class TestVerifyBound:
    def test_random_states_xor(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 4))
            st = random_tripartite_state(n, 2, rng)
            devs = [random_projective_devices(rng) for _ in range(n)]
            report = verify_bound(st, devs, xor_table(n))
            assert report["bound"] == "parity"
            assert report["pass"], report

    def test_random_states_mbit(self, rng):
        for _ in range(5):
            st = random_tripartite_state(3, 2, rng)
            devs = [random_projective_devices(rng) for _ in range(3)]
            report = verify_bound(st, devs, small_certified_table(3, 1))
            assert report["bound"] == "mbit"
            assert report["pass"], report

    def test_purified_adversary(self, rng):
        st = purified_state(2, rng)
        devs = [random_projective_devices(rng) for _ in range(2)]
        assert verify_bound(st, devs, xor_table(2))["pass"]

    def test_eve_copy_vacuous_but_not_violated(self):
        report = verify_bound(eve_copy_state(2), [Z_DEVICES] * 2, xor_table(2))
        assert report["lhs"] == pytest.approx(1.0, abs=1e-10)
        assert report["bestRhs"] >= 1.0
        assert report["pass"]

    def test_maximal_violation_limit_on_extended_grid(self):
        # per-round factor min over a grid reaching 2*sqrt(2) - 1e-4
        from seedless_di.bell import s_grid

        grid = s_grid(64, hi=SQRT8 - 1e-4)
        factors = [
            ShiftedChshParams(float(s)).mu - ShiftedChshParams(float(s)).nu * SQRT8
            for s in grid
        ]
        assert min(factors) <= 0.05


class TestFixtureIO:
    def test_roundtrip(self, tmp_path, rng):
        st = random_tripartite_state(2, 2, rng)
        path = tmp_path / "fixture.json"
        save_fixture(st, path)
        back = load_fixture(path)
        assert back.n_rounds == 2 and back.dim_e == 2
        np.testing.assert_allclose(back.rho, st.rho, atol=1e-15)
