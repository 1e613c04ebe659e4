"""Concurrence, fidelity, Bloch/correlation extraction, and CHSH machinery."""

import numpy as np
import pytest

from pcollapse import (
    AnalyzerAngles,
    PAULI_Y,
    bell_phi_plus,
    bloch_vector,
    canonical_angle,
    chsh_optimize,
    chsh_value,
    concurrence,
    correlation,
    correlation_matrix,
    density,
    evolve_pm_on_bell,
    horodecki_smax,
    ket,
    ket2,
    state_fidelity,
    tensor,
    werner,
)
from conftest import random_density, random_unitary

S_MAX = 2 * np.sqrt(2)
# Frozen oracle: 2 sqrt(2) * 29/30 for the isotropic state calibrated to
# concurrence 0.95 (see noise tests for the visibility derivation).
WERNER_CALIBRATED_S = 2.734146220588


def spectral_concurrence(rho):
    """Independent concurrence oracle via the non-Hermitian spectrum.

    Uses eigenvalues of rho (Y x Y) rho* (Y x Y) directly, with no shared
    code path with the library (which goes through sqrt_psd of a Hermitian
    sandwich).
    """
    yy = np.kron(PAULI_Y, PAULI_Y)
    product = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.linalg.eigvals(product).real, 0.0, None))
    lam = np.sort(lam)[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


class TestConcurrence:
    def test_bell_state(self):
        assert concurrence(bell_phi_plus()) == pytest.approx(1.0, abs=1e-10)

    def test_product_state(self):
        assert concurrence(ket2("HH")) == pytest.approx(0.0, abs=1e-12)
        assert concurrence(tensor(ket("D"), ket("R"))) == pytest.approx(
            0.0, abs=1e-10)

    def test_partial_measurement_closed_form(self):
        for p in np.arange(0.0, 0.9501, 0.05):
            psi, _ = evolve_pm_on_bell(float(p))
            expected = 2 * np.sqrt(1 - p) / (2 - p)
            assert abs(concurrence(psi) - expected) <= 1e-10

    def test_werner_closed_form(self):
        for v in (0.4, 0.7, 0.95, 1.0):
            assert concurrence(werner(v)) == pytest.approx(
                (3 * v - 1) / 2, abs=1e-10)
        for v in (0.0, 0.2, 1 / 3):
            assert concurrence(werner(v)) == pytest.approx(0.0, abs=1e-10)

    def test_matches_spectral_oracle_on_random_states(self, rng):
        for _ in range(40):
            rho = random_density(rng, 4)
            assert concurrence(rho) == pytest.approx(
                spectral_concurrence(rho), abs=1e-8)

    def test_local_unitary_invariance(self, rng):
        rho = density(evolve_pm_on_bell(0.3)[0])
        base = concurrence(rho)
        for _ in range(20):
            u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
            assert concurrence(u @ rho @ u.conj().T) == pytest.approx(
                base, abs=1e-9)

    def test_accepts_state_vector_and_density(self):
        psi, _ = evolve_pm_on_bell(0.6)
        assert concurrence(psi) == pytest.approx(concurrence(density(psi)),
                                                 abs=1e-10)


class TestStateFidelity:
    def test_identical_pure(self):
        assert state_fidelity(ket("H"), ket("H")) == pytest.approx(
            1.0, abs=1e-12)

    def test_orthogonal(self):
        assert state_fidelity(ket("H"), ket("V")) == pytest.approx(
            0.0, abs=1e-12)

    def test_pure_vs_maximally_mixed(self):
        assert state_fidelity(ket("H"), np.eye(2) / 2) == pytest.approx(
            0.5, abs=1e-12)

    def test_pure_pure_is_overlap_squared(self, rng):
        for _ in range(20):
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            b = rng.normal(size=2) + 1j * rng.normal(size=2)
            a /= np.linalg.norm(a)
            b /= np.linalg.norm(b)
            expected = abs(np.vdot(a, b)) ** 2
            assert state_fidelity(a, b) == pytest.approx(expected, abs=1e-10)

    def test_symmetry_and_range(self, rng):
        for dim in (2, 4):
            for _ in range(15):
                rho = random_density(rng, dim)
                sigma = random_density(rng, dim)
                f_ab = state_fidelity(rho, sigma)
                f_ba = state_fidelity(sigma, rho)
                assert f_ab == pytest.approx(f_ba, abs=1e-9)
                assert -1e-12 <= f_ab <= 1 + 1e-12

    def test_self_fidelity_one(self, rng):
        for _ in range(10):
            rho = random_density(rng, 4)
            assert state_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_mixed_diagonal_oracle(self):
        # F(diag(a), diag(b)) = (sum sqrt(a_i b_i))^2 by direct computation.
        rho = np.diag([0.7, 0.3]).astype(complex)
        sigma = np.diag([0.4, 0.6]).astype(complex)
        expected = (np.sqrt(0.7 * 0.4) + np.sqrt(0.3 * 0.6)) ** 2
        assert state_fidelity(rho, sigma) == pytest.approx(expected, abs=1e-10)


class TestBlochAndCorrelation:
    def test_cardinal_states(self):
        assert np.allclose(bloch_vector(ket("H")), [0, 0, 1], atol=1e-12)
        assert np.allclose(bloch_vector(ket("V")), [0, 0, -1], atol=1e-12)
        assert np.allclose(bloch_vector(ket("D")), [1, 0, 0], atol=1e-12)
        assert np.allclose(bloch_vector(ket("R")), [0, -1, 0], atol=1e-12)
        assert np.allclose(bloch_vector(ket("L")), [0, 1, 0], atol=1e-12)

    def test_maximally_mixed(self):
        assert np.allclose(bloch_vector(np.eye(2) / 2), [0, 0, 0], atol=1e-12)

    def test_bell_correlation_matrix(self):
        t = correlation_matrix(bell_phi_plus())
        assert np.allclose(t, np.diag([1.0, -1.0, 1.0]), atol=1e-12)

    def test_werner_correlation_matrix(self):
        t = correlation_matrix(werner(0.6))
        assert np.allclose(t, np.diag([0.6, -0.6, 0.6]), atol=1e-10)


class TestChshValue:
    def test_bell_optimal_angles(self):
        s = chsh_value(bell_phi_plus(), (0.0, 45.0, 22.5, -22.5))
        assert s == pytest.approx(S_MAX, abs=1e-10)

    def test_bell_degenerate_prime_angle(self):
        s = chsh_value(bell_phi_plus(), (0.0, 45.0, 22.5, 22.5))
        assert s == pytest.approx(np.sqrt(2), abs=1e-5)

    def test_accepts_analyzer_angles_instance(self):
        angles = AnalyzerAngles(0.0, 45.0, 22.5, -22.5)
        assert chsh_value(bell_phi_plus(), angles) == pytest.approx(
            S_MAX, abs=1e-10)

    def test_correlation_bell_closed_form(self):
        # E(a, b) on the Bell state is cos(2a - 2b).
        for a, b in [(0, 0), (0, 22.5), (45, 22.5), (30, -10), (13, 77)]:
            expected = np.cos(np.radians(2 * (a - b)))
            assert correlation(bell_phi_plus(), a, b) == pytest.approx(
                expected, abs=1e-10)

    def test_analyzer_antiperiodicity(self, rng):
        rho = random_density(rng, 4)
        for a, b in [(0, 15), (33, -40), (70, 10)]:
            assert correlation(rho, a + 90, b) == pytest.approx(
                -correlation(rho, a, b), abs=1e-10)
            assert correlation(rho, a, b + 90) == pytest.approx(
                -correlation(rho, a, b), abs=1e-10)

    def test_product_state_bound(self):
        s = chsh_value(ket2("HH"), (0.0, 45.0, 22.5, -22.5))
        assert abs(s) <= 2 + 1e-12


class TestCanonicalAngle:
    def test_fold(self):
        assert canonical_angle(0.0) == 0.0
        assert canonical_angle(90.0) == 90.0
        assert canonical_angle(-90.0) == 90.0
        assert canonical_angle(135.0) == pytest.approx(-45.0, abs=1e-12)
        assert canonical_angle(181.0) == pytest.approx(1.0, abs=1e-12)
        assert canonical_angle(-181.0) == pytest.approx(-1.0, abs=1e-12)

    def test_preserves_analyzer_up_to_sign(self):
        from pcollapse import analyzer
        for theta in (-170.0, -91.0, 17.0, 123.0, 260.0):
            folded = canonical_angle(theta)
            a_raw = analyzer(theta)
            a_fold = analyzer(folded)
            same = np.max(np.abs(a_raw - a_fold)) <= 1e-10
            flipped = np.max(np.abs(a_raw + a_fold)) <= 1e-10
            assert same or flipped

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            canonical_angle(float("nan"))


def rotation_y(angle_rad):
    c, s = np.cos(angle_rad / 2), np.sin(angle_rad / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def bell_diagonal(w1, w2, w3, w4):
    phi_plus = bell_phi_plus()
    phi_minus = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)
    psi_plus = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    psi_minus = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return (w1 * density(phi_plus) + w2 * density(phi_minus)
            + w3 * density(psi_plus) + w4 * density(psi_minus))


class TestChshOptimize:
    def test_bell_state(self):
        s, angles = chsh_optimize(bell_phi_plus())
        assert s == pytest.approx(S_MAX, abs=1e-6)
        assert chsh_value(bell_phi_plus(), angles) == pytest.approx(
            s, abs=1e-12)

    def test_maximally_mixed(self):
        s, _ = chsh_optimize(np.eye(4, dtype=complex) / 4)
        assert abs(s) <= 1e-9

    def test_werner_calibrated(self):
        s, _ = chsh_optimize(werner(29 / 30))
        assert s == pytest.approx(WERNER_CALIBRATED_S, abs=1e-9)

    def test_partial_measurement_grid_matches_horodecki(self):
        # The post-measurement state's correlation matrix lives in the
        # analyzer plane, so the in-plane optimum equals the global bound.
        for p in (0.0, 0.3, 0.5, 0.8):
            psi, _ = evolve_pm_on_bell(p)
            s, _ = chsh_optimize(psi)
            assert s == pytest.approx(horodecki_smax(psi), abs=1e-6)

    def test_constructed_family_reaches_horodecki(self, rng):
        # States whose two dominant correlation directions are X and Z:
        # a Bell-diagonal core with the XX and ZZ entries largest, rotated
        # within the analyzer plane on each side.
        for _ in range(25):
            w2 = rng.uniform(0.05, 0.12)
            w3 = rng.uniform(0.05, 0.12)
            w4 = rng.uniform(0.0, min(w2, w3) - 1e-3)
            w1 = 1.0 - w2 - w3 - w4
            rho = bell_diagonal(w1, w2, w3, w4)
            u = np.kron(rotation_y(rng.uniform(-np.pi, np.pi)),
                        rotation_y(rng.uniform(-np.pi, np.pi)))
            rho = u @ rho @ u.conj().T
            s, angles = chsh_optimize(rho)
            assert abs(s - horodecki_smax(rho)) <= 1e-4
            assert chsh_value(rho, angles) == pytest.approx(s, abs=1e-9)

    def test_never_exceeds_horodecki(self, rng):
        for _ in range(20):
            rho = random_density(rng, 4)
            s, _ = chsh_optimize(rho)
            assert s <= horodecki_smax(rho) + 1e-6


class TestHorodecki:
    def test_bell(self):
        assert horodecki_smax(bell_phi_plus()) == pytest.approx(
            S_MAX, abs=1e-10)

    def test_product(self):
        assert horodecki_smax(ket2("HH")) == pytest.approx(2.0, abs=1e-10)

    def test_werner_linear_in_visibility(self):
        for v in (0.2, 0.6, 29 / 30, 1.0):
            assert horodecki_smax(werner(v)) == pytest.approx(
                S_MAX * v, abs=1e-10)

    def test_partial_measurement_closed_form(self):
        # For a|HH> + b|VV> with a, b real the correlation matrix is
        # diag(2ab, -2ab, 1), so the bound is 2 sqrt(1 + (2ab)^2).
        for p in (0.1, 0.4, 0.7):
            psi, _ = evolve_pm_on_bell(p)
            c = 2 * np.sqrt(1 - p) / (2 - p)
            expected = 2 * np.sqrt(1 + c * c)
            assert horodecki_smax(psi) == pytest.approx(expected, abs=1e-10)
