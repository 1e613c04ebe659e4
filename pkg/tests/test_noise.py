"""Calibrated imperfection models and the composed noisy protocol."""

import io

import numpy as np
import pytest

from pcollapse import (
    NoiseConfig,
    bell_phi_plus,
    calibrate_initial_visibility,
    concurrence,
    dephase,
    density,
    evolve_pm_on_bell,
    ket,
    noisy_protocol,
    phase_perturb,
    pm_operator,
    read_noise_config,
    state_fidelity,
    werner,
    write_noise_config,
)

# Frozen oracles, computed by sequential literal matrix algebra (numpy
# kron/eigvals only) for the default calibration: Werner weight 29/30,
# single-pass visibility 0.96, end-to-end double-pass visibility 0.91.
LOCAL_CONCURRENCE_DEFAULTS = 0.911333333333
NONLOCAL_CONCURRENCE_P01 = 0.862920099991
NONLOCAL_CONCURRENCE_P05 = 0.859419087137
NONLOCAL_CONCURRENCE_P09 = 0.808430913349
NONLOCAL_PROB_P05 = 0.502083333333
NONLOCAL_PROB_P09 = 0.106750


class TestNoiseConfig:
    def test_ideal_flag(self):
        assert NoiseConfig().is_ideal
        assert NoiseConfig.ideal(shots=0).is_ideal
        assert not NoiseConfig(visibility_single=0.96).is_ideal
        assert not NoiseConfig(phase_error=0.1).is_ideal

    def test_defaults_calibration(self):
        cfg = NoiseConfig.defaults()
        assert cfg.initial_visibility == pytest.approx(29 / 30, abs=1e-12)
        assert cfg.visibility_single == 0.96
        assert cfg.visibility_double == 0.91
        assert cfg.phase_error == 0.0
        assert not cfg.is_ideal

    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseConfig(initial_visibility=1.2)
        with pytest.raises(ValueError):
            NoiseConfig(visibility_double=-0.1)
        with pytest.raises(ValueError):
            NoiseConfig(phase_error=float("nan"))
        with pytest.raises(ValueError):
            NoiseConfig(shots=-1)

    def test_zero_shots_allowed(self):
        assert NoiseConfig(shots=0).shots == 0


class TestConfigFile:
    def test_roundtrip(self, tmp_path):
        cfg = NoiseConfig(initial_visibility=0.97, visibility_single=0.95,
                          visibility_double=0.9, phase_error=0.05, shots=0)
        path = tmp_path / "noise.cfg"
        write_noise_config(cfg, path)
        assert read_noise_config(path) == cfg

    def test_partial_file_keeps_ideal_defaults(self):
        cfg = read_noise_config(io.StringIO("visibility_single = 0.9\n"))
        assert cfg.visibility_single == 0.9
        assert cfg.initial_visibility == 1.0
        assert cfg.phase_error == 0.0
        assert cfg.shots == 10000

    def test_comments_and_blanks_ignored(self):
        text = "# calibration run 12\n\nshots = 500\n"
        assert read_noise_config(io.StringIO(text)).shots == 500

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            read_noise_config(io.StringIO("coupling = 0.5\n"))

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError):
            read_noise_config(io.StringIO("just some words\n"))


class TestWerner:
    def test_endpoints(self):
        assert np.allclose(werner(1.0), density(bell_phi_plus()), atol=1e-12)
        assert np.allclose(werner(0.0), np.eye(4) / 4, atol=1e-12)

    def test_interpolation_entries(self):
        rho = werner(0.6)
        assert rho[0, 0].real == pytest.approx(0.6 / 2 + 0.4 / 4, abs=1e-12)
        assert rho[0, 3].real == pytest.approx(0.3, abs=1e-12)
        assert rho[1, 1].real == pytest.approx(0.1, abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            werner(1.1)


class TestCalibration:
    def test_target_095(self):
        v = calibrate_initial_visibility(0.95)
        assert v == pytest.approx(29 / 30, abs=1e-12)
        assert concurrence(werner(v)) == pytest.approx(0.95, abs=1e-10)

    def test_endpoints(self):
        assert calibrate_initial_visibility(1.0) == pytest.approx(
            1.0, abs=1e-12)
        assert calibrate_initial_visibility(0.0) == pytest.approx(
            1 / 3, abs=1e-12)

    def test_roundtrip_on_grid(self):
        for c in np.arange(0.0, 1.0001, 0.1):
            v = calibrate_initial_visibility(float(c))
            assert concurrence(werner(v)) == pytest.approx(float(c),
                                                           abs=1e-10)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            calibrate_initial_visibility(1.5)


class TestDephase:
    def test_identity_at_unit_visibility(self):
        rho = density(ket("D"))
        assert np.allclose(dephase(rho, "single", 1.0), rho, atol=1e-12)

    def test_scales_coherences(self):
        out = dephase(density(ket("D")), "single", 0.7)
        assert out[0, 1].real == pytest.approx(0.35, abs=1e-12)
        assert out[0, 0].real == pytest.approx(0.5, abs=1e-12)

    def test_full_dephasing_kills_coherences(self):
        out = dephase(density(ket("D")), "single", 0.0)
        assert np.allclose(out, np.eye(2) / 2, atol=1e-12)

    def test_werner_concurrence_scaling(self):
        # Dephasing one qubit of a Bell pair at visibility v leaves
        # concurrence v; equivalent to the Werner off-diagonal damping.
        for v in (0.9, 0.96, 1.0):
            rho = dephase(density(bell_phi_plus()), "A", v)
            assert concurrence(rho) == pytest.approx(v, abs=1e-10)

    def test_qubit_a_and_b_equivalent_on_bell(self):
        rho = density(bell_phi_plus())
        a = dephase(rho, "A", 0.8)
        b = dephase(rho, "B", 0.8)
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_monotone_in_visibility(self):
        values = [concurrence(dephase(density(bell_phi_plus()), "A", v))
                  for v in np.arange(0.0, 1.0001, 0.1)]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            dephase(density(ket("H")), "A", 0.9)
        with pytest.raises(ValueError):
            dephase(density(bell_phi_plus()), "C", 0.9)


class TestPhasePerturb:
    def test_zero_phase_unchanged(self):
        op = pm_operator(0.4).no_click
        assert np.allclose(phase_perturb(op, 0.0), op, atol=1e-15)

    def test_pi_maps_d_to_a(self):
        out = phase_perturb(np.eye(2, dtype=complex), np.pi) @ ket("D")
        assert state_fidelity(out, ket("A")) == pytest.approx(1.0, abs=1e-12)

    def test_small_phase_overlap(self):
        # |<D| diag(1, e^{i delta}) |D>|^2 = cos^2(delta / 2).
        out = phase_perturb(np.eye(2, dtype=complex), 0.2) @ ket("D")
        assert state_fidelity(out, ket("D")) == pytest.approx(
            np.cos(0.1) ** 2, abs=1e-12)

    def test_basis_states_unaffected(self):
        op = phase_perturb(np.eye(2, dtype=complex), 0.2)
        assert state_fidelity(op @ ket("H"), ket("H")) == pytest.approx(
            1.0, abs=1e-12)
        assert state_fidelity(op @ ket("V"), ket("V")) == pytest.approx(
            1.0, abs=1e-12)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            phase_perturb(np.eye(4, dtype=complex), 0.1)


class TestNoisyProtocolIdeal:
    def test_pm_only_matches_exact_evolution(self):
        for p in np.arange(0.0, 0.9501, 0.1):
            rho, prob = noisy_protocol(float(p), "pm_only", NoiseConfig())
            psi, prob_exact = evolve_pm_on_bell(float(p))
            assert prob == pytest.approx(prob_exact, abs=1e-12)
            assert np.max(np.abs(rho - density(psi))) <= 1e-10

    @pytest.mark.parametrize("mode", ["local", "nonlocal"])
    def test_reversal_recovers_bell(self, mode):
        for p in np.arange(0.0, 0.9501, 0.1):
            rho, prob = noisy_protocol(float(p), mode, NoiseConfig())
            assert state_fidelity(rho, bell_phi_plus()) >= 1 - 1e-10
            assert prob == pytest.approx(1 - p, abs=1e-12)

    def test_rejects_unknown_mode(self):
        with pytest.raises(ValueError):
            noisy_protocol(0.5, "both", NoiseConfig())


class TestNoisyProtocolDefaults:
    def test_local_concurrence_frozen(self):
        cfg = NoiseConfig.defaults()
        for p in (0.1, 0.5, 0.9):
            rho, _ = noisy_protocol(p, "local", cfg)
            assert concurrence(rho) == pytest.approx(
                LOCAL_CONCURRENCE_DEFAULTS, abs=1e-10)

    def test_local_concurrence_strength_independent(self):
        cfg = NoiseConfig.defaults()
        values = [concurrence(noisy_protocol(float(p), "local", cfg)[0])
                  for p in np.arange(0.0, 0.9501, 0.05)]
        assert max(values) - min(values) <= 1e-10

    def test_nonlocal_concurrence_frozen(self):
        cfg = NoiseConfig.defaults()
        for p, expected in ((0.1, NONLOCAL_CONCURRENCE_P01),
                            (0.5, NONLOCAL_CONCURRENCE_P05),
                            (0.9, NONLOCAL_CONCURRENCE_P09)):
            rho, _ = noisy_protocol(p, "nonlocal", cfg)
            assert concurrence(rho) == pytest.approx(expected, abs=1e-10)

    def test_nonlocal_probability_frozen(self):
        cfg = NoiseConfig.defaults()
        assert noisy_protocol(0.5, "nonlocal", cfg)[1] == pytest.approx(
            NONLOCAL_PROB_P05, abs=1e-10)
        assert noisy_protocol(0.9, "nonlocal", cfg)[1] == pytest.approx(
            NONLOCAL_PROB_P09, abs=1e-10)

    def test_outputs_physical(self):
        cfg = NoiseConfig.defaults()
        for mode in ("pm_only", "local", "nonlocal"):
            for p in (0.0, 0.5, 0.9):
                rho, prob = noisy_protocol(p, mode, cfg)
                assert 0.0 < prob <= 1.0 + 1e-12
                assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
                assert np.min(np.linalg.eigvalsh(rho)) >= -1e-10
                assert np.max(np.abs(rho - rho.conj().T)) <= 1e-12

    def test_noise_never_raises_concurrence(self, rng):
        for _ in range(20):
            cfg = NoiseConfig(
                initial_visibility=rng.uniform(0.8, 1.0),
                visibility_single=rng.uniform(0.85, 1.0),
                visibility_double=rng.uniform(0.8, 0.85),
                phase_error=rng.uniform(-0.3, 0.3),
            )
            for mode in ("pm_only", "local", "nonlocal"):
                for p in (0.0, 0.3, 0.6, 0.9):
                    noisy, _ = noisy_protocol(p, mode, cfg)
                    ideal, _ = noisy_protocol(p, mode, NoiseConfig())
                    assert concurrence(noisy) <= concurrence(ideal) + 1e-9
