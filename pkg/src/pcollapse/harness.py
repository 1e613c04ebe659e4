"""Scenario runners and report serialization.

Each ``run_*`` function sweeps the measurement strength grid for one
scenario, producing a :class:`RunReport` whose records are flat
dictionaries of scalars (matrices appear as ``<name>_re_ij`` /
``<name>_im_ij`` entries).  Reports serialize to JSON or CSV with floats
rounded to 12 significant digits, so identical configurations produce
byte-identical files.  Wall time is tracked on the report object but is
never written to disk.

Randomness is fully seeded: every grid point draws its own seed from a
``SeedSequence`` keyed by (base seed, scenario id, point index), so
reordering or skipping points in one scenario cannot shift the counts of
another.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ._version import __version__
from .core import ket
from .metrics import (
    bloch_vector,
    chsh_optimize,
    concurrence,
    horodecki_smax,
    state_fidelity,
)
from .noise import (
    NoiseConfig,
    calibrate_initial_visibility,
    interferometer_channel,
    noisy_protocol,
    werner,
)
from .tomography import (
    QPT_PROBE_LABELS,
    SINGLE_QUBIT_SETTINGS,
    TWO_QUBIT_SETTINGS_16,
    TWO_QUBIT_SETTINGS_36,
    chi_analytic_pm,
    chi_identity,
    mle_state,
    normalize_chi,
    process_fidelity,
    qpt_single_qubit,
    sample_counts,
)

SCENARIOS = ("fig2", "fig3", "fig4", "chsh")

DEFAULT_P_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

# Strengths at which fig4 emits full density matrices when the grid is
# the default one (a user-supplied grid snapshots every point instead).
DEFAULT_SNAPSHOT_STRENGTHS = (0.1, 0.5, 0.9)

FIG2_PROBES = ("H", "V", "R", "D")
FIG4_MODES = ("pm_only", "local", "nonlocal")

# Scenario tags mixed into per-point seed derivation.  Stable across
# releases; changing them would silently change every sampled report.
_SCENARIO_IDS = {"fig2": 2, "fig3": 3, "fig4": 4, "chsh": 5}

_CHSH_REPETITIONS = 20

# Soft-assertion bands for noisy runs.  Reports record the band alongside
# the observed value and a reference (the measured figure the band was
# built around); --strict turns band misses into exit code 4.
_FIG3_FIDELITY_FLOOR = 0.90
_FIG3_FIDELITY_REFERENCE = 0.93
_FIG4_LOCAL_BAND = (0.87, 0.97)
_FIG4_NONLOCAL_BAND = (0.85, 0.95)
_CHSH_NOISY_REFERENCE = 2.538


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated inputs shared by every scenario runner."""

    p_grid: tuple[float, ...] = DEFAULT_P_GRID
    p_grid_is_default: bool = True
    shots: int = 10000
    seed: int = 1
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    noise_label: str = "ideal"
    settings: int = 36

    def __post_init__(self) -> None:
        if len(self.p_grid) == 0:
            raise ValueError("p_grid must contain at least one strength")
        for p in self.p_grid:
            if not 0.0 <= p < 1.0:
                raise ValueError(f"measurement strength {p} outside [0, 1)")
        if self.shots < 0:
            raise ValueError(f"shots must be >= 0, got {self.shots}")
        if self.settings not in (16, 36):
            raise ValueError(f"settings must be 16 or 36, got {self.settings}")

    @property
    def exact(self) -> bool:
        """True when shots == 0, i.e. probabilities are used directly."""
        return self.shots == 0

    def two_qubit_settings(self) -> tuple[str, ...]:
        return TWO_QUBIT_SETTINGS_16 if self.settings == 16 else TWO_QUBIT_SETTINGS_36

    def snapshot_strengths(self) -> tuple[float, ...]:
        if self.p_grid_is_default:
            return DEFAULT_SNAPSHOT_STRENGTHS
        return self.p_grid

    def echo(self) -> dict:
        """Data-affecting configuration echoed into every report."""
        return {
            "p_grid": list(self.p_grid),
            "shots": self.shots,
            "seed": self.seed,
            "settings": self.settings,
            "noise_label": self.noise_label,
            "noise": {
                "initial_visibility": self.noise.initial_visibility,
                "visibility_single": self.noise.visibility_single,
                "visibility_double": self.noise.visibility_double,
                "phase_error": self.noise.phase_error,
            },
        }


@dataclass
class RunReport:
    """Outcome of one scenario run.

    ``wall_time`` is informational only and is excluded from the
    serialized payload.
    """

    scenario: str
    config: dict
    records: list[dict]
    seed: int
    version: str = __version__
    wall_time: float = 0.0

    def soft_failures(self) -> list[dict]:
        return [
            r
            for r in self.records
            if r.get("kind") == "soft_check" and not r.get("passed", True)
        ]

    def payload(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "records": self.records,
            "seed": self.seed,
            "version": self.version,
        }


def _round_sig(value: float) -> float:
    """Round to 12 significant digits for stable serialization."""
    if value == 0.0 or not np.isfinite(value):
        return float(value)
    return float(f"{value:.12g}")


def _rounded(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return _round_sig(obj)
    if isinstance(obj, dict):
        return {k: _rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(v) for v in obj]
    raise TypeError(f"cannot serialize value of type {type(obj).__name__}")


def _derive_seed(base: int, scenario: str, index: int) -> int:
    entropy = [int(base) % (2**63), _SCENARIO_IDS[scenario], int(index)]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def _matrix_entries(prefix: str, matrix: np.ndarray) -> dict:
    """Flatten a matrix into <prefix>_re_ij / <prefix>_im_ij scalars."""
    out: dict = {}
    n = matrix.shape[0]
    for part, grab in (("re", np.real), ("im", np.imag)):
        vals = grab(matrix)
        for i in range(n):
            for j in range(n):
                out[f"{prefix}_{part}_{i}{j}"] = float(vals[i, j])
    return out


def _soft_check(name: str, value: float, lower: float, upper: float,
                reference: float) -> dict:
    return {
        "kind": "soft_check",
        "name": name,
        "value": float(value),
        "lower": float(lower),
        "upper": float(upper),
        "reference": float(reference),
        "passed": bool(lower <= value <= upper),
    }


def _reconstruct_state(rho: np.ndarray, settings: tuple[str, ...],
                       shots: int, seed: int) -> np.ndarray:
    """Tomographic round trip when sampling, identity when exact."""
    if shots == 0:
        return rho
    records = sample_counts(rho, settings, shots, seed)
    dim = rho.shape[0]
    return mle_state(records, dim)


def run_fig2(cfg: ScenarioConfig) -> RunReport:
    """Single-qubit collapse and recovery traced through the Bloch sphere.

    For each probe state and strength, records the Bloch vector after the
    partial measurement and after the reversal, the fidelity of the
    recovered state with the probe, and the success probabilities of both
    stages.  A trailing calibration record reports the interferometer
    phase offset that would reproduce the mean R/D recovery fidelity.
    """
    start = time.perf_counter()
    records: list[dict] = []
    rd_fidelities: list[float] = []
    index = 0
    for p in cfg.p_grid:
        ch_pm = interferometer_channel(p, "pm", cfg.noise)
        ch_rev = interferometer_channel(p, "reverse", cfg.noise)
        for probe in FIG2_PROBES:
            psi = ket(probe)
            after_pm, prob_pm = ch_pm(psi)
            after_rev, prob_rev = ch_rev(psi)
            seed_pm = _derive_seed(cfg.seed, "fig2", index)
            seed_rev = _derive_seed(cfg.seed, "fig2", index + 1)
            index += 2
            est_pm = _reconstruct_state(after_pm, SINGLE_QUBIT_SETTINGS,
                                        cfg.shots, seed_pm)
            est_rev = _reconstruct_state(after_rev, SINGLE_QUBIT_SETTINGS,
                                         cfg.shots, seed_rev)
            fidelity = state_fidelity(est_rev, psi)
            if probe in ("R", "D"):
                rd_fidelities.append(fidelity)
            bx, by, bz = bloch_vector(est_pm)
            rx, ry, rz = bloch_vector(est_rev)
            records.append({
                "kind": "point",
                "p": float(p),
                "probe": probe,
                "bloch_pm_x": float(bx),
                "bloch_pm_y": float(by),
                "bloch_pm_z": float(bz),
                "bloch_recovered_x": float(rx),
                "bloch_recovered_y": float(ry),
                "bloch_recovered_z": float(rz),
                "fidelity_recovered": float(fidelity),
                "prob_pm": float(prob_pm),
                "prob_recovered": float(prob_rev),
            })
    # With an unbalanced interferometer the R/D fidelity depression is
    # consistent with a residual phase 2*arccos(sqrt(F)); report the fit
    # so the configured phase_error can be compared against it.
    mean_rd = float(np.mean(rd_fidelities))
    fitted = 2.0 * np.arccos(np.sqrt(np.clip(mean_rd, 0.0, 1.0)))
    records.append({
        "kind": "calibration",
        "name": "phase_error_fit",
        "value": float(fitted),
        "mean_rd_fidelity": mean_rd,
    })
    report = RunReport("fig2", cfg.echo(), records, cfg.seed)
    report.wall_time = time.perf_counter() - start
    return report


def run_fig3(cfg: ScenarioConfig) -> RunReport:
    """Process matrices of the measurement and measure-reverse channels.

    For each strength the chi matrix of the partial measurement alone and
    of the measure-then-reverse sequence is estimated by process
    tomography over the H, V, D, R probes.  Raw (success-probability
    weighted) and trace-normalized chi entries are both recorded, with
    the closed-form prediction alongside the measurement channel and the
    identity-process fidelity alongside the reversal channel.
    """
    start = time.perf_counter()
    records: list[dict] = []
    reversal_fidelities: list[float] = []
    index = 0
    for p in cfg.p_grid:
        for stage in ("pm", "reverse"):
            channel = interferometer_channel(p, stage, cfg.noise)
            seed = _derive_seed(cfg.seed, "fig3", index)
            index += 1
            result = qpt_single_qubit(channel, shots=cfg.shots, seed=seed)
            chi = result.chi
            chi_norm = normalize_chi(chi)
            rec = {
                "kind": "point",
                "p": float(p),
                "channel": stage,
                "chi_trace": float(np.trace(chi).real),
            }
            for label in QPT_PROBE_LABELS:
                rec[f"success_prob_{label}"] = float(
                    result.success_probabilities[label])
            rec.update(_matrix_entries("chi", chi))
            rec.update(_matrix_entries("chi_norm", chi_norm))
            if stage == "pm":
                analytic = chi_analytic_pm(p)
                rec.update(_matrix_entries("chi_analytic", analytic))
                rec["chi_analytic_maxdiff"] = float(
                    np.max(np.abs(chi - analytic)))
            else:
                fid = process_fidelity(chi, chi_identity())
                rec["fidelity_vs_identity"] = float(fid)
                reversal_fidelities.append(float(fid))
            records.append(rec)
    # The fidelity floor describes the noisy model; ideal runs would pass
    # trivially, so the check is only recorded for non-ideal configs.
    if not cfg.noise.is_ideal:
        records.append(_soft_check(
            "reversal_process_fidelity",
            min(reversal_fidelities),
            _FIG3_FIDELITY_FLOOR,
            1.0,
            _FIG3_FIDELITY_REFERENCE,
        ))
    report = RunReport("fig3", cfg.echo(), records, cfg.seed)
    report.wall_time = time.perf_counter() - start
    return report


def run_fig4(cfg: ScenarioConfig) -> RunReport:
    """Two-qubit concurrence under collapse and both reversal placements.

    Sweeps the strength grid for the measurement-only, local-reversal and
    nonlocal-reversal protocols, recording concurrence and success
    probability per point (with the closed-form post-measurement
    concurrence alongside the measurement-only rows) and full density
    matrices at the snapshot strengths.
    """
    start = time.perf_counter()
    records: list[dict] = []
    snapshots = cfg.snapshot_strengths()
    settings = cfg.two_qubit_settings()
    local_values: list[tuple[float, float]] = []
    nonlocal_values: list[tuple[float, float]] = []
    index = 0
    for p in cfg.p_grid:
        for mode in FIG4_MODES:
            rho, prob = noisy_protocol(p, mode, cfg.noise)
            seed = _derive_seed(cfg.seed, "fig4", index)
            index += 1
            est = _reconstruct_state(rho, settings, cfg.shots, seed)
            conc = concurrence(est)
            rec = {
                "kind": "point",
                "p": float(p),
                "mode": mode,
                "concurrence": float(conc),
                "success_probability": float(prob),
            }
            if mode == "pm_only":
                theory = 2.0 * np.sqrt(1.0 - p) / (2.0 - p)
                rec["concurrence_theory"] = float(theory)
                if cfg.noise.is_ideal and cfg.shots == 0:
                    if abs(conc - theory) > 1e-9:
                        raise RuntimeError(
                            "exact ideal concurrence drifted from the "
                            f"closed form at p={p}: {conc} vs {theory}")
            elif mode == "local":
                local_values.append((float(p), float(conc)))
            else:
                nonlocal_values.append((float(p), float(conc)))
            if any(abs(p - s) < 1e-12 for s in snapshots):
                rec.update(_matrix_entries("rho", est))
            records.append(rec)
    # Recovery bands describe the noisy model, not sampling scatter around
    # the ideal pipeline, so they are only recorded for non-ideal configs.
    if not cfg.noise.is_ideal:
        worst_local = min(c for _, c in local_values)
        records.append(_soft_check(
            "local_recovery_concurrence",
            worst_local,
            _FIG4_LOCAL_BAND[0],
            _FIG4_LOCAL_BAND[1],
            0.92,
        ))
        # The nonlocal benchmark is quoted at moderate strength; use the
        # grid point nearest p = 0.5.
        near_p, near_c = min(nonlocal_values, key=lambda pc: abs(pc[0] - 0.5))
        check = _soft_check(
            "nonlocal_recovery_concurrence",
            near_c,
            _FIG4_NONLOCAL_BAND[0],
            _FIG4_NONLOCAL_BAND[1],
            0.90,
        )
        check["p"] = near_p
        records.append(check)
    report = RunReport("fig4", cfg.echo(), records, cfg.seed)
    report.wall_time = time.perf_counter() - start
    return report


def _chsh_point(state: np.ndarray, variant: str, shots: int, seed: int,
                settings: tuple[str, ...]) -> dict:
    """CHSH optimum of one state plus sampling statistics when shots > 0."""
    s, angles = chsh_optimize(state)
    rec = {
        "kind": "point",
        "variant": variant,
        "s": float(s),
        "theta1": float(angles.theta1),
        "theta1p": float(angles.theta1p),
        "theta2": float(angles.theta2),
        "theta2p": float(angles.theta2p),
        "s_horodecki": float(horodecki_smax(state)),
        "margin_over_2": float(s - 2.0),
    }
    if shots > 0:
        values = []
        for rep in range(_CHSH_REPETITIONS):
            rep_seed = int(np.random.SeedSequence(
                [seed, rep]).generate_state(1, np.uint64)[0])
            records = sample_counts(state, settings, shots, rep_seed)
            est = mle_state(records, 4)
            values.append(chsh_optimize(est)[0])
        rec["s_sampled_mean"] = float(np.mean(values))
        rec["s_sampled_std"] = float(np.std(values, ddof=1))
        rec["repetitions"] = _CHSH_REPETITIONS
    return rec


def run_chsh(cfg: ScenarioConfig) -> RunReport:
    """Bell-inequality test on the nonlocally recovered state at p = 0.5.

    Emits three records: the calibrated initial state alone, the ideal
    recovered state, and the recovered state under the configured noise
    model.  Sampled runs add a seed-resampled mean and standard error of
    S per record.
    """
    start = time.perf_counter()
    p = 0.5
    settings = cfg.two_qubit_settings()
    records: list[dict] = []

    v0 = cfg.noise.initial_visibility
    if cfg.noise.is_ideal:
        v0 = calibrate_initial_visibility(0.95)
    initial = werner(v0)
    rec = _chsh_point(initial, "werner_initial", cfg.shots,
                      _derive_seed(cfg.seed, "chsh", 0), settings)
    rec["initial_visibility"] = float(v0)
    records.append(rec)

    ideal_state, _ = noisy_protocol(p, "nonlocal", NoiseConfig())
    rec = _chsh_point(ideal_state, "ideal", cfg.shots,
                      _derive_seed(cfg.seed, "chsh", 1), settings)
    rec["p"] = p
    records.append(rec)

    noisy_state, _ = noisy_protocol(p, "nonlocal", cfg.noise)
    rec = _chsh_point(noisy_state, "noisy", cfg.shots,
                      _derive_seed(cfg.seed, "chsh", 2), settings)
    rec["p"] = p
    noisy_s = rec["s"]
    records.append(rec)

    if not cfg.noise.is_ideal:
        records.append(_soft_check(
            "chsh_violation",
            noisy_s,
            2.0,
            2.0 * np.sqrt(2.0),
            _CHSH_NOISY_REFERENCE,
        ))
    report = RunReport("chsh", cfg.echo(), records, cfg.seed)
    report.wall_time = time.perf_counter() - start
    return report


_RUNNERS: dict[str, Callable[[ScenarioConfig], RunReport]] = {
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "chsh": run_chsh,
}


def run_scenario(name: str, cfg: ScenarioConfig) -> list[RunReport]:
    """Run one scenario by name, or all four in order for "all"."""
    if name == "all":
        return [_RUNNERS[s](cfg) for s in SCENARIOS]
    if name not in _RUNNERS:
        raise ValueError(f"unknown scenario {name!r}; "
                         f"expected one of {SCENARIOS + ('all',)}")
    return [_RUNNERS[name](cfg)]


def report_json(report: RunReport) -> str:
    payload = _rounded(report.payload())
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_csv(report: RunReport) -> str:
    """Records-only CSV; columns appear in first-seen order."""
    columns: list[str] = []
    for rec in report.records:
        for key in rec:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in report.records:
        row = []
        for key in columns:
            if key not in rec:
                row.append("")
                continue
            value = rec[key]
            if isinstance(value, bool):
                row.append("true" if value else "false")
            elif isinstance(value, float):
                row.append(f"{value:.12g}")
            else:
                row.append(str(value))
        writer.writerow(row)
    return buf.getvalue()


def write_report(report: RunReport, out_dir, fmt: str = "json") -> Path:
    """Serialize one report to <out_dir>/<scenario>.<fmt>."""
    if fmt not in ("json", "csv"):
        raise ValueError(f"format must be json or csv, got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{report.scenario}.{fmt}"
    text = report_json(report) if fmt == "json" else report_csv(report)
    path.write_text(text, encoding="utf-8")
    return path
