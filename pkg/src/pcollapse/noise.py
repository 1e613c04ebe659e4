"""Calibrated imperfection models bridging ideal simulation and measured data.

Three physical imperfections are modeled:

* initial-state impurity as isotropic (Werner) mixing, calibrated so the
  prepared pair has a chosen concurrence;
* interferometer fringe visibility as H/V dephasing of the qubit that
  traverses the device (one cumulative figure per interferometer count);
* residual wave-plate phase as a fixed relative phase on the |V> path of
  the measurement operator.

Shot noise is handled by the tomography sampler, not here; NoiseConfig
carries the default shot count for convenience.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, fields

import numpy as np

from .core import PAULI_Z, bell_phi_plus, density, tensor
from .measurement import apply_on_qubit, pm_operator, rm_operator

DEFAULT_TARGET_CONCURRENCE = 0.95
DEFAULT_VISIBILITY_SINGLE = 0.96
DEFAULT_VISIBILITY_DOUBLE = 0.91


@dataclass(frozen=True)
class NoiseConfig:
    """Imperfection parameters for the two-qubit protocol.

    initial_visibility is the Werner weight of the prepared pair;
    visibility_single and visibility_double are the cumulative fringe
    visibilities for one- and two-interferometer arrangements; phase_error
    is the residual wave-plate phase in radians; shots is the default
    per-setting count for sampled runs.
    """

    initial_visibility: float = 1.0
    visibility_single: float = 1.0
    visibility_double: float = 1.0
    phase_error: float = 0.0
    shots: int = 10000

    def __post_init__(self):
        for name in ("initial_visibility", "visibility_single", "visibility_double"):
            v = getattr(self, name)
            if not np.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not np.isfinite(self.phase_error):
            raise ValueError("phase_error must be finite")
        # 0 selects exact probabilities instead of sampled counts.
        if self.shots < 0:
            raise ValueError(f"shots must be >= 0, got {self.shots}")

    @property
    def is_ideal(self) -> bool:
        return (self.initial_visibility == 1.0 and self.visibility_single == 1.0
                and self.visibility_double == 1.0 and self.phase_error == 0.0)

    @classmethod
    def ideal(cls, shots: int = 10000) -> "NoiseConfig":
        return cls(shots=shots)

    @classmethod
    def defaults(cls, shots: int = 10000) -> "NoiseConfig":
        """Configuration calibrated to the measured imperfection figures."""
        return cls(
            initial_visibility=calibrate_initial_visibility(DEFAULT_TARGET_CONCURRENCE),
            visibility_single=DEFAULT_VISIBILITY_SINGLE,
            visibility_double=DEFAULT_VISIBILITY_DOUBLE,
            phase_error=0.0,
            shots=shots,
        )


def write_noise_config(cfg: NoiseConfig, path) -> None:
    """Serialize a NoiseConfig as flat `key = value` lines."""
    lines = [f"{f.name} = {getattr(cfg, f.name)!r}" for f in fields(NoiseConfig)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_noise_config(source) -> NoiseConfig:
    """Parse `key = value` lines into a NoiseConfig.

    source is a path or a file-like object.  Missing keys keep their ideal
    defaults; unknown keys are an error.
    """
    if isinstance(source, io.IOBase):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    known = {f.name for f in fields(NoiseConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected `key = value`, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in known:
            raise ValueError(f"line {lineno}: unknown noise parameter {key!r}")
        raw = raw.strip()
        values[key] = int(raw) if key == "shots" else float(raw)
    return NoiseConfig(**values)


def werner(v: float) -> np.ndarray:
    """Isotropic mixture v |Phi+><Phi+| + (1 - v) I/4."""
    v = float(v)
    if not np.isfinite(v) or not 0.0 <= v <= 1.0:
        raise ValueError(f"Werner weight must lie in [0, 1], got {v}")
    return v * density(bell_phi_plus()) + (1.0 - v) * np.eye(4, dtype=np.complex128) / 4.0


def calibrate_initial_visibility(target_concurrence: float) -> float:
    """Werner weight whose state has the requested concurrence: v = (2C + 1)/3."""
    c = float(target_concurrence)
    if not np.isfinite(c) or not 0.0 <= c <= 1.0:
        raise ValueError(f"target concurrence must lie in [0, 1], got {c}")
    return (2.0 * c + 1.0) / 3.0


def dephase(rho: np.ndarray, qubit: str, v: float) -> np.ndarray:
    """Scale the H/V coherences of one qubit by v.

    Equivalent to the channel (1+v)/2 rho + (1-v)/2 Z rho Z on that qubit;
    v = 1 is the identity, v = 0 removes the coherences entirely.
    """
    v = float(v)
    if not np.isfinite(v) or not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    arr = density(np.asarray(rho, dtype=np.complex128))
    if qubit == "single":
        z = PAULI_Z
    elif qubit == "A":
        z = tensor(PAULI_Z, np.eye(2))
    elif qubit == "B":
        z = tensor(np.eye(2), PAULI_Z)
    else:
        raise ValueError(f"qubit must be 'A', 'B' or 'single', got {qubit!r}")
    if z.shape != arr.shape:
        raise ValueError(f"qubit {qubit!r} does not match a {arr.shape[0]}-dimensional state")
    return (1.0 + v) / 2.0 * arr + (1.0 - v) / 2.0 * (z @ arr @ z)


def phase_perturb(op: np.ndarray, delta: float) -> np.ndarray:
    """Compose a measurement operator with the residual phase diag(1, e^{i delta})."""
    delta = float(delta)
    if not np.isfinite(delta):
        raise ValueError("phase must be finite")
    arr = np.asarray(op, dtype=np.complex128)
    if arr.shape != (2, 2):
        raise ValueError(f"operator must be 2x2, got shape {arr.shape}")
    return np.diag([1.0, np.exp(1j * delta)]) @ arr


def _second_visibility(cfg: NoiseConfig) -> float:
    """Extra dephasing so two interferometers reach visibility_double end to end."""
    if cfg.visibility_single <= 0.0:
        return 1.0
    return float(np.clip(cfg.visibility_double / cfg.visibility_single, 0.0, 1.0))


def noisy_protocol(p: float, mode: str, cfg: NoiseConfig) -> tuple[np.ndarray, float]:
    """Composed imperfect protocol on the prepared pair.

    Pipeline: Werner-mixed pair, dephasing of qubit A at the single-
    interferometer visibility, phase-perturbed partial measurement on A,
    then for the reversal modes the reversing operator on A ('local', same
    interferometer) or on B ('nonlocal', a second interferometer whose
    extra dephasing brings the end-to-end coherence to visibility_double).
    Returns the normalized conditional state and the total success
    probability of the no-click chain.
    """
    if mode not in ("pm_only", "local", "nonlocal"):
        raise ValueError(f"mode must be 'pm_only', 'local' or 'nonlocal', got {mode!r}")
    pm = pm_operator(p)
    rm = rm_operator(p) if mode != "pm_only" else None

    rho = werner(cfg.initial_visibility)
    rho = dephase(rho, "A", cfg.visibility_single)
    rho, prob = apply_on_qubit(phase_perturb(pm.no_click, cfg.phase_error), "A", rho)
    if rho is None:
        return None, 0.0
    total = prob
    if mode == "local":
        rho, prob = apply_on_qubit(rm.physical, "A", rho)
        if rho is None:
            return None, 0.0
        total *= prob
    elif mode == "nonlocal":
        rho = dephase(rho, "B", _second_visibility(cfg))
        rho, prob = apply_on_qubit(rm.physical, "B", rho)
        if rho is None:
            return None, 0.0
        total *= prob
    return rho, total


def interferometer_channel(p: float, stage: str, cfg: NoiseConfig):
    """Single-qubit no-click channel of one interferometer, for process tomography.

    stage 'pm' is the bare partial measurement; stage 'reverse' is the full
    measure-then-reverse chain, which a single interferometer implements.
    The returned callable maps a probe state to (posterior density matrix,
    success probability); with an ideal cfg it reduces to the exact
    operators.
    """
    if stage not in ("pm", "reverse"):
        raise ValueError(f"stage must be 'pm' or 'reverse', got {stage!r}")
    pm = pm_operator(p)
    op = phase_perturb(pm.no_click, cfg.phase_error)
    if stage == "reverse":
        op = rm_operator(p).physical @ op

    def channel(psi: np.ndarray):
        rho = dephase(density(psi), "single", cfg.visibility_single)
        return apply_on_qubit(op, "single", rho)

    return channel
