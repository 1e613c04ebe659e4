"""Partial-collapse measurement and its reversal.

A partial measurement of strength p couples the |V> component of a qubit
to a detector.  When the detector does not click, the state is updated by
the back-action operator

    P(p) = diag(1, sqrt(1 - p)),

which shrinks the |V> amplitude without fully projecting.  The click
branch diag(0, sqrt(p)) completes the POVM.  Because P(p) is invertible
for p < 1, a second no-click measurement with the roles of |H> and |V>
swapped,

    P'(p) = diag(sqrt(1 - p), 1),

undoes the first one up to the overall factor sqrt(1 - p): the combined
success probability of measure-then-reverse is exactly 1 - p.  On a
maximally entangled pair the reversal works equally well on the measured
qubit (local) or on its distant partner (nonlocal).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import I2, bell_phi_plus, ensure_state_vector, eigen_hermitian, tensor
from .errors import SingularReversalError

# Squared-amplitude threshold below which a branch is treated as impossible.
_NULL_PROBABILITY = 1e-30


@dataclass(frozen=True)
class PartialMeasurement:
    """Both Kraus branches of a strength-p partial measurement."""

    strength: float
    no_click: np.ndarray
    click: np.ndarray


@dataclass(frozen=True)
class ReversalOp:
    """The physical reversal operator and its renormalization factor.

    renormalization * physical equals diag(1, 1/sqrt(1 - p)), the exact
    mathematical inverse of the no-click back-action up to normalization.
    """

    strength: float
    physical: np.ndarray
    renormalization: float


def _check_strength(p: float) -> float:
    p = float(p)
    if not np.isfinite(p) or not 0.0 <= p <= 1.0:
        raise ValueError(f"measurement strength must lie in [0, 1], got {p}")
    return p


def pm_operator(p: float) -> PartialMeasurement:
    """Partial measurement of strength p in the H/V basis."""
    p = _check_strength(p)
    no_click = np.diag([1.0, np.sqrt(1.0 - p)]).astype(np.complex128)
    click = np.diag([0.0, np.sqrt(p)]).astype(np.complex128)
    return PartialMeasurement(strength=p, no_click=no_click, click=click)


def rm_operator(p: float) -> ReversalOp:
    """Reversing measurement for a strength-p partial measurement.

    Raises SingularReversalError at p = 1, where the collapse is complete
    and no reversal exists.
    """
    p = _check_strength(p)
    if p == 1.0:
        raise SingularReversalError("a strength-1 measurement is a full collapse "
                                    "and cannot be reversed")
    physical = np.diag([np.sqrt(1.0 - p), 1.0]).astype(np.complex128)
    return ReversalOp(strength=p, physical=physical,
                      renormalization=1.0 / np.sqrt(1.0 - p))


def hwp_angle_to_strength(theta_degrees: float) -> float:
    """Map a wave-plate rotation angle to measurement strength p = sin^2(theta).

    theta is in degrees within [0, 90].  Note this is the mapping for the
    plate convention used here; other interferometer constructions place a
    factor of two inside the sine.
    """
    theta = float(theta_degrees)
    if not np.isfinite(theta) or not 0.0 <= theta <= 90.0:
        raise ValueError(f"wave-plate angle must lie in [0, 90] degrees, got {theta}")
    return float(np.sin(np.radians(theta)) ** 2)


def _embed(k: np.ndarray, which: str, dim: int) -> np.ndarray:
    if which == "single":
        if dim != 2:
            raise ValueError("which='single' requires a single-qubit state")
        return k
    if which == "A":
        if dim != 4:
            raise ValueError("which='A' requires a two-qubit state")
        return tensor(k, I2)
    if which == "B":
        if dim != 4:
            raise ValueError("which='B' requires a two-qubit state")
        return tensor(I2, k)
    raise ValueError(f"which must be 'A', 'B' or 'single', got {which!r}")


def _check_contraction(k: np.ndarray) -> np.ndarray:
    arr = np.asarray(k, dtype=np.complex128)
    if arr.shape != (2, 2):
        raise ValueError(f"measurement operator must be 2x2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("measurement operator contains non-finite entries")
    evals, _ = eigen_hermitian(arr.conj().T @ arr)
    if evals[0] > 1.0 + 1e-10:
        raise ValueError("operator amplifies the state (largest singular value "
                         f"{np.sqrt(evals[0]):.6g} > 1); not a measurement branch")
    return arr


def apply_on_qubit(k: np.ndarray, which: str, state: np.ndarray):
    """Apply one Kraus branch to a qubit of a state.

    k is a 2x2 contraction, which selects the qubit ('A'/'B' of a pair, or
    'single'), and state is a normalized state vector or density matrix.
    Returns (posterior, probability) with the posterior renormalized.  A
    branch of probability zero has no posterior; (None, 0.0) is returned.
    """
    arr = _check_contraction(k)
    state = np.asarray(state, dtype=np.complex128)
    if state.ndim == 1:
        psi = ensure_state_vector(state)
        op = _embed(arr, which, psi.shape[0])
        phi = op @ psi
        before = float(np.linalg.norm(psi) ** 2)
        if before <= _NULL_PROBABILITY:
            raise ValueError("input state has zero norm")
        prob = float(np.linalg.norm(phi) ** 2) / before
        if prob <= _NULL_PROBABILITY:
            return None, 0.0
        return phi / np.linalg.norm(phi), prob
    if state.ndim == 2:
        op = _embed(arr, which, state.shape[0])
        sigma = op @ state @ op.conj().T
        before = float(np.trace(state).real)
        if before <= _NULL_PROBABILITY:
            raise ValueError("input state has zero trace")
        prob = float(np.trace(sigma).real) / before
        if prob <= _NULL_PROBABILITY:
            return None, 0.0
        return sigma / np.trace(sigma).real, prob
    raise ValueError(f"state must be a vector or a matrix, got ndim={state.ndim}")


def evolve_pm_on_bell(p: float) -> tuple[np.ndarray, float]:
    """Closed-form no-click posterior of a partial measurement on qubit A of a Bell pair.

    Returns the normalized state (|HH> + sqrt(1-p)|VV>)/sqrt(2-p) and the
    no-click probability (2 - p)/2.
    """
    p = _check_strength(p)
    psi = np.zeros(4, dtype=np.complex128)
    psi[0] = 1.0 / np.sqrt(2.0 - p)
    psi[3] = np.sqrt(1.0 - p) / np.sqrt(2.0 - p)
    return psi, (2.0 - p) / 2.0


def reversal_sequence(p: float, mode: str,
                      initial: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Partial measurement on qubit A followed by a reversal.

    mode 'local' reverses on the measured qubit A, 'nonlocal' on the
    partner qubit B.  initial defaults to the Bell state, for which both
    modes restore the input exactly with total probability 1 - p; on
    product states the nonlocal sequence is not a restoration.  Returns
    (final normalized state, total success probability).
    """
    if mode not in ("local", "nonlocal"):
        raise ValueError(f"mode must be 'local' or 'nonlocal', got {mode!r}")
    pm = pm_operator(p)
    rm = rm_operator(p)
    psi = bell_phi_plus() if initial is None else ensure_state_vector(initial, dim=4)
    after_pm, prob_pm = apply_on_qubit(pm.no_click, "A", psi)
    if after_pm is None:
        return None, 0.0
    target = "A" if mode == "local" else "B"
    final, prob_rm = apply_on_qubit(rm.physical, target, after_pm)
    if final is None:
        return None, 0.0
    return final, prob_pm * prob_rm
