"""Entanglement and nonlocality metrics.

Implements Wootters concurrence, Uhlmann fidelity, CHSH correlation values
for polarization analyzers, a deterministic CHSH maximizer over the
analyzer family A(theta) = cos(2 theta) Z + sin(2 theta) X, and the
closed-form Horodecki maximum used as a certificate for the optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    density,
    eigen_hermitian,
    ensure_density_matrix,
    hermitize,
    sqrt_psd,
    tensor,
)

_YY = tensor(PAULI_Y, PAULI_Y)

# Coarse grid used to seed the CHSH optimizer; 5 degree steps cover the
# 180-degree period of the analyzer family.
_GRID_STEP_DEGREES = 5.0


def canonical_angle(theta: float) -> float:
    """Fold an analyzer angle in degrees into the interval (-90, 90]."""
    theta = float(theta)
    if not np.isfinite(theta):
        raise ValueError(f"analyzer angle must be finite, got {theta}")
    folded = (theta + 90.0) % 180.0 - 90.0
    return 90.0 if folded == -90.0 else folded


@dataclass(frozen=True)
class AnalyzerAngles:
    """The four analyzer orientations of a CHSH test, in degrees.

    theta1/theta1p belong to photon A, theta2/theta2p to photon B.  Angles
    are canonicalized into (-90, 90] on construction; A(theta + 90) is
    -A(theta), so the fold loses nothing.
    """

    theta1: float
    theta1p: float
    theta2: float
    theta2p: float

    def __post_init__(self):
        for name in ("theta1", "theta1p", "theta2", "theta2p"):
            object.__setattr__(self, name, canonical_angle(getattr(self, name)))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.theta1, self.theta1p, self.theta2, self.theta2p)


def _rho4(state: np.ndarray) -> np.ndarray:
    rho = density(state)
    return ensure_density_matrix(rho, dim=4)


def concurrence(state: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit state (vector or density matrix).

    Computed from the Hermitian form sqrt(rho) (Y@Y) rho* (Y@Y) sqrt(rho):
    its eigenvalue square roots, descending, give C = max(0, l1-l2-l3-l4).
    """
    rho = _rho4(state)
    root = sqrt_psd(rho)
    m = root @ _YY @ rho.conj() @ _YY @ root
    evals, _ = eigen_hermitian(hermitize(m))
    evals = np.clip(evals, 0.0, None)
    # Zero out eigensolver residue: sqrt would blow an eps-sized residual
    # up to sqrt(eps), biasing the concurrence of nearly pure states low.
    evals[evals < evals[0] * 1e-14] = 0.0
    lams = np.sqrt(evals)
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


def _uhlmann(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 on unit-trace PSD inputs.

    Uses the rank-1 shortcut <psi|sigma|psi> when either argument is pure
    within 1e-10, which avoids square roots of nearly singular matrices.
    """
    w_r, v_r = eigen_hermitian(hermitize(rho))
    if w_r[0] >= 1.0 - 1e-10:
        psi = v_r[:, 0]
        return float(max(0.0, (psi.conj() @ sigma @ psi).real))
    w_s, v_s = eigen_hermitian(hermitize(sigma))
    if w_s[0] >= 1.0 - 1e-10:
        psi = v_s[:, 0]
        return float(max(0.0, (psi.conj() @ rho @ psi).real))
    root = sqrt_psd(rho)
    inner = sqrt_psd(hermitize(root @ sigma @ root))
    return float(max(0.0, np.trace(inner).real ** 2))


def state_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity between two states (vectors or density matrices)."""
    a = density(rho)
    b = density(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    a = ensure_density_matrix(a)
    b = ensure_density_matrix(b)
    return _uhlmann(a, b)


def bloch_vector(state: np.ndarray) -> np.ndarray:
    """Bloch components (x, y, z) of a single-qubit state."""
    rho = density(state)
    rho = ensure_density_matrix(rho, dim=2)
    return np.array([np.trace(rho @ s).real for s in (PAULI_X, PAULI_Y, PAULI_Z)])


def correlation_matrix(state: np.ndarray) -> np.ndarray:
    """3x3 correlation matrix t_ij = Tr[rho (sigma_i x sigma_j)], axes ordered (X, Y, Z)."""
    rho = _rho4(state)
    paulis = (PAULI_X, PAULI_Y, PAULI_Z)
    t = np.empty((3, 3))
    for i, si in enumerate(paulis):
        for j, sj in enumerate(paulis):
            t[i, j] = np.trace(rho @ tensor(si, sj)).real
    return t


def analyzer(theta_degrees: float) -> np.ndarray:
    """Polarization analyzer observable A(theta) = cos(2 theta) Z + sin(2 theta) X."""
    rad = np.radians(float(theta_degrees))
    return np.cos(2 * rad) * PAULI_Z + np.sin(2 * rad) * PAULI_X


def _correlation_raw(rho: np.ndarray, theta_a: float, theta_b: float) -> float:
    return float(np.trace(rho @ tensor(analyzer(theta_a), analyzer(theta_b))).real)


def correlation(state: np.ndarray, theta_a: float, theta_b: float) -> float:
    """Joint correlation E(a, b) = Tr[rho A(a) x A(b)]."""
    return _correlation_raw(_rho4(state), theta_a, theta_b)


def chsh_value(state: np.ndarray, angles: AnalyzerAngles | tuple) -> float:
    """CHSH combination S = E(t1,t2) + E(t1,t2') + E(t1',t2) - E(t1',t2')."""
    if not isinstance(angles, AnalyzerAngles):
        angles = AnalyzerAngles(*angles)
    rho = _rho4(state)
    t1, t1p, t2, t2p = angles.as_tuple()
    return float(
        _correlation_raw(rho, t1, t2)
        + _correlation_raw(rho, t1, t2p)
        + _correlation_raw(rho, t1p, t2)
        - _correlation_raw(rho, t1p, t2p)
    )


def _unit_from_angle(theta_degrees: np.ndarray) -> np.ndarray:
    """Map analyzer angles to unit vectors (cos 2t, sin 2t) in the (Z, X) plane."""
    rad = np.radians(theta_degrees)
    return np.stack([np.cos(2 * rad), np.sin(2 * rad)], axis=-1)


def _angle_from_unit(u: np.ndarray) -> float:
    return canonical_angle(np.degrees(np.arctan2(u[1], u[0])) / 2.0)


def chsh_optimize(state: np.ndarray) -> tuple[float, AnalyzerAngles]:
    """Maximize the CHSH value over the Z-X analyzer family.

    Strategy: evaluate S on a 5-degree coarse grid over all four angles
    using the separable closed form E(a, b) = u(a) . M . u(b), then refine
    the best grid point by alternating exact single-side updates until the
    angles settle.  The result never exceeds horodecki_smax (the global
    bound over all measurement directions).
    """
    rho = _rho4(state)
    t = correlation_matrix(rho)
    # 2x2 block of the correlation matrix in the (Z, X) plane.
    m = t[np.ix_([2, 0], [2, 0])]

    grid = np.arange(-90.0, 90.0, _GRID_STEP_DEGREES)
    units = _unit_from_angle(grid)
    e = units @ m @ units.T
    s4 = (e[:, None, :, None] + e[:, None, None, :]
          + e[None, :, :, None] - e[None, :, None, :])
    i1, i1p, i2, i2p = np.unravel_index(int(np.argmax(s4)), s4.shape)

    u1 = units[i1].copy()
    u1p = units[i1p].copy()
    u2 = units[i2].copy()
    u2p = units[i2p].copy()

    def _normalize(w: np.ndarray, fallback: np.ndarray) -> np.ndarray:
        norm = np.linalg.norm(w)
        return w / norm if norm > 1e-15 else fallback

    s_prev = -np.inf
    for _ in range(500):
        u1 = _normalize(m @ (u2 + u2p), u1)
        u1p = _normalize(m @ (u2 - u2p), u1p)
        u2 = _normalize(m.T @ (u1 + u1p), u2)
        u2p = _normalize(m.T @ (u1 - u1p), u2p)
        s_now = u1 @ m @ (u2 + u2p) + u1p @ m @ (u2 - u2p)
        if abs(s_now - s_prev) <= 1e-14 * max(1.0, abs(s_now)):
            break
        s_prev = s_now

    angles = AnalyzerAngles(_angle_from_unit(u1), _angle_from_unit(u1p),
                            _angle_from_unit(u2), _angle_from_unit(u2p))
    return chsh_value(rho, angles), angles


def horodecki_smax(state: np.ndarray) -> float:
    """Closed-form CHSH maximum 2 sqrt(u1 + u2) over all measurement directions.

    u1 >= u2 are the two largest eigenvalues of T^T T, with T the 3x3
    correlation matrix.  Serves as the certificate for chsh_optimize.
    """
    t = correlation_matrix(state)
    evals, _ = eigen_hermitian(t.T @ t)
    u = np.clip(evals[:2], 0.0, None)
    return float(2.0 * np.sqrt(u[0] + u[1]))
