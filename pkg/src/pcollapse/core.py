"""Core linear algebra for one- and two-qubit polarization states.

Conventions used throughout the package:

* Computational basis is the polarization basis |H> = (1, 0), |V> = (0, 1).
* Two-qubit basis order is |HH>, |HV>, |VH>, |VV| with qubit A the left
  tensor factor.
* States are numpy complex128 arrays.  State vectors may be sub-normalized
  (partial measurements shrink the norm); the squared norm is the branch
  probability accumulated so far.
* Density matrices are Hermitian, positive semidefinite, unit trace.

The Hermitian eigensolver is implemented here directly (analytic 2x2,
cyclic Jacobi for larger sizes) so that every eigendecomposition in the
package is deterministic and self-contained; tests cross-check it against
an independent routine.
"""

from __future__ import annotations

import numpy as np

from .errors import NotPositiveSemidefiniteError

I2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

# Order matters: process matrices are expressed in this operator basis.
PAULI_BASIS = (I2, PAULI_X, PAULI_Y, PAULI_Z)
PAULI_LABELS = ("I", "X", "Y", "Z")

_SQRT2 = np.sqrt(2.0)

_KETS = {
    "H": np.array([1, 0], dtype=np.complex128),
    "V": np.array([0, 1], dtype=np.complex128),
    "D": np.array([1, 1], dtype=np.complex128) / _SQRT2,
    "A": np.array([1, -1], dtype=np.complex128) / _SQRT2,
    "R": np.array([1, -1j], dtype=np.complex128) / _SQRT2,
    "L": np.array([1, 1j], dtype=np.complex128) / _SQRT2,
}

POLARIZATION_LABELS = tuple(_KETS)


def ket(label: str) -> np.ndarray:
    """Return the single-qubit basis ket for a polarization label.

    Supported labels: H, V (computational), D, A (diagonal), R, L (circular),
    with R = (|H> - i|V>)/sqrt(2).
    """
    try:
        return _KETS[label].copy()
    except KeyError:
        raise ValueError(f"unknown polarization label {label!r}; "
                         f"expected one of {', '.join(_KETS)}") from None


def ket2(labels: str) -> np.ndarray:
    """Two-qubit product ket from a two-character label such as 'HV'."""
    if len(labels) != 2:
        raise ValueError(f"need exactly two labels, got {labels!r}")
    return tensor(ket(labels[0]), ket(labels[1]))


def bell_phi_plus() -> np.ndarray:
    """The maximally entangled state (|HH> + |VV>)/sqrt(2)."""
    psi = np.zeros(4, dtype=np.complex128)
    psi[0] = psi[3] = 1 / _SQRT2
    return psi


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two states or operators (A is the left factor)."""
    return np.kron(np.asarray(a, dtype=np.complex128),
                   np.asarray(b, dtype=np.complex128))


def density(state: np.ndarray) -> np.ndarray:
    """Outer product |psi><psi| of a (possibly sub-normalized) state vector.

    Accepts a density matrix unchanged, so callers can be agnostic about
    which representation a posterior arrived in.
    """
    arr = np.asarray(state, dtype=np.complex128)
    if arr.ndim == 2:
        return arr
    return np.outer(arr, arr.conj())


def ensure_state_vector(psi: np.ndarray, dim: int | None = None,
                        normalized: bool = False) -> np.ndarray:
    """Validate a state vector: finite entries, expected dimension, optionally unit norm."""
    arr = np.asarray(psi, dtype=np.complex128)
    if arr.ndim != 1 or arr.shape[0] not in (2, 4):
        raise ValueError(f"state vector must have 2 or 4 amplitudes, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected a {dim}-dimensional state, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state vector contains non-finite amplitudes")
    if normalized and abs(np.linalg.norm(arr) - 1.0) > 1e-12:
        raise ValueError("state vector is not normalized")
    return arr


def ensure_density_matrix(rho: np.ndarray, dim: int | None = None,
                          atol: float = 1e-8) -> np.ndarray:
    """Validate a density matrix: Hermitian, unit trace, PSD within tolerance."""
    arr = np.asarray(rho, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in (2, 4):
        raise ValueError(f"density matrix must be 2x2 or 4x4, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} density matrix, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("density matrix contains non-finite entries")
    if np.max(np.abs(arr - arr.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(arr).real - 1.0) > atol:
        raise ValueError(f"density matrix trace is {np.trace(arr).real:.6g}, expected 1")
    evals, _ = eigen_hermitian(hermitize(arr))
    if evals[-1] < -atol:
        raise ValueError(f"density matrix has negative eigenvalue {evals[-1]:.3g}")
    return arr


def hermitize(m: np.ndarray) -> np.ndarray:
    """Average a matrix with its adjoint, removing numerical anti-Hermitian noise."""
    return (m + m.conj().T) / 2


def partial_trace(rho: np.ndarray, keep: str) -> np.ndarray:
    """Reduced state of one qubit of a two-qubit density matrix.

    keep is 'A' (left factor) or 'B' (right factor).
    """
    arr = np.asarray(rho, dtype=np.complex128)
    if arr.shape != (4, 4):
        raise ValueError(f"partial trace needs a 4x4 density matrix, got {arr.shape}")
    r = arr.reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ikjk->ij", r)
    if keep == "B":
        return np.einsum("kikj->ij", r)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def _eig2_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Analytic eigendecomposition of a 2x2 Hermitian matrix."""
    a = m[0, 0].real
    c = m[1, 1].real
    b = m[0, 1]
    mean = (a + c) / 2
    half = (a - c) / 2
    radius = np.hypot(half, abs(b))
    w = np.array([mean + radius, mean - radius])
    if abs(b) < 1e-300:
        vecs = np.eye(2, dtype=np.complex128)
        if a < c:
            vecs = vecs[:, ::-1].copy()
        return w, vecs
    # Eigenvector of the larger eigenvalue, built from the stable column.
    v1 = np.array([b, w[0] - a], dtype=np.complex128)
    v1 /= np.linalg.norm(v1)
    # The other one is its orthogonal complement in 2d.
    v2 = np.array([-np.conj(v1[1]), np.conj(v1[0])], dtype=np.complex128)
    return w, np.column_stack([v1, v2])


def _jacobi_hermitian(m: np.ndarray, tol: float = 1e-12,
                      max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a small complex Hermitian matrix."""
    n = m.shape[0]
    a = m.astype(np.complex128).copy()
    v = np.eye(n, dtype=np.complex128)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) == 0.0:
                    continue
                # Phase rotation makes the pivot real, then a real Jacobi
                # rotation annihilates it.
                phase = apq / abs(apq)
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2 * abs(apq))
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                cth = 1.0 / np.hypot(1.0, t)
                sth = t * cth
                g = np.eye(n, dtype=np.complex128)
                g[p, p] = cth
                g[q, q] = cth
                g[p, q] = sth * phase
                g[q, p] = -sth * np.conj(phase)
                a = g.conj().T @ a @ g
                v = v @ g
    return np.diag(a).real.copy(), v


def eigen_hermitian(m: np.ndarray, atol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns (eigenvalues, eigenvectors) with eigenvectors[:, i] the
    orthonormal eigenvector of eigenvalues[i].  Dimensions 2 through 4 are
    supported (2x2 is solved analytically, larger sizes by cyclic Jacobi
    sweeps).  Raises ValueError if the input is not Hermitian within atol.
    """
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or not 2 <= arr.shape[0] <= 4:
        raise ValueError(f"expected a square matrix of dimension 2..4, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains non-finite entries")
    if np.max(np.abs(arr - arr.conj().T)) > atol:
        raise ValueError("matrix is not Hermitian")
    sym = hermitize(arr)
    if sym.shape[0] == 2:
        w, v = _eig2_hermitian(sym)
    else:
        w, v = _jacobi_hermitian(sym)
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in (-1e-6, 0) are treated as numerical noise and clipped
    to zero; anything at or below -1e-6 raises NotPositiveSemidefiniteError.
    Residual eigenvalues below 1e-14 of the largest are zeroed as well:
    the square root amplifies an eps-sized residual to sqrt(eps), which
    would otherwise dominate the error of rank-deficient inputs.
    """
    w, v = eigen_hermitian(m)
    if w[-1] <= -1e-6:
        raise NotPositiveSemidefiniteError(
            f"matrix has eigenvalue {w[-1]:.3g}, not positive semidefinite")
    w = np.clip(w, 0.0, None)
    w[w < w[0] * 1e-14] = 0.0
    return hermitize((v * np.sqrt(w)) @ v.conj().T)
