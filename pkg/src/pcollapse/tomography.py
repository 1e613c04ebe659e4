"""Simulated photon counting, state reconstruction, and process tomography.

State tomography follows the standard projector-counting scheme: each
measurement setting is a product of single-qubit polarization projectors,
counts are binomial draws against the Born probability, and the density
matrix is recovered either by linear inversion (exact on noiseless data)
or by maximum-likelihood ascent over the factored parameterization
rho = T'T / Tr(T'T) with T lower-triangular.

Process tomography probes a single-qubit channel with |H>, |V>, |D>, |R>,
reconstructs each (success-probability-weighted) output, and solves the
linear system for the process matrix chi in the (I, X, Y, Z) basis.  The
raw chi keeps trace <= 1 for trace-non-increasing channels; process
fidelity normalizes both arguments before comparing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    PAULI_BASIS,
    density,
    eigen_hermitian,
    hermitize,
    ket,
    ket2,
    tensor,
)
from .errors import DegenerateChannelError, IncompleteDataError
from .metrics import _uhlmann

SINGLE_QUBIT_SETTINGS = ("H", "V", "D", "A", "R", "L")

# All 36 projector pairs; well conditioned, the default for two qubits.
TWO_QUBIT_SETTINGS_36 = tuple(a + b for a in SINGLE_QUBIT_SETTINGS
                              for b in SINGLE_QUBIT_SETTINGS)

# The minimal 16-setting scheme of the standard two-qubit protocol.
TWO_QUBIT_SETTINGS_16 = ("HH", "HV", "VH", "VV", "DH", "DV", "RH", "RV",
                         "DD", "DR", "RD", "RR", "HD", "VD", "HR", "VR")

QPT_PROBE_LABELS = ("H", "V", "D", "R")


@dataclass(frozen=True)
class CountRecord:
    """Coincidence counts for one measurement setting.

    count is an integer for sampled data; exact-probability records carry
    the fractional expected count instead, which the likelihood handles
    identically.
    """

    setting: str
    count: float
    shots: int

    def __post_init__(self):
        if not self.setting or any(c not in SINGLE_QUBIT_SETTINGS for c in self.setting):
            raise ValueError(f"invalid setting label {self.setting!r}")
        if self.shots < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")
        if not 0 <= self.count <= self.shots:
            raise ValueError(f"count {self.count} outside [0, {self.shots}]")


@dataclass
class MleResult:
    """Outcome of a maximum-likelihood reconstruction.

    converged False flags that the iteration cap was reached; rho is still
    the best (highest-likelihood) iterate found.
    """

    rho: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    ll_trace: list[float] = field(default_factory=list)


@dataclass
class QptResult:
    """Process matrix with the per-probe success probabilities recorded separately."""

    chi: np.ndarray
    success_probabilities: dict[str, float]


def projector(setting: str) -> np.ndarray:
    """Projector |setting><setting| for a one- or two-letter polarization label."""
    if len(setting) == 1:
        psi = ket(setting)
    elif len(setting) == 2:
        psi = ket2(setting)
    else:
        raise ValueError(f"setting must have one or two labels, got {setting!r}")
    return np.outer(psi, psi.conj())


def born_probability(state: np.ndarray, setting: str) -> float:
    """Born probability Tr[rho |setting><setting|]."""
    rho = density(state)
    proj = projector(setting)
    if rho.shape != proj.shape:
        raise ValueError(f"setting {setting!r} does not match a "
                         f"{rho.shape[0]}-dimensional state")
    q = float(np.trace(rho @ proj).real)
    return float(np.clip(q, 0.0, 1.0))


def sample_counts(state: np.ndarray, settings: Sequence[str], shots: int,
                  seed: int) -> list[CountRecord]:
    """Binomial coincidence counts for each setting; deterministic given seed."""
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    rng = np.random.default_rng(seed)
    records = []
    for setting in settings:
        q = born_probability(state, setting)
        records.append(CountRecord(setting, int(rng.binomial(shots, q)), shots))
    return records


def exact_records(state: np.ndarray, settings: Sequence[str]) -> list[CountRecord]:
    """Infinite-statistics records: fractional counts equal to the Born probabilities."""
    return [CountRecord(s, born_probability(state, s), 1) for s in settings]


def write_count_records(records: Iterable[CountRecord], path) -> None:
    """Serialize records as tab-separated `setting<TAB>count<TAB>shots` lines."""
    lines = []
    for r in records:
        count = int(r.count) if float(r.count).is_integer() else repr(float(r.count))
        lines.append(f"{r.setting}\t{count}\t{r.shots}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_count_records(path) -> list[CountRecord]:
    """Parse records written by write_count_records."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 3 tab-separated fields")
            setting, count, shots = parts
            records.append(CountRecord(setting, float(count), int(shots)))
    return records


def _pauli_products(n_qubits: int) -> list[np.ndarray]:
    """Operator basis: Paulis for one qubit, all Pauli pairs for two."""
    if n_qubits == 1:
        return list(PAULI_BASIS)
    return [tensor(a, b) for a in PAULI_BASIS for b in PAULI_BASIS]


def project_to_physical(m: np.ndarray) -> np.ndarray:
    """Nearest unit-trace PSD matrix in Frobenius distance.

    Eigen-decomposes and projects the spectrum onto the probability
    simplex, which redistributes the weight of clipped negative
    eigenvalues across the remaining ones.
    """
    evals, vecs = eigen_hermitian(hermitize(np.asarray(m, dtype=np.complex128)))
    # Euclidean projection of the (descending) spectrum onto the simplex.
    n = evals.shape[0]
    cumulative = np.cumsum(evals) - 1.0
    support = 0
    for k in range(n):
        if evals[k] - cumulative[k] / (k + 1) > 0:
            support = k
    shift = cumulative[support] / (support + 1)
    clipped = np.clip(evals - shift, 0.0, None)
    return hermitize((vecs * clipped) @ vecs.conj().T)


def _design_matrix(settings: Sequence[str], dim: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Rows map normalized Pauli coefficients to setting probabilities."""
    n_qubits = 1 if dim == 2 else 2
    basis = _pauli_products(n_qubits)
    projs = [projector(s) for s in settings]
    a = np.empty((len(projs), len(basis)))
    for i, proj in enumerate(projs):
        for j, b in enumerate(basis):
            a[i, j] = np.trace(proj @ b).real / dim
    return a, basis


def _validate_records(records: Sequence[CountRecord], dimension: int) -> None:
    if dimension not in (2, 4):
        raise ValueError(f"dimension must be 2 or 4, got {dimension}")
    if not records:
        raise IncompleteDataError("no measurement records supplied")
    want = 1 if dimension == 2 else 2
    for r in records:
        if len(r.setting) != want:
            raise ValueError(f"setting {r.setting!r} does not match dimension {dimension}")


def linear_inversion_state(records: Sequence[CountRecord], dimension: int) -> np.ndarray:
    """Least-squares estimate of the Pauli expectations, projected to physical.

    Exact on noiseless informationally complete data; on sampled data it is
    the standard linear-inversion estimate followed by project_to_physical.
    Raises IncompleteDataError if the settings do not determine the state.
    """
    _validate_records(records, dimension)
    settings = [r.setting for r in records]
    freqs = np.array([r.count / r.shots for r in records])
    a, basis = _design_matrix(settings, dimension)
    # The identity coefficient is fixed to 1 by normalization; solve for the rest.
    a0 = a[:, 0]
    a_rest = a[:, 1:]
    if np.linalg.matrix_rank(a_rest, tol=1e-10) < a_rest.shape[1]:
        raise IncompleteDataError(
            f"{len(set(settings))} distinct settings do not span an "
            f"informationally complete set for dimension {dimension}")
    coeffs, *_ = np.linalg.lstsq(a_rest, freqs - a0, rcond=None)
    m = basis[0].astype(np.complex128).copy()
    for c, b in zip(coeffs, basis[1:]):
        m += c * b
    return project_to_physical(m / dimension)


def _lower_triangular_factor(rho: np.ndarray) -> np.ndarray:
    """Lower-triangular T with T'T = rho, via an exchange-flipped Cholesky."""
    n = rho.shape[0]
    j = np.eye(n)[::-1]
    c = np.linalg.cholesky(j @ rho @ j)
    return j @ c.conj().T @ j


def _log_likelihood(q: np.ndarray, counts: np.ndarray, shots: np.ndarray) -> float:
    return float(np.sum(counts * np.log(q) + (shots - counts) * np.log1p(-q)))


def mle_state_full(records: Sequence[CountRecord], dimension: int,
                   max_iterations: int = 5000, rel_tol: float = 1e-10) -> MleResult:
    """Maximum-likelihood state reconstruction with full diagnostics.

    Deterministic gradient ascent on the lower-triangular factor T of
    rho = T'T / Tr(T'T), with backtracking step control, starting from the
    projected linear-inversion estimate.  The per-setting likelihood is
    binomial.  Stops when the relative log-likelihood change drops to
    rel_tol; hitting the iteration cap flags converged=False but still
    returns the best iterate.
    """
    _validate_records(records, dimension)
    rho0 = linear_inversion_state(records, dimension)

    projs = np.stack([projector(r.setting) for r in records])
    counts = np.array([float(r.count) for r in records])
    shots = np.array([float(r.shots) for r in records])

    # Tiny mixing keeps the Cholesky factor nonsingular without moving the
    # initializer measurably (the exact-data fidelity floor is 1e-8).
    eps = 1e-9
    t_mat = _lower_triangular_factor(
        (rho0 + eps * np.eye(dimension)) / (1.0 + dimension * eps))
    mask = np.tril(np.ones((dimension, dimension)))
    idx = np.arange(dimension)

    def evaluate(t):
        gram = t.conj().T @ t
        trace = np.trace(gram).real
        rho = gram / trace
        q = np.clip(np.einsum("sij,ji->s", projs, rho).real, 1e-12, 1 - 1e-12)
        return rho, trace, q, _log_likelihood(q, counts, shots)

    rho, trace, q, ll = evaluate(t_mat)
    ll_trace = [ll]
    step = 0.1
    converged = False
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        weights = counts / q - (shots - counts) / (1.0 - q)
        grad_rho = np.einsum("s,sij->ij", weights, projs)
        w = grad_rho - np.trace(grad_rho @ rho).real * np.eye(dimension)
        direction = (t_mat @ w) * mask
        direction[idx, idx] = direction[idx, idx].real
        norm = np.linalg.norm(direction)
        if norm < 1e-13:
            converged = True
            break
        direction /= norm
        accepted = False
        while step >= 1e-18:
            candidate = t_mat + step * direction
            rho_new, trace_new, q_new, ll_new = evaluate(candidate)
            if ll_new > ll:
                accepted = True
                break
            step /= 2.0
        if not accepted:
            # No ascent step improves at machine precision: optimum reached.
            converged = True
            break
        rel_change = (ll_new - ll) / max(1.0, abs(ll))
        t_mat, rho, trace, q, ll = candidate, rho_new, trace_new, q_new, ll_new
        ll_trace.append(ll)
        step = min(step * 2.0, 1.0)
        if rel_change <= rel_tol:
            converged = True
            break
    return MleResult(rho=rho, log_likelihood=ll, iterations=iterations,
                     converged=converged, ll_trace=ll_trace)


def mle_state(records: Sequence[CountRecord], dimension: int) -> np.ndarray:
    """Maximum-likelihood density matrix (see mle_state_full for diagnostics)."""
    return mle_state_full(records, dimension).rho


def _reconstruct_output(posterior: np.ndarray, shots: int, seed: int) -> np.ndarray:
    """State tomography of a channel output; exact when shots == 0."""
    rho = density(posterior)
    if shots == 0:
        return rho
    records = sample_counts(rho, SINGLE_QUBIT_SETTINGS, shots, seed)
    return mle_state(records, 2)


def qpt_single_qubit(channel: Callable, shots: int = 0, seed: int = 0) -> QptResult:
    """Single-qubit process tomography of a (possibly trace-non-increasing) channel.

    channel maps a probe state vector to (posterior, success probability);
    the posterior may be a vector or a density matrix.  Each output is
    reconstructed by state tomography (exactly when shots == 0, otherwise
    from sampled counts) and weighted by its success probability, so the
    recovered chi carries the channel's trace deficit.  The chi matrix is
    expressed in the (I, X, Y, Z) basis and projected to Hermitian PSD.
    """
    if shots < 0:
        raise ValueError(f"shots must be >= 0, got {shots}")
    probes = {label: ket(label) for label in QPT_PROBE_LABELS}
    outputs = {}
    probabilities = {}
    seeds = np.random.SeedSequence(seed).generate_state(len(probes))
    for i, (label, psi) in enumerate(probes.items()):
        posterior, prob = channel(psi)
        if posterior is None or prob <= 1e-12:
            raise DegenerateChannelError(
                f"channel returned probability {prob:.3g} on probe |{label}>")
        outputs[label] = prob * _reconstruct_output(posterior, shots, int(seeds[i]))
        probabilities[label] = float(prob)

    # chi solves E(rho_j) = sum_mn chi_mn sigma_m rho_j sigma_n for the
    # four probe inputs; 4 probes x 4 matrix entries gives 16 equations
    # for the 16 unknowns.
    basis = list(PAULI_BASIS)
    a = np.empty((16, 16), dtype=np.complex128)
    b = np.empty(16, dtype=np.complex128)
    row = 0
    for label in QPT_PROBE_LABELS:
        rho_in = density(probes[label])
        sandwich = [[sm @ rho_in @ sn for sn in basis] for sm in basis]
        for r in range(2):
            for c in range(2):
                for mi in range(4):
                    for ni in range(4):
                        a[row, 4 * mi + ni] = sandwich[mi][ni][r, c]
                b[row] = outputs[label][r, c]
                row += 1
    chi = np.linalg.solve(a, b).reshape(4, 4)
    chi = hermitize(chi)
    evals, vecs = eigen_hermitian(chi)
    chi = hermitize((vecs * np.clip(evals, 0.0, None)) @ vecs.conj().T)
    return QptResult(chi=chi, success_probabilities=probabilities)


def chi_analytic_pm(p: float) -> np.ndarray:
    """Closed-form chi of the strength-p no-click back-action.

    The operator decomposes as a*I + b*Z with a = (1+sqrt(1-p))/2 and
    b = (1-sqrt(1-p))/2, so chi is the rank-1 outer product of (a,0,0,b).
    The trace (2-p)/2 is the average success probability.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"measurement strength must lie in [0, 1], got {p}")
    root = np.sqrt(1.0 - p)
    coeff = np.array([(1 + root) / 2, 0.0, 0.0, (1 - root) / 2], dtype=np.complex128)
    return np.outer(coeff, coeff.conj())


def normalize_chi(chi: np.ndarray) -> np.ndarray:
    """Scale a process matrix to unit trace."""
    trace = float(np.trace(chi).real)
    if trace <= 1e-12:
        raise ValueError(f"process matrix trace {trace:.3g} is not positive")
    return chi / trace


def process_fidelity(chi_exp: np.ndarray, chi_ideal: np.ndarray) -> float:
    """Process fidelity (Tr sqrt(sqrt(chi_ideal) chi_exp sqrt(chi_ideal)))^2.

    Both arguments are normalized to unit trace first, so the comparison is
    between process shapes; success probability is carried separately.
    """
    a = normalize_chi(np.asarray(chi_exp, dtype=np.complex128))
    b = normalize_chi(np.asarray(chi_ideal, dtype=np.complex128))
    return _uhlmann(b, a)


def chi_identity() -> np.ndarray:
    """Process matrix of the identity channel: 1 at (I, I)."""
    chi = np.zeros((4, 4), dtype=np.complex128)
    chi[0, 0] = 1.0
    return chi
