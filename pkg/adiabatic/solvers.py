"""
Five-level interaction matrix and its adiabatic |1> branch.

The matrix is stored without its -hbar prefactor (hbar = 1). Reported
eigenvalues carry the minus sign.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from core.exceptions import DegenerateBranchError, SingularInputError, DomainError
from core.models import FieldState, PhysicalParams

logger = logging.getLogger(__name__)

OVERLAP_TIE = 1e-9

# Diagonalizing the five-level matrix as built here gives a |1> branch of
# 2 lambda0 for weak fields (3.9596e-4 against lambda0 = 1.9802e-4 at
# omega = 1, e = 0.1, delta = 100).
BRANCH_PREFACTOR = 2.0


@dataclass(frozen=True)
class FiveLevelMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (5, 5):
            raise SingularInputError(f"five-level matrix must be 5x5, got {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


# ============================================================================
# MATRIX CONSTRUCTION
# ============================================================================
def build_five_level(fs: FieldState, p: PhysicalParams) -> FiveLevelMatrix:
    """
    Bracketed interaction matrix in the basis (|1>, |2>, |3>, |4>, |5>).

    Levels 3 and 4 sit at -delta and +delta; the E2 coupling to level 4
    carries the sign flip that cancels the ac-Stark shifts.

    Args:
        fs: Field amplitudes
        p: Physical parameters (delta, gamma1, gamma2 are used)

    Returns:
        FiveLevelMatrix
    """
    o1, o2, e1, e2 = fs.omega1, fs.omega2, fs.e1, fs.e2
    c = np.conjugate
    delta, g1, g2 = p.delta, p.gamma1, p.gamma2
    m = np.array(
        [
            [0, 0, c(o2), c(o2), c(e1)],
            [0, 0, c(e2), -c(e2), c(o1)],
            [o2, e2, -delta - 1j * g2, 0, 0],
            [o2, -e2, 0, delta - 1j * g2, 0],
            [e1, o1, 0, 0, -1j * g1],
        ],
        dtype=complex,
    )
    return FiveLevelMatrix(m)


def hermiticity_defect(m: FiveLevelMatrix) -> float:
    """Largest entry of |M - M^dagger|; equals 2 max(gamma1, gamma2)."""
    return float(np.max(np.abs(m.entries - m.entries.conj().T)))


def eigenvalues(m: FiveLevelMatrix) -> np.ndarray:
    """All five eigenvalues with the -hbar prefactor applied."""
    return -scipy.linalg.eigvals(m.entries)


# ============================================================================
# ADIABATIC BRANCH
# ============================================================================
def adiabatic_branch(m: FiveLevelMatrix) -> complex:
    """
    Eigenvalue (with -hbar applied) whose eigenvector overlaps |1> the most.

    Candidates within OVERLAP_TIE of the best overlap are accepted only when
    they share one eigenvalue; then the smallest |eigenvalue| wins.
    """
    w, v = scipy.linalg.eig(m.entries)
    overlaps = np.abs(v[0, :]) / np.linalg.norm(v, axis=0)
    best = overlaps.max()
    candidates = np.flatnonzero(overlaps >= best - OVERLAP_TIE)
    if candidates.size > 1:
        scale = max(1.0, float(np.max(np.abs(m.entries))))
        spread = np.ptp(w[candidates].real) + np.ptp(w[candidates].imag)
        if spread > 1e-12 * scale:
            raise DegenerateBranchError(
                f"{candidates.size} eigenvectors overlap |1> equally ({best:.12f}) "
                f"with distinct eigenvalues {(-w[candidates]).tolist()}"
            )
        candidates = candidates[np.argsort(np.abs(w[candidates]), kind="stable")]
    return complex(-w[candidates[0]])


def lambda0(fs: FieldState, p: PhysicalParams) -> float:
    """
    Lowest-order adiabatic eigenvalue (hbar omitted).

    Raises:
        SingularInputError: if |omega1|^2 + |e1|^2 vanishes.
    """
    denominator = abs(fs.omega1) ** 2 + abs(fs.e1) ** 2
    if denominator == 0:
        raise SingularInputError("lambda0 needs |omega1|^2 + |e1|^2 > 0")
    forward = np.conj(fs.omega1) * np.conj(fs.omega2) * fs.e1 * fs.e2
    backward = fs.omega1 * fs.omega2 * np.conj(fs.e1) * np.conj(fs.e2)
    numerator = complex(forward + backward)
    if abs(numerator.imag) > 1e-12 * max(1.0, abs(numerator)):
        raise DomainError(f"lambda0 numerator is not real: {numerator}")
    return numerator.real / (p.delta * denominator)


def scale_fields(fs: FieldState, s: float) -> FieldState:
    return FieldState(fs.omega1 * s, fs.omega2 * s, fs.e1 * s, fs.e2 * s)


def lambda0_ladder(fs: FieldState, p: PhysicalParams, scales) -> tuple:
    """
    Compare the exact branch against BRANCH_PREFACTOR * lambda0 on a field-scale ladder.

    Args:
        fs: Base field amplitudes, scaled by each s
        p: Physical parameters
        scales: Ascending field scale factors

    Returns:
        (rows, slope): rows of (s, exact, two_lambda0, rel_err) and the fitted
        log-log slope of rel_err against s.
    """
    rows = []
    for s in scales:
        scaled = scale_fields(fs, s)
        exact = adiabatic_branch(build_five_level(scaled, p)).real
        two_lambda0 = BRANCH_PREFACTOR * lambda0(scaled, p)
        rel_err = abs(exact - two_lambda0) / abs(two_lambda0) if two_lambda0 != 0 else float("nan")
        rows.append((float(s), exact, two_lambda0, rel_err))

    errors = np.array([r[3] for r in rows])
    slope = float("nan")
    if len(rows) >= 2 and np.all(np.isfinite(errors)) and np.all(errors > 0):
        slope = float(np.polyfit(np.log([r[0] for r in rows]), np.log(errors), 1)[0])
    logger.info(f"lambda0 ladder over {len(rows)} scales, fitted error slope {slope:.3f}")
    return rows, slope
