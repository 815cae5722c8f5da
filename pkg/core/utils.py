import logging

import numpy as np
from scipy import constants

from core.exceptions import InvalidParameterError
from core.models import FieldState, PhysicalParams

logger = logging.getLogger(__name__)


# ============================================================================
# SCALINGS
# ============================================================================
def dimensionless_rate(p: PhysicalParams) -> float:
    """
    Signed ratio kappa/delta. Every solver works in units where it equals one.

    Args:
        p: Physical parameters

    Returns:
        kappa / delta
    """
    if p.delta == 0:
        raise InvalidParameterError("delta must be nonzero")
    return p.kappa / p.delta


def xi_from_zeta(p: PhysicalParams, zeta):
    """Propagation length -> dimensionless xi = (kappa/delta) * zeta."""
    return dimensionless_rate(p) * np.asarray(zeta, dtype=float)


def zeta_from_xi(p: PhysicalParams, xi):
    return np.asarray(xi, dtype=float) / dimensionless_rate(p)


def tau_from_time(p: PhysicalParams, t):
    """Interaction time -> tau = (kappa c / delta) t, the unit of the quantum solvers."""
    return dimensionless_rate(p) * constants.c * np.asarray(t, dtype=float)


# ============================================================================
# CONSTANTS OF MOTION
# ============================================================================
def manley_rowe(fs: FieldState) -> tuple:
    """
    Classical versions of the four conserved photon-flux combinations.

    Returns:
        (|O1|^2 + |E1|^2, |O2|^2 + |E2|^2, |O1|^2 - |O2|^2, 2 Re(O1 O2 E1* E2*))
    """
    i_o1, i_o2, i_e1, i_e2 = fs.intensities()
    m4 = 2.0 * (fs.omega1 * fs.omega2 * fs.e1.conjugate() * fs.e2.conjugate()).real
    return (i_o1 + i_e1, i_o2 + i_e2, i_o1 - i_o2, m4)


# ============================================================================
# COMPENSATED SUMMATION
# ============================================================================
class CompensatedSum:
    """
    Kahan accumulator over numpy arrays of a fixed shape.

    Elementwise, so the result depends only on the order of ``add`` calls,
    never on how the added arrays were computed.
    """

    def __init__(self, shape=()):
        self._sum = np.zeros(shape, dtype=float)
        self._carry = np.zeros(shape, dtype=float)

    def add(self, values):
        y = np.asarray(values, dtype=float) - self._carry
        t = self._sum + y
        self._carry = (t - self._sum) - y
        self._sum = t

    @property
    def total(self) -> np.ndarray:
        return self._sum.copy()


def shifted_variance(weights, values) -> float:
    """
    Variance of ``values`` under probability ``weights``, shifted by the first value.

    The shift makes a constant observable come out exactly zero.
    """
    weights = np.asarray(weights, dtype=float)
    values = np.asarray(values, dtype=float)
    shifted = values - values.flat[0]
    total = weights.sum()
    mean = (weights * shifted).sum() / total
    return float((weights * shifted * shifted).sum() / total - mean * mean)
