import logging
from collections import OrderedDict

import numpy as np
from scipy.integrate import quad, solve_ivp

from core.exceptions import (
    DegenerateOrbitError,
    InvalidParameterError,
    NoMinimumError,
    QuadratureError,
    SingularInputError,
    StiffnessError,
)
from core.models import FieldState, TrajectoryRecord
from core.utils import manley_rowe

logger = logging.getLogger(__name__)

# Effective mass of the normalized-intensity pendulum in xi units. Fixed by
# requiring the pendulum to reproduce the full field equations.
M_EFF = 2.0

SINGULAR_RATIO = 1e-30


# ============================================================================
# FIELD EQUATIONS
# ============================================================================
def _field_derivatives(o1, o2, e1, e2):
    c = np.conjugate
    denominator = abs(o1) ** 2 + abs(e1) ** 2
    scale = denominator + abs(o2) ** 2 + abs(e2) ** 2
    if denominator <= SINGULAR_RATIO * scale or denominator == 0:
        raise SingularInputError(
            f"|omega1|^2 + |e1|^2 = {denominator:.3e} is singular against intensity scale {scale:.3e}"
        )
    d1 = denominator
    d2 = denominator * denominator
    de1 = -1j * (c(o1) * o1 * o1 * o2 * c(e2) - e1 * e1 * e2 * c(o1) * c(o2)) / d2
    de2 = -1j * o1 * o2 * c(e1) / d1
    do1 = 1j * (o1 * o1 * o2 * c(e1) * c(e2) - abs(e1) ** 2 * e1 * e2 * c(o2)) / d2
    do2 = -1j * e1 * e2 * c(o1) / d1
    return do1, do2, de1, de2


def classical_rhs(fs: FieldState) -> FieldState:
    """
    xi-derivatives of the four fields with kappa/delta scaled out.

    The result is packed into a FieldState: omega1 holds d(omega1)/dxi and so on.

    Raises:
        SingularInputError: if |omega1|^2 + |e1|^2 vanishes against the intensity scale.
    """
    return FieldState(*_field_derivatives(fs.omega1, fs.omega2, fs.e1, fs.e2))


def _rhs_vector(_xi, v):
    z = v[:4] + 1j * v[4:]
    dz = np.array(_field_derivatives(*z), dtype=complex)
    return np.concatenate([dz.real, dz.imag])


def _four_field_product_imag(_xi, v):
    z = v[:4] + 1j * v[4:]
    return (z[0] * z[1] * np.conj(z[2]) * np.conj(z[3])).imag


def _solve(fs0: FieldState, xi_end: float, tol: float, xi_grid=None, events=None):
    if not 0 < tol <= 1e-3:
        raise InvalidParameterError(f"tol must lie in (0, 1e-3], got {tol}")
    if xi_end <= 0:
        raise InvalidParameterError(f"xi_end must be positive, got {xi_end}")
    amplitude = np.sqrt(sum(fs0.intensities()))
    sol = solve_ivp(
        _rhs_vector,
        (0.0, xi_end),
        fs0.as_vector(),
        method="DOP853",
        t_eval=xi_grid,
        rtol=tol,
        atol=tol * 1e-2 * max(amplitude, 1e-300),
        events=events,
    )
    if sol.status == -1:
        raise StiffnessError(float(sol.t[-1]), sol.message)
    return sol


def integrate_classical(fs0: FieldState, xi_end: float, tol: float = 1e-10, xi_grid=None) -> list:
    """
    Integrate the field equations from xi = 0 to xi_end.

    Args:
        fs0: Initial fields
        xi_end: End of the propagation window (dimensionless)
        tol: Relative tolerance in (0, 1e-3]
        xi_grid: Optional output points; the adaptive steps are returned otherwise

    Returns:
        List of (xi, FieldState)
    """
    if xi_grid is not None:
        xi_grid = np.asarray(xi_grid, dtype=float)
    sol = _solve(fs0, xi_end, tol, xi_grid=xi_grid)
    return [(float(x), FieldState.from_vector(sol.y[:, i])) for i, x in enumerate(sol.t)]


def manley_rowe_drift(trajectory) -> np.ndarray:
    """Largest deviation of each invariant from its initial value, relative to m1 + m2."""
    values = np.array([manley_rowe(fs) for _, fs in trajectory])
    scale = values[0, 0] + values[0, 1]
    return np.max(np.abs(values - values[0]), axis=0) / scale


def classical_trajectory(fs0: FieldState, xi_grid, tol: float = 1e-10) -> TrajectoryRecord:
    xi_grid = np.asarray(xi_grid, dtype=float)
    trajectory = integrate_classical(fs0, float(xi_grid[-1]), tol, xi_grid=xi_grid)
    intensities = np.array([fs.intensities() for _, fs in trajectory])
    invariants = np.array([manley_rowe(fs) for _, fs in trajectory])
    columns = OrderedDict()
    for i, label in enumerate(("I_omega1", "I_omega2", "I_e1", "I_e2")):
        columns[label] = intensities[:, i]
    for i in range(4):
        columns[f"m{i + 1}"] = invariants[:, i]
    drift = manley_rowe_drift(trajectory)
    logger.info(f"classical run to xi={xi_grid[-1]:g}: Manley-Rowe drift {drift.max():.2e}")
    return TrajectoryRecord("xi", xi_grid, columns)


def classical_period(fs0: FieldState, xi_end: float, tol: float = 1e-11) -> float:
    """
    Oscillation period of the normalized pump intensity from the full field equations.

    Turning points of y are the zeros of Im(omega1 omega2 e1* e2*); two of
    them make one period.
    """
    sol = _solve(fs0, xi_end, tol, events=_four_field_product_imag)
    turns = np.asarray(sol.t_events[0], dtype=float)
    if turns.size == 0 or turns[0] > 1e-9:
        turns = np.concatenate([[0.0], turns])
    if turns.size < 3:
        raise NoMinimumError(f"fewer than two turning points of y before xi={xi_end:g}")
    return float(2.0 * np.mean(np.diff(turns)))


# ============================================================================
# PENDULUM REDUCTION
# ============================================================================
def normalized_intensity(fs: FieldState) -> float:
    """y = |omega1|^2 / (|omega1|^2 + |e1|^2)."""
    i_o1, _, i_e1, _ = fs.intensities()
    return i_o1 / (i_o1 + i_e1)


def seed_for_pendulum(y0: float, seed_phase: float = np.pi / 2, scale: float = 1.0) -> FieldState:
    """
    Symmetric seeded fields with normalized pump intensity y0.

    Both generated fields carry the phase ``seed_phase``. For 0 and pi/2 the
    four-field product is real, so y starts at rest.
    """
    if not 0 <= y0 <= 1:
        raise InvalidParameterError(f"y0 must lie in [0, 1], got {y0}")
    pump = np.sqrt(y0) * scale
    seed = np.sqrt(1.0 - y0) * scale * np.exp(1j * seed_phase)
    return FieldState(pump, pump, seed, seed)


def pendulum_potential(y):
    y = np.asarray(y, dtype=float)
    return -4.0 * y * y * (y - 1.0) ** 2


def _potential_slope(y):
    return -8.0 * y * (y - 1.0) * (2.0 * y - 1.0)


def pendulum_energy(y, ydot):
    return 0.5 * M_EFF * np.asarray(ydot) ** 2 + pendulum_potential(y)


def _pendulum_rhs(_xi, state):
    y, ydot = state
    return [ydot, -_potential_slope(y) / M_EFF]


def pendulum_evolve(y0: float, xi_grid, tol: float = 1e-12) -> np.ndarray:
    """
    Normalized pump intensity started at rest at y0, sampled on xi_grid.

    Args:
        y0: Initial normalized intensity in [0, 1]
        xi_grid: Ascending, nonnegative output points

    Returns:
        y at each grid point
    """
    if not 0 <= y0 <= 1:
        raise InvalidParameterError(f"y0 must lie in [0, 1], got {y0}")
    xi_grid = np.asarray(xi_grid, dtype=float)
    if xi_grid[-1] <= 0:
        return np.full(xi_grid.shape, float(y0))
    sol = solve_ivp(
        _pendulum_rhs,
        (0.0, float(xi_grid[-1])),
        [float(y0), 0.0],
        method="DOP853",
        t_eval=xi_grid,
        rtol=tol,
        atol=tol * 1e-2,
    )
    if sol.status == -1:
        raise StiffnessError(float(sol.t[-1]), sol.message)
    return sol.y[0]


def pendulum_period(y0: float) -> float:
    """
    Period of the closed orbit through (y0, 0).

    The turning points are y0 and 1 - y0. With y = 1/2 + r sin(phi) the
    inverse-square-root endpoint singularities cancel and the integrand
    becomes 1 / sqrt(2 u0 + r^2 cos^2 phi), u0 = y0 (1 - y0).
    """
    if y0 in (0.0, 0.5, 1.0):
        raise DegenerateOrbitError(f"y0={y0} is an equilibrium, the orbit has no period")
    if not 0 < y0 < 1:
        raise InvalidParameterError(f"y0 must lie in (0, 1), got {y0}")
    u0 = y0 * (1.0 - y0)
    r = abs(y0 - 0.5)
    coefficient = np.sqrt(2.0 / M_EFF) * 2.0

    def integrand(phi):
        return 1.0 / np.sqrt(2.0 * u0 + (r * np.cos(phi)) ** 2)

    result = quad(integrand, -np.pi / 2, np.pi / 2, epsabs=0.0, epsrel=1e-12, limit=500, full_output=1)
    if len(result) > 3:
        raise QuadratureError(f"pendulum period for y0={y0}: {result[3]}")
    return 2.0 * result[0] / coefficient
