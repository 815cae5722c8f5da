"""
Gaussian mean-field theory of the resonant four-wave mixing process.

Pump-pair and generated-pair correlations B = <b1 b2>, A = <a1 a2> and the
pump photon number b follow from the Heisenberg equations once pump and
generated modes are decorrelated. With a vacuum-seeded start they collapse
onto one equation for b, a particle in the quartic potential

    V(b) = -(2/b0^2) (b^2 + b - b0) (b - b0) (b - b0 - 1)

with unit mass, so that (db/dxi)^2 = -2 V(b).
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from core.exceptions import (
    CorrelationUnderflowError,
    DomainError,
    InvalidParameterError,
    NoMinimumError,
    QuadratureError,
    StiffnessError,
)
from core.models import TrajectoryRecord

logger = logging.getLogger(__name__)

UNDERFLOW = 1e-150
DOMAIN_TOL = 1e-12


# ============================================================================
# STATE AND POTENTIAL
# ============================================================================
@dataclass(frozen=True)
class MeanFieldState:
    """Polar form of the decorrelated moments. d is the conserved denominator expectation."""

    b: float
    b12: float
    a12: float
    phi_b: float
    phi_a: float
    d: float

    def __post_init__(self):
        if self.b < 0 or self.b12 < 0 or self.a12 < 0:
            raise InvalidParameterError(
                f"b, b12 and a12 must be nonnegative, got {self.b}, {self.b12}, {self.a12}"
            )
        if not self.d > 0:
            raise InvalidParameterError(f"d must be positive, got {self.d}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.b, self.b12, self.a12, self.phi_b, self.phi_a], dtype=float)


def _check_b0(b0: float, lower: float = 0.0):
    if not b0 > lower:
        raise InvalidParameterError(f"b0 must exceed {lower:g}, got {b0}")


def quartic_turning_points(b0: float) -> tuple:
    """
    (b_min, b0, b0 + 1): the inner turning point and the two outer roots.

    b_min = (sqrt(1 + 4 b0) - 1) / 2, written without the cancellation.
    """
    _check_b0(b0)
    b_min = 2.0 * b0 / (1.0 + np.sqrt(1.0 + 4.0 * b0))
    return float(b_min), float(b0), float(b0 + 1.0)


def _lower_root(b0: float) -> float:
    return float(-(1.0 + np.sqrt(1.0 + 4.0 * b0)) / 2.0)


def _quartic(b, b0):
    b = np.asarray(b, dtype=float)
    return (b * b + b - b0) * (b - b0) * (b - b0 - 1.0)


def _quartic_slope(b, b0):
    b = np.asarray(b, dtype=float)
    f = b * b + b - b0
    g = b - b0
    h = b - b0 - 1.0
    return (2.0 * b + 1.0) * g * h + f * (g + h)


@dataclass(frozen=True)
class QuarticPotential:
    b0: float

    def __post_init__(self):
        _check_b0(self.b0)

    @property
    def roots(self) -> tuple:
        b_min, b0, b0_plus1 = quartic_turning_points(self.b0)
        return (_lower_root(self.b0), b_min, b0, b0_plus1)

    def __call__(self, b):
        return -2.0 / self.b0 ** 2 * _quartic(b, self.b0)

    def slope(self, b):
        return -2.0 / self.b0 ** 2 * _quartic_slope(b, self.b0)


def potential(b, b0: float):
    return QuarticPotential(b0)(b)


def pendulum_energy(b, bdot, b0: float):
    """Unit-mass pendulum energy bdot^2 / 2 + V(b); zero on the vacuum-seeded orbit."""
    return 0.5 * np.asarray(bdot, dtype=float) ** 2 + potential(b, b0)


# ============================================================================
# FULL DECORRELATED EQUATIONS
# ============================================================================
def meanfield_full_rhs(s: MeanFieldState) -> np.ndarray:
    """
    xi-derivatives of (b, b12, a12, phi_b, phi_a).

    Raises:
        CorrelationUnderflowError: when b12 or a12 is too small to divide by
            while the other is not; meanfield_cartesian_rhs stays regular there.
    """
    if s.b12 == 0 and s.a12 == 0:
        return np.zeros(5)
    scale = max(s.b, s.b12, s.a12, 1.0)
    if s.b12 < UNDERFLOW * scale or s.a12 < UNDERFLOW * scale:
        raise CorrelationUnderflowError(
            f"correlation magnitudes b12={s.b12:.3e}, a12={s.a12:.3e} underflow the phase equations"
        )
    dphi = s.phi_a - s.phi_b
    pump = (2.0 * s.b + 1.0) / s.d
    generated = (2.0 * s.b - 2.0 * s.d - 1.0) / s.d
    return np.array(
        [
            2.0 / s.d * s.b12 * s.a12 * np.sin(dphi),
            pump * s.a12 * np.sin(dphi),
            generated * s.b12 * np.sin(dphi),
            -pump * s.a12 / s.b12 * np.cos(dphi),
            generated * s.b12 / s.a12 * np.cos(dphi),
        ]
    )


def meanfield_cartesian_rhs(big_b: complex, big_a: complex, b: float, d: float) -> tuple:
    """
    Same equations for the complex pair correlations B = <b1 b2>, A = <a1 a2>.

    Returns:
        (dB/dxi, dA/dxi, db/dxi)
    """
    d_big_b = -1j / d * (2.0 * b + 1.0) * big_a
    d_big_a = -1j / d * (2.0 * d - 2.0 * b + 1.0) * big_b
    db = -2.0 / d * (np.conj(big_a) * big_b).imag
    return d_big_b, d_big_a, float(db)


def _cartesian_vector_rhs(_xi, v, d):
    d_big_b, d_big_a, db = meanfield_cartesian_rhs(v[0] + 1j * v[1], v[2] + 1j * v[3], v[4], d)
    return [d_big_b.real, d_big_b.imag, d_big_a.real, d_big_a.imag, db]


def meanfield_constant(s: MeanFieldState) -> float:
    """b12 a12 cos(phi_a - phi_b), conserved by the full equations."""
    return s.b12 * s.a12 * np.cos(s.phi_a - s.phi_b)


def integrate_full_meanfield(b0: float, xi_grid, delta: float = 1e-8, tol: float = 1e-12) -> TrajectoryRecord:
    """
    Integrate the decorrelated equations from coherent pumps and vacuum pairs.

    The generated pair correlation starts at delta * b0 with phase -pi/2
    relative to the pump pair, which selects the descending branch.

    Returns:
        TrajectoryRecord over xi with columns b, b12, a12, dphi and the
        conserved constant
    """
    _check_b0(b0)
    if delta < 0:
        raise InvalidParameterError(f"delta must be nonnegative, got {delta}")
    xi_grid = np.asarray(xi_grid, dtype=float)
    start = [b0, 0.0, 0.0, -delta * b0, b0]
    sol = solve_ivp(
        _cartesian_vector_rhs,
        (0.0, float(xi_grid[-1])),
        start,
        method="DOP853",
        t_eval=xi_grid,
        rtol=tol,
        atol=tol * 1e-2 * b0,
        args=(float(b0),),
    )
    if sol.status == -1:
        raise StiffnessError(float(sol.t[-1]), sol.message)
    big_b = sol.y[0] + 1j * sol.y[1]
    big_a = sol.y[2] + 1j * sol.y[3]
    columns = OrderedDict(
        b=sol.y[4],
        b12=np.abs(big_b),
        a12=np.abs(big_a),
        dphi=np.angle(big_a) - np.angle(big_b),
        constant=(np.conj(big_a) * big_b).real,
    )
    return TrajectoryRecord("xi", xi_grid, columns)


# ============================================================================
# REDUCED EQUATION
# ============================================================================
def reduced_ode_rhs(b: float, b0: float) -> float:
    """
    |db/dxi| = (2/b0) sqrt((b^2 + b - b0)(b - b0)(b - b0 - 1)).

    Raises:
        DomainError: if b lies outside the allowed region beyond rounding.
    """
    _check_b0(b0)
    q = float(_quartic(b, b0))
    if q < -DOMAIN_TOL * max(b0, 1.0) ** 4:
        raise DomainError(f"b={b} is outside the allowed region for b0={b0} (quartic {q:.3e})")
    return 2.0 / b0 * np.sqrt(max(q, 0.0))


def efficiency(b0: float) -> float:
    """Converted fraction 1 - b_min/b0."""
    b_min, _, _ = quartic_turning_points(b0)
    return 1.0 - b_min / b0


def conversion_distance(b0: float) -> float:
    """
    xi from b0 down to b_min.

    With b = mid + r sin(phi) the two simple roots cancel against db and the
    integrand becomes b0 / (2 sqrt((b - b_-)(b0 + 1 - b))), regular on
    [-pi/2, pi/2]; b_- is the negative root of b^2 + b - b0.
    """
    b_min, _, _ = quartic_turning_points(b0)
    b_minus = _lower_root(b0)
    mid = 0.5 * (b0 + b_min)
    r = 0.5 * (b0 - b_min)

    def integrand(phi):
        b = mid + r * np.sin(phi)
        return b0 / (2.0 * np.sqrt((b - b_minus) * (b0 + 1.0 - b)))

    result = quad(integrand, -np.pi / 2, np.pi / 2, epsabs=0.0, epsrel=1e-12, limit=500, full_output=1)
    if len(result) > 3:
        raise QuadratureError(f"conversion distance for b0={b0}: {result[3]}")
    return float(result[0])


def _pendulum_rhs(_xi, state, b0):
    b, bdot = state
    return [bdot, 2.0 / b0 ** 2 * float(_quartic_slope(b, b0))]


def _solve_pendulum(b0: float, xi_end: float, xi_grid=None, tol: float = 1e-12, events=None):
    if not b0 >= 1:
        raise InvalidParameterError(f"b0 must be at least 1, got {b0}")
    if not xi_end > 0:
        raise InvalidParameterError(f"xi_end must be positive, got {xi_end}")
    sol = solve_ivp(
        _pendulum_rhs,
        (0.0, xi_end),
        [float(b0), 0.0],
        method="DOP853",
        t_eval=xi_grid,
        rtol=tol,
        atol=tol * 1e-2 * b0,
        args=(float(b0),),
        events=events,
    )
    if sol.status == -1:
        raise StiffnessError(float(sol.t[-1]), sol.message)
    return sol


def integrate_meanfield(b0: float, xi_end: float, xi_grid=None, tol: float = 1e-12) -> TrajectoryRecord:
    """
    b(xi) from the pendulum form, started at rest at b0.

    Args:
        b0: Initial pump photon number, at least 1
        xi_end: Propagation length
        xi_grid: Output points; 1001 uniform points when omitted

    Returns:
        TrajectoryRecord over xi with columns b and b_dot
    """
    if xi_grid is None:
        xi_grid = np.linspace(0.0, xi_end, 1001)
    xi_grid = np.asarray(xi_grid, dtype=float)
    sol = _solve_pendulum(b0, xi_end, xi_grid, tol)
    return TrajectoryRecord("xi", xi_grid, OrderedDict(b=sol.y[0], b_dot=sol.y[1]))


def meanfield_period(b0: float, tol: float = 1e-12) -> tuple:
    """
    First minimum and period of b(xi), read off the integrated orbit.

    Returns:
        (xi of the first minimum, period)
    """
    z = conversion_distance(b0)

    def rising_through_minimum(_xi, state, _b0):
        return state[1]

    rising_through_minimum.direction = 1.0
    sol = _solve_pendulum(b0, 3.5 * z, tol=tol, events=rising_through_minimum)
    minima = sol.t_events[0]
    if minima.size < 2:
        raise NoMinimumError(f"fewer than two minima of b within xi={3.5 * z:g} for b0={b0}")
    logger.debug(f"mean-field b0={b0:g}: minima at {minima[:2]}")
    return float(minima[0]), float(minima[1] - minima[0])


def meanfield_scan(b0_values) -> list:
    """(b0, conversion distance, efficiency) for each b0."""
    b0_values = [float(b) for b in b0_values]
    if any(b2 <= b1 for b1, b2 in zip(b0_values, b0_values[1:])):
        raise InvalidParameterError(f"b0 values must be ascending, got {b0_values}")
    return [(b0, conversion_distance(b0), efficiency(b0)) for b0 in b0_values]
