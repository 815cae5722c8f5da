"""
Coherent-state pump inputs as Poisson-weighted mixtures of Fock sectors.

Every reported observable is a photon-number moment, and number operators are
block diagonal in the (n1, n2) decomposition, so each sector evolves on its
own and the ensemble moments are weighted sums of sector moments.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from itertools import groupby

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed
from scipy.stats import poisson

from core.exceptions import InvalidParameterError, NoMinimumError
from core.models import TrajectoryRecord
from core.utils import CompensatedSum
from fock.solvers import (
    basis_amplitudes,
    build_sector,
    mandel_q_series,
    sector_moments,
    sector_spectrum,
)
from meanfield.solvers import conversion_distance

logger = logging.getLogger(__name__)

# Half-width of the first truncation window, in standard deviations.
START_K = 3.0
K_STEP = 0.5
MASS_TOL = 1e-12

# Row of moment accumulators produced per group of sectors.
_MOMENTS = ("weight", "pump1", "pump2", "gen1", "gen2", "diff1", "diff2")

RESONANT = "resonant"
CONSTANT = "constant"
DENOMINATOR_MODES = (RESONANT, CONSTANT)


def _default(key, value):
    return settings.SIMULATION[key] if value is None else value


# ============================================================================
# ENSEMBLE CONSTRUCTION
# ============================================================================
@dataclass(frozen=True)
class SectorEnsemble:
    """
    Weighted sectors plus the probability mass the truncation dropped.

    Sectors are ordered by n1, then n2; the order fixes the reduction order.
    """

    sectors: tuple
    tail_mass: float

    def __post_init__(self):
        if not self.sectors:
            raise InvalidParameterError("an ensemble needs at least one sector")
        if any(not w > 0 for _, w in self.sectors):
            raise InvalidParameterError("sector weights must be positive")
        if self.tail_mass < 0:
            raise InvalidParameterError(f"tail mass must be nonnegative, got {self.tail_mass}")
        if abs(self.weight_mass + self.tail_mass - 1.0) > MASS_TOL:
            raise InvalidParameterError(
                f"weights ({self.weight_mass:.15f}) and tail ({self.tail_mass:.3e}) do not sum to one"
            )

    @property
    def weight_mass(self) -> float:
        total = CompensatedSum()
        for _, w in self.sectors:
            total.add(w)
        return float(total.total)

    @property
    def rows(self) -> list:
        """Consecutive sectors sharing n1; one parallel task each."""
        return [list(group) for _, group in groupby(self.sectors, key=lambda item: item[0].n1)]

    def __len__(self):
        return len(self.sectors)


def poisson_window(mean: float, eps: float) -> tuple:
    """
    Smallest window [mean - k sigma, mean + k sigma], k in steps of 1/2, that
    leaves at most eps/2 of the probability and of the first moment outside.

    Returns:
        (lo, hi) inclusive photon-number bounds
    """
    sigma = np.sqrt(mean)
    k = START_K
    while True:
        lo = max(0, int(np.floor(mean - k * sigma)))
        hi = int(np.ceil(mean + k * sigma))
        # P(N >= hi) bounds both the upper mass and the upper first moment / mean.
        outside = poisson.sf(hi - 1, mean) + (poisson.cdf(lo - 1, mean) if lo > 0 else 0.0)
        if outside <= eps / 2:
            return lo, hi
        k += K_STEP


def build_ensemble(mean1: float, mean2: float, eps_tail: float = None, denominator: float = None) -> SectorEnsemble:
    """
    Poisson-weighted sectors (n1, n2, 0, 0) for coherent pumps with vacuum generated modes.

    Args:
        mean1, mean2: Mean photon numbers of the two pumps
        eps_tail: Largest discarded probability, in (0, 1e-4]
        denominator: Fixed sector denominator; None keeps the resonant n1 + n3

    Returns:
        SectorEnsemble
    """
    eps_tail = _default("EPS_TAIL", eps_tail)
    if not (mean1 > 0 and mean2 > 0):
        raise InvalidParameterError(f"pump means must be positive, got {mean1}, {mean2}")
    if not 0 < eps_tail <= 1e-4:
        raise InvalidParameterError(f"eps_tail must lie in (0, 1e-4], got {eps_tail}")

    lo1, hi1 = poisson_window(mean1, eps_tail)
    lo2, hi2 = poisson_window(mean2, eps_tail)
    n1_values = np.arange(lo1, hi1 + 1)
    n2_values = np.arange(lo2, hi2 + 1)
    p1 = poisson.pmf(n1_values, mean1)
    p2 = poisson.pmf(n2_values, mean2)

    sectors = []
    mass = CompensatedSum()
    for n1, w1 in zip(n1_values, p1):
        for n2, w2 in zip(n2_values, p2):
            weight = float(w1 * w2)
            if weight > 0:
                sectors.append((build_sector(int(n1), int(n2), 0, 0, denominator=denominator), weight))
                mass.add(weight)
    tail_mass = max(0.0, 1.0 - float(mass.total))
    if tail_mass > eps_tail:
        raise InvalidParameterError(f"truncation left {tail_mass:.3e} outside, above eps_tail={eps_tail:.3e}")

    logger.info(
        f"ensemble means=({mean1:g}, {mean2:g}): n1 in [{lo1}, {hi1}], n2 in [{lo2}, {hi2}], "
        f"{len(sectors)} sectors, tail {tail_mass:.2e}"
    )
    return SectorEnsemble(tuple(sectors), tail_mass)


# ============================================================================
# ENSEMBLE OBSERVABLES
# ============================================================================
@dataclass(frozen=True)
class EnsembleSeries:
    record: TrajectoryRecord
    weight_mass: float
    tail_mass: float
    sector_count: int

    @property
    def tau(self) -> np.ndarray:
        return self.record.coordinate

    @property
    def pump_mean(self) -> np.ndarray:
        return self.record.columns["pump_mean"]


def _row_moments(row, tau, pump_shift, gen_shift, diff_shift) -> np.ndarray:
    """
    Weighted moment sums of one row of sectors, accumulated in sector order.

    Pump and generated moments are taken about fixed shifts so the ensemble
    variances do not come out of a difference of two large numbers.
    """
    sums = CompensatedSum((len(_MOMENTS), tau.size))
    for s, w in row:
        mean_n, var_n = sector_moments(s, basis_amplitudes(s), tau)
        pump = s.n1 - mean_n - pump_shift
        gen = s.n3 + mean_n - gen_shift
        diff = float(s.n3 - s.n4 - diff_shift)
        sums.add(
            [
                np.full(tau.size, w),
                w * pump,
                w * (var_n + pump * pump),
                w * gen,
                w * (var_n + gen * gen),
                np.full(tau.size, w * diff),
                np.full(tau.size, w * diff * diff),
            ]
        )
    return sums.total


def ensemble_observables(e: SectorEnsemble, tau_grid, workers: int = None) -> EnsembleSeries:
    """
    Ensemble photon statistics over tau_grid.

    Rows of sectors run as independent joblib tasks; their sums are folded
    into a compensated accumulator in row order, so the result does not
    depend on the worker count.

    Args:
        e: Sector ensemble
        tau_grid: Ascending interaction times
        workers: Number of joblib workers

    Returns:
        EnsembleSeries with the fock columns plus weight_mass and tail_mass
    """
    workers = _default("WORKERS", workers)
    if workers < 1:
        raise InvalidParameterError(f"workers must be at least 1, got {workers}")
    tau = np.asarray(tau_grid, dtype=float)
    first_sector = e.sectors[0][0]
    pump_shift = float(first_sector.n1)
    gen_shift = float(first_sector.n3)
    diff_shift = float(first_sector.n3 - first_sector.n4)

    rows = e.rows
    logger.info(f"evolving {len(e)} sectors in {len(rows)} rows on {tau.size} points with {workers} worker(s)")
    totals = CompensatedSum((len(_MOMENTS), tau.size))
    results = Parallel(n_jobs=workers, return_as="generator")(
        delayed(_row_moments)(row, tau, pump_shift, gen_shift, diff_shift) for row in rows
    )
    for i, partial in enumerate(results):
        totals.add(partial)
        logger.debug(f"row n1={rows[i][0][0].n1} done ({i + 1}/{len(rows)})")

    weight, pump1, pump2, gen1, gen2, diff1, diff2 = totals.total
    pump_dev = pump1 / weight
    gen_dev = gen1 / weight
    diff_dev = diff1 / weight
    pump_mean = pump_shift + pump_dev
    gen_mean = gen_shift + gen_dev
    pump_var = np.maximum(pump2 / weight - pump_dev * pump_dev, 0.0)
    gen_var = np.maximum(gen2 / weight - gen_dev * gen_dev, 0.0)
    var_diff = np.maximum(diff2 / weight - diff_dev * diff_dev, 0.0)

    weight_mass = e.weight_mass
    columns = OrderedDict(
        pump_mean=pump_mean,
        gen_mean=gen_mean,
        pump_var=pump_var,
        gen_var=gen_var,
        q_pump=mandel_q_series(pump_mean, pump_var),
        q_gen=mandel_q_series(gen_mean, gen_var),
        var_diff=var_diff,
        weight_mass=np.full(tau.size, weight_mass),
        tail_mass=np.full(tau.size, e.tail_mass),
    )
    return EnsembleSeries(TrajectoryRecord("tau", tau, columns), weight_mass, e.tail_mass, len(e))


def time_averaged_conversion(e: SectorEnsemble) -> float:
    """
    Converted fraction of pump 1 averaged over infinite time.

    Each sector contributes sum_k |<k|0>|^2 <k|n|k>, the level around which
    its oscillations dephase; the ensemble plateau sits at the weighted mean.
    """
    converted = CompensatedSum()
    pumped = CompensatedSum()
    for s, w in e.sectors:
        _, v = sector_spectrum(s)
        overlap = v[s.index(0)] ** 2
        level = np.einsum("k,nk,n->", overlap, v * v, s.transfers.astype(float))
        converted.add(w * level)
        pumped.add(w * s.n1)
    return float(converted.total / pumped.total)


def plateau_fraction(series: EnsembleSeries, tau_lo: float, tau_hi: float) -> float:
    """Converted fraction of the pump averaged over tau in [tau_lo, tau_hi]."""
    tau = series.tau
    window = (tau >= tau_lo) & (tau <= tau_hi)
    if not window.any():
        raise InvalidParameterError(f"no grid points in [{tau_lo}, {tau_hi}]")
    return float(1.0 - series.pump_mean[window].mean() / series.pump_mean[0])


# ============================================================================
# CONVERSION DISTANCE
# ============================================================================
def first_minimum(tau, values) -> tuple:
    """
    First local minimum of a sampled curve, refined by a parabola through the
    discrete minimum and its two neighbours.

    Returns:
        (tau_min, value)

    Raises:
        NoMinimumError: if no interior point is lower than its left neighbour
            and not higher than its right one.
    """
    tau = np.asarray(tau, dtype=float)
    values = np.asarray(values, dtype=float)
    for i in range(1, values.size - 1):
        if values[i] < values[i - 1] and values[i] <= values[i + 1]:
            break
    else:
        raise NoMinimumError(f"no local minimum bracketed on tau in [{tau[0]:g}, {tau[-1]:g}]")

    x = tau[i - 1:i + 2] - tau[i]
    a, b, c = np.polyfit(x, values[i - 1:i + 2], 2)
    if a <= 0:
        return float(tau[i]), float(values[i])
    offset = -b / (2.0 * a)
    return float(tau[i] + offset), float(c - b * b / (4.0 * a))


@dataclass(frozen=True)
class ScanRow:
    mean: float
    tau_min: float
    value: float
    mode: str


def conversion_scan(
    means,
    mode: str = RESONANT,
    reference_mean: float = None,
    eps_tail: float = None,
    steps: int = 400,
    workers: int = None,
) -> list:
    """
    Distance to the first pump minimum against the coherent input mean.

    ``constant`` fixes every sector denominator at round(reference_mean),
    mimicking off-resonant four-wave mixing; the default reference is the
    first mean. The tau window starts at 1.6 mean-field conversion distances
    and doubles until a minimum is bracketed.

    Returns:
        List of ScanRow, one per mean
    """
    means = [float(m) for m in means]
    if not means or any(m <= 0 for m in means):
        raise InvalidParameterError(f"means must be positive, got {means}")
    if any(b <= a for a, b in zip(means, means[1:])):
        raise InvalidParameterError(f"means must be ascending, got {means}")
    if mode not in DENOMINATOR_MODES:
        raise InvalidParameterError(f"denominator mode must be one of {DENOMINATOR_MODES}, got {mode!r}")

    fixed = None
    if mode == CONSTANT:
        fixed = float(round(means[0] if reference_mean is None else reference_mean))
        if fixed < 1:
            raise InvalidParameterError(f"constant denominator must be at least 1, got {fixed}")

    table = []
    for mean in means:
        e = build_ensemble(mean, mean, eps_tail, denominator=fixed)
        tau_max = 1.6 * conversion_distance(mean)
        if fixed is not None:
            tau_max *= fixed / mean
        for attempt in range(4):
            series = ensemble_observables(e, np.linspace(0.0, tau_max, steps + 1), workers)
            try:
                tau_min, value = first_minimum(series.tau, series.pump_mean)
                break
            except NoMinimumError:
                if attempt == 3:
                    raise
                tau_max *= 2.0
        logger.info(f"scan {mode} mean={mean:g}: tau_min={tau_min:.6g}, pump={value:.6g}")
        table.append(ScanRow(mean, tau_min, value, mode))
    return table
