"""
Exact evolution inside one invariant sector of the effective Hamiltonian.

A sector is labeled by the initial occupations (n1, n2, n3, n4) of the
(omega1, omega2, e1, e2) modes. Its basis vectors are
|n1 - n, n2 - n, n3 + n, n4 + n> for the transfer number n, and the
Hamiltonian is a zero-diagonal real symmetric tridiagonal matrix in units of
g = kappa c / delta.
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.optimize import minimize_scalar

from core.exceptions import EigensolverError, InvalidParameterError, UndefinedStatisticsError
from core.models import TrajectoryRecord
from core.utils import shifted_variance

logger = logging.getLogger(__name__)

UNITARITY_TOL = 1e-10


# ============================================================================
# SECTOR TYPES
# ============================================================================
@dataclass(frozen=True)
class FockSector:
    n1: int
    n2: int
    n3: int
    n4: int
    # Overrides the resonant denominator n1 + n3 (ordinary four-wave mixing).
    denominator: float = None

    @property
    def n_min(self) -> int:
        return -min(self.n3, self.n4)

    @property
    def n_max(self) -> int:
        return min(self.n1, self.n2)

    @property
    def dimension(self) -> int:
        return self.n_max - self.n_min + 1

    @property
    def d(self) -> float:
        return self.n1 + self.n3 if self.denominator is None else self.denominator

    @property
    def transfers(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def key(self) -> tuple:
        return (self.n1, self.n2, self.n3, self.n4, self.d)

    @property
    def frozen(self) -> bool:
        return self.dimension == 1

    def index(self, n: int) -> int:
        if not self.n_min <= n <= self.n_max:
            raise InvalidParameterError(f"transfer {n} outside [{self.n_min}, {self.n_max}]")
        return n - self.n_min

    def basis_state(self, n: int) -> tuple:
        return (self.n1 - n, self.n2 - n, self.n3 + n, self.n4 + n)


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    offdiag: np.ndarray


@dataclass(frozen=True)
class SectorAmplitudes:
    c: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.c) ** 2)))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.c) ** 2


def build_sector(n1: int, n2: int, n3: int, n4: int, denominator: float = None) -> FockSector:
    """
    Sector for the initial occupations (n1, n2, n3, n4).

    Args:
        n1, n2: Pump photon numbers (omega1, omega2 modes)
        n3, n4: Generated photon numbers (e1, e2 modes)
        denominator: Optional fixed denominator replacing n1 + n3

    Returns:
        FockSector
    """
    occupations = (n1, n2, n3, n4)
    if any(int(n) != n or n < 0 for n in occupations):
        raise InvalidParameterError(f"photon numbers must be nonnegative integers, got {occupations}")
    if denominator is not None and not denominator > 0:
        raise InvalidParameterError(f"denominator must be positive, got {denominator}")
    sector = FockSector(*(int(n) for n in occupations), denominator=denominator)
    if sector.d == 0 and not sector.frozen:
        raise InvalidParameterError(f"sector {occupations} has d = 0 but can evolve")
    return sector


def hamiltonian(s: FockSector) -> TridiagonalHamiltonian:
    """Couplings between n and n - 1 for n = n_min + 1 .. n_max."""
    n = np.arange(s.n_min + 1, s.n_max + 1, dtype=float)
    if n.size == 0:
        return TridiagonalHamiltonian(np.zeros(0))
    offdiag = np.sqrt((s.n1 - n + 1) * (s.n2 - n + 1) * (s.n3 + n) * (s.n4 + n)) / s.d
    return TridiagonalHamiltonian(offdiag)


def basis_amplitudes(s: FockSector, n: int = 0) -> SectorAmplitudes:
    c = np.zeros(s.dimension, dtype=complex)
    c[s.index(n)] = 1.0
    return SectorAmplitudes(c)


# ============================================================================
# SPECTRUM AND PROPAGATION
# ============================================================================
# Each entry holds a full eigenvector matrix (8 MB at dimension 1000). Ensemble
# sweeps visit every sector once, so only repeated single-sector work reuses it.
SPECTRUM_CACHE_SIZE = 16


@lru_cache(maxsize=SPECTRUM_CACHE_SIZE)
def _spectrum(n1, n2, n3, n4, d):
    s = FockSector(n1, n2, n3, n4, denominator=d)
    offdiag = hamiltonian(s).offdiag
    if offdiag.size == 0:
        w, v = np.zeros(1), np.ones((1, 1))
    else:
        try:
            w, v = eigh_tridiagonal(np.zeros(offdiag.size + 1), offdiag)
        except (LinAlgError, ValueError) as exc:
            raise EigensolverError(s.key, str(exc)) from exc
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def sector_spectrum(s: FockSector) -> tuple:
    """Cached (eigenvalues, eigenvectors) of the sector Hamiltonian. Read-only arrays."""
    return _spectrum(*s.key)


def _amplitudes(s: FockSector, c0: np.ndarray, tau: np.ndarray) -> np.ndarray:
    # einsum without path optimization never dispatches to threaded BLAS, so
    # results do not depend on the thread count of the worker process.
    w, v = sector_spectrum(s)
    a = np.einsum("nk,n->k", v, c0)
    if np.all(np.imag(c0) == 0):
        a = a.real
        phase = np.outer(tau, w)
        amplitudes = np.einsum("tk,nk->tn", np.cos(phase) * a, v) - 1j * np.einsum(
            "tk,nk->tn", np.sin(phase) * a, v
        )
    else:
        amplitudes = np.einsum("tk,nk->tn", np.exp(-1j * np.outer(tau, w)) * a, v)
    amplitudes[tau == 0] = c0
    return amplitudes


def evolve_sector(s: FockSector, c0: SectorAmplitudes, tau_grid) -> list:
    """
    c(tau) = exp(-i H tau) c0 through the eigendecomposition of H.

    Args:
        s: Sector
        c0: Normalized initial amplitudes
        tau_grid: Times in units of 1/g

    Returns:
        List of SectorAmplitudes, one per tau
    """
    c0 = np.asarray(c0.c, dtype=complex)
    if c0.shape != (s.dimension,):
        raise InvalidParameterError(f"amplitudes have shape {c0.shape}, sector dimension is {s.dimension}")
    if abs(np.linalg.norm(c0) - 1.0) > UNITARITY_TOL:
        raise InvalidParameterError(f"initial amplitudes not normalized: norm {np.linalg.norm(c0)}")
    tau = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    return [SectorAmplitudes(row) for row in _amplitudes(s, c0, tau)]


def _probabilities(s: FockSector, c0: SectorAmplitudes, tau_grid) -> np.ndarray:
    tau = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    return np.abs(_amplitudes(s, np.asarray(c0.c, dtype=complex), tau)) ** 2


def _shifted_moments(s: FockSector, p: np.ndarray) -> tuple:
    shifted = (s.transfers - s.n_min).astype(float)
    return np.einsum("tn,n->t", p, shifted), np.einsum("tn,n->t", p, shifted * shifted)


def sector_moments(s: FockSector, c0: SectorAmplitudes, tau_grid) -> tuple:
    """
    Mean and variance of the transfer number over a tau grid.

    Moments are taken about n_min so a frozen sector has exactly zero variance.

    Returns:
        (mean_n, var_n) arrays
    """
    first, second = _shifted_moments(s, _probabilities(s, c0, tau_grid))
    return s.n_min + first, np.maximum(second - first * first, 0.0)


# ============================================================================
# OBSERVABLES
# ============================================================================
def mean_transfer(s: FockSector, c: SectorAmplitudes) -> float:
    return float(np.sum(c.probabilities * s.transfers))


def pump_expectation(s: FockSector, c: SectorAmplitudes) -> float:
    return s.n1 - mean_transfer(s, c)


def generated_expectation(s: FockSector, c: SectorAmplitudes) -> float:
    return s.n3 + mean_transfer(s, c)


def pump_variance(s: FockSector, c: SectorAmplitudes) -> float:
    return shifted_variance(c.probabilities, s.n1 - s.transfers)


def generated_variance(s: FockSector, c: SectorAmplitudes) -> float:
    return shifted_variance(c.probabilities, s.n3 + s.transfers)


def intensity_difference_variance(s: FockSector, c: SectorAmplitudes) -> float:
    """Var(n_e1 - n_e2). The difference is n3 - n4 on every basis vector."""
    difference = (s.n3 + s.transfers) - (s.n4 + s.transfers)
    return shifted_variance(c.probabilities, difference)


def mandel_q(mean: float, var: float) -> float:
    """
    Mandel Q = var/mean - 1.

    Raises:
        UndefinedStatisticsError: for mean <= 0.
    """
    if not mean > 0:
        raise UndefinedStatisticsError(f"Mandel Q undefined for mean photon number {mean}")
    return var / mean - 1.0


def mandel_q_series(mean, var) -> np.ndarray:
    """Elementwise Mandel Q with NaN where the mean vanishes."""
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    q = np.full(mean.shape, np.nan)
    ok = mean > 0
    q[ok] = var[ok] / mean[ok] - 1.0
    return q


def fock_series(s: FockSector, c0: SectorAmplitudes, tau_grid) -> TrajectoryRecord:
    """Pump and generated photon statistics of one sector over tau_grid."""
    tau = np.asarray(tau_grid, dtype=float)
    probabilities = _probabilities(s, c0, tau)
    first, second = _shifted_moments(s, probabilities)
    mean_n = s.n_min + first
    var_n = np.maximum(second - first * first, 0.0)
    difference = np.full(s.dimension, float(s.n3 - s.n4))
    var_diff = np.array([shifted_variance(p, difference) for p in probabilities])

    pump_mean = s.n1 - mean_n
    gen_mean = s.n3 + mean_n
    columns = OrderedDict(
        pump_mean=pump_mean,
        gen_mean=gen_mean,
        pump_var=var_n,
        gen_var=var_n,
        q_pump=mandel_q_series(pump_mean, var_n),
        q_gen=mandel_q_series(gen_mean, var_n),
        var_diff=var_diff,
    )
    return TrajectoryRecord("tau", tau, columns)


# ============================================================================
# SPECTRAL ANALYSIS
# ============================================================================
def transition_frequencies(s: FockSector, c0: SectorAmplitudes, tol: float = 1e-10) -> np.ndarray:
    """
    Distinct angular frequencies present in <n>(tau) for the start vector c0.

    <n>(tau) = sum_kl conj(a_k) a_l N_kl exp(i (w_k - w_l) tau); a frequency
    counts when its summed weight exceeds tol.
    """
    w, v = sector_spectrum(s)
    a = v.T @ np.asarray(c0.c, dtype=complex)
    number = v.T @ (s.transfers[:, None] * v)
    weights = {}
    for k in range(w.size):
        for l in range(k + 1, w.size):
            omega = round(abs(w[k] - w[l]), 9)
            weights[omega] = weights.get(omega, 0.0) + abs(np.conj(a[k]) * a[l] * number[k, l])
    return np.array(sorted(f for f, weight in weights.items() if weight > tol and f > 0))


def deepest_conversion(s: FockSector, tau_max: float, steps: int = 200000, chunk: int = 20000) -> tuple:
    """
    Smallest pump expectation on [0, tau_max] for a vacuum-seeded start.

    Scans a uniform grid in chunks, then polishes the best grid point with a
    bounded scalar minimization.

    Returns:
        (tau, pump_expectation)
    """
    c0 = basis_amplitudes(s, 0)
    grid = np.linspace(0.0, tau_max, steps + 1)
    best_value, best_index = np.inf, 0
    for start in range(0, grid.size, chunk):
        mean_n, _ = sector_moments(s, c0, grid[start:start + chunk])
        i = int(np.argmin(s.n1 - mean_n))
        if s.n1 - mean_n[i] < best_value:
            best_value, best_index = s.n1 - mean_n[i], start + i

    def pump(tau):
        return float(s.n1 - sector_moments(s, c0, [tau])[0][0])

    lo = grid[max(best_index - 1, 0)]
    hi = grid[min(best_index + 1, grid.size - 1)]
    if hi > lo:
        polished = minimize_scalar(pump, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if polished.fun < best_value:
            return float(polished.x), float(polished.fun)
    return float(grid[best_index]), float(best_value)


# ============================================================================
# PHASE GATE
# ============================================================================
PHASE_GATE_INPUTS = ((0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0))


def phase_gate_truth_table(tau: float = np.pi) -> list:
    """
    Overlap of each two-pump input with itself after tau.

    At tau = pi (twice the single-photon conversion length) only |1,1,0,0>
    picks up a sign.

    Returns:
        List of (label, overlap) with complex overlaps
    """
    table = []
    for occupations in PHASE_GATE_INPUTS:
        sector = build_sector(*occupations)
        c0 = basis_amplitudes(sector, 0)
        c = evolve_sector(sector, c0, [tau])[0]
        overlap = complex(np.vdot(c0.c, c.c))
        label = "|" + ",".join(str(n) for n in occupations) + ">"
        table.append((label, overlap))
        logger.debug(f"phase gate {label}: overlap {overlap:.12f}")
    return table
