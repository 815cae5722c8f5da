"""
Value objects shared by the solvers and the simulate command.

These are plain frozen dataclasses, not database models: the simulator keeps
nothing beyond the files it writes.
"""
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from core.exceptions import InvalidParameterError


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory parameters. Only kappa/delta ever reaches a solver."""

    kappa: float
    delta: float
    gamma1: float = 0.0
    gamma2: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be positive, got {self.kappa}")
        if self.delta == 0:
            raise InvalidParameterError("delta must be nonzero")
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise InvalidParameterError(
                f"decay rates must be nonnegative, got gamma1={self.gamma1}, gamma2={self.gamma2}"
            )


@dataclass(frozen=True)
class FieldState:
    """Complex Rabi-frequency amplitudes of the two pumps and the two generated fields."""

    omega1: complex
    omega2: complex
    e1: complex
    e2: complex

    def __post_init__(self):
        for name in ("omega1", "omega2", "e1", "e2"):
            value = complex(getattr(self, name))
            if not np.isfinite(value.real) or not np.isfinite(value.imag):
                raise InvalidParameterError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    def as_vector(self) -> np.ndarray:
        """Real vector (Re, Im) x (omega1, omega2, e1, e2), the layout the ODE solver steps."""
        z = np.array([self.omega1, self.omega2, self.e1, self.e2], dtype=complex)
        return np.concatenate([z.real, z.imag])

    @classmethod
    def from_vector(cls, v) -> "FieldState":
        v = np.asarray(v, dtype=float)
        z = v[:4] + 1j * v[4:]
        return cls(*(complex(x) for x in z))

    def intensities(self) -> tuple:
        return (
            abs(self.omega1) ** 2,
            abs(self.omega2) ** 2,
            abs(self.e1) ** 2,
            abs(self.e2) ** 2,
        )


@dataclass(frozen=True)
class TrajectoryRecord:
    """
    One trajectory: a coordinate axis plus ordered, labeled value columns.

    Columns keep insertion order, which is also the column order of the CSV
    the simulate command writes.
    """

    coordinate_label: str
    coordinate: np.ndarray
    columns: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)

    def __post_init__(self):
        coordinate = np.asarray(self.coordinate, dtype=float)
        if coordinate.ndim != 1 or coordinate.size == 0:
            raise InvalidParameterError("trajectory coordinate must be a nonempty 1-d array")
        if coordinate.size > 1 and not np.all(np.diff(coordinate) > 0):
            raise InvalidParameterError("trajectory coordinates must be strictly increasing")
        columns = OrderedDict()
        for label, values in self.columns.items():
            values = np.asarray(values)
            if values.shape != coordinate.shape:
                raise InvalidParameterError(
                    f"column {label!r} has {values.shape[0] if values.ndim else 0} "
                    f"points, expected {coordinate.size}"
                )
            columns[label] = values
        object.__setattr__(self, "coordinate", coordinate)
        object.__setattr__(self, "columns", columns)

    @property
    def labels(self) -> list:
        return [self.coordinate_label, *self.columns.keys()]

    def __len__(self):
        return self.coordinate.size

    def rows(self):
        """Yield (coordinate, value, value, ...) tuples in column order."""
        series = [self.coordinate, *self.columns.values()]
        for i in range(self.coordinate.size):
            yield tuple(s[i] for s in series)
