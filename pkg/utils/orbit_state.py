from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

APERIODIC = "aperiodic"

Period = Union[int, str]


@dataclass
class OrbitSummary:
    """ Post-transient part of an orbit

    Attributes:
        samples (np.ndarray): Shape (n, dim); dim is 1 for the reduced map, 2 for (Q, lambda) maps.
        period (int | str): Detected cycle length or APERIODIC.
        lyapunov (float | None): Largest exponent per iteration, when requested.
        bounds (np.ndarray): Shape (dim, 2), observed min/max per coordinate.
        underflow_events (int): Number of times Q turned to exact zero.
        lyapunov_reliable (bool): False when computer-zero events make the exponent meaningless.
    """
    samples: np.ndarray
    period: Period
    lyapunov: Optional[float] = None
    bounds: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    underflow_events: int = 0
    lyapunov_reliable: bool = True

    @property
    def is_periodic(self) -> bool:
        return self.period != APERIODIC

    @property
    def last(self) -> Tuple[float, ...]:
        return tuple(float(x) for x in self.samples[-1])

    def __str__(self):
        ans = "Period: " + str(self.period) + "\n" + \
              "Samples: " + str(len(self.samples)) + "\n" + \
              "Bounds: " + str(self.bounds.tolist()) + "\n" + \
              "Lyapunov: " + str(self.lyapunov) + \
              ("" if self.lyapunov_reliable else " (unreliable: computer zero)") + "\n" + \
              "Underflow events: " + str(self.underflow_events) + "\n"
        return ans


@dataclass
class ScanCell:
    """ One parameter value of a scan """
    param: float
    samples: np.ndarray
    period: Period
    lyapunov: Optional[float]
    error: Optional[str] = None      # set when the orbit diverged in this cell


@dataclass
class ScanResult:
    """ Parameter sweep over one map """
    parameter_grid: np.ndarray
    cells: List[ScanCell]
    flip_points: List[float] = field(default_factory=list)
    chaos_onset: Optional[float] = None

    @property
    def attractor_samples(self) -> List[np.ndarray]:
        return [cell.samples for cell in self.cells]

    @property
    def periods(self) -> List[Period]:
        return [cell.period for cell in self.cells]
