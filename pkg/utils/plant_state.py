from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from src.loop_exception import InvalidConfigError


@dataclass(frozen=True)
class PlantParams:
    """ Coefficients of the linear control-effect function f(dt, dN) = delta_t*dt + delta_N*dN """
    delta_N: float
    delta_t: float = 0.0

    def __post_init__(self):
        if self.delta_N == 0:
            raise InvalidConfigError("delta_N must be non-zero: control has to affect the rate")

    def rate(self, N: float, t: float) -> float:
        """ Growth rate of the idealized plant, recomputed from (N, t) """
        return self.delta_N * N + self.delta_t * t


@dataclass(frozen=True)
class PlantState:
    """ Stores state of the idealized plant Q' = (delta_N N + delta_t t) Q """
    t: float
    Q: float
    N: float
    lam: float
    computer_zero: bool = False      # Q underflowed to exact 0.0 at some point

    @classmethod
    def initial(cls, params: PlantParams, Q: float, N: float = 0.0, t: float = 0.0) -> "PlantState":
        if not Q > 0:
            raise InvalidConfigError(f"Q must be positive, got {Q!r}")
        return cls(t=t, Q=Q, N=N, lam=params.rate(N, t))

    def with_(self, **changes) -> "PlantState":
        return replace(self, **changes)

    def __str__(self):
        ans = "t: " + str(self.t) + "\n" + \
              "Q: " + str(self.Q) + "\n" + \
              "N: " + str(self.N) + "\n" + \
              "lambda: " + str(self.lam) + "\n" + \
              "Computer zero: " + str(self.computer_zero) + "\n"
        return ans


@dataclass(frozen=True)
class OdeSystem:
    """ Generic system dx/dt = rhs(t, x) with designated Q and N components """
    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray] = field(repr=False)
    q_index: int = 0
    n_index: int = 1

    def __post_init__(self):
        if self.dimension < 2:
            raise InvalidConfigError("ODE system needs at least the Q and N components")
        if self.q_index == self.n_index:
            raise InvalidConfigError("q_index and n_index must differ")
        for index in (self.q_index, self.n_index):
            if not 0 <= index < self.dimension:
                raise InvalidConfigError(f"component index {index} out of range")
