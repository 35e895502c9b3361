import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from config.defaults import GAIN_GUARD
from src.loop_exception import InvalidConfigError


@dataclass(frozen=True)
class ControllerConfig:
    """ Parameters shared by Algorithm 1 and Algorithm 2

    Attributes:
        lambda_tilde (float): Target-rate parameter, > 0.
        Q_setpoint (float): Setpoint, > 0.
        delta_N_init (float): Initial (Algorithm 1) or fixed (Algorithm 2) gain guess.
        dt_schedule (tuple): Step durations; the last one repeats when the run is longer.
        ramped (bool): Control increments are spread uniformly over the step instead of applied at once.
        n_scale (float): Magnitude of N used by the gain-update guard.
    """
    lambda_tilde: float
    Q_setpoint: float
    delta_N_init: float
    dt_schedule: Tuple[float, ...] = (1.0,)
    ramped: bool = False
    n_scale: float = 1.0

    def __post_init__(self):
        if not self.lambda_tilde > 0:
            raise InvalidConfigError(f"lambda_tilde must be positive, got {self.lambda_tilde!r}")
        if not self.Q_setpoint > 0:
            raise InvalidConfigError(f"Q_setpoint must be positive, got {self.Q_setpoint!r}")
        if self.delta_N_init == 0:
            raise InvalidConfigError("delta_N_init must be non-zero")
        schedule = (self.dt_schedule,) if isinstance(self.dt_schedule, (int, float)) else tuple(self.dt_schedule)
        if not schedule or any(not (dt > 0 and math.isfinite(dt)) for dt in schedule):
            raise InvalidConfigError(f"dt_schedule must hold positive durations, got {self.dt_schedule!r}")
        object.__setattr__(self, "dt_schedule", tuple(float(dt) for dt in schedule))

    @classmethod
    def constant(cls, lambda_tilde: float, Q_setpoint: float, delta_N_init: float, dt: float,
                 **kwargs) -> "ControllerConfig":
        return cls(lambda_tilde, Q_setpoint, delta_N_init, (dt,), **kwargs)

    def step_duration(self, index: int) -> float:
        """ Duration of step `index` (0-based) """
        if index < len(self.dt_schedule):
            return self.dt_schedule[index]
        return self.dt_schedule[-1]

    def gain_guard(self) -> float:
        return GAIN_GUARD * (1.0 + abs(self.n_scale))

    def with_(self, **changes) -> "ControllerConfig":
        return replace(self, **changes)

    def check_gain_guess(self, true_delta_N: float) -> bool:
        """ Algorithm-1 requirement on the initial guess; only checkable when the true gain is known """
        return (self.delta_N_init * true_delta_N > 0) and abs(self.delta_N_init) >= abs(true_delta_N)


@dataclass(frozen=True)
class Measurement:
    """ What a controller sees at one instant """
    Q: float
    lam: float
    t: float


@dataclass(frozen=True)
class Alg1State:
    """ Running estimates of Algorithm 1 """
    parity: str = "odd"
    delta_t_est: float = 0.0
    delta_N_est: float = 1.0
    last_lambda: Optional[float] = None
    last_Q: Optional[float] = None
    last_dN: float = 0.0
    step_index: int = 0
    ramped: bool = False
    gain_updates: int = 0

    @classmethod
    def initial(cls, config: ControllerConfig) -> "Alg1State":
        return cls(delta_N_est=config.delta_N_init, ramped=config.ramped)

    @property
    def is_odd(self) -> bool:
        return self.parity == "odd"

    def with_(self, **changes) -> "Alg1State":
        return replace(self, **changes)


@dataclass(frozen=True)
class Alg2State:
    """ Algorithm 2 keeps only the last measurement; its gain never changes """
    last_lambda: Optional[float] = None
    last_Q: Optional[float] = None
    step_index: int = 0

    def with_(self, **changes) -> "Alg2State":
        return replace(self, **changes)

