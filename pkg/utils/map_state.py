import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from src.loop_exception import InvalidConfigError


@dataclass(frozen=True)
class MapPoint:
    """ A point (Q, lambda) of a closed-loop map """
    Q: float
    lam: float

    def as_tuple(self) -> Tuple[float, float]:
        return self.Q, self.lam


@dataclass(frozen=True)
class Map1Params:
    """ Parameters of the Algorithm-1 map, one iteration spans two control steps """
    lambda_tilde: float
    Q_setpoint: float
    delta_t: float
    dt: float

    def __post_init__(self):
        if not self.lambda_tilde > 0:
            raise InvalidConfigError("lambda_tilde must be positive")
        if not self.Q_setpoint > 0:
            raise InvalidConfigError("Q_setpoint must be positive")
        if not self.dt > 0:
            raise InvalidConfigError("dt must be positive")

    @property
    def cascade_parameter(self) -> float:
        """ a = 2 dt lambda_tilde, the single parameter of the reduced map """
        return 2.0 * self.dt * self.lambda_tilde

    def with_dt(self, dt: float) -> "Map1Params":
        return replace(self, dt=dt)


@dataclass(frozen=True)
class Map2Params:
    """ Parameters of the Algorithm-2 map, one iteration per control step """
    lambda_tilde: float
    Q_setpoint: float
    delta_t: float
    delta_N: float
    delta_N_tilde: float
    dt: float

    def __post_init__(self):
        if not self.lambda_tilde > 0:
            raise InvalidConfigError("lambda_tilde must be positive")
        if not self.Q_setpoint > 0:
            raise InvalidConfigError("Q_setpoint must be positive")
        if not self.dt > 0:
            raise InvalidConfigError("dt must be positive")
        if self.delta_N_tilde == 0 or not self.delta_N / self.delta_N_tilde > 0:
            raise InvalidConfigError("gain ratio delta_N / delta_N_tilde must be positive")

    @property
    def gain_ratio(self) -> float:
        """ a = delta_N / delta_N_tilde """
        return self.delta_N / self.delta_N_tilde

    @property
    def rate_ratio(self) -> float:
        """ b = lambda_tilde / Q_setpoint """
        return self.lambda_tilde / self.Q_setpoint

    def with_dt(self, dt: float) -> "Map2Params":
        return replace(self, dt=dt)


@dataclass(frozen=True)
class StabilityReport:
    """ Fixed point, Jacobian eigenvalues and the stability verdict

    Attributes:
        stable (bool): Both eigenvalues strictly inside the unit circle.
        critical_dt (float | None): Step at which stability is lost, None if it never is.
        dt_validity_interval (tuple): Steps for which the fixed point exists with Q > 0.
        small_step_stable (bool | None): Verdict for all small enough steps (Algorithm 2 only).
        notes (tuple): Remarks about literal-reading inconsistencies.
    """
    fixed_point: Optional[MapPoint]
    eigenvalues: Optional[Tuple[complex, complex]]
    stable: bool
    critical_dt: Optional[float] = None
    dt_validity_interval: Tuple[float, float] = (0.0, math.inf)
    small_step_stable: Optional[bool] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def spectral_radius(self) -> float:
        if self.eigenvalues is None:
            return math.nan
        return max(abs(ev) for ev in self.eigenvalues)

    def to_dict(self) -> dict:
        return {
            "fixed_point": None if self.fixed_point is None else {"Q": self.fixed_point.Q,
                                                                  "lambda": self.fixed_point.lam},
            "eigenvalues": None if self.eigenvalues is None else [
                {"re": ev.real, "im": ev.imag} for ev in self.eigenvalues
            ],
            "stable": self.stable,
            "critical_dt": self.critical_dt,
            "dt_validity_interval": list(self.dt_validity_interval),
            "small_step_stable": self.small_step_stable,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class BoundsRow:
    """ Bounding box of the map-1 attractors at one cascade parameter; Q and lambda columns need a full parameter set """
    a: float
    q_min: float
    q_max: float
    Q_min: Optional[float] = None
    Q_max: Optional[float] = None
    lambda_min: Optional[float] = None
    lambda_max: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "q_min": self.q_min,
            "q_max": self.q_max,
            "Q_min": self.Q_min,
            "Q_max": self.Q_max,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
        }
