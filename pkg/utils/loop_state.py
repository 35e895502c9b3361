from dataclasses import dataclass, field
from typing import List, Optional

from config.defaults import ODE_SUBSTEPS
from src.loop_exception import InvalidConfigError
from utils.controller_state import ControllerConfig
from utils.plant_state import PlantParams, PlantState

PLANT_MODES = ("exact", "ramped", "ode")
MEASUREMENT_MODES = ("instantaneous", "finite-difference")
CONTROLLERS = ("algorithm-1", "algorithm-2", "modified-1", "modified-2")


@dataclass(frozen=True)
class LoopConfig:
    """ Everything needed to run one controller against one plant """
    controller: str
    controller_config: ControllerConfig
    plant: PlantParams
    initial: PlantState
    steps: int
    plant_mode: str = "exact"
    measurement_mode: str = "instantaneous"
    ode_substeps: int = ODE_SUBSTEPS
    mu: float = 0.0                  # ode plant only

    def __post_init__(self):
        if self.controller not in CONTROLLERS:
            raise InvalidConfigError(f"unknown controller {self.controller!r}")
        if self.plant_mode not in PLANT_MODES:
            raise InvalidConfigError(f"unknown plant mode {self.plant_mode!r}")
        if self.measurement_mode not in MEASUREMENT_MODES:
            raise InvalidConfigError(f"unknown measurement mode {self.measurement_mode!r}")
        if self.steps < 0:
            raise InvalidConfigError("steps must be non-negative")
        if self.is_modified:
            if self.plant_mode == "exact" or self.measurement_mode != "finite-difference":
                raise InvalidConfigError(
                    "modified controllers need a ramped or ode plant and finite-difference measurement"
                )
        if self.plant_mode == "ode" and self.ode_substeps < 1:
            raise InvalidConfigError("ode_substeps must be positive")

    @property
    def is_modified(self) -> bool:
        return self.controller.startswith("modified")

    @property
    def algorithm(self) -> int:
        return 1 if self.controller.endswith("1") else 2

    @property
    def is_idealized(self) -> bool:
        return self.plant_mode == "exact" and self.measurement_mode == "instantaneous"


@dataclass(frozen=True)
class TrajectoryRecord:
    """ Plant and controller state at one measurement instant, before the control of that instant """
    step: int
    t: float
    Q: float
    lam: float
    N: float
    dN: float = 0.0
    delta_t_est: float = float("nan")
    delta_N_est: float = float("nan")
    phase: str = ""                  # odd / even / warmup / control / final
    event: str = ""


@dataclass
class Trajectory:
    records: List[TrajectoryRecord] = field(default_factory=list)
    events: List[str] = field(default_factory=list)
    truncated: bool = False

    def __len__(self):
        return len(self.records)

    @property
    def control_records(self) -> List[TrajectoryRecord]:
        """ Records at which a control increment was computed """
        return [r for r in self.records if r.phase in ("even", "control")]


@dataclass(frozen=True)
class ConvergenceRow:
    dt: float
    steady_Q: Optional[float]
    reference_Q: float
    steady_error: Optional[float]
    map_residual: Optional[float]
    settled_at: Optional[int]
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "steady_Q": self.steady_Q,
            "reference_Q": self.reference_Q,
            "steady_error": self.steady_error,
            "map_residual": self.map_residual,
            "settled_at": self.settled_at,
            "note": self.note,
        }


@dataclass
class ConvergenceTable:
    """ Steady-state error of real-mode loops against the idealized fixed point, one row per step """
    rows: List[ConvergenceRow] = field(default_factory=list)

    @property
    def errors(self) -> List[Optional[float]]:
        return [row.steady_error for row in self.rows]

    @property
    def strictly_decreasing(self) -> Optional[bool]:
        """ None for fewer than two rows: no monotonicity claim is made """
        if len(self.rows) < 2:
            return None
        errors = self.errors
        if any(e is None for e in errors):
            return False
        return all(later < earlier for earlier, later in zip(errors, errors[1:]))

    def to_dict(self) -> dict:
        return {"rows": [row.to_dict() for row in self.rows], "strictly_decreasing": self.strictly_decreasing}
