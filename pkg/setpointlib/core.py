from typing import Any, List, Mapping, Optional, Tuple, Union

import numpy as np

from config.defaults import ODE_SUBSTEPS, SAMPLES, TRANSIENT
from src import bifurcation, closedloop, maps
from src.loop_exception import UsageError
from utils.controller_state import ControllerConfig
from utils.loop_state import ConvergenceTable, LoopConfig, Trajectory
from utils.map_state import BoundsRow, Map1Params, Map2Params, StabilityReport
from utils.orbit_state import OrbitSummary, ScanResult
from utils.plant_state import PlantParams, PlantState

MAP_KINDS = ("reduced", "map1", "map2")
SCAN_SAMPLES = 1000
CONVERGENCE_HORIZON = 100.0


def controller_name(value: Any, modified: bool = False) -> str:
    """ Accepts 1, "2", "algorithm-1", "modified-2", ... """
    text = str(value).strip().lower()
    for prefix in ("algorithm-", "modified-"):
        if text.startswith(prefix):
            modified = modified or prefix == "modified-"
            text = text[len(prefix):]
    if text not in ("1", "2"):
        raise UsageError("algorithm", f"expected 1, 2, algorithm-N or modified-N, got {value!r}")
    return ("modified-" if modified else "algorithm-") + text


class SetpointLab:
    """
    Facade over the plant, controller, map, bifurcation and closed-loop modules.

    Parameters are keyed by the long CLI flag names without dashes, e.g. "lambda-tilde", "q-setpoint".
    """

    def __init__(self, parameters: Mapping[str, Any]):
        self._parameters = dict(parameters)

    def _get(self, key: str, default: Any = None) -> Any:
        return self._parameters.get(key, default)

    def _require(self, key: str) -> Any:
        if key not in self._parameters:
            raise UsageError(key, "required")
        return self._parameters[key]

    def _map_kind(self) -> str:
        kind = str(self._require("map")).lower()
        if kind not in MAP_KINDS:
            raise UsageError("map", f"expected one of {', '.join(MAP_KINDS)}, got {kind!r}")
        return kind

    def _start(self) -> Optional[Tuple[float, ...]]:
        if "start-q" not in self._parameters:
            return None
        if self._get("map") == "reduced":
            return (float(self._parameters["start-q"]),)
        return float(self._parameters["start-q"]), float(self._get("start-lambda", 0.0))

    def map1_params(self, dt: Optional[float] = None) -> Map1Params:
        return Map1Params(
            lambda_tilde=self._require("lambda-tilde"),
            Q_setpoint=self._require("q-setpoint"),
            delta_t=self._get("delta-t", 0.0),
            dt=self._require("dt") if dt is None else dt,
        )

    def map2_params(self, dt: Optional[float] = None) -> Map2Params:
        return Map2Params(
            lambda_tilde=self._require("lambda-tilde"),
            Q_setpoint=self._require("q-setpoint"),
            delta_t=self._get("delta-t", 0.0),
            delta_N=self._require("delta-n"),
            delta_N_tilde=self._require("delta-n-tilde"),
            dt=self._require("dt") if dt is None else dt,
        )

    def map_model(self, parameter: Optional[float] = None) -> bifurcation.MapModel:
        """ Map model at `parameter` (a for the reduced map, dt otherwise) or at the configured value """
        kind = self._map_kind()
        if kind == "reduced":
            return bifurcation.ReducedMap(self._require("a") if parameter is None else parameter)
        if kind == "map1":
            return bifurcation.ClosedLoopMap1(self.map1_params(parameter))
        return bifurcation.ClosedLoopMap2(self.map2_params(parameter))

    def loop_config(self, controller: str, dt: float, steps: int) -> LoopConfig:
        plant = PlantParams(delta_N=self._require("delta-n"), delta_t=self._get("delta-t", 0.0))
        modified = controller.startswith("modified")
        n0 = self._get("n0", 0.0)
        controller_config = ControllerConfig.constant(
            self._require("lambda-tilde"), self._require("q-setpoint"), self._require("delta-n-tilde"), dt,
            n_scale=max(1.0, abs(n0)),
        )
        return LoopConfig(
            controller=controller,
            controller_config=controller_config,
            plant=plant,
            initial=PlantState.initial(plant, self._get("q0", controller_config.Q_setpoint), n0,
                                       self._get("t0", 0.0)),
            steps=steps,
            plant_mode=self._get("plant", "ramped" if modified else "exact"),
            measurement_mode=self._get("measurement", "finite-difference" if modified else "instantaneous"),
            ode_substeps=self._get("substeps", ODE_SUBSTEPS),
            mu=self._get("mu", 0.0),
        )

    def simulate(self) -> Trajectory:
        controller = controller_name(self._require("algorithm"))
        return closedloop.run_loop(self.loop_config(controller, self._require("dt"), self._require("steps")))

    def stability(self) -> StabilityReport:
        kind = self._map_kind()
        if kind == "map1":
            return maps.stability_map1(self.map1_params())
        if kind == "map2":
            return maps.stability_map2(self.map2_params())
        raise UsageError("map", "stability needs map1 or map2")

    def zero_point_stability(self) -> StabilityReport:
        return maps.stability_map2_zero(self.map2_params())

    def scan(self) -> ScanResult:
        lo, hi = self._require("from"), self._require("to")
        return bifurcation.scan_cascade(
            self.map_model(lo), lo, hi, self._require("cells"),
            transient=self._get("transient", TRANSIENT),
            samples=self._get("samples", SCAN_SAMPLES),
            warm_start=not self._get("cold-start", False),
            with_lyapunov=self._get("lyapunov", True),
            refine=self._get("refine", False),
            start=self._start(),
        )

    def orbit(self) -> OrbitSummary:
        return bifurcation.iterate_orbit(
            self.map_model(),
            self._start(),
            transient=self._get("transient", TRANSIENT),
            samples=self._get("samples", SAMPLES),
            with_lyapunov=self._get("lyapunov", False),
        )

    def bounds(self) -> List[BoundsRow]:
        """
        Attractor bounds: the full rectangle for a map-1 parameter set, q_min(a)/q_max(a) for a given a,
        or the q_min(a)/q_max(a) table over from..to in `cells` points.
        """
        if "dt" in self._parameters and "lambda-tilde" in self._parameters:
            params = self.map1_params()
            (Q_min, Q_max), (lam_min, lam_max) = maps.attractor_rectangle(params)
            q_min, q_max = maps.reduced_bounds(params.cascade_parameter)
            return [BoundsRow(params.cascade_parameter, q_min, q_max, Q_min, Q_max, lam_min, lam_max)]
        if "a" in self._parameters:
            grid = [self._parameters["a"]]
        elif "from" in self._parameters:
            grid = np.linspace(self._require("from"), self._require("to"), self._get("cells", 2))
        else:
            raise UsageError("a", "bounds needs a, from/to/cells or a map-1 parameter set")
        rows = []
        for a in grid:
            if not a > 0:
                raise UsageError("a", f"cascade parameter must be positive, got {a!r}")
            q_min, q_max = maps.reduced_bounds(float(a))
            rows.append(BoundsRow(float(a), q_min, q_max))
        return rows

    def converge(self) -> ConvergenceTable:
        controller = controller_name(self._require("algorithm"), modified=True)
        dt_list = self._require("dt-list")
        template = self.loop_config(controller, dt_list[0], 1)
        return closedloop.convergence_study(template, dt_list, self._get("horizon", CONVERGENCE_HORIZON))

    def run(self, command: str) -> Union[Trajectory, StabilityReport, ScanResult, OrbitSummary,
                                         List[BoundsRow], ConvergenceTable]:
        handler = getattr(self, command, None)
        if command not in ("simulate", "stability", "scan", "orbit", "bounds", "converge") or handler is None:
            raise UsageError("command", f"unknown command {command!r}")
        return handler()
