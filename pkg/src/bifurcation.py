"""
Orbit iteration, period detection, flip refinement, cascade scans and Lyapunov exponents
for the reduced map and the two closed-loop maps.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import optimize as spopt

from config.defaults import (
    CHAOS_SUSTAIN,
    CHAOS_THRESHOLD,
    CYCLE_MAX_EVAL,
    CYCLE_TOL,
    CYCLE_XTOL,
    FLIP_TOL,
    LYAPUNOV_CLAMP,
    MAX_PERIOD,
    PERIOD_REL_TOL,
    SAMPLES,
    TRANSIENT,
    WARM_START_NUDGE,
)
from src import maps
from src.loop_exception import NoFlipInBracketError, OrbitDivergedError, QuantityOverflowError
from utils.map_state import Map1Params, Map2Params, MapPoint
from utils.orbit_state import APERIODIC, OrbitSummary, Period, ScanCell, ScanResult

logger = logging.getLogger(__name__)

Point = Tuple[float, ...]


class ReducedMap:
    """ q -> q exp(a (1 - q)), scanned over the cascade parameter a """
    name = "reduced"
    dimension = 1

    def __init__(self, a: float):
        if not a > 0:
            raise ValueError(f"cascade parameter must be positive, got {a!r}")
        self.a = a

    @property
    def parameter(self) -> float:
        return self.a

    def with_parameter(self, value: float) -> "ReducedMap":
        return ReducedMap(value)

    def step(self, x: Point) -> Point:
        return (maps.reduced_map_step(x[0], self.a),)

    def jacobian(self, x: Point) -> np.ndarray:
        return np.array([[maps.reduced_map_derivative(x[0], self.a)]])

    def default_start(self) -> Point:
        return (0.5,)


class ClosedLoopMap1:
    """ Algorithm-1 map on (Q, lambda), scanned over dt """
    name = "map1"
    dimension = 2

    def __init__(self, params: Map1Params):
        self.params = params

    @property
    def parameter(self) -> float:
        return self.params.dt

    def with_parameter(self, value: float) -> "ClosedLoopMap1":
        return ClosedLoopMap1(self.params.with_dt(value))

    def step(self, x: Point) -> Point:
        return maps.map1_step(MapPoint(*x), self.params).as_tuple()

    def jacobian(self, x: Point) -> np.ndarray:
        return maps.map1_jacobian(MapPoint(*x), self.params)

    def default_start(self) -> Point:
        return 0.5 * self.params.Q_setpoint, 0.0


class ClosedLoopMap2:
    """ Algorithm-2 map on (Q, lambda), scanned over dt """
    name = "map2"
    dimension = 2

    def __init__(self, params: Map2Params):
        self.params = params

    @property
    def parameter(self) -> float:
        return self.params.dt

    def with_parameter(self, value: float) -> "ClosedLoopMap2":
        return ClosedLoopMap2(self.params.with_dt(value))

    def step(self, x: Point) -> Point:
        return maps.map2_step(MapPoint(*x), self.params).as_tuple()

    def jacobian(self, x: Point) -> np.ndarray:
        return maps.map2_jacobian(MapPoint(*x), self.params)

    def default_start(self) -> Point:
        """ Slightly off the fixed point; the basin of the cycles is not known in advance """
        try:
            fp = maps.fixed_point_map2(self.params)
            return 1.01 * fp.Q, 0.99 * fp.lam
        except ArithmeticError:
            return self.params.Q_setpoint, 0.0


MapModel = Union[ReducedMap, ClosedLoopMap1, ClosedLoopMap2]


@dataclass(frozen=True)
class LyapunovEstimate:
    """ Largest Lyapunov exponent per iteration

    Attributes:
        value (float): Mean of the clamped log growth terms.
        terms (int): Number of terms averaged.
        skipped (int): Terms dropped because the derivative was exactly zero.
        underflow_events (int): Computer-zero events seen along the orbit.
    """
    value: float
    terms: int
    skipped: int = 0
    underflow_events: int = 0

    @property
    def reliable(self) -> bool:
        return self.underflow_events == 0

    @property
    def verdict(self) -> str:
        return "ok" if self.reliable else "unreliable: computer zero"

    def __float__(self):
        return self.value


def _clamped_log(value: float) -> float:
    return min(max(math.log(value), -LYAPUNOV_CLAMP), LYAPUNOV_CLAMP)


def _advance(model: MapModel, x: Point, iteration: int) -> Point:
    try:
        nxt = model.step(x)
    except QuantityOverflowError:
        raise OrbitDivergedError(x, iteration)
    if not all(math.isfinite(c) for c in nxt):
        raise OrbitDivergedError(x, iteration)
    return nxt


class _TangentGrowth:
    """ Accumulates log growth of a renormalized tangent vector along an orbit """

    def __init__(self, dimension: int):
        self.v = np.ones(dimension) / math.sqrt(dimension)
        self.total = 0.0
        self.terms = 0
        self.skipped = 0

    def push(self, jacobian: np.ndarray):
        w = jacobian @ self.v
        norm = float(np.linalg.norm(w))
        if norm == 0.0 or not math.isfinite(norm):
            self.skipped += 1
            self.v = np.ones_like(self.v) / math.sqrt(len(self.v))
            return
        self.total += _clamped_log(norm)
        self.terms += 1
        self.v = w / norm

    def estimate(self, underflow_events: int) -> LyapunovEstimate:
        value = self.total / self.terms if self.terms else -LYAPUNOV_CLAMP
        return LyapunovEstimate(value, self.terms, self.skipped, underflow_events)


def detect_period(samples: Union[np.ndarray, Sequence[float]], rel_tol: float = PERIOD_REL_TOL,
                  max_period: int = MAX_PERIOD) -> Period:
    """
    Smallest p <= max_period with |x[i+p] - x[i]| <= rel_tol * scale over the whole window,
    the scale taken per coordinate as max |x|.

    Returns:
        int | str: Period or APERIODIC.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    n = len(data)
    if n < 2:
        return APERIODIC
    max_period = min(max_period, n // 2)
    if not np.all(np.isfinite(data)):
        return APERIODIC
    scale = np.maximum(np.max(np.abs(data), axis=0), 1e-300)
    for p in range(1, max_period + 1):
        if np.all(np.abs(data[p:] - data[:-p]) <= rel_tol * scale):
            return p
    return APERIODIC


def iterate_orbit(model: MapModel, start: Optional[Point] = None, transient: int = TRANSIENT,
                  samples: int = SAMPLES, with_lyapunov: bool = False, rel_tol: float = PERIOD_REL_TOL,
                  max_period: int = MAX_PERIOD) -> OrbitSummary:
    """
    Iterates a map, discarding `transient` iterates and recording `samples`.

    Computer-zero events (Q turning to exact 0) are counted, never fatal.

    Raises:
        OrbitDivergedError: The orbit left the float range; carries the last finite iterate.
    """
    if transient < 0 or samples < 0:
        raise ValueError("counts must be non-negative")
    x = tuple(float(c) for c in (start if start is not None else model.default_start()))
    recorded = np.empty((samples, model.dimension))
    tangent = _TangentGrowth(model.dimension) if with_lyapunov else None
    underflows = 0
    for i in range(transient + samples):
        if i >= transient:
            recorded[i - transient] = x
            if tangent is not None:
                tangent.push(model.jacobian(x))
        nxt = _advance(model, x, i)
        if x[0] != 0.0 and nxt[0] == 0.0:
            underflows += 1
        x = nxt
    tail = recorded[-min(samples, 4 * max_period):] if samples else recorded
    period = detect_period(tail, rel_tol, max_period)
    bounds = np.column_stack([recorded.min(axis=0), recorded.max(axis=0)]) if samples else \
        np.empty((0, 2))
    summary = OrbitSummary(samples=recorded, period=period, bounds=bounds, underflow_events=underflows)
    if tangent is not None:
        estimate = tangent.estimate(underflows)
        summary.lyapunov = estimate.value
        summary.lyapunov_reliable = estimate.reliable
    if underflows:
        logger.warning("%s at %.10g: %d computer-zero events", model.name, model.parameter, underflows)
    logger.debug("%s at %.10g: period %s", model.name, model.parameter, period)
    return summary


def lyapunov_reduced(a: float, start: float = 0.5, transient: int = TRANSIENT,
                     samples: int = 100_000) -> LyapunovEstimate:
    """ Mean of ln |f'(q_i)| over post-transient iterates of the reduced map """
    if transient < 1 or samples < 1:
        raise ValueError("counts must be at least 1")
    q = start
    for _ in range(transient):
        q = maps.reduced_map_step(q, a)
    total, terms, skipped = 0.0, 0, 0
    for _ in range(samples):
        slope = abs(maps.reduced_map_derivative(q, a))
        if slope == 0.0:
            skipped += 1
        else:
            total += _clamped_log(slope)
            terms += 1
        q = maps.reduced_map_step(q, a)
    value = total / terms if terms else -LYAPUNOV_CLAMP
    return LyapunovEstimate(value, terms, skipped)


def lyapunov_2d(model: MapModel, start: Optional[Point] = None, transient: int = TRANSIENT,
                samples: int = SAMPLES) -> LyapunovEstimate:
    """
    Largest exponent from the analytic Jacobian applied to a tangent vector renormalized every step.
    Flagged unreliable when Q turned to computer zero anywhere along the orbit.
    """
    if transient < 1 or samples < 1:
        raise ValueError("counts must be at least 1")
    x = tuple(float(c) for c in (start if start is not None else model.default_start()))
    tangent = _TangentGrowth(model.dimension)
    underflows = 0
    for i in range(transient + samples):
        if i >= transient:
            tangent.push(model.jacobian(x))
        nxt = _advance(model, x, i)
        if x[0] != 0.0 and nxt[0] == 0.0:
            underflows += 1
        x = nxt
    estimate = tangent.estimate(underflows)
    if not estimate.reliable:
        logger.warning("Lyapunov exponent of %s at %.10g unreliable: computer zero",
                       model.name, model.parameter)
    return estimate


def _compose(model: MapModel, x: Point, p: int) -> Tuple[Point, np.ndarray]:
    """ F^p(x) and the product of Jacobians along the way """
    product = np.eye(model.dimension)
    for i in range(p):
        product = model.jacobian(x) @ product
        x = _advance(model, x, i)
    return x, product


def cycle_multiplier(model: MapModel, point: Point, period: int) -> np.ndarray:
    """ Eigenvalues of the Jacobian of F^period at a cycle point """
    _, product = _compose(model, point, period)
    return np.linalg.eigvals(product)


def _locate_cycle(model: MapModel, seed: Point, period: int) -> Optional[Point]:
    """ Root of F^p(x) - x near seed; None if the search fails or lands on a lower-period cycle """
    identity = np.eye(model.dimension)

    def residual(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        image, product = _compose(model, tuple(float(c) for c in x), period)
        return np.array(image) - x, product - identity

    scale = max(float(np.max(np.abs(seed))), 1e-12)
    try:
        solution = spopt.root(residual, np.array(seed, dtype=float), jac=True, method="hybr",
                              options={"xtol": CYCLE_XTOL, "maxfev": CYCLE_MAX_EVAL})
    except (OrbitDivergedError, QuantityOverflowError):
        return None
    x = solution.x
    if not np.all(np.isfinite(x)) or x[0] <= 0:
        return None
    if float(np.max(np.abs(solution.fun))) > CYCLE_TOL * scale:
        return None
    point = tuple(float(c) for c in x)
    for d in range(1, period):
        if period % d == 0:
            image, _ = _compose(model, point, d)
            if max(abs(u - v) for u, v in zip(image, point)) <= 1e-7 * scale:
                return None
    return point


def _beyond_flip(model: MapModel, start: Optional[Point], period: int, transient: int) -> bool:
    """
    True when the parameter of `model` lies past the flip of the period-`period` cycle,
    i.e. that cycle has a real multiplier below -1.
    """
    orbit = iterate_orbit(model, start, transient, 4 * MAX_PERIOD)
    seed = orbit.last
    cycle = _locate_cycle(model, seed, period)
    if cycle is not None:
        multipliers = cycle_multiplier(model, cycle, period)
        return any(abs(m.imag) <= 1e-9 * max(1.0, abs(m)) and m.real < -1.0 for m in multipliers)
    if orbit.period == APERIODIC:
        # the root search fell onto a lower-period cycle the orbit is still creeping towards
        lower = any(_locate_cycle(model, seed, d) is not None for d in range(1, period) if period % d == 0)
        return not lower
    return orbit.period % (2 * period) == 0


def refine_flip(model: MapModel, param_lo: float, param_hi: float, tol: float = FLIP_TOL,
                start: Optional[Point] = None, transient: int = TRANSIENT) -> float:
    """
    Locates the parameter where the attracting cycle doubles its period between param_lo and param_hi.

    The period 2p is read from the orbit at param_hi; bisection then runs on the predicate
    "the period-p cycle has a multiplier below -1", with the cycle located by a root search from the attractor.

    Raises:
        NoFlipInBracketError: The period does not double across the bracket.
    """
    hi_model = model.with_parameter(param_hi)
    period_hi = iterate_orbit(hi_model, start, transient, 4 * MAX_PERIOD).period
    if period_hi == APERIODIC or period_hi % 2:
        raise NoFlipInBracketError(param_lo, param_hi, "?", period_hi)
    p = period_hi // 2
    if _beyond_flip(model.with_parameter(param_lo), start, p, transient) or \
            not _beyond_flip(hi_model, start, p, transient):
        raise NoFlipInBracketError(param_lo, param_hi, p, period_hi)
    lo, hi = param_lo, param_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _beyond_flip(model.with_parameter(mid), start, p, transient):
            hi = mid
        else:
            lo = mid
    flip = 0.5 * (lo + hi)
    logger.debug("%s: period %d -> %d at %.10g", model.name, p, period_hi, flip)
    return flip


def _nudged(x: Point) -> Point:
    return (x[0] * (1.0 + WARM_START_NUDGE),) + tuple(x[1:])


def _chaos_onset(cells: Sequence[ScanCell]) -> Optional[float]:
    run = 0
    for i, cell in enumerate(cells):
        if cell.lyapunov is not None and cell.lyapunov > CHAOS_THRESHOLD:
            run += 1
            if run == CHAOS_SUSTAIN:
                return cells[i - CHAOS_SUSTAIN + 1].param
        else:
            run = 0
    return None


def scan_cascade(model: MapModel, param_from: float, param_to: float, steps: int,
                 transient: int = TRANSIENT, samples: int = 1000, warm_start: bool = True,
                 with_lyapunov: bool = True, refine: bool = False,
                 start: Optional[Point] = None) -> ScanResult:
    """
    Sweeps the map parameter over [param_from, param_to].

    Each cell starts from the last sample of the previous one, moved off it by a relative
    WARM_START_NUDGE so a fixed point or cycle that turned repelling is left. Cold starts are used when
    warm_start is off or the previous orbit diverged or was captured by Q = 0. A flip is recorded where
    the detected period doubles with respect to the last periodic cell, at the midpoint or, with
    refine=True, via refine_flip.
    """
    if param_to == param_from:
        grid = np.array([float(param_from)])
    else:
        if steps < 2:
            raise ValueError("steps must be at least 2")
        grid = np.linspace(param_from, param_to, steps)
    cold = tuple(start) if start is not None else None
    cells = []
    flips = []
    seed = cold
    last_periodic = None
    for value in grid:
        cell_model = model.with_parameter(float(value))
        try:
            orbit = iterate_orbit(cell_model, seed, transient, samples, with_lyapunov)
        except OrbitDivergedError as e:
            logger.warning("%s at %.10g: %s", model.name, value, e)
            cells.append(ScanCell(float(value), np.empty((0, model.dimension)), APERIODIC, None, "diverged"))
            seed = cold
            continue
        lyapunov = orbit.lyapunov if orbit.lyapunov_reliable else None
        cells.append(ScanCell(float(value), orbit.samples, orbit.period, lyapunov))
        if orbit.is_periodic:
            if last_periodic is not None and orbit.period == 2 * last_periodic[1]:
                if refine:
                    try:
                        flips.append(refine_flip(model, last_periodic[0], float(value),
                                                 tol=(grid[1] - grid[0]) / 100, start=cold))
                    except NoFlipInBracketError as e:
                        logger.warning("%s", e)
                        flips.append(0.5 * (last_periodic[0] + float(value)))
                else:
                    flips.append(0.5 * (last_periodic[0] + float(value)))
            last_periodic = (float(value), orbit.period)
        seed = _nudged(orbit.last) if warm_start and orbit.last[0] != 0.0 else cold
    return ScanResult(parameter_grid=grid, cells=cells, flip_points=flips, chaos_onset=_chaos_onset(cells))


def sweep_schedule(model: MapModel, param_start: float, increment: float, every: int, stages: int,
                   start: Optional[Point] = None) -> np.ndarray:
    """
    One long orbit in which the parameter grows by `increment` every `every` iterations.

    Returns:
        np.ndarray: Rows (parameter, coordinates...) for every iterate.
    """
    x = tuple(start) if start is not None else model.with_parameter(param_start).default_start()
    rows = np.empty((every * stages, 1 + model.dimension))
    for stage in range(stages):
        value = param_start + stage * increment
        stage_model = model.with_parameter(value)
        for k in range(every):
            i = stage * every + k
            x = _advance(stage_model, x, i)
            rows[i, 0] = value
            rows[i, 1:] = x
    return rows
