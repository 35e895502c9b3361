"""
Closed-loop runs of Algorithm 1 and Algorithm 2 against the plant, the check that the idealized loop
reproduces the closed-form maps, and the study of how real-mode loops approach the idealized fixed point.

A record is taken at every measurement instant, before the control of that instant is applied.
With finite-difference measurement the first step is a warm-up without control that provides the first
sample of Q.
"""

import logging
import math
from dataclasses import replace
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from config.defaults import SETTLE_REL_CHANGE, SETTLE_WINDOW
from src import controllers, maps, plant
from src.loop_exception import (DegenerateGainError, EquivalenceModeError, FixedPointNotConsciousError,
                                IntegrationFailureError, InvalidMeasurementError, QuantityOverflowError)
from utils.controller_state import Alg1State, Alg2State, Measurement
from utils.loop_state import ConvergenceRow, ConvergenceTable, LoopConfig, Trajectory, TrajectoryRecord
from utils.map_state import Map1Params, Map2Params, MapPoint

logger = logging.getLogger(__name__)

MapParams = Union[Map1Params, Map2Params]


class _PlantDriver:
    """ Uniform access to the exact, ramped and ODE plants """

    def __init__(self, config: LoopConfig):
        self.config = config
        self.params = config.plant
        self.mode = config.plant_mode
        self.ramp = self.mode == "ramped" or config.is_modified
        self.state = config.initial
        if self.mode == "ode":
            self.system = plant.drifting_gain_system(self.params, config.mu)
            # N carries the drift here; shift it so both plants start at the same rate
            n0 = config.initial.N + (self.params.delta_t * config.initial.t - config.mu) / self.params.delta_N
            self.x = np.array([config.initial.Q, n0], dtype=float)

    @property
    def t(self) -> float:
        return self.state.t

    @property
    def Q(self) -> float:
        if self.mode == "ode":
            return float(self.x[self.system.q_index])
        return self.state.Q

    @property
    def N(self) -> float:
        if self.mode == "ode":
            return float(self.x[self.system.n_index])
        return self.state.N

    @property
    def computer_zero(self) -> bool:
        if self.mode == "ode":
            return self.Q == 0.0
        return self.state.computer_zero

    def instantaneous_rate(self) -> float:
        if self.mode == "ode":
            Q = self.Q
            if Q == 0.0:
                return self.config.mu + self.params.delta_N * self.N
            return float(self.system.rhs(self.t, self.x)[self.system.q_index]) / Q
        return self.state.lam

    def advance(self, dt: float, dN: float, t_next: float):
        if self.mode == "ode":
            ramp_rate = 0.0
            if self.ramp:
                ramp_rate = dN / dt
            elif dN:
                self.x = self.x.copy()
                self.x[self.system.n_index] += dN
            self.x = plant.integrate(self.system, self.t, self.x, t_next, self.config.ode_substeps, ramp_rate)
            if not math.isfinite(self.Q):
                raise QuantityOverflowError(math.inf)
            self.state = self.state.with_(t=t_next, Q=self.Q, N=self.N, computer_zero=self.Q == 0.0)
            return
        if self.ramp:
            state = plant.evolve_ramped(self.state, self.params, dt, dN)
        else:
            state = plant.evolve_exact(plant.apply_impulse(self.state, self.params, dN), self.params, dt)
        # time stamps come from the schedule, not from summed steps
        self.state = state.with_(t=t_next, lam=self.params.rate(state.N, t_next))


def _record(step: int, driver: _PlantDriver, lam: float, dN: float, estimates: Tuple[float, float],
            phase: str, event: str = "") -> TrajectoryRecord:
    return TrajectoryRecord(
        step=step, t=driver.t, Q=driver.Q, lam=lam, N=driver.N, dN=dN,
        delta_t_est=estimates[0], delta_N_est=estimates[1], phase=phase, event=event,
    )


def run_loop(config: LoopConfig) -> Trajectory:
    """
    Runs config.steps control steps and returns one record per measurement instant (steps + 1 records).

    Numerical failures (overflow, failed integration, degenerate gain, unusable samples) end the run early:
    the trajectory is marked truncated and keeps everything recorded so far.
    """
    cc = config.controller_config
    driver = _PlantDriver(config)
    cc = cc.with_(ramped=driver.ramp)
    finite_difference = config.measurement_mode == "finite-difference"
    idealized_tag = "idealized" if config.plant_mode == "ode" and not finite_difference else ""

    alg1 = Alg1State.initial(cc) if config.algorithm == 1 else None
    alg2 = Alg2State() if config.algorithm == 2 else None
    if alg1 is not None and finite_difference:
        alg1 = alg1.with_(step_index=1)

    trajectory = Trajectory()
    durations = [cc.step_duration(k) for k in range(config.steps)]
    t0 = config.initial.t
    pending: Optional[str] = None
    m_prev: Optional[Measurement] = None
    Q_prev: Optional[float] = None
    zero_seen = driver.computer_zero

    logger.info("running %s for %d steps (%s plant, %s measurement)",
                config.controller, config.steps, config.plant_mode, config.measurement_mode)
    for k in range(config.steps + 1):
        event = idealized_tag
        if driver.computer_zero and not zero_seen:
            zero_seen = True
            event = "computer-zero"
            trajectory.events.append(f"computer-zero at step {k}")
            logger.warning("Q reached computer zero at step %d (t=%.17g)", k, driver.t)
        try:
            if finite_difference:
                if k == 0:
                    lam = math.nan
                else:
                    lam = controllers.lambda_finite_difference(driver.Q, Q_prev, durations[k - 1])
            else:
                lam = driver.instantaneous_rate()
            m_now = Measurement(Q=driver.Q, lam=lam, t=driver.t)

            if alg1 is not None and pending is not None:
                if pending == "odd":
                    alg1 = controllers.alg1_odd_step(alg1, m_prev, m_now)
                else:
                    alg1 = controllers.alg1_gain_update(alg1, m_prev, m_now, cc.gain_guard())
            estimates = (alg1.delta_t_est, alg1.delta_N_est) if alg1 is not None else (math.nan, cc.delta_N_init)

            if k == config.steps:
                trajectory.records.append(_record(k, driver, lam, 0.0, estimates, "final", event))
                break

            dN = 0.0
            if finite_difference and k == 0:
                phase, pending = "warmup", None
            elif alg1 is not None and alg1.is_odd:
                phase, pending = "odd", "odd"
            elif alg1 is not None:
                phase, pending = "even", "even"
                alg1, dN = controllers.alg1_even_step(alg1, cc, m_now)
            else:
                phase = "control"
                alg2, dN = controllers.alg2_step(alg2, cc, m_now)
            trajectory.records.append(_record(k, driver, lam, dN, estimates, phase, event))

            m_prev, Q_prev = m_now, driver.Q
            t_next = t0 + math.fsum(durations[:k + 1])
            driver.advance(durations[k], dN, t_next)
        except (QuantityOverflowError, IntegrationFailureError, DegenerateGainError, InvalidMeasurementError) as e:
            logger.warning("run truncated at step %d: %s", k, e)
            trajectory.truncated = True
            trajectory.events.append(f"truncated at step {k}: {e}")
            if trajectory.records:
                last = trajectory.records[-1]
                trajectory.records[-1] = replace(last, event="truncated")
            break
    return trajectory


def settle(values: Sequence[float], window: int = SETTLE_WINDOW,
           rel_change: float = SETTLE_REL_CHANGE) -> Optional[int]:
    """
    Index of the first value that starts `window` consecutive relative changes below `rel_change`,
    or None when the sequence never settles.
    """
    run = 0
    for i in range(1, len(values)):
        prev, now = values[i - 1], values[i]
        scale = max(abs(prev), abs(now))
        change = abs(now - prev) / scale if scale > 0 else 0.0
        if math.isfinite(change) and change < rel_change:
            run += 1
            if run >= window:
                return i - window
        else:
            run = 0
    return None


def _relative_residual(predicted: MapPoint, actual: TrajectoryRecord, lam_scale: float) -> float:
    dq = abs(predicted.Q - actual.Q) / max(abs(actual.Q), np.finfo(float).tiny)
    dl = abs(predicted.lam - actual.lam) / max(abs(actual.lam), lam_scale)
    return max(dq, dl)


def _map_residual(trajectory: Trajectory, config: LoopConfig, map_params: MapParams) -> Optional[float]:
    """ Largest one-step relative difference between recorded control instants and the map image """
    records = trajectory.records
    residuals = []
    lam_scale = config.controller_config.lambda_tilde
    if config.algorithm == 1:
        guard = config.controller_config.gain_guard()
        calibrated = False
        for i, record in enumerate(records):
            if record.phase != "even":
                continue
            if calibrated and i + 2 < len(records):
                predicted = maps.map1_step(MapPoint(record.Q, record.lam), map_params)
                residuals.append(_relative_residual(predicted, records[i + 2], lam_scale))
            # the gain estimate is exact once a non-negligible increment has been measured
            if abs(record.dN) > guard:
                calibrated = True
    else:
        for i, record in enumerate(records[:-1]):
            if record.phase != "control":
                continue
            predicted = maps.map2_step(MapPoint(record.Q, record.lam), map_params)
            residuals.append(_relative_residual(predicted, records[i + 1], lam_scale))
    finite = [r for r in residuals if math.isfinite(r)]
    return max(finite) if finite else None


def map_equivalence_check(config: LoopConfig, map_params: MapParams, strict: bool = True) -> float:
    """
    Runs the loop and compares each control instant with the map image of the previous one
    (map 1 over an even-odd pair, map 2 over one step).

    Args:
        config (LoopConfig): The loop to run.
        map_params (Map1Params | Map2Params): Parameters of the matching map.
        strict (bool): Require the idealized plant and instantaneous measurement.

    Returns:
        float: Largest relative residual, 0.0 when nothing could be compared.
    """
    if strict and not config.is_idealized:
        raise EquivalenceModeError(config.plant_mode, config.measurement_mode)
    residual = _map_residual(run_loop(config), config, map_params)
    return 0.0 if residual is None else residual


def map_params_for(config: LoopConfig, dt: Optional[float] = None) -> MapParams:
    """ Map parameters matching a loop configuration """
    cc = config.controller_config
    dt = cc.dt_schedule[0] if dt is None else dt
    if config.algorithm == 1:
        return Map1Params(lambda_tilde=cc.lambda_tilde, Q_setpoint=cc.Q_setpoint,
                          delta_t=config.plant.delta_t, dt=dt)
    return Map2Params(lambda_tilde=cc.lambda_tilde, Q_setpoint=cc.Q_setpoint, delta_t=config.plant.delta_t,
                      delta_N=config.plant.delta_N, delta_N_tilde=cc.delta_N_init, dt=dt)


def _reference_Q(config: LoopConfig, map_params: MapParams) -> float:
    if config.algorithm == 1:
        return maps.fixed_point_map1(map_params).Q
    return maps.fixed_point_map2(map_params).Q


def convergence_study(template: LoopConfig, dt_list: Sequence[float],
                      horizon: Optional[float] = None) -> ConvergenceTable:
    """
    Runs the template loop once per step size and compares its steady Q with the idealized fixed point.

    Args:
        template (LoopConfig): Loop to repeat; its schedule is replaced by each constant step.
        dt_list (list): Step sizes, usually decreasing.
        horizon (float): Simulated time per run; when None the template's step count is used as is.

    Returns:
        ConvergenceTable: One row per step size.
    """
    table = ConvergenceTable()
    for dt in dt_list:
        steps = template.steps if horizon is None else int(math.ceil(horizon / dt))
        config = replace(template, controller_config=template.controller_config.with_(dt_schedule=(dt,)), steps=steps)
        map_params = map_params_for(config, dt)
        try:
            reference = _reference_Q(config, map_params)
        except FixedPointNotConsciousError as e:
            logger.warning("dt=%g: %s", dt, e)
            table.rows.append(ConvergenceRow(dt, None, math.nan, None, None, None, "no fixed point at this dt"))
            continue
        trajectory = run_loop(config)
        control_Q = [r.Q for r in trajectory.control_records]
        settled_at = settle(control_Q)
        residual = _map_residual(trajectory, config, map_params)
        if settled_at is None:
            logger.warning("dt=%g: no steady state after %d steps", dt, steps)
            table.rows.append(ConvergenceRow(dt, None, reference, None, residual, None,
                                             "no steady state at this dt"))
            continue
        steady_Q = control_Q[-1]
        error = abs(steady_Q - reference)
        logger.info("dt=%g: steady Q=%.12g, reference %.12g, error %.3g", dt, steady_Q, reference, error)
        table.rows.append(ConvergenceRow(dt, steady_Q, reference, error, residual, settled_at))
    if table.strictly_decreasing is False:
        logger.warning("steady-state error does not decrease strictly with dt: %s", table.errors)
    return table
