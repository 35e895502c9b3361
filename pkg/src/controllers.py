"""
Algorithm 1 and Algorithm 2 as pure step procedures over measurements.

Algorithm 1 alternates: on odd steps N is kept and the drift estimate is taken from the rate change,
on even steps the increment is computed and, one step later, the gain estimate is refreshed.
Algorithm 2 controls on every step with a fixed gain guess.
"""

import logging
from typing import Tuple

from src.loop_exception import DegenerateGainError, InvalidMeasurementError, NonMonotoneTimeError
from utils.controller_state import Alg1State, Alg2State, ControllerConfig, Measurement

logger = logging.getLogger(__name__)

# share of a uniformly ramped increment seen by the mean-rate estimate of the ramp interval
RAMP_SHARE = 0.5


def target_lambda(config: ControllerConfig, Q: float) -> float:
    """ Desired rate lambda_tilde (1 - Q / Q_setpoint) """
    return config.lambda_tilde * (1.0 - Q / config.Q_setpoint)


def _elapsed(m_prev: Measurement, m_now: Measurement) -> float:
    dt = m_now.t - m_prev.t
    if not dt > 0:
        raise NonMonotoneTimeError(m_prev.t, m_now.t)
    return dt


def alg1_odd_step(state: Alg1State, m_prev: Measurement, m_now: Measurement) -> Alg1State:
    """
    Drift estimate from a step without control: delta_t_est = (lambda_now - lambda_prev) / dt.

    With ramped control the rate values are interval means, so the half of the previous ramp that
    fell into this interval is removed first.
    """
    dt = _elapsed(m_prev, m_now)
    change = m_now.lam - m_prev.lam
    if state.ramped and state.last_dN:
        change -= RAMP_SHARE * state.delta_N_est * state.last_dN
    return state.with_(
        parity="even",
        delta_t_est=change / dt,
        last_lambda=m_now.lam,
        last_Q=m_now.Q,
        step_index=state.step_index + 1,
    )


def alg1_even_step(state: Alg1State, config: ControllerConfig, m_now: Measurement) -> Tuple[Alg1State, float]:
    """
    Control increment dN = (target - lambda_i - delta_t_est * dt_i) / delta_N_est.

    Returns:
        tuple: New state (parity odd, dN remembered for the gain update) and the increment.
    """
    if state.delta_N_est == 0:
        raise DegenerateGainError()
    dt = config.step_duration(state.step_index)
    dN = (target_lambda(config, m_now.Q) - m_now.lam - state.delta_t_est * dt) / state.delta_N_est
    new_state = state.with_(
        parity="odd",
        last_lambda=m_now.lam,
        last_Q=m_now.Q,
        last_dN=dN,
        step_index=state.step_index + 1,
    )
    return new_state, dN


def alg1_gain_update(state: Alg1State, m_prev: Measurement, m_now: Measurement,
                     guard: float = 1e-12) -> Alg1State:
    """
    Gain estimate from the step where last_dN was applied:
    delta_N_est = ((lambda_now - lambda_prev) - delta_t_est * dt) / last_dN.

    Skipped (estimate kept) when |last_dN| <= guard. A ramped increment shows up only half in the
    mean rate of its own interval.
    """
    dt = _elapsed(m_prev, m_now)
    if abs(state.last_dN) <= guard:
        logger.debug("gain update skipped, |dN|=%.3g below guard", abs(state.last_dN))
        return state.with_(last_lambda=m_now.lam, last_Q=m_now.Q)
    effective_dN = RAMP_SHARE * state.last_dN if state.ramped else state.last_dN
    estimate = ((m_now.lam - m_prev.lam) - state.delta_t_est * dt) / effective_dN
    if estimate == 0:
        logger.warning("gain estimate collapsed to zero, keeping %.6g", state.delta_N_est)
        return state.with_(last_lambda=m_now.lam, last_Q=m_now.Q)
    return state.with_(
        delta_N_est=estimate,
        last_lambda=m_now.lam,
        last_Q=m_now.Q,
        gain_updates=state.gain_updates + 1,
    )


def alg2_step(state: Alg2State, config: ControllerConfig, m_now: Measurement) -> Tuple[Alg2State, float]:
    """ Control increment dN = (target - lambda_i) / delta_N_init; the gain is never re-estimated """
    dN = (target_lambda(config, m_now.Q) - m_now.lam) / config.delta_N_init
    return state.with_(last_lambda=m_now.lam, last_Q=m_now.Q, step_index=state.step_index + 1), dN


def lambda_finite_difference(Q_now: float, Q_prev: float, dt: float) -> float:
    """ Rate estimate 2 (Q_now - Q_prev) / (dt (Q_now + Q_prev)) from two samples of Q """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    total = Q_now + Q_prev
    if not total > 0:
        raise InvalidMeasurementError(Q_now, Q_prev)
    return 2.0 * (Q_now - Q_prev) / (dt * total)
