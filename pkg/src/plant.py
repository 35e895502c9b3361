"""
The idealized controlled plant Q' = (delta_N N + delta_t t) Q: exact evolution, impulse and ramped control,
and a fixed-step RK4 integrator for plants given as ODE systems.
"""

import logging
import math

import numpy as np

from src.loop_exception import IntegrationFailureError, QuantityOverflowError
from utils.plant_state import OdeSystem, PlantParams, PlantState

logger = logging.getLogger(__name__)


def _grow(state: PlantState, exponent: float) -> tuple:
    """ Q * exp(exponent) with overflow reported and underflow flagged """
    if state.Q == 0.0:
        return 0.0, True
    try:
        Q = state.Q * math.exp(exponent)
    except OverflowError:
        raise QuantityOverflowError(exponent)
    if math.isinf(Q):
        raise QuantityOverflowError(exponent + math.log(state.Q))
    if Q == 0.0:
        logger.debug("Q turned to computer zero at t=%.17g (exponent %.6g)", state.t, exponent)
        return Q, True
    return Q, state.computer_zero


def evolve_exact(state: PlantState, params: PlantParams, dt: float) -> PlantState:
    """
    Advances the plant by dt with N held constant.

    ln Q gains delta_N N dt + delta_t ((t+dt)^2 - t^2) / 2; the rate is recomputed from (N, t+dt).
    """
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt!r}")
    exponent = params.delta_N * state.N * dt + params.delta_t * dt * (2.0 * state.t + dt) / 2.0
    Q, zero = _grow(state, exponent)
    t = state.t + dt
    return state.with_(t=t, Q=Q, lam=params.rate(state.N, t), computer_zero=zero)


def apply_impulse(state: PlantState, params: PlantParams, dN: float) -> PlantState:
    """ Instant change of N; the rate jumps by delta_N * dN, Q and t are untouched """
    if dN == 0:
        return state
    N = state.N + dN
    return state.with_(N=N, lam=params.rate(N, state.t))


def evolve_ramped(state: PlantState, params: PlantParams, dt: float, dN_total: float) -> PlantState:
    """ Advances the plant by dt while N grows uniformly by dN_total over the interval """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if dN_total == 0:
        return evolve_exact(state, params, dt)
    exponent = params.delta_N * (state.N + dN_total / 2.0) * dt + \
        params.delta_t * dt * (2.0 * state.t + dt) / 2.0
    Q, zero = _grow(state, exponent)
    t = state.t + dt
    N = state.N + dN_total
    return state.with_(t=t, Q=Q, N=N, lam=params.rate(N, t), computer_zero=zero)


def _derivative(system: OdeSystem, t: float, x: np.ndarray, ramp_rate: float) -> np.ndarray:
    dx = np.asarray(system.rhs(t, x), dtype=float)
    if ramp_rate:
        dx = dx.copy()
        dx[system.n_index] += ramp_rate
    if not np.all(np.isfinite(dx)):
        raise IntegrationFailureError(t)
    return dx


def rk4_step(system: OdeSystem, t: float, state: np.ndarray, h: float, ramp_rate: float = 0.0) -> np.ndarray:
    """
    One classical fourth-order Runge-Kutta step.

    Args:
        system (OdeSystem): The plant.
        t (float): Time at the start of the step.
        state (np.ndarray): State vector at t.
        h (float): Step, > 0.
        ramp_rate (float): Extra constant added to the N-component derivative (uniform control ramp).

    Returns:
        np.ndarray: State vector at t + h.
    """
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    x = np.asarray(state, dtype=float)
    k1 = _derivative(system, t, x, ramp_rate)
    k2 = _derivative(system, t + h / 2, x + h / 2 * k1, ramp_rate)
    k3 = _derivative(system, t + h / 2, x + h / 2 * k2, ramp_rate)
    k4 = _derivative(system, t + h, x + h * k3, ramp_rate)
    return x + h / 6 * (k1 + 2 * (k2 + k3) + k4)


def integrate(system: OdeSystem, t0: float, state: np.ndarray, t1: float, steps: int,
              ramp_rate: float = 0.0) -> np.ndarray:
    """ Runs `steps` equal RK4 steps from t0 to t1 """
    h = (t1 - t0) / steps
    x = np.asarray(state, dtype=float)
    for k in range(steps):
        x = rk4_step(system, t0 + k * h, x, h, ramp_rate)
    return x


def drifting_gain_system(params: PlantParams, mu: float = 0.0) -> OdeSystem:
    """ Q' = (mu + delta_N N) Q, N' = delta_t / delta_N; Q follows the same rule as the idealized plant """
    drift = params.delta_t / params.delta_N

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([(mu + params.delta_N * x[1]) * x[0], drift])

    return OdeSystem(dimension=2, rhs=rhs, q_index=0, n_index=1)


def idealized_system(params: PlantParams) -> OdeSystem:
    """ The idealized plant written as an ODE with N' = 0 """
    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([(params.delta_N * x[1] + params.delta_t * t) * x[0], 0.0])

    return OdeSystem(dimension=2, rhs=rhs, q_index=0, n_index=1)
