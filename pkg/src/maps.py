"""
Closed-form closed-loop maps of both algorithms on the idealized plant, their fixed points,
Jacobians, eigenvalues, stability predicates and the bounding box of the Algorithm-1 attractors.

Map 1 spans two control steps (an even step and the following odd one); map 2 spans one step.
The cascade symbol `a` means the cascade parameter 2 dt lambda_tilde for map 1 and the gain
ratio delta_N / delta_N_tilde for map 2; the parameter classes expose them under distinct names.
"""

import cmath
import logging
import math
from typing import Optional, Tuple

import numpy as np

from config.defaults import RADICAND_TOL
from src.loop_exception import FixedPointNotConsciousError, QuantityOverflowError
from utils.map_state import Map1Params, Map2Params, MapPoint, StabilityReport

logger = logging.getLogger(__name__)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise QuantityOverflowError(x)


def _scaled(Q: float, exponent: float) -> float:
    """ Q exp(exponent); Q = 0 stays on the zero ray without evaluating exp """
    if Q == 0.0:
        return 0.0
    value = Q * _exp(exponent)
    if math.isinf(value):
        raise QuantityOverflowError(exponent)
    return value


# Map 1

def map1_step(p: MapPoint, params: Map1Params) -> MapPoint:
    """ (Q, lambda) -> (Q exp(2 dt T(Q)), T(Q) + delta_t dt) with T(Q) = lambda_tilde (1 - Q / Q_setpoint) """
    target = params.lambda_tilde * (1.0 - p.Q / params.Q_setpoint)
    return MapPoint(
        Q=_scaled(p.Q, 2.0 * params.dt * target),
        lam=target + params.delta_t * params.dt,
    )


def map1_jacobian(p: MapPoint, params: Map1Params) -> np.ndarray:
    a = params.cascade_parameter
    q = p.Q / params.Q_setpoint
    return np.array([
        [reduced_map_derivative(q, a), 0.0],
        [-params.lambda_tilde / params.Q_setpoint, 0.0],
    ])


def reduced_map_step(q: float, a: float) -> float:
    """ q exp(a (1 - q)) """
    return _scaled(q, a * (1.0 - q))


def reduced_map_derivative(q: float, a: float) -> float:
    """ exp(a (1 - q)) (1 - a q) """
    return _exp(a * (1.0 - q)) * (1.0 - a * q)


def fixed_point_map1(params: Map1Params) -> MapPoint:
    return MapPoint(Q=params.Q_setpoint, lam=params.delta_t * params.dt)


def stability_map1(params: Map1Params) -> StabilityReport:
    """ Eigenvalues (1 - 2 dt lambda_tilde, 0); stable iff dt < 1 / lambda_tilde """
    rho1 = 1.0 - params.cascade_parameter
    eigenvalues = (complex(rho1), complex(0.0))
    return StabilityReport(
        fixed_point=fixed_point_map1(params),
        eigenvalues=eigenvalues,
        stable=abs(rho1) < 1.0,
        critical_dt=1.0 / params.lambda_tilde,
    )


def reduced_bounds(a: float) -> Tuple[float, float]:
    """ (q_min, q_max): the reduced map maximum exp(a-1)/a and its image """
    q_max = _exp(a - 1.0) / a
    q_min = reduced_map_step(q_max, a)
    return q_min, q_max


def attractor_rectangle(params: Map1Params) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """
    Box containing every attracting set of map 1.

    Returns:
        tuple: ((Q_min, Q_max), (lambda_min, lambda_max)).
    """
    a = params.cascade_parameter
    if not a > 0:
        raise ValueError("cascade parameter must be positive")
    q_min, q_max = reduced_bounds(a)
    drift = params.delta_t * params.dt
    lam_min = params.lambda_tilde * (1.0 - q_max) + drift
    lam_max = params.lambda_tilde * (1.0 - q_min) + drift
    return (q_min * params.Q_setpoint, q_max * params.Q_setpoint), (lam_min, lam_max)


def invariant_curve_Q(lam: float, params: Map1Params) -> float:
    """ The curve every map-1 image lies on: Q = Q_setpoint (1 - s / lambda_tilde) exp(2 dt s), s = lam - delta_t dt """
    shifted = lam - params.delta_t * params.dt
    return params.Q_setpoint * (1.0 - shifted / params.lambda_tilde) * _exp(2.0 * params.dt * shifted)


# Map 2

def _map2_increment(p: MapPoint, params: Map2Params) -> float:
    """ delta_N * dN with dN from the Algorithm-2 control law """
    target = params.lambda_tilde * (1.0 - p.Q / params.Q_setpoint)
    return params.gain_ratio * (target - p.lam)


def map2_step(p: MapPoint, params: Map2Params) -> MapPoint:
    """
    One Algorithm-2 step on the idealized plant:
    Q' = Q exp(lambda dt + delta_N dN dt + delta_t dt^2 / 2), lambda' = lambda + delta_N dN + delta_t dt.
    """
    jump = _map2_increment(p, params)
    dt = params.dt
    return MapPoint(
        Q=_scaled(p.Q, (p.lam + jump) * dt + params.delta_t * dt * dt / 2.0),
        lam=p.lam + jump + params.delta_t * dt,
    )


def map2_jacobian(p: MapPoint, params: Map2Params) -> np.ndarray:
    a, b, dt = params.gain_ratio, params.rate_ratio, params.dt
    jump = _map2_increment(p, params)
    growth = _exp((p.lam + jump) * dt + params.delta_t * dt * dt / 2.0)
    return np.array([
        [growth * (1.0 - a * b * p.Q * dt), growth * p.Q * dt * (1.0 - a)],
        [-a * b, 1.0 - a],
    ])


def _drift_factor(params: Map2Params) -> float:
    """ delta_t (1/2 - 1/a) """
    return params.delta_t * (0.5 - 1.0 / params.gain_ratio)


def fixed_point_map2(params: Map2Params) -> MapPoint:
    """ Q_bar = Q_setpoint (1 - delta_t dt (1/2 - 1/a) / lambda_tilde), lambda_bar = delta_t dt / 2 """
    q_bar = params.Q_setpoint * (1.0 - _drift_factor(params) * params.dt / params.lambda_tilde)
    if not q_bar > 0:
        raise FixedPointNotConsciousError(q_bar, params.dt)
    return MapPoint(Q=q_bar, lam=params.delta_t * params.dt / 2.0)


def fixed_point_map2_zero(params: Map2Params) -> MapPoint:
    """ Fixed point on the invariant ray Q = 0: lambda_bar = lambda_tilde + delta_t dt / a """
    return MapPoint(Q=0.0, lam=params.lambda_tilde + params.delta_t * params.dt / params.gain_ratio)


def stability_map2_zero(params: Map2Params) -> StabilityReport:
    """
    Stability of the Q = 0 fixed point. The Jacobian there is triangular with eigenvalues
    exp(dt (lambda_tilde + delta_t dt (1/a - 1/2))) and 1 - a; the closed-form condition is
    delta_t < 0 and a < 2 delta_t dt / (delta_t dt - 2 lambda_tilde).
    """
    a, dt = params.gain_ratio, params.dt
    growth = _exp(dt * (params.lambda_tilde + params.delta_t * dt * (1.0 / a - 0.5)))
    eigenvalues = (complex(growth), complex(1.0 - a))
    drift = params.delta_t * dt
    closed_form = drift < 0 and a < 2.0 * drift / (drift - 2.0 * params.lambda_tilde)
    stable = all(abs(ev) < 1.0 for ev in eigenvalues)
    notes = ()
    if closed_form != stable:
        notes = (f"closed-form zero-point condition says {closed_form}, eigenvalues say {stable}",)
    return StabilityReport(
        fixed_point=fixed_point_map2_zero(params),
        eigenvalues=eigenvalues,
        stable=stable,
        notes=notes,
    )


def h_parameter(params: Map2Params) -> float:
    """ h = Q_bar dt """
    return fixed_point_map2(params).Q * params.dt


def eigenvalues_from_h(a: float, b: float, h: float) -> Tuple[complex, complex]:
    """ theta_1,2 = ((2 - a) - h a b +- sqrt(a (h^2 a b^2 + 2 h b (a - 2) + a))) / 2 """
    root = cmath.sqrt(a * (h * h * a * b * b + 2.0 * h * b * (a - 2.0) + a))
    base = (2.0 - a) - h * a * b
    return (base + root) / 2.0, (base - root) / 2.0


def eigenvalues_map2(params: Map2Params) -> Tuple[complex, complex]:
    """ Eigenvalues at the fixed point, a complex pair inside the window (h1, h2) for a < 1 """
    return eigenvalues_from_h(params.gain_ratio, params.rate_ratio, h_parameter(params))


def complex_window_map2(params: Map2Params) -> Optional[Tuple[float, float]]:
    """ Interval of h where the eigenvalues are complex conjugate, None for a >= 1 """
    a, b = params.gain_ratio, params.rate_ratio
    if a >= 1.0:
        return None
    spread = 2.0 * math.sqrt(1.0 - a)
    return (2.0 - a - spread) / (a * b), (2.0 - a + spread) / (a * b)


def flip_h_map2(params: Map2Params) -> float:
    """ h0 = 2 (2 - a) / (a b), where theta_2 = -1 """
    a, b = params.gain_ratio, params.rate_ratio
    return 2.0 * (2.0 - a) / (a * b)


def dt_validity_interval(params: Map2Params) -> Tuple[float, float]:
    """ Steps for which Q_bar > 0: (0, lambda_tilde / (delta_t (1/2 - 1/a))) when that factor is positive """
    factor = _drift_factor(params)
    if factor > 0:
        return 0.0, params.lambda_tilde / factor
    return 0.0, math.inf


def critical_dt_map2(params: Map2Params) -> Optional[float]:
    """
    Step dt0 at which theta_2 passes -1, from Q_bar(dt) dt = h0:
    dt0 = b (Q - sqrt(Q^2 - 8 delta_t (1/2 - 1/a)(2 - a) / (a b^2))) / (2 delta_t (1/2 - 1/a)).
    None when the radicand is negative or no positive step reaches h0.
    """
    a, b, Q = params.gain_ratio, params.rate_ratio, params.Q_setpoint
    h0 = flip_h_map2(params)
    if not h0 > 0:
        return None
    factor = _drift_factor(params)
    if factor == 0:
        # Q_bar = Q_setpoint for every dt
        return h0 / Q
    radicand = Q * Q - 8.0 * factor * (2.0 - a) / (a * b * b)
    if radicand < -RADICAND_TOL:
        return None
    dt0 = b * (Q - math.sqrt(max(radicand, 0.0))) / (2.0 * factor)
    if not dt0 > 0:
        return None
    return dt0


def stability_map2(params: Map2Params) -> StabilityReport:
    """
    Stability of the map-2 fixed point at params.dt, the small-step verdict a < 2 and a b > 1,
    the critical step and the validity interval. A non-conscious fixed point gives stable=False
    and no eigenvalues.
    """
    a, b = params.gain_ratio, params.rate_ratio
    validity = dt_validity_interval(params)
    notes = []
    if params.delta_t > 0 and a > 2:
        notes.append("validity case delta_t > 0, a > 2 is excluded by the small-step condition a < 2")
    try:
        fixed_point = fixed_point_map2(params)
        eigenvalues = eigenvalues_map2(params)
        stable = all(abs(ev) < 1.0 for ev in eigenvalues)
    except FixedPointNotConsciousError as e:
        logger.debug("%s", e)
        notes.append(str(e))
        fixed_point, eigenvalues, stable = None, None, False
    return StabilityReport(
        fixed_point=fixed_point,
        eigenvalues=eigenvalues,
        stable=stable,
        critical_dt=critical_dt_map2(params),
        dt_validity_interval=validity,
        small_step_stable=(a < 2.0 and a * b > 1.0),
        notes=tuple(notes),
    )
