import math

import pytest
from hypothesis import given, settings, strategies as st

from src import controllers, plant
from src.loop_exception import DegenerateGainError, InvalidMeasurementError, NonMonotoneTimeError
from utils.controller_state import Alg1State, Alg2State, ControllerConfig, Measurement
from utils.plant_state import PlantParams, PlantState


def _measure(state: PlantState) -> Measurement:
    return Measurement(Q=state.Q, lam=state.lam, t=state.t)


def test_target_lambda():
    config = ControllerConfig.constant(4.0, 1.0, 0.5, 1.0)
    assert controllers.target_lambda(config, 1.0) == 0.0
    assert controllers.target_lambda(config, 2.0) == -4.0
    assert controllers.target_lambda(config, 0.5) == 2.0


@settings(deadline=None)
@given(st.floats(min_value=0.05, max_value=1.0), st.floats(min_value=-0.5, max_value=0.5),
       st.floats(min_value=0.1, max_value=1.0), st.floats(min_value=1.0, max_value=3.0))
def test_algorithm1_estimates_are_exact_on_idealized_plant(delta_N, delta_t, dt, guess_factor):
    params = PlantParams(delta_N, delta_t)
    config = ControllerConfig.constant(1.0, 1.0, delta_N * guess_factor, dt)
    state = PlantState.initial(params, Q=0.7, N=0.0)
    alg = Alg1State.initial(config)

    m0 = _measure(state)
    state = plant.evolve_exact(state, params, dt)
    m1 = _measure(state)
    alg = controllers.alg1_odd_step(alg, m0, m1)
    assert alg.parity == "even"
    assert alg.delta_t_est == pytest.approx(delta_t, abs=1e-9)

    alg, dN = controllers.alg1_even_step(alg, config, m1)
    assert alg.is_odd
    state = plant.evolve_exact(plant.apply_impulse(state, params, dN), params, dt)
    m2 = _measure(state)
    if abs(dN) > 1e-3:
        alg = controllers.alg1_gain_update(alg, m1, m2)
        assert alg.delta_N_est == pytest.approx(delta_N, rel=1e-6, abs=1e-9)
        assert alg.gain_updates == 1


def test_even_step_reaches_target_with_exact_estimates():
    params = PlantParams(delta_N=0.2, delta_t=0.25)
    config = ControllerConfig.constant(4.0, 1.0, 0.2, 1.0)
    alg = Alg1State(parity="even", delta_t_est=0.25, delta_N_est=0.2, step_index=1)
    state = PlantState.initial(params, Q=2.0, N=1.0, t=1.0)
    alg, dN = controllers.alg1_even_step(alg, config, _measure(state))
    after = plant.apply_impulse(state, params, dN)
    target = controllers.target_lambda(config, 2.0)
    # rate at the end of the step equals the target
    assert after.lam + 0.25 * 1.0 == pytest.approx(target)
    assert alg.last_dN == dN


def test_gain_update_skipped_below_guard():
    alg = Alg1State(parity="odd", delta_t_est=0.1, delta_N_est=0.7, last_dN=0.0)
    m_prev = Measurement(Q=1.0, lam=0.2, t=0.0)
    m_now = Measurement(Q=1.1, lam=0.35, t=1.0)
    updated = controllers.alg1_gain_update(alg, m_prev, m_now)
    assert updated.delta_N_est == 0.7
    assert updated.gain_updates == 0


def test_ramped_gain_update_counts_half_of_the_ramp():
    alg = Alg1State(parity="odd", delta_t_est=0.1, delta_N_est=1.0, last_dN=2.0, ramped=True)
    m_prev = Measurement(Q=1.0, lam=0.0, t=0.0)
    # drift 0.1 over the step plus half of 0.3 * 2.0
    m_now = Measurement(Q=1.0, lam=0.1 + 0.5 * 0.3 * 2.0, t=1.0)
    updated = controllers.alg1_gain_update(alg, m_prev, m_now)
    assert updated.delta_N_est == pytest.approx(0.3)


def test_ramped_odd_step_removes_ramp_tail():
    alg = Alg1State(parity="odd", delta_t_est=0.0, delta_N_est=0.3, last_dN=2.0, ramped=True)
    m_prev = Measurement(Q=1.0, lam=0.0, t=0.0)
    m_now = Measurement(Q=1.0, lam=0.1 * 0.5 + 0.5 * 0.3 * 2.0, t=0.5)
    updated = controllers.alg1_odd_step(alg, m_prev, m_now)
    assert updated.delta_t_est == pytest.approx(0.1)


def test_degenerate_gain_and_time_order():
    config = ControllerConfig.constant(1.0, 1.0, 0.5, 1.0)
    with pytest.raises(DegenerateGainError):
        controllers.alg1_even_step(Alg1State(parity="even", delta_N_est=0.0), config,
                                   Measurement(Q=1.0, lam=0.0, t=0.0))
    with pytest.raises(NonMonotoneTimeError):
        controllers.alg1_odd_step(Alg1State(), Measurement(1.0, 0.0, 1.0), Measurement(1.0, 0.0, 1.0))


def test_algorithm2_increment():
    config = ControllerConfig.constant(4.0, 1.0, 0.5, 1.0)
    state, dN = controllers.alg2_step(Alg2State(), config, Measurement(Q=2.0, lam=0.2, t=0.0))
    assert dN == pytest.approx((-4.0 - 0.2) / 0.5)
    assert state.step_index == 1
    assert state.last_Q == 2.0


def test_finite_difference_rate():
    assert controllers.lambda_finite_difference(1.2, 1.0, 0.5) == pytest.approx(2 * 0.2 / (0.5 * 2.2))
    assert controllers.lambda_finite_difference(1.0, 1.0, 0.1) == 0.0
    with pytest.raises(InvalidMeasurementError):
        controllers.lambda_finite_difference(0.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        controllers.lambda_finite_difference(1.0, 1.0, 0.0)


def test_schedule_repeats_last_duration():
    config = ControllerConfig(1.0, 1.0, 0.5, dt_schedule=(0.1, 0.2))
    assert [config.step_duration(i) for i in range(4)] == [0.1, 0.2, 0.2, 0.2]
    assert config.check_gain_guess(0.4)
    assert not config.check_gain_guess(-0.4)


def test_finite_difference_error_is_second_order():
    rate = 0.5
    errors = [abs(controllers.lambda_finite_difference(math.exp(rate * dt), 1.0, dt) - rate)
              for dt in (0.1, 0.05, 0.025)]
    for coarse, fine in zip(errors, errors[1:]):
        assert coarse / fine >= 3.5


@settings(deadline=None)
@given(st.floats(min_value=0.1, max_value=5.0), st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=0.01, max_value=2.0), st.booleans())
def test_controller_steps_are_deterministic(Q, lam, dt, ramped):
    config = ControllerConfig.constant(1.0, 1.0, 0.3, dt)
    m_prev = Measurement(Q=1.0, lam=0.1, t=0.0)
    m_now = Measurement(Q=Q, lam=lam, t=dt)
    odd = Alg1State(parity="odd", delta_t_est=0.05, delta_N_est=0.3, last_dN=0.5, ramped=ramped)
    even = Alg1State(parity="even", delta_t_est=0.05, delta_N_est=0.3, step_index=1, ramped=ramped)
    assert controllers.alg1_odd_step(odd, m_prev, m_now) == controllers.alg1_odd_step(odd, m_prev, m_now)
    assert controllers.alg1_even_step(even, config, m_now) == controllers.alg1_even_step(even, config, m_now)
    assert controllers.alg1_gain_update(odd, m_prev, m_now) == controllers.alg1_gain_update(odd, m_prev, m_now)
    assert controllers.alg2_step(Alg2State(), config, m_now) == controllers.alg2_step(Alg2State(), config, m_now)
    first = controllers.lambda_finite_difference(Q, 1.0, dt)
    assert first.hex() == controllers.lambda_finite_difference(Q, 1.0, dt).hex()
