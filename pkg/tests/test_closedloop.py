import math

import pytest

from config import presets
from src import closedloop
from src.loop_exception import EquivalenceModeError, InvalidConfigError
from utils.controller_state import ControllerConfig
from utils.loop_state import LoopConfig
from utils.map_state import Map1Params, Map2Params
from utils.plant_state import PlantParams, PlantState


def _loop(controller, lambda_tilde, Q_setpoint, delta_t, delta_N, delta_N_tilde, dt, Q0, N0=0.0, steps=100,
          **kwargs) -> LoopConfig:
    params = PlantParams(delta_N=delta_N, delta_t=delta_t)
    return LoopConfig(
        controller=controller,
        controller_config=ControllerConfig.constant(lambda_tilde, Q_setpoint, delta_N_tilde, dt),
        plant=params,
        initial=PlantState.initial(params, Q=Q0, N=N0),
        steps=steps,
        **kwargs,
    )


def _reference_alg2(dt=1.0, steps=300, **kwargs) -> LoopConfig:
    return _loop("algorithm-2", dt=dt, Q0=2.0, N0=presets.MAP2_N0, steps=steps,
                 **{**presets.MAP2_REFERENCE, **kwargs})


def test_zero_steps_gives_initial_record():
    trajectory = closedloop.run_loop(_reference_alg2(steps=0))
    assert len(trajectory) == 1
    assert trajectory.records[0].Q == 2.0
    assert trajectory.records[0].lam == pytest.approx(0.2)
    assert not trajectory.truncated


def test_time_stamps_follow_the_schedule():
    config = _loop("algorithm-1", 1.0, 1.0, 0.1, 0.2, 0.3, 0.1, Q0=0.8, steps=50)
    trajectory = closedloop.run_loop(config)
    assert len(trajectory) == 51
    for k, record in enumerate(trajectory.records):
        assert record.t == math.fsum([0.1] * k)
    assert [r.phase for r in trajectory.records[:4]] == ["odd", "even", "odd", "even"]
    assert trajectory.records[-1].phase == "final"


def test_algorithm2_reaches_fixed_point():
    trajectory = closedloop.run_loop(_reference_alg2(steps=200))
    final = trajectory.records[-1]
    assert final.Q == pytest.approx(1.125, abs=1e-6)
    assert final.lam == pytest.approx(0.125, abs=1e-6)


def test_algorithm2_matches_its_map():
    config = _reference_alg2()
    params = Map2Params(dt=1.0, **presets.MAP2_REFERENCE)
    assert closedloop.map_equivalence_check(config, params) < 1e-10


@pytest.mark.parametrize("dt,Q0", [(0.4, 0.5), (0.8, 1.7), (1.2, 0.5)])
def test_algorithm1_matches_its_map(dt, Q0):
    config = _loop("algorithm-1", 1.0, 1.0, 0.1534, 0.2, 0.3, dt, Q0=Q0, steps=400)
    params = Map1Params(lambda_tilde=1.0, Q_setpoint=1.0, delta_t=0.1534, dt=dt)
    assert closedloop.map_equivalence_check(config, params) < 1e-10


def test_algorithm1_estimates_converge_on_idealized_plant():
    config = _loop("algorithm-1", 1.0, 1.0, 0.1534, 0.2, 0.3, 0.5, Q0=0.5, steps=10)
    records = closedloop.run_loop(config).records
    # drift is known after the first odd step, the gain after the first update
    assert records[1].delta_t_est == pytest.approx(0.1534, abs=1e-12)
    assert records[3].delta_N_est == pytest.approx(0.2, rel=1e-9)


def test_equivalence_requires_idealized_mode():
    config = _loop("modified-2", dt=0.1, Q0=2.0, steps=50, plant_mode="ramped",
                   measurement_mode="finite-difference", **presets.MAP2_REFERENCE)
    with pytest.raises(EquivalenceModeError):
        closedloop.map_equivalence_check(config, Map2Params(dt=0.1, **presets.MAP2_REFERENCE))
    residual = closedloop.map_equivalence_check(config, Map2Params(dt=0.1, **presets.MAP2_REFERENCE),
                                                strict=False)
    assert 0.0 < residual < 1.0


def test_modified_controllers_need_real_mode():
    with pytest.raises(InvalidConfigError):
        _loop("modified-1", 1.0, 1.0, 0.1, 0.2, 0.3, 0.1, Q0=1.0)


def test_overflow_truncates_the_run():
    # a wrong-sign gain guess pushes Q away from the setpoint
    config = _loop("algorithm-2", 4.0, 1.0, 0.25, 0.2, -0.5, 1.0, Q0=2.0, steps=20)
    trajectory = closedloop.run_loop(config)
    assert trajectory.truncated
    assert trajectory.records[-1].event == "truncated"
    assert len(trajectory) < 21


def test_settle():
    assert closedloop.settle([1.0] * 60) == 0
    assert closedloop.settle([1.0 + 0.1 * (-1) ** i for i in range(200)]) is None
    assert closedloop.settle([2.0, 1.5] + [1.0] * 60) == 2


def test_ode_plant_with_instantaneous_rate_is_tagged():
    config = _loop("algorithm-2", dt=0.5, Q0=2.0, steps=5, plant_mode="ode", ode_substeps=20,
                   **presets.MAP2_REFERENCE)
    trajectory = closedloop.run_loop(config)
    assert len(trajectory) == 6
    assert all(r.event == "idealized" for r in trajectory.records)


def _convergence_template(algorithm, plant_mode):
    preset = presets.CONVERGENCE_ALG1 if algorithm == 1 else presets.CONVERGENCE_ALG2
    return _loop(f"modified-{algorithm}", dt=presets.CONVERGENCE_DT_LADDER[0], Q0=preset["Q_setpoint"],
                 steps=1, plant_mode=plant_mode, measurement_mode="finite-difference", **preset)


@pytest.mark.slow
@pytest.mark.parametrize("algorithm", [1, 2])
@pytest.mark.parametrize("plant_mode", ["ramped", "ode"])
def test_real_mode_steady_state_tends_to_idealized(algorithm, plant_mode):
    table = closedloop.convergence_study(_convergence_template(algorithm, plant_mode),
                                         presets.CONVERGENCE_DT_LADDER, horizon=100.0)
    assert len(table.rows) == 4
    assert all(row.settled_at is not None for row in table.rows)
    assert table.strictly_decreasing
    assert table.errors[-1] < 1e-3


def test_single_step_study_makes_no_monotonicity_claim():
    table = closedloop.convergence_study(_convergence_template(2, "ramped"), [0.2], horizon=40.0)
    assert len(table.rows) == 1
    assert table.strictly_decreasing is None
    assert table.rows[0].reference_Q == pytest.approx(1.0 - 0.01 * (0.5 - 2.5) * 0.2 / 1.0)


def test_modified_algorithm2_settles_at_the_coarsest_step():
    table = closedloop.convergence_study(_convergence_template(2, "ramped"),
                                         [presets.CONVERGENCE_DT_LADDER[0]], horizon=100.0)
    row = table.rows[0]
    assert row.settled_at is not None
    assert row.steady_error < 5e-3
