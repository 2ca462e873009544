import json
import math

import numpy as np
import pytest

import snakesim as ss


@pytest.fixture
def params():
    p = ss.RobotParams()
    p.validate()
    return p


def straight_joint_state(lengths):
    base = np.zeros(6)
    return ss.JointState.from_parts(base, lengths)


def test_module_surface():
    assert ss.__version__
    assert ss.DOF == ss.BASE_DOF + ss.ACT_DOF == 15


def test_params_helpers(params):
    assert params.total_length() == pytest.approx(
        3 * (params.L0 + params.d_rigid)
    )
    assert params.pressure_length_coeff() == pytest.approx(
        params.dl_max / params.P_max
    )
    bad = ss.RobotParams()
    bad.m_total = -1.0
    with pytest.raises(ValueError):
        bad.validate()


def test_straight_backbone_geometry(params):
    js = straight_joint_state(np.zeros(9))
    tip = ss.full_htm(js, 3.0, 0.0, 0.0, params)
    assert tip.shape == (4, 4)
    assert np.allclose(tip[3], [0.0, 0.0, 0.0, 1.0])
    assert np.linalg.norm(tip[:3, 3]) == pytest.approx(
        params.total_length(), abs=1e-12
    )


def test_position_jacobian_matches_finite_differences(params):
    rng = np.random.default_rng(7)
    q = np.concatenate(
        [rng.uniform(-0.1, 0.1, 6), rng.uniform(0.005, 0.07, 9)]
    )
    js = ss.JointState.from_parts(q[:6], q[6:])
    xi, sigma, r = 1.7, 0.9, params.r_s
    J = ss.position_jacobian(js, xi, sigma, r, params)
    assert J.shape == (3, 15)
    h = 1e-6
    for k in range(15):
        dq = np.zeros(15)
        dq[k] = h
        plus = ss.JointState.from_parts(q[:6] + dq[:6], q[6:] + dq[6:])
        minus = ss.JointState.from_parts(q[:6] - dq[:6], q[6:] - dq[6:])
        fd = (
            ss.full_htm(plus, xi, sigma, r, params)[:3, 3]
            - ss.full_htm(minus, xi, sigma, r, params)[:3, 3]
        ) / (2 * h)
        assert np.allclose(J[:, k], fd, rtol=1e-5, atol=1e-8)


def test_inertia_matrix_structure(params):
    js = straight_joint_state(np.full(9, 0.02))
    M = ss.inertia_matrix(js, params)
    assert M.shape == (15, 15)
    assert np.allclose(M, M.T, atol=1e-10)
    assert np.allclose(M[:3, :3], params.m_total * np.eye(3), atol=1e-12)


def test_gait_lengths_and_pressures(params):
    spec = ss.planar_gait(params)
    l = ss.rolling_lengths(spec, 0.3, params)
    assert l.shape == (9,)
    assert np.allclose(l[:3], l[3:6]) and np.allclose(l[:3], l[6:])
    assert np.all(l >= 0.0) and np.all(l <= spec.amplitude + 1e-15)
    P = ss.length_to_pressure(np.full(9, 0.075), params)
    assert np.allclose(P, 4.0)
    with pytest.raises(ValueError):
        ss.length_to_pressure(np.full(9, -0.001), params)


def test_ballistic_energy_conservation(params):
    params.D_damp = 0.0
    cfg = ss.IntegratorConfig()
    cfg.method = ss.Method.EXPLICIT_ADAPTIVE
    cfg.output_rate = 30.0
    cfg.rel_tol = 1e-10
    cfg.abs_tol = 1e-12
    s0 = ss.SimState()
    q = np.zeros(15)
    q[2] = 1.0
    q[6:] = 0.02
    s0.q = q
    s0.qdot = np.zeros(15)
    res = ss.integrate(s0, lambda t: np.zeros(9), 0.2, cfg, params, grid=None)
    assert len(res.states) == 7
    assert all(len(c) == 0 for c in res.contacts)
    e0 = ss.energies(res.states[0].joints(), res.states[0].qdot, params)
    e1 = ss.energies(res.states[-1].joints(), res.states[-1].qdot, params)
    assert e1.total() == pytest.approx(e0.total(), abs=1e-6)
    assert res.stats.steps_accepted > 0


def test_ik_recovers_known_lengths(params):
    truth = np.full(9, 0.02)
    js = straight_joint_state(truth)
    targets = [
        ss.full_htm(js, xi, 0.0, 0.0, params)[:3, 3] for xi in range(4)
    ]
    fit, report = ss.ik_fit(targets, np.full(9, 0.01), params)
    assert np.linalg.norm(fit - truth) < 1e-6
    assert report.residual < 1e-12
    assert report.residual_history == sorted(
        report.residual_history, reverse=True
    )


def test_config_json_round_trip():
    cfg = ss.ExperimentConfig()
    cfg.drop_height = 0.25
    cfg.gait = ss.planar_gait(cfg.robot)
    text = ss.config_to_json(cfg)
    doc = json.loads(text)
    assert doc["drop_height"] == 0.25
    back = ss.config_from_json(text)
    assert back.drop_height == cfg.drop_height
    assert back.gait is not None
    assert back.gait.frequency == cfg.gait.frequency
    assert back.contact_enabled == cfg.contact_enabled
    with pytest.raises(OSError):
        ss.config_from_json('{"no_such_key": 1}')


def test_drop_test_settles(tmp_path, params):
    cfg = ss.ExperimentConfig()
    cfg.drop_height = 0.035
    cfg.output_dir = str(tmp_path)
    report = ss.run_drop_test(cfg)
    assert report.settled and not report.free_fall
    assert 0.0 < report.settle_time <= ss.SETTLE_DURATION
    assert -0.005 < report.final_min_z <= 0.0
    assert (tmp_path / "drop_z.csv").exists()
    assert (tmp_path / "drop_z.svg").exists()
    total_fz = sum(pt.F[2] for pt in report.skin_records[-1])
    assert total_fz == pytest.approx(
        cfg.robot.m_total * cfg.robot.g, rel=1e-6
    )


def test_metrics_from_synthetic_trajectory(params):
    spec = ss.planar_gait(params)
    spec.duration = 8.0
    states = []
    for k in range(241):
        t = k / 30.0
        s = ss.SimState()
        s.t = t
        q = np.zeros(15)
        q[0] = 0.04 * t
        q[1] = -0.01 * t
        s.q = q
        states.append(s)
    m = ss.compute_metrics(states, spec)
    assert m.vx_cm_s == pytest.approx(4.0, abs=1e-9)
    assert m.vy_cm_s == pytest.approx(-1.0, abs=1e-9)
    assert m.cycles_used == 3
    assert m.net_displacement_m == pytest.approx(
        math.hypot(0.04, 0.01) * 6.0, abs=1e-12
    )
