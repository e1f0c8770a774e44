import dataclasses
import math

import numpy as np
import pytest

from nonsmooth_adm.plant import (
    EnvironmentModel,
    LinearMotorParams,
    OneDofParams,
    PlantState,
    contact_wrench,
    forward_dynamics,
    integrate_substep,
    joint_contact_torque,
    linear_motor_friction,
    linear_motor_model,
    one_dof_model,
    two_link_model,
)


def test_contact_wrench_branches():
    env = EnvironmentModel(k_s=2e3, y_s=0.0, mu_fric=0.1)
    assert contact_wrench((0.0, 0.01), (0.0, 0.0), env) == (0.0, 0.0)
    fx, fy = contact_wrench((0.0, -0.001), (0.0, 0.0), env)
    assert (fx, fy) == (0.0, 2.0)
    fx, fy = contact_wrench((0.0, -0.001), (0.5, 0.0), env)
    assert fy == 2.0 and fx == pytest.approx(-0.2)


def test_contact_complementarity(rng):
    env = EnvironmentModel(k_s=2e3, y_s=0.0, mu_fric=0.1)
    for _ in range(300):
        y = rng.uniform(-0.01, 0.01)
        xd = rng.normal()
        fx, fy = contact_wrench((0.0, y), (xd, 0.0), env)
        assert fy >= 0.0
        assert fy * max(0.0, y - env.y_s) == 0.0
        if fy > 0.0 and xd != 0.0:
            assert abs(fx) == pytest.approx(env.mu_fric * fy)
        if fy == 0.0:
            assert fx == 0.0


def test_joint_contact_torque_one_dof():
    model = one_dof_model()
    assert np.array_equal(joint_contact_torque(model, np.zeros(1), (0.0, 0.0)), [0.0])
    fc = joint_contact_torque(model, np.zeros(1), (0.0, 2.0))
    assert fc[0] == pytest.approx(1.0)          # l1 * cos(0) * 2
    fc = joint_contact_torque(model, np.zeros(1), (1.0, 0.0))
    assert fc[0] == pytest.approx(0.0)


def test_joint_contact_torque_dimension_check():
    model = one_dof_model()
    with pytest.raises(ValueError):
        joint_contact_torque(model, np.zeros(1), (1.0, 0.0, 0.0))


def test_one_dof_rest_dynamics():
    model = one_dof_model(OneDofParams())
    st = PlantState(np.zeros(1), np.zeros(1))
    assert model.mass_fn(st.q)[0, 0] == pytest.approx(0.7291666667, abs=1e-9)
    assert model.gravity_fn(st.q)[0] == pytest.approx(12.2625)
    qdd = forward_dynamics(model, st, np.zeros(1), np.zeros(1), np.zeros(1))
    assert qdd[0] == pytest.approx(-16.81714285714286, abs=1e-10)


def test_gravity_hold_is_equilibrium():
    model = one_dof_model(OneDofParams())
    q = np.array([0.3])
    st = PlantState(q, np.zeros(1))
    qdd = forward_dynamics(model, st, model.gravity_fn(q), np.zeros(1), np.zeros(1))
    assert abs(qdd[0]) < 1e-12


def test_two_link_gravity_free_rest():
    model = two_link_model()
    q = np.array([0.4, -0.9])
    qdd = forward_dynamics(model, PlantState(q, np.zeros(2)), model.gravity_fn(q),
                           np.zeros(2), np.zeros(2))
    assert np.allclose(qdd, 0.0, atol=1e-12)


def test_two_link_mass_matrix_spd(rng):
    model = two_link_model()
    for _ in range(200):
        q = rng.uniform(-math.pi, math.pi, size=2)
        M = model.mass_fn(q)
        assert np.allclose(M, M.T)
        assert np.linalg.eigvalsh(M).min() > 0.0


def test_two_link_skew_symmetry(rng):
    model = two_link_model()
    eps = 1e-6
    for _ in range(200):
        q = rng.uniform(-math.pi, math.pi, size=2)
        qd = rng.normal(size=2)
        x = rng.normal(size=2)
        mdot = (model.mass_fn(q + eps * qd) - model.mass_fn(q - eps * qd)) / (2 * eps)
        c = model.coriolis_fn(q, qd)
        assert abs(x @ (mdot - 2 * c) @ x) <= 1e-6 * (x @ x)


def test_one_dof_inertia_positivity_guard():
    model = one_dof_model(OneDofParams(mass_ripple=5.0))
    with pytest.raises(ValueError):
        model.mass_fn(np.array([-math.pi / 2]))


def test_linear_motor_dynamics():
    p = LinearMotorParams()
    model = linear_motor_model(p)
    st = PlantState(np.zeros(1), np.zeros(1))
    # holding force equals the weight
    qdd = forward_dynamics(model, st, np.array([p.mass * p.g]), np.zeros(1), np.zeros(1))
    assert abs(qdd[0]) < 1e-12
    fric = linear_motor_friction(p)
    assert fric.fe_fn(0.0, np.zeros(1), np.array([0.1]))[0] == pytest.approx(-(1.0 + 0.5))
    assert fric.fe_fn(0.0, np.zeros(1), np.zeros(1))[0] == 0.0


def test_free_fall_substep_value():
    model = one_dof_model(OneDofParams())
    env = EnvironmentModel()
    st = integrate_substep(model, PlantState(np.zeros(1), np.zeros(1)), np.zeros(1),
                           env, None, 0.0, 1e-5, 1)
    assert st.qd[0] == pytest.approx(-1.68171428571e-4, rel=1e-9)


def test_zero_dynamics_state_unchanged():
    model = two_link_model()
    env = EnvironmentModel()
    q = np.array([0.2, 0.4])
    st = integrate_substep(model, PlantState(q, np.zeros(2)), np.zeros(2), env,
                           None, 0.0, 1e-5, 50)
    assert np.allclose(st.q, q, atol=1e-15)
    assert np.allclose(st.qd, 0.0)


def test_fast_paths_match_generic(rng):
    env = EnvironmentModel(k_s=2e3, y_s=0.0, mu_fric=0.1)
    for model in (one_dof_model(), linear_motor_model(), two_link_model()):
        generic = dataclasses.replace(model, scalar_terms=None, planar2_terms=None)
        for _ in range(40):
            n = model.dof
            st = PlantState(rng.normal(scale=0.4, size=n), rng.normal(size=n))
            tau = rng.normal(size=n)
            a = integrate_substep(model, st, tau, env, None, 0.0, 1e-5, 25)
            b = integrate_substep(generic, st, tau, env, None, 0.0, 1e-5, 25)
            assert np.allclose(a.q, b.q, atol=1e-13)
            assert np.allclose(a.qd, b.qd, atol=1e-12)


def test_pendulum_energy_drift():
    # undamped constant-inertia pendulum: semi-implicit Euler keeps energy
    # bounded; drift over one second stays below 0.5 %
    p = OneDofParams(mass_ripple=0.0, damping=0.0)
    model = one_dof_model(p)
    env = EnvironmentModel()
    inertia = model.mass_fn(np.zeros(1))[0, 0]

    def energy(st):
        pot = p.m1 * p.g * p.com * math.sin(st.q[0])
        return 0.5 * inertia * st.qd[0] ** 2 + pot

    st = PlantState(np.array([0.5]), np.zeros(1))
    e0 = energy(st)
    scale = abs(e0) + p.m1 * p.g * p.com
    worst = 0.0
    for _ in range(100):
        st = integrate_substep(model, st, np.zeros(1), env, None, 0.0, 1e-5, 1000)
        worst = max(worst, abs(energy(st) - e0))
    assert worst / scale < 0.005
