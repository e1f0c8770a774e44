"""Simulated plants and contact environments.

Three plants are provided: a one-joint rotary arm with an uncertain inertia
term, a planar two-link arm (horizontal plane, so gravity acts out of plane),
and a vertical linear motor stage.  The environment is a unilateral linear
spring surface with Coulomb friction along the tangential direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .setvalued import BoxConstraint, sign0

__all__ = [
    "ManipulatorModel",
    "OneDofParams",
    "TwoLinkParams",
    "LinearMotorParams",
    "EnvironmentModel",
    "PlantState",
    "DisturbanceModel",
    "SimulationBlowUp",
    "one_dof_model",
    "two_link_model",
    "linear_motor_model",
    "linear_motor_friction",
    "double_integrator_model",
    "contact_wrench",
    "joint_contact_torque",
    "forward_dynamics",
    "integrate_substep",
]


@dataclass(frozen=True)
class ManipulatorModel:
    """Plant interface: rigid-body terms, end-effector kinematics, torque box.

    ``jacobian_fn`` maps joint rates to the planar end-effector velocity
    (2 x dof).  ``input_gain`` scales the commanded torque before it enters the
    dynamics (drive gain; 1 for the arms).
    """

    dof: int
    mass_fn: Callable[[np.ndarray], np.ndarray]
    coriolis_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    gravity_fn: Callable[[np.ndarray], np.ndarray]
    ee_pose_fn: Callable[[np.ndarray], tuple[float, float]]
    jacobian_fn: Callable[[np.ndarray], np.ndarray]
    torque_limits: BoxConstraint
    input_gain: float = 1.0
    name: str = "plant"
    # single-joint plants may provide float-valued terms
    # (m, c, g, ee_x, ee_y, jac_x, jac_y) so the substep loop avoids arrays;
    # must agree with the array callables (covered by a consistency test)
    scalar_terms: Callable[[float, float], tuple] | None = None
    # planar two-joint analogue: (m11, m12, m22, c11, c12, c21, c22, g1, g2,
    # ee_x, ee_y, j11, j12, j21, j22)
    planar2_terms: Callable[[float, float, float, float], tuple] | None = None


@dataclass(frozen=True)
class OneDofParams:
    """Rotary arm: uniform link plus a sinusoidal inertia perturbation."""

    m1: float = 5.0
    l1: float = 0.5
    lc1: float | None = None          # defaults to l1 / 2
    mass_ripple: float = 0.2          # sin(q) term added to the inertia
    damping: float = 0.1              # cos(q)-modulated velocity coefficient
    g: float = 9.81

    def __post_init__(self) -> None:
        if self.m1 <= 0.0 or self.l1 <= 0.0:
            raise ValueError("mass and length must be positive")

    @property
    def com(self) -> float:
        return self.l1 / 2.0 if self.lc1 is None else self.lc1


@dataclass(frozen=True)
class TwoLinkParams:
    """Planar two-link arm; J1/J2 are the link inertias about their own joints."""

    m1: float = 6.0
    m2: float = 9.0
    l1: float = 0.4
    l2: float = 0.6
    J1: float = 0.32
    J2: float = 1.08

    def __post_init__(self) -> None:
        for v in (self.m1, self.m2, self.l1, self.l2, self.J1, self.J2):
            if v <= 0.0:
                raise ValueError("two-link parameters must be positive")


@dataclass(frozen=True)
class LinearMotorParams:
    """Vertical linear stage; rail friction is a bounded disturbance."""

    mass: float = 0.25                # moving stage, kg
    viscous: float = 0.0              # plant-side viscous coefficient, N s/m
    kappa: float = 1.0                # driver gain, command -> force
    friction_coulomb: float = 1.0     # N
    friction_viscous: float = 5.0     # N s/m
    g: float = 9.81

    def __post_init__(self) -> None:
        if self.mass <= 0.0 or self.viscous < 0.0:
            raise ValueError("mass must be positive and viscous nonnegative")


@dataclass(frozen=True)
class EnvironmentModel:
    """Unilateral spring surface at height y_s with Coulomb friction."""

    k_s: float = 0.0                  # N/m
    y_s: float = 0.0                  # m
    mu_fric: float = 0.0

    def __post_init__(self) -> None:
        if self.k_s < 0.0 or self.mu_fric < 0.0:
            raise ValueError("stiffness and friction coefficient must be nonnegative")


@dataclass
class PlantState:
    q: np.ndarray
    qd: np.ndarray

    def __post_init__(self) -> None:
        self.q = np.atleast_1d(np.asarray(self.q, dtype=float))
        self.qd = np.atleast_1d(np.asarray(self.qd, dtype=float))


@dataclass(frozen=True)
class DisturbanceModel:
    """Unmeasured generalized force fe(t, q, qd); must stay bounded.

    ``fe_scalar``, when provided for single-joint plants, is the same force as
    a float function of (t, q, qd) floats.
    """

    fe_fn: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    fe_scalar: Callable[[float, float, float], float] | None = None


class SimulationBlowUp(RuntimeError):
    """Non-finite plant state; carries the failing step index and time."""

    def __init__(self, step: int, t: float):
        super().__init__(f"simulation state became non-finite at step {step} (t = {t:.6f} s)")
        self.step = step
        self.t = t


def one_dof_model(params: OneDofParams = OneDofParams(), torque_limit: float = 3.0) -> ManipulatorModel:
    p = params
    lc = p.com
    js = p.m1 * p.l1 * p.l1 / 3.0

    def mass(q: np.ndarray) -> np.ndarray:
        m = js + p.m1 * lc * lc + p.mass_ripple * math.sin(q[0])
        if m <= 0.0:
            raise ValueError(f"inertia lost positivity at q = {q[0]:.4f}")
        return np.array([[m]])

    def coriolis(q: np.ndarray, qd: np.ndarray) -> np.ndarray:
        return np.array([[p.damping * math.cos(q[0])]])

    def gravity(q: np.ndarray) -> np.ndarray:
        return np.array([p.m1 * p.g * lc * math.cos(q[0])])

    def ee(q: np.ndarray) -> tuple[float, float]:
        return p.l1 * math.cos(q[0]), p.l1 * math.sin(q[0])

    def jac(q: np.ndarray) -> np.ndarray:
        return np.array([[-p.l1 * math.sin(q[0])], [p.l1 * math.cos(q[0])]])

    def terms(q: float, qd: float) -> tuple:
        s, c = math.sin(q), math.cos(q)
        m = js + p.m1 * lc * lc + p.mass_ripple * s
        if m <= 0.0:
            raise ValueError(f"inertia lost positivity at q = {q:.4f}")
        return (m, p.damping * c, p.m1 * p.g * lc * c,
                p.l1 * c, p.l1 * s, -p.l1 * s, p.l1 * c)

    return ManipulatorModel(1, mass, coriolis, gravity, ee, jac,
                            BoxConstraint([torque_limit]), name="one_dof",
                            scalar_terms=terms)


def two_link_model(params: TwoLinkParams = TwoLinkParams(),
                   torque_limits: tuple[float, float] = (3.0, 4.0)) -> ManipulatorModel:
    p = params
    lc1, lc2 = p.l1 / 2.0, p.l2 / 2.0
    ic1 = p.J1 - p.m1 * lc1 * lc1      # inertia about the link's own COM
    ic2 = p.J2 - p.m2 * lc2 * lc2

    def mass(q: np.ndarray) -> np.ndarray:
        c2 = math.cos(q[1])
        m11 = p.m1 * lc1 * lc1 + ic1 + ic2 + p.m2 * (p.l1 * p.l1 + lc2 * lc2 + 2.0 * p.l1 * lc2 * c2)
        m12 = p.m2 * (lc2 * lc2 + p.l1 * lc2 * c2) + ic2
        m22 = p.m2 * lc2 * lc2 + ic2
        return np.array([[m11, m12], [m12, m22]])

    def coriolis(q: np.ndarray, qd: np.ndarray) -> np.ndarray:
        # Christoffel form, so dM/dt - 2C stays skew-symmetric
        hh = -p.m2 * p.l1 * lc2 * math.sin(q[1])
        return np.array([[hh * qd[1], hh * (qd[0] + qd[1])], [-hh * qd[0], 0.0]])

    def gravity(q: np.ndarray) -> np.ndarray:
        # horizontal-plane arm: gravity acts along the joint axes
        return np.zeros(2)

    def ee(q: np.ndarray) -> tuple[float, float]:
        q12 = q[0] + q[1]
        return (p.l1 * math.cos(q[0]) + p.l2 * math.cos(q12),
                p.l1 * math.sin(q[0]) + p.l2 * math.sin(q12))

    def jac(q: np.ndarray) -> np.ndarray:
        s1, c1 = math.sin(q[0]), math.cos(q[0])
        s12, c12 = math.sin(q[0] + q[1]), math.cos(q[0] + q[1])
        return np.array([
            [-p.l1 * s1 - p.l2 * s12, -p.l2 * s12],
            [p.l1 * c1 + p.l2 * c12, p.l2 * c12],
        ])

    def terms(q1: float, q2: float, qd1: float, qd2: float) -> tuple:
        s1, c1 = math.sin(q1), math.cos(q1)
        s12, c12 = math.sin(q1 + q2), math.cos(q1 + q2)
        c2, s2 = math.cos(q2), math.sin(q2)
        m11 = p.m1 * lc1 * lc1 + ic1 + ic2 + p.m2 * (p.l1 * p.l1 + lc2 * lc2 + 2.0 * p.l1 * lc2 * c2)
        m12 = p.m2 * (lc2 * lc2 + p.l1 * lc2 * c2) + ic2
        m22 = p.m2 * lc2 * lc2 + ic2
        hh = -p.m2 * p.l1 * lc2 * s2
        return (m11, m12, m22, hh * qd2, hh * (qd1 + qd2), -hh * qd1, 0.0, 0.0, 0.0,
                p.l1 * c1 + p.l2 * c12, p.l1 * s1 + p.l2 * s12,
                -p.l1 * s1 - p.l2 * s12, -p.l2 * s12,
                p.l1 * c1 + p.l2 * c12, p.l2 * c12)

    return ManipulatorModel(2, mass, coriolis, gravity, ee, jac,
                            BoxConstraint(list(torque_limits)), name="two_link",
                            planar2_terms=terms)


def linear_motor_model(params: LinearMotorParams = LinearMotorParams(),
                       force_limit: float = 12.5) -> ManipulatorModel:
    p = params

    def mass(q: np.ndarray) -> np.ndarray:
        return np.array([[p.mass]])

    def coriolis(q: np.ndarray, qd: np.ndarray) -> np.ndarray:
        return np.array([[p.viscous]])

    def gravity(q: np.ndarray) -> np.ndarray:
        return np.array([p.mass * p.g])

    def ee(q: np.ndarray) -> tuple[float, float]:
        return 0.0, q[0]

    def jac(q: np.ndarray) -> np.ndarray:
        return np.array([[0.0], [1.0]])

    weight = p.mass * p.g

    def terms(q: float, qd: float) -> tuple:
        return p.mass, p.viscous, weight, 0.0, q, 0.0, 1.0

    return ManipulatorModel(1, mass, coriolis, gravity, ee, jac,
                            BoxConstraint([force_limit]), input_gain=p.kappa,
                            name="linear_motor", scalar_terms=terms)


def linear_motor_friction(params: LinearMotorParams) -> DisturbanceModel:
    """Rail friction and cogging stand-in: Coulomb level plus viscous term."""
    p = params

    def fe_scalar(t: float, q: float, qd: float) -> float:
        return -(p.friction_coulomb * sign0(qd) + p.friction_viscous * qd)

    def fe(t: float, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
        return np.array([fe_scalar(t, q[0], qd[0])])

    return DisturbanceModel(fe, fe_scalar=fe_scalar)


def double_integrator_model(mass: float = 1.0, force_limit: float = 50.0) -> ManipulatorModel:
    """Frictionless unit stage used by the inner-loop benchmarks."""

    def mass_fn(q: np.ndarray) -> np.ndarray:
        return np.array([[mass]])

    def zero_mat(q: np.ndarray, qd: np.ndarray = None) -> np.ndarray:
        return np.array([[0.0]])

    def zero_vec(q: np.ndarray) -> np.ndarray:
        return np.zeros(1)

    def ee(q: np.ndarray) -> tuple[float, float]:
        return 0.0, q[0]

    def jac(q: np.ndarray) -> np.ndarray:
        return np.array([[0.0], [1.0]])

    def terms(q: float, qd: float) -> tuple:
        return mass, 0.0, 0.0, 0.0, q, 0.0, 1.0

    return ManipulatorModel(1, mass_fn, zero_mat, zero_vec, ee, jac,
                            BoxConstraint([force_limit]), name="double_integrator",
                            scalar_terms=terms)


def contact_wrench(ee_pos: tuple[float, float], ee_vel: tuple[float, float],
                   env: EnvironmentModel) -> tuple[float, float]:
    """Planar contact force at the end-effector.

    Normal component fy = max(0, k_s*(y_s - y)) is the unilateral spring;
    tangential fx = -mu*fy*sign(xdot) is Coulomb friction, zero out of contact.
    """
    fy = max(0.0, env.k_s * (env.y_s - ee_pos[1]))
    if fy == 0.0:
        return 0.0, 0.0
    fx = -env.mu_fric * fy * sign0(ee_vel[0])
    return fx, fy


def joint_contact_torque(model: ManipulatorModel, q: np.ndarray,
                         wrench: tuple[float, float]) -> np.ndarray:
    """Map a planar end-effector wrench to joint space through J^T."""
    jac = model.jacobian_fn(q)
    w = np.asarray(wrench, dtype=float)
    if w.shape[0] != jac.shape[0]:
        raise ValueError("wrench dimension does not match the Jacobian rows")
    return jac.T @ w


def _solve_mass(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    n = rhs.shape[0]
    if n == 1:
        return rhs / M[0, 0]
    if n == 2:
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if det == 0.0:
            raise np.linalg.LinAlgError("singular mass matrix")
        return np.array([
            (M[1, 1] * rhs[0] - M[0, 1] * rhs[1]) / det,
            (M[0, 0] * rhs[1] - M[1, 0] * rhs[0]) / det,
        ])
    return np.linalg.solve(M, rhs)


def forward_dynamics(model: ManipulatorModel, state: PlantState, tau: np.ndarray,
                     fc: np.ndarray, fe: np.ndarray) -> np.ndarray:
    """Joint accelerations: M^{-1} (gain*tau + fc + fe - C qd - G)."""
    M = model.mass_fn(state.q)
    C = model.coriolis_fn(state.q, state.qd)
    G = model.gravity_fn(state.q)
    rhs = model.input_gain * tau + fc + fe - C @ state.qd - G
    return _solve_mass(M, rhs)


def _integrate_scalar(model: ManipulatorModel, q0: float, qd0: float, tau: float,
                      env: EnvironmentModel, disturbance: DisturbanceModel | None,
                      t: float, dt: float, n_sub: int) -> tuple[float, float]:
    terms = model.scalar_terms
    fe_fn = disturbance.fe_scalar if disturbance is not None else None
    ks, ys, mu = env.k_s, env.y_s, env.mu_fric
    gain = model.input_gain
    q, qd = q0, qd0
    for _ in range(n_sub):
        m, c, g, _, ey, jx, jy = terms(q, qd)
        fc = 0.0
        fy = ks * (ys - ey)
        if fy > 0.0:
            fx = -mu * fy * sign0(jx * qd)
            fc = jx * fx + jy * fy
        fe = fe_fn(t, q, qd) if fe_fn is not None else 0.0
        qd += dt * (gain * tau + fc + fe - c * qd - g) / m
        q += dt * qd
        t += dt
    return q, qd


def _integrate_planar2(model: ManipulatorModel, state: PlantState, tau: tuple,
                       env: EnvironmentModel, dt: float, n_sub: int) -> tuple:
    terms = model.planar2_terms
    ks, ys, mu = env.k_s, env.y_s, env.mu_fric
    g1t, g2t = model.input_gain * tau[0], model.input_gain * tau[1]
    q1, q2 = float(state.q[0]), float(state.q[1])
    qd1, qd2 = float(state.qd[0]), float(state.qd[1])
    for _ in range(n_sub):
        (m11, m12, m22, c11, c12, c21, c22, g1, g2,
         ex, ey, j11, j12, j21, j22) = terms(q1, q2, qd1, qd2)
        fc1 = fc2 = 0.0
        fy = ks * (ys - ey)
        if fy > 0.0:
            fx = -mu * fy * sign0(j11 * qd1 + j12 * qd2)
            fc1 = j11 * fx + j21 * fy
            fc2 = j12 * fx + j22 * fy
        r1 = g1t + fc1 - c11 * qd1 - c12 * qd2 - g1
        r2 = g2t + fc2 - c21 * qd1 - c22 * qd2 - g2
        det = m11 * m22 - m12 * m12
        qd1 += dt * (m22 * r1 - m12 * r2) / det
        qd2 += dt * (m11 * r2 - m12 * r1) / det
        q1 += dt * qd1
        q2 += dt * qd2
    return q1, q2, qd1, qd2


def integrate_substep(model: ManipulatorModel, state: PlantState, tau_held: np.ndarray,
                      env: EnvironmentModel, disturbance: DisturbanceModel | None,
                      t: float, dt_sub: float, n_sub: int) -> PlantState:
    """Advance the plant by n_sub semi-implicit Euler substeps under held torque.

    The contact wrench is re-evaluated every substep; the commanded torque is a
    zero-order hold over the whole controller period.
    """
    if model.scalar_terms is not None and model.dof == 1 and (
            disturbance is None or disturbance.fe_scalar is not None):
        q1, qd1 = _integrate_scalar(model, float(state.q[0]), float(state.qd[0]),
                                    float(tau_held[0]), env, disturbance, t, dt_sub, n_sub)
        if not (math.isfinite(q1) and math.isfinite(qd1)):
            raise SimulationBlowUp(step=-1, t=t)
        return PlantState(np.array([q1]), np.array([qd1]))

    if model.planar2_terms is not None and model.dof == 2 and disturbance is None:
        out = _integrate_planar2(model, state, (float(tau_held[0]), float(tau_held[1])),
                                 env, dt_sub, n_sub)
        if not all(math.isfinite(v) for v in out):
            raise SimulationBlowUp(step=-1, t=t)
        return PlantState(np.array(out[:2]), np.array(out[2:]))

    q = state.q.copy()
    qd = state.qd.copy()
    zero = np.zeros(model.dof)
    for _ in range(n_sub):
        ee = model.ee_pose_fn(q)
        jac = model.jacobian_fn(q)
        ee_vel = jac @ qd
        fx, fy = contact_wrench(ee, (ee_vel[0], ee_vel[1]), env)
        fc = jac.T @ np.array([fx, fy]) if fy != 0.0 else zero
        fe = disturbance.fe_fn(t, q, qd) if disturbance is not None else zero
        M = model.mass_fn(q)
        C = model.coriolis_fn(q, qd)
        G = model.gravity_fn(q)
        qdd = _solve_mass(M, model.input_gain * tau_held + fc + fe - C @ qd - G)
        qd = qd + dt_sub * qdd
        q = q + dt_sub * qd
        t += dt_sub
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
        raise SimulationBlowUp(step=-1, t=t)
    return PlantState(q, qd)
