import math
import random

import numpy as np
import pytest
from scipy.linalg import expm

from lumped_pid.errors import (
    AttitudeSingularityError,
    ConfigError,
    DegenerateThrustError,
    GimbalDegenerateError,
    NonSkewError,
)
from lumped_pid.plants.vtol import (
    RigidBodyState,
    VtolController,
    VtolParams,
    HoverRef,
    advance_rigid_body,
    attitude_error,
    desired_attitude,
    vtol_derivative,
)
from lumped_pid.signals import Constant
from lumped_pid.sim import Scenario, run_scenario
from lumped_pid import so3


def params(m=1.0, g=9.81, J=(0.02, 0.02, 0.04), d_f=None, d_tau=None):
    return VtolParams(mass=m, gravity=g, inertia=np.diag(J), d_f=d_f, d_tau=d_tau)


class TestHatVee:
    def test_hat_zero(self):
        assert np.array_equal(so3.hat([0.0, 0.0, 0.0]), np.zeros((3, 3)))

    def test_hat_display(self):
        expected = np.array([[0.0, -3.0, 2.0], [3.0, 0.0, -1.0], [-2.0, 1.0, 0.0]])
        assert np.array_equal(so3.hat([1.0, 2.0, 3.0]), expected)

    def test_hat_is_cross_product(self):
        rng = random.Random(3)
        for _ in range(20):
            v = np.array([rng.uniform(-2, 2) for _ in range(3)])
            w = np.array([rng.uniform(-2, 2) for _ in range(3)])
            assert np.allclose(so3.hat(v) @ w, np.cross(v, w), atol=1e-15)

    def test_vee_inverts_hat(self):
        rng = random.Random(11)
        for _ in range(100):
            v = np.array([rng.uniform(-5, 5) for _ in range(3)])
            assert np.array_equal(so3.vee(so3.hat(v)), v)

    def test_vee_rejects_non_skew(self):
        with pytest.raises(NonSkewError):
            so3.vee(np.eye(3))


class TestRodrigues:
    def test_matches_matrix_exponential(self):
        rng = random.Random(8)
        for _ in range(20):
            r = np.array([rng.uniform(-2, 2) for _ in range(3)])
            assert np.allclose(so3.rodrigues(r), expm(so3.hat(r)), atol=1e-12)

    def test_small_angle_series(self):
        r = np.array([1e-9, -2e-9, 5e-10])
        assert np.allclose(so3.rodrigues(r), expm(so3.hat(r)), atol=1e-15)

    def test_orthonormalize_repairs_drift(self):
        R = so3.rodrigues([0.3, -0.1, 0.7]) + 1e-6 * np.ones((3, 3))
        fixed = so3.orthonormalize(R)
        assert np.linalg.norm(fixed.T @ fixed - np.eye(3)) < 1e-14
        assert np.linalg.det(fixed) == pytest.approx(1.0, abs=1e-14)


class TestVtolDerivative:
    def test_hover_equilibrium(self):
        p = params()
        state = RigidBodyState.at_rest()
        f = p.mass * p.gravity
        p_dot, v_dot, r_dot, w_dot = vtol_derivative(state, f, np.zeros(3), p, 0.0)
        for arr in (p_dot, v_dot, w_dot):
            assert np.linalg.norm(arr) < 1e-12
        assert np.linalg.norm(r_dot) < 1e-12

    def test_free_fall(self):
        p = params()
        state = RigidBodyState.at_rest()
        _, v_dot, _, _ = vtol_derivative(state, 0.0, np.zeros(3), p, 0.0)
        assert np.allclose(v_dot, [0.0, 0.0, p.gravity])

    def test_principal_axis_spin_has_zero_angular_acceleration(self):
        p = params()
        state = RigidBodyState.at_rest()
        state.omega = np.array([0.0, 0.0, 3.0])  # aligned with a principal axis
        _, _, _, w_dot = vtol_derivative(state, 0.0, np.zeros(3), p, 0.0)
        assert np.linalg.norm(w_dot) < 1e-14

    def test_disturbance_enters_translation(self):
        p = params(d_f=(Constant(0.5), Constant(0.0), Constant(0.0)))
        state = RigidBodyState.at_rest()
        _, v_dot, _, _ = vtol_derivative(state, p.mass * p.gravity, np.zeros(3), p, 0.0)
        assert v_dot[0] == pytest.approx(0.5)

    def test_inertia_validation(self):
        with pytest.raises(ConfigError):
            VtolParams(mass=1.0, gravity=9.81, inertia=np.diag([1.0, -1.0, 1.0]))
        with pytest.raises(ConfigError):
            VtolParams(mass=0.0, gravity=9.81, inertia=np.eye(3))


class TestAttitudeError:
    def test_zero_error_rotation(self):
        R = so3.rodrigues([0.2, 0.1, -0.3])
        omega = np.array([0.4, -0.2, 0.1])
        err = attitude_error(R, R, omega, np.zeros(3))
        assert np.allclose(err.g_tilde, 0.0, atol=1e-15)
        assert np.allclose(err.G, 0.5 * np.eye(3), atol=1e-15)
        assert np.allclose(err.g_tilde_dot, 0.5 * omega, atol=1e-15)

    def test_small_yaw_gives_half_angle_tangent(self):
        # oracle: direct construction at phi = 0.02
        phi = 0.02
        R_d = np.eye(3)
        R = so3.rodrigues([0.0, 0.0, phi])
        err = attitude_error(R, R_d, np.zeros(3), np.zeros(3))
        assert err.g_tilde[2] == pytest.approx(math.tan(phi / 2), rel=1e-12)
        assert abs(err.g_tilde[0]) < 1e-15 and abs(err.g_tilde[1]) < 1e-15

    def test_rate_matches_finite_difference(self):
        # g~(t) from R(t) = R0 expm(hat(w) t) against g~_dot = G w~
        R0 = so3.rodrigues([0.3, -0.2, 0.4])
        omega = (0.7, 0.3, -0.5)
        R_d = so3.rodrigues([0.1, 0.0, -0.2])
        h = 1e-5
        for t in (0.0, 0.3, 0.9):
            R_t = R0 @ so3.rodrigues(np.array(omega) * t)
            R_h = R0 @ so3.rodrigues(np.array(omega) * (t + h))
            e_t = attitude_error(R_t, R_d, np.array(omega), np.zeros(3))
            e_h = attitude_error(R_h, R_d, np.array(omega), np.zeros(3))
            fd = (e_h.g_tilde - e_t.g_tilde) / h
            scale = np.linalg.norm(e_t.g_tilde_dot)
            assert np.linalg.norm(fd - e_t.g_tilde_dot) / scale < 1e-3

    def test_singularity_detected(self):
        R = so3.rodrigues([math.pi, 0.0, 0.0])  # tr(R~) = -1
        with pytest.raises(AttitudeSingularityError):
            attitude_error(R, np.eye(3), np.zeros(3), np.zeros(3))


class TestDesiredAttitude:
    def test_hover_alignment(self):
        F_d = np.array([0.0, 0.0, 9.81])
        R_d, f = desired_attitude(F_d, 0.0, np.eye(3))
        assert np.linalg.norm(R_d.T @ R_d - np.eye(3)) < 1e-12
        assert np.allclose(R_d @ np.array([0, 0, 1.0]), F_d / np.linalg.norm(F_d), atol=1e-12)
        assert np.allclose(R_d, np.eye(3), atol=1e-12)
        assert f == pytest.approx(9.81)

    def test_columns_orthonormal_for_random_inputs(self):
        rng = random.Random(17)
        for _ in range(50):
            F_d = np.array([rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(2, 12)])
            psi = rng.uniform(-math.pi, math.pi)
            R_d, _ = desired_attitude(F_d, psi, np.eye(3))
            assert np.linalg.norm(R_d.T @ R_d - np.eye(3)) < 1e-12
            assert np.linalg.det(R_d) == pytest.approx(1.0, abs=1e-12)

    def test_thrust_is_norm_when_aligned(self):
        F_d = np.array([1.0, -2.0, 9.0])
        R_d, _ = desired_attitude(F_d, 0.3, np.eye(3))
        _, f = desired_attitude(F_d, 0.3, R_d)
        assert f == pytest.approx(np.linalg.norm(F_d), rel=1e-12)

    def test_degenerate_thrust(self):
        with pytest.raises(DegenerateThrustError):
            desired_attitude(np.zeros(3), 0.0, np.eye(3))

    def test_gimbal_degenerate(self):
        with pytest.raises(GimbalDegenerateError):
            desired_attitude(np.array([5.0, 0.0, 0.0]), 0.0, np.eye(3))


class TestRigidBodyIntegration:
    def test_pure_spin_matches_exact_rotation(self):
        m, g = 1.0, 0.0  # gravity off; thrust zero
        J9 = so3.flatten9(np.diag([0.02, 0.02, 0.04]))
        Jinv9 = so3.inv3(J9)
        zero3 = lambda t: (0.0, 0.0, 0.0)
        w = (0.0, 0.0, 2.0)
        p, v, R9 = (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), so3.IDENTITY9
        dt = 1e-3
        for k in range(1000):
            p, v, R9, w = advance_rigid_body(p, v, R9, w, 0.0, (0.0, 0.0, 0.0),
                                             k * dt, dt, m, g, J9, Jinv9, zero3, zero3)
        exact = so3.rodrigues([0.0, 0.0, 2.0 * 1.0])
        got = np.array(R9).reshape(3, 3)
        assert np.allclose(got, exact, atol=1e-9)
        assert so3.ortho_error3(R9) < 1e-12

    def test_free_fall_kinematics(self):
        m, g = 2.0, 9.81
        J9 = so3.flatten9(np.diag([0.02, 0.02, 0.04]))
        Jinv9 = so3.inv3(J9)
        zero3 = lambda t: (0.0, 0.0, 0.0)
        p, v, R9, w = (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), so3.IDENTITY9, (0.0, 0.0, 0.0)
        dt = 1e-2
        for k in range(100):
            p, v, R9, w = advance_rigid_body(p, v, R9, w, 0.0, (0.0, 0.0, 0.0),
                                             k * dt, dt, m, g, J9, Jinv9, zero3, zero3)
        assert v[2] == pytest.approx(9.81, rel=1e-12)
        assert p[2] == pytest.approx(0.5 * 9.81, rel=1e-12)


class TestVtolController:
    def test_perfect_hover_outputs_weight_and_zero_torque(self):
        p = params()
        ctrl = VtolController(p, HoverRef((0.0, 0.0, 0.0)), dt=1e-3,
                              omega_pos=2.0, omega_f=8.0, omega_att=10.0, omega_tau=20.0)
        f, tau = ctrl.compute(0.0, (0.0, 0.0, 0.0), (0.0, 0.0, 0.0), so3.IDENTITY9,
                              (0.0, 0.0, 0.0))
        assert f == pytest.approx(p.mass * p.gravity, rel=1e-15)
        assert all(abs(x) < 1e-15 for x in tau)

    def test_rejects_bad_bandwidths(self):
        p = params()
        with pytest.raises(ConfigError):
            VtolController(p, HoverRef((0, 0, 0)), 1e-3, 0.0, 8.0, 10.0, 20.0)


def vtol_scenario(**overrides):
    base = dict(
        plant_kind="vtol",
        plant={"mass": 1.0, "gravity": 9.81, "inertia": (0.02, 0.02, 0.04),
               "reference": {"kind": "hover", "position": (0.0, 0.0, 0.0)}},
        controller={"omega": 2.0, "omega_f": 8.0, "omega_att": 10.0, "omega_tau": 20.0},
        disturbance={},
        dt=1e-3,
        duration=2.0,
        seed=0,
    )
    base.update(overrides)
    return Scenario(**base)


class TestVtolScenario:
    def test_hover_stays_put(self):
        trace = run_scenario(vtol_scenario(duration=1.0))
        assert np.max(trace["err_norm"]) < 1e-9
        assert np.max(trace["ortho_err"]) < 1e-9

    def test_wind_rejection_short(self):
        scenario = vtol_scenario(
            disturbance={"force": (Constant(0.5), Constant(0.0), Constant(0.0))},
            duration=8.0,
        )
        trace = run_scenario(scenario)
        peak = np.max(trace["err_norm"])
        tail = trace["err_norm"][trace.t >= 6.0]
        assert peak > 1e-4  # the wind actually pushed it off
        assert np.max(tail) < 0.01 * peak
        # observer converges to d_f / m
        assert trace["dfhx"][-1] == pytest.approx(0.5, abs=0.01)
        assert np.max(trace["ortho_err"]) <= 1e-9

    def test_circle_tracking_error_shrinks_with_bandwidth(self):
        errors = []
        for omega in (2.0, 4.0):
            scenario = vtol_scenario(
                plant={"mass": 1.0, "gravity": 9.81, "inertia": (0.02, 0.02, 0.04),
                       "reference": {"kind": "circle", "radius": 1.0, "omega": 1.0,
                                     "height": 0.0}},
                controller={"omega": omega, "omega_f": 4.0 * omega,
                            "omega_att": 5.0 * omega, "omega_tau": 10.0 * omega},
                duration=10.0,
            )
            trace = run_scenario(scenario)
            errors.append(np.max(trace["err_norm"][trace.t >= 6.0]))
        assert errors[1] < errors[0]
