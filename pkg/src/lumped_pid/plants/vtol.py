"""Underactuated VTOL rigid body: model, tracking controller, runner.

Dynamics (e3 = [0,0,1], gravity along +e3, thrust along -R e3):

    p_dot = v
    m v_dot = m g e3 - f R e3 + d_f
    R_dot = R hat(omega)
    J omega_dot = -omega x (J omega) + tau + d_tau

The controller splits both loops into state feedback plus a first-order
disturbance observer. The translational loop produces a desired force F_d,
from which the desired attitude and the thrust are extracted by projection;
the attitude loop works on the error-rotation vector g~ = (R~ - R~^T)^vee /
(tr R~ + 1) with R~ = R_d^T R. The desired angular velocity comes from a
finite difference of R_d across controller steps; its error is absorbed into
the lumped torque disturbance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import so3
from ..errors import (
    AttitudeSingularityError,
    ConfigError,
    DegenerateThrustError,
    GimbalDegenerateError,
)
from ..quadrature import RECTANGULAR, RULES
from ..sim import Scenario, SimTrace, TraceRecorder, check_state
from ..signals import noise_table, sample_triple
from ..so3 import (
    add3,
    cross3,
    det3,
    dot3,
    gram_schmidt3,
    hat3,
    inv3,
    mat_mul,
    mat_tmul,
    mat_tvec,
    mat_vec,
    norm3,
    ortho_error3,
    rodrigues3,
    scale3,
    sub3,
    trace,
)

THRUST_EPS = 1e-8      # smallest ||F_d|| that still defines a thrust axis
CROSS_EPS = 1e-8       # smallest ||b3d x b_d|| before the heading degenerates
TRACE_SINGULARITY = 1e-6  # tr(R~) + 1 below this is the g~ singularity


@dataclass(frozen=True)
class VtolParams:
    mass: float
    gravity: float
    inertia: np.ndarray  # 3x3, symmetric positive definite
    d_f: tuple = None    # triple of scalar signals [N]
    d_tau: tuple = None  # triple of scalar signals [N m]

    def __post_init__(self):
        if not (self.mass > 0.0):
            raise ConfigError(f"plant.mass: must be positive, got {self.mass!r}")
        J = np.asarray(self.inertia, dtype=float)
        if J.shape != (3, 3):
            raise ConfigError("plant.inertia: expected a 3x3 matrix")
        if not np.allclose(J, J.T, atol=1e-12):
            raise ConfigError("plant.inertia: must be symmetric")
        if np.any(np.linalg.eigvalsh(J) <= 0.0):
            raise ConfigError("plant.inertia: must be positive definite")
        object.__setattr__(self, "inertia", J)


@dataclass
class RigidBodyState:
    p: np.ndarray
    v: np.ndarray
    R: np.ndarray
    omega: np.ndarray

    @classmethod
    def at_rest(cls, p=(0.0, 0.0, 0.0)):
        return cls(np.asarray(p, float), np.zeros(3), np.eye(3), np.zeros(3))


@dataclass(frozen=True)
class AttitudeError:
    g_tilde: np.ndarray
    g_tilde_dot: np.ndarray
    G: np.ndarray
    omega_tilde: np.ndarray


def _accel_core(v, R9, w, f, tau, mass, g, J9, Jinv9, d_f, d_tau):
    """Scalar-core (v_dot, omega_dot); the integrator advances R separately."""
    inv_m = 1.0 / mass
    v_dot = (
        (-f * R9[2] + d_f[0]) * inv_m,
        (-f * R9[5] + d_f[1]) * inv_m,
        g + (-f * R9[8] + d_f[2]) * inv_m,
    )
    jw = mat_vec(J9, w)
    gyro = cross3(w, jw)
    w_dot = mat_vec(
        Jinv9,
        (tau[0] - gyro[0] + d_tau[0], tau[1] - gyro[1] + d_tau[1], tau[2] - gyro[2] + d_tau[2]),
    )
    return v_dot, w_dot


def vtol_derivative(state: RigidBodyState, f: float, tau, params: VtolParams, t: float):
    """(p_dot, v_dot, R_dot, omega_dot) of the four-equation model at time t."""
    d_f = sample_triple(params.d_f, t) if params.d_f else (0.0, 0.0, 0.0)
    d_tau = sample_triple(params.d_tau, t) if params.d_tau else (0.0, 0.0, 0.0)
    J9 = so3.flatten9(params.inertia)
    R9 = so3.flatten9(state.R)
    w = tuple(state.omega)
    v_dot, w_dot = _accel_core(
        tuple(state.v), R9, w, float(f), tuple(np.asarray(tau, float)),
        params.mass, params.gravity, J9, inv3(J9), d_f, d_tau,
    )
    r_dot = mat_mul(R9, hat3(w))
    return (
        np.asarray(state.v, float).copy(),
        np.asarray(v_dot, float),
        np.asarray(r_dot, float).reshape(3, 3),
        np.asarray(w_dot, float),
    )


def _desired_attitude_core(F_d, psi_d):
    nF = norm3(F_d)
    if nF <= THRUST_EPS:
        raise DegenerateThrustError(f"||F_d|| = {nF:g} too small to define a thrust axis")
    b3 = scale3(1.0 / nF, F_d)
    b_head = (math.cos(psi_d), math.sin(psi_d), 0.0)
    c = cross3(b3, b_head)
    nc = norm3(c)
    if nc <= CROSS_EPS:
        raise GimbalDegenerateError("thrust axis is parallel to the heading vector")
    b2 = scale3(1.0 / nc, c)
    b1 = cross3(b2, b3)
    return (b1[0], b2[0], b3[0], b1[1], b2[1], b3[1], b1[2], b2[2], b3[2]), nF


def desired_attitude(F_d, psi_d: float, R) -> tuple[np.ndarray, float]:
    """Desired rotation R_d = [b2d x b3d, (b3d x b_d)/||.||, F_d/||F_d||] and
    the thrust f = e3^T R^T F_d projected through the current attitude."""
    Fd = tuple(np.asarray(F_d, float))
    Rd9, _ = _desired_attitude_core(Fd, float(psi_d))
    R9 = so3.flatten9(R)
    f = dot3((R9[2], R9[5], R9[8]), Fd)
    return np.asarray(Rd9).reshape(3, 3), f


def _attitude_error_core(R9, Rd9, w, wd):
    Rt = mat_tmul(Rd9, R9)  # R~ = R_d^T R
    denom = trace(Rt) + 1.0
    if denom < TRACE_SINGULARITY:
        raise AttitudeSingularityError(f"tr(R~)+1 = {denom:g} below {TRACE_SINGULARITY:g}")
    g_t = (
        (Rt[7] - Rt[5]) / denom,
        (Rt[2] - Rt[6]) / denom,
        (Rt[3] - Rt[1]) / denom,
    )
    # G = (I + hat(g) + g g^T)/2
    gx, gy, gz = g_t
    G = (
        0.5 * (1.0 + gx * gx), 0.5 * (-gz + gx * gy), 0.5 * (gy + gx * gz),
        0.5 * (gz + gy * gx), 0.5 * (1.0 + gy * gy), 0.5 * (-gx + gy * gz),
        0.5 * (-gy + gz * gx), 0.5 * (gx + gz * gy), 0.5 * (1.0 + gz * gz),
    )
    w_t = sub3(w, mat_tvec(Rt, wd))
    g_dot = mat_vec(G, w_t)
    return g_t, g_dot, G, w_t


def attitude_error(R, R_d, omega, omega_d) -> AttitudeError:
    """Error-rotation vector g~, its rate g~_dot = G omega~, and G."""
    g_t, g_dot, G, w_t = _attitude_error_core(
        so3.flatten9(R), so3.flatten9(R_d),
        tuple(np.asarray(omega, float)), tuple(np.asarray(omega_d, float)),
    )
    return AttitudeError(
        g_tilde=np.asarray(g_t),
        g_tilde_dot=np.asarray(g_dot),
        G=np.asarray(G).reshape(3, 3),
        omega_tilde=np.asarray(w_t),
    )


class Reference:
    """Position/heading reference with velocity (accelerations are lumped)."""

    def position(self, t):  # pragma: no cover - interface
        raise NotImplementedError

    def velocity(self, t):  # pragma: no cover - interface
        raise NotImplementedError

    def heading(self, t) -> float:
        return 0.0


class HoverRef(Reference):
    def __init__(self, p, psi=0.0):
        self.p = tuple(float(x) for x in p)
        self.psi = float(psi)

    def position(self, t):
        return self.p

    def velocity(self, t):
        return (0.0, 0.0, 0.0)

    def heading(self, t):
        return self.psi


class CircleRef(Reference):
    def __init__(self, radius, omega, height, psi=0.0):
        self.radius = float(radius)
        self.omega = float(omega)
        self.height = float(height)
        self.psi = float(psi)

    def position(self, t):
        return (self.radius * math.cos(self.omega * t),
                self.radius * math.sin(self.omega * t), self.height)

    def velocity(self, t):
        rw = self.radius * self.omega
        return (-rw * math.sin(self.omega * t), rw * math.cos(self.omega * t), 0.0)

    def heading(self, t):
        return self.psi


class LissajousRef(Reference):
    def __init__(self, amplitude, freq, phase, height, psi=0.0):
        self.amplitude = tuple(float(a) for a in amplitude)
        self.freq = tuple(float(f) for f in freq)
        self.phase = tuple(float(p) for p in phase)
        self.height = float(height)
        self.psi = float(psi)

    def position(self, t):
        a, f, ph = self.amplitude, self.freq, self.phase
        return (a[0] * math.sin(f[0] * t + ph[0]),
                a[1] * math.sin(f[1] * t + ph[1]),
                self.height + a[2] * math.sin(f[2] * t + ph[2]))

    def velocity(self, t):
        a, f, ph = self.amplitude, self.freq, self.phase
        return (a[0] * f[0] * math.cos(f[0] * t + ph[0]),
                a[1] * f[1] * math.cos(f[1] * t + ph[1]),
                a[2] * f[2] * math.cos(f[2] * t + ph[2]))

    def heading(self, t):
        return self.psi


class VtolController:
    """Translational + attitude loops with per-loop equal-pole gains
    (k0 = omega^2, k1 = 2 omega) and per-loop disturbance observers."""

    def __init__(self, params: VtolParams, reference: Reference, dt: float,
                 omega_pos: float, omega_f: float, omega_att: float, omega_tau: float,
                 rule: str = RECTANGULAR):
        for name, val in (("omega", omega_pos), ("omega_f", omega_f),
                          ("omega_att", omega_att), ("omega_tau", omega_tau)):
            if not (val > 0.0):
                raise ConfigError(f"controller.{name}: must be positive, got {val!r}")
        if rule not in RULES:
            raise ConfigError(f"unknown quadrature rule {rule!r}")
        if rule != RECTANGULAR:
            raise ConfigError("vtol controller supports the rectangular rule only")
        self.params = params
        self.reference = reference
        self.dt = dt
        self.k0_pos = omega_pos * omega_pos
        self.k1_pos = 2.0 * omega_pos
        self.k0_att = omega_att * omega_att
        self.k1_att = 2.0 * omega_att
        self.omega_f = omega_f
        self.omega_tau = omega_tau
        self._J9 = so3.flatten9(params.inertia)
        self._int_F = (0.0, 0.0, 0.0)
        self._prev_Fx = (0.0, 0.0, 0.0)
        self._int_T = (0.0, 0.0, 0.0)
        self._prev_Tx = (0.0, 0.0, 0.0)
        self._started = False
        self._prev_Rd = None
        # last-step diagnostics
        self.d_f_hat = (0.0, 0.0, 0.0)
        self.d_tau_hat = (0.0, 0.0, 0.0)
        self.p_err = (0.0, 0.0, 0.0)

    def compute(self, t, p, v, R9, w):
        dt = self.dt
        g = self.params.gravity
        m = self.params.mass
        p_err = sub3(p, self.reference.position(t))
        v_err = sub3(v, self.reference.velocity(t))
        psi_d = self.reference.heading(t)

        F_x = (
            -self.k0_pos * p_err[0] - self.k1_pos * v_err[0],
            -self.k0_pos * p_err[1] - self.k1_pos * v_err[1],
            -self.k0_pos * p_err[2] - self.k1_pos * v_err[2],
        )
        if self._started:
            self._int_F = add3(self._int_F, scale3(dt, self._prev_Fx))
        self._prev_Fx = F_x
        d_f_hat = scale3(self.omega_f, sub3(v_err, self._int_F))
        F_d = (
            -m * (F_x[0] - d_f_hat[0]),
            -m * (F_x[1] - d_f_hat[1]),
            -m * (F_x[2] - d_f_hat[2] - g),
        )

        Rd9, _ = _desired_attitude_core(F_d, psi_d)
        f = dot3((R9[2], R9[5], R9[8]), F_d)

        if self._prev_Rd is None:
            w_d = (0.0, 0.0, 0.0)
        else:
            S = mat_tmul(Rd9, sub9(Rd9, self._prev_Rd))
            inv2dt = 0.5 / dt
            w_d = ((S[7] - S[5]) * inv2dt, (S[2] - S[6]) * inv2dt, (S[3] - S[1]) * inv2dt)
        self._prev_Rd = Rd9

        g_t, g_dot, G, _ = _attitude_error_core(R9, Rd9, w, w_d)
        tau_x = (
            -self.k0_att * g_t[0] - self.k1_att * g_dot[0],
            -self.k0_att * g_t[1] - self.k1_att * g_dot[1],
            -self.k0_att * g_t[2] - self.k1_att * g_dot[2],
        )
        if self._started:
            self._int_T = add3(self._int_T, scale3(dt, self._prev_Tx))
        self._prev_Tx = tau_x
        d_tau_hat = scale3(self.omega_tau, sub3(g_dot, self._int_T))
        tau = mat_vec(self._J9, mat_vec(inv3(G), sub3(tau_x, d_tau_hat)))

        self._started = True
        self.d_f_hat = d_f_hat
        self.d_tau_hat = d_tau_hat
        self.p_err = p_err
        return f, tau


def sub9(a, b):
    return tuple(x - y for x, y in zip(a, b))


def advance_rigid_body(p, v, R9, w, f, tau, t, dt, mass, g, J9, Jinv9, d_f_eval, d_tau_eval):
    """One integration step: RK4 on (p, v, omega) with the rotation carried to
    stage times by the Rodrigues exponential, then a full-step exponential
    with the RK4-averaged angular velocity and Gram-Schmidt cleanup."""
    half = 0.5 * dt
    df0, df_m, df1 = d_f_eval(t), d_f_eval(t + half), d_f_eval(t + dt)
    dt0, dt_m, dt1 = d_tau_eval(t), d_tau_eval(t + half), d_tau_eval(t + dt)

    R_mid = mat_mul(R9, rodrigues3(scale3(half, w)))
    R_end = mat_mul(R9, rodrigues3(scale3(dt, w)))

    a1, al1 = _accel_core(v, R9, w, f, tau, mass, g, J9, Jinv9, df0, dt0)
    v2 = add3(v, scale3(half, a1))
    w2 = add3(w, scale3(half, al1))
    a2, al2 = _accel_core(v2, R_mid, w2, f, tau, mass, g, J9, Jinv9, df_m, dt_m)
    v3 = add3(v, scale3(half, a2))
    w3 = add3(w, scale3(half, al2))
    a3, al3 = _accel_core(v3, R_mid, w3, f, tau, mass, g, J9, Jinv9, df_m, dt_m)
    v4 = add3(v, scale3(dt, a3))
    w4 = add3(w, scale3(dt, al3))
    a4, al4 = _accel_core(v4, R_end, w4, f, tau, mass, g, J9, Jinv9, df1, dt1)

    sixth = dt / 6.0
    p_new = (
        p[0] + sixth * (v[0] + 2.0 * (v2[0] + v3[0]) + v4[0]),
        p[1] + sixth * (v[1] + 2.0 * (v2[1] + v3[1]) + v4[1]),
        p[2] + sixth * (v[2] + 2.0 * (v2[2] + v3[2]) + v4[2]),
    )
    v_new = (
        v[0] + sixth * (a1[0] + 2.0 * (a2[0] + a3[0]) + a4[0]),
        v[1] + sixth * (a1[1] + 2.0 * (a2[1] + a3[1]) + a4[1]),
        v[2] + sixth * (a1[2] + 2.0 * (a2[2] + a3[2]) + a4[2]),
    )
    w_new = (
        w[0] + sixth * (al1[0] + 2.0 * (al2[0] + al3[0]) + al4[0]),
        w[1] + sixth * (al1[1] + 2.0 * (al2[1] + al3[1]) + al4[1]),
        w[2] + sixth * (al1[2] + 2.0 * (al2[2] + al3[2]) + al4[2]),
    )
    w_avg = (
        (w[0] + 2.0 * (w2[0] + w3[0]) + w4[0]) / 6.0,
        (w[1] + 2.0 * (w2[1] + w3[1]) + w4[1]) / 6.0,
        (w[2] + 2.0 * (w2[2] + w3[2]) + w4[2]) / 6.0,
    )
    R_new = gram_schmidt3(mat_mul(R9, rodrigues3(scale3(dt, w_avg))))
    return p_new, v_new, R_new, w_new


def _build_reference(opts: dict) -> Reference:
    kind = opts.get("kind", "hover")
    psi = float(opts.get("psi", 0.0))
    if kind == "hover":
        return HoverRef(opts.get("position", (0.0, 0.0, 0.0)), psi)
    if kind == "circle":
        return CircleRef(opts.get("radius", 1.0), opts.get("omega", 1.0),
                         opts.get("height", 0.0), psi)
    if kind == "lissajous":
        return LissajousRef(
            opts.get("amplitude", (1.0, 1.0, 0.0)),
            opts.get("freq", (1.0, 2.0, 0.0)),
            opts.get("phase", (0.0, 0.0, 0.0)),
            opts.get("height", 0.0), psi,
        )
    raise ConfigError(f"reference.kind: unknown kind {kind!r}")


def run(scenario: Scenario) -> SimTrace:
    opts = scenario.plant
    inertia = np.asarray(opts.get("inertia", np.diag([0.02, 0.02, 0.04])), dtype=float)
    if inertia.shape == (3,):
        inertia = np.diag(inertia)
    dist = scenario.disturbance if isinstance(scenario.disturbance, dict) else {}
    params = VtolParams(
        mass=float(opts.get("mass", 1.0)),
        gravity=float(opts.get("gravity", 9.81)),
        inertia=inertia,
        d_f=dist.get("force"),
        d_tau=dist.get("torque"),
    )
    reference = _build_reference(opts.get("reference", {"kind": "hover"}))

    copts = scenario.controller
    controller = VtolController(
        params, reference, scenario.dt,
        omega_pos=float(copts.get("omega", 2.0)),
        omega_f=float(copts.get("omega_f", 8.0)),
        omega_att=float(copts.get("omega_att", 10.0)),
        omega_tau=float(copts.get("omega_tau", 20.0)),
        rule=copts.get("quadrature", RECTANGULAR),
    )

    p = tuple(float(x) for x in opts.get("p0", reference.position(0.0)))
    v = tuple(float(x) for x in opts.get("v0", reference.velocity(0.0)))
    R9 = so3.IDENTITY9
    w = (0.0, 0.0, 0.0)

    m, g = params.mass, params.gravity
    J9 = so3.flatten9(params.inertia)
    Jinv9 = inv3(J9)
    d_f_eval = (lambda t: sample_triple(params.d_f, t)) if params.d_f else (lambda t: (0.0, 0.0, 0.0))
    d_tau_eval = (lambda t: sample_triple(params.d_tau, t)) if params.d_tau else (lambda t: (0.0, 0.0, 0.0))

    dt = scenario.dt
    n_steps = scenario.n_steps
    # measurement noise channels: p(0-2), v(3-5), omega(6-8); R is not noised
    noise = None if scenario.noise.silent else noise_table(scenario.noise, 9, n_steps + 1)

    names = (
        ["t", "px", "py", "pz", "vx", "vy", "vz"]
        + [f"r{i}{j}" for i in range(3) for j in range(3)]
        + ["wx", "wy", "wz", "thrust", "taux", "tauy", "tauz",
           "errx", "erry", "errz", "err_norm",
           "dfhx", "dfhy", "dfhz", "dthx", "dthy", "dthz",
           "ortho_err", "det_err"]
    )
    rec = TraceRecorder(names, scenario.decimation)

    for k in range(n_steps + 1):
        t = k * dt
        check_state(p + v + w, t, k)
        if noise is None:
            zp, zv, zw = p, v, w
        else:
            zp = (p[0] + noise[0][k], p[1] + noise[1][k], p[2] + noise[2][k])
            zv = (v[0] + noise[3][k], v[1] + noise[4][k], v[2] + noise[5][k])
            zw = (w[0] + noise[6][k], w[1] + noise[7][k], w[2] + noise[8][k])
        f, tau = controller.compute(t, zp, zv, R9, zw)
        if k % scenario.decimation == 0:
            err = controller.p_err
            rec.record(k, [
                t, *p, *v, *R9, *w, f, *tau, *err, norm3(err),
                *controller.d_f_hat, *controller.d_tau_hat,
                ortho_error3(R9), det3(R9) - 1.0,
            ])
        if k < n_steps:
            p, v, R9, w = advance_rigid_body(
                p, v, R9, w, f, tau, t, dt, m, g, J9, Jinv9, d_f_eval, d_tau_eval
            )
    return rec.build()
