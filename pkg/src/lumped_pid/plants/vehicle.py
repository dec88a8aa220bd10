"""Bicycle-model vehicle with Frenet-frame lateral control in the distance domain.

Error conventions follow the reference-minus-pose form: with e_x = x_d - x,
e_y = y_d - y and e_theta = theta_d - theta, the matching point satisfies the
tangency constraint e_x cos(theta_d) + e_y sin(theta_d) = 0 and the lateral
error is l = -e_x sin(theta_d) + e_y cos(theta_d). Under this convention
l' = sin(e_theta) per meter traveled (l > 0 when the path lies to the
vehicle's left), and the curvature-tracking second derivative is
l'' = cos(e_theta) (r_s kappa_d - tan(delta + d)/L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import (
    AmbiguousMatchError,
    ConfigError,
    OffPathError,
    SteeringLimitError,
)
from ..quadrature import RECTANGULAR, RULES, Integrator
from ..sim import PlantModel, Scenario, SimTrace, TraceRecorder, check_state, rk4_step
from ..signals import noise_table

STEER_LIMIT = 0.5 * math.pi - 1e-9
HEADING_LIMIT = 0.5 * math.pi  # |e_theta| must stay below this
DEFAULT_CAPTURE = 10.0  # m
ZERO_SPEED = 1e-9  # below this the distance-domain observer freezes


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


class Bicycle(PlantModel):
    """Kinematic bicycle; state (x, y, theta), input delta, disturbance d."""

    state_dim = 3

    def __init__(self, wheelbase: float, speed: float):
        if not (wheelbase > 0.0):
            raise ConfigError(f"plant.wheelbase: must be positive, got {wheelbase!r}")
        self.wheelbase = wheelbase
        self.speed = speed

    def derivative(self, state, u, d, t):
        return bicycle_derivative(state, self.speed, u, d, self.wheelbase)

    def measurements(self, state, t):
        return list(state)


def bicycle_derivative(state, v: float, delta: float, d: float, L: float):
    """(v cos th, v sin th, v tan(delta+d)/L); errors out near |delta+d| = pi/2."""
    eff = delta + d
    if abs(eff) >= STEER_LIMIT:
        raise SteeringLimitError(f"effective steering {eff:g} rad at the +-pi/2 limit")
    theta = state[2]
    return [v * math.cos(theta), v * math.sin(theta), v * math.tan(eff) / L]


@dataclass(frozen=True)
class LateralErrorState:
    l: float        # signed lateral error [m]
    e_theta: float  # heading error theta_d - theta, wrapped to (-pi, pi]
    s_d: float      # matched arc length [m]
    theta_d: float
    kappa_d: float


class FrenetPath:
    """Arc-length tabulated path (s, x, y, theta, kappa) with linear interpolation.

    theta is stored unwrapped so interpolation across +-pi is well defined.
    """

    def __init__(self, s, x, y, theta, kappa):
        s = np.asarray(s, float)
        if len(s) < 2:
            raise ConfigError("path needs at least two samples")
        if np.any(np.diff(s) <= 0.0):
            raise ConfigError("path arc length must be strictly increasing")
        self.s = s
        self.x = np.asarray(x, float)
        self.y = np.asarray(y, float)
        self.theta = np.unwrap(np.asarray(theta, float))
        self.kappa = np.asarray(kappa, float)
        n = len(s)
        if not all(len(a) == n for a in (self.x, self.y, self.theta, self.kappa)):
            raise ConfigError("path columns must have equal length")
        # plain-float copies for the per-step matching loop
        self._sf = self.s.tolist()
        self._xf = self.x.tolist()
        self._yf = self.y.tolist()
        self._tf = self.theta.tolist()
        self._kf = self.kappa.tolist()

    def __len__(self):
        return len(self.s)

    @property
    def length(self) -> float:
        return float(self.s[-1])

    def validate_geometry(self, tol: float = 1e-3) -> None:
        """Finite-difference consistency: d(x,y)/ds vs (cos,sin) theta and
        d(theta)/ds vs kappa, midpoint-sampled."""
        ds = np.diff(self.s)
        dx = np.diff(self.x) / ds
        dy = np.diff(self.y) / ds
        dth = np.diff(self.theta) / ds
        th_mid = 0.5 * (self.theta[:-1] + self.theta[1:])
        k_mid = 0.5 * (self.kappa[:-1] + self.kappa[1:])
        if np.max(np.abs(dx - np.cos(th_mid))) > tol or np.max(np.abs(dy - np.sin(th_mid))) > tol:
            raise ConfigError("path tangent inconsistent with heading column")
        if np.max(np.abs(dth - k_mid)) > tol:
            raise ConfigError("path heading rate inconsistent with curvature column")

    def sample(self, s_query: float):
        """(x_d, y_d, theta_d, kappa_d) at s_query, clamped to the table range."""
        i = int(np.searchsorted(self.s, s_query)) - 1
        i = min(max(i, 0), len(self.s) - 2)
        a = (s_query - self._sf[i]) / (self._sf[i + 1] - self._sf[i])
        a = min(max(a, 0.0), 1.0)
        return self._interp(i, a)

    def _interp(self, i, a):
        x = self._xf[i] + a * (self._xf[i + 1] - self._xf[i])
        y = self._yf[i] + a * (self._yf[i + 1] - self._yf[i])
        th = self._tf[i] + a * (self._tf[i + 1] - self._tf[i])
        k = self._kf[i] + a * (self._kf[i + 1] - self._kf[i])
        s = self._sf[i] + a * (self._sf[i + 1] - self._sf[i])
        return s, x, y, th, k

    @classmethod
    def line(cls, length: float, spacing: float = 0.25) -> "FrenetPath":
        """Straight path along +x starting at the origin."""
        n = max(2, int(math.ceil(length / spacing)) + 1)
        s = np.linspace(0.0, length, n)
        return cls(s, s.copy(), np.zeros(n), np.zeros(n), np.zeros(n))

    @classmethod
    def circle(cls, radius: float, arc: float, spacing: float = 0.25) -> "FrenetPath":
        """Counterclockwise circle from the origin, initial heading +x."""
        if not (radius > 0.0):
            raise ConfigError(f"path.radius: must be positive, got {radius!r}")
        n = max(2, int(math.ceil(arc / spacing)) + 1)
        s = np.linspace(0.0, arc, n)
        ang = s / radius
        return cls(s, radius * np.sin(ang), radius * (1.0 - np.cos(ang)), ang,
                   np.full(n, 1.0 / radius))

    @classmethod
    def from_csv(cls, path) -> "FrenetPath":
        """Columns ``s,x,y,theta,kappa`` with a header row."""
        data = np.genfromtxt(path, delimiter=",", names=True)
        for col in ("s", "x", "y", "theta", "kappa"):
            if col not in (data.dtype.names or ()):
                raise ConfigError(f"path csv missing column {col!r}")
        return cls(data["s"], data["x"], data["y"], data["theta"], data["kappa"])

    def to_csv(self, path) -> None:
        data = np.column_stack([self.s, self.x, self.y, self.theta, self.kappa])
        np.savetxt(path, data, fmt="%.17g", delimiter=",", comments="",
                   header="s,x,y,theta,kappa")


def _tangency(path: FrenetPath, i: int, a: float, px: float, py: float) -> float:
    """e_x cos(theta_d) + e_y sin(theta_d) at segment i, parameter a."""
    _, x, y, th, _ = path._interp(i, a)
    return (x - px) * math.cos(th) + (y - py) * math.sin(th)


def frenet_match(
    path: FrenetPath,
    pose,
    capture_radius: float = DEFAULT_CAPTURE,
    hint_index: int | None = None,
) -> LateralErrorState:
    """Match a pose to the path and return the lateral error pair.

    A coarse pass picks the nearest sample (full scan, or a local scan around
    ``hint_index`` when tracking), then one interpolation inside the winning
    segment enforces the tangency constraint. Raises OffPathError outside the
    capture radius and AmbiguousMatchError when two non-adjacent samples are
    equally close.
    """
    px, py, ptheta = float(pose[0]), float(pose[1]), float(pose[2])
    xs, ys = path._xf, path._yf
    n = len(xs)
    if hint_index is None:
        lo, hi = 0, n
    else:
        lo = max(0, hint_index - 50)
        hi = min(n, hint_index + 51)
    best_i, best_d2 = lo, math.inf
    for i in range(lo, hi):
        dx = xs[i] - px
        dy = ys[i] - py
        d2 = dx * dx + dy * dy
        if d2 < best_d2:
            best_d2 = d2
            best_i = i
    if best_d2 > capture_radius * capture_radius:
        raise OffPathError(
            f"pose ({px:g}, {py:g}) is {math.sqrt(best_d2):g} m from the path, "
            f"capture radius {capture_radius:g} m"
        )
    if hint_index is None:
        # ambiguity check: a non-adjacent sample essentially as close as the best
        thresh = best_d2 + max(1e-9, 1e-6 * best_d2)
        for i in range(n):
            if abs(i - best_i) > 2:
                dx = xs[i] - px
                dy = ys[i] - py
                if dx * dx + dy * dy <= thresh:
                    raise AmbiguousMatchError(
                        f"samples {best_i} and {i} are equally close to the pose"
                    )

    # the tangency constraint g(a) changes sign at the matching point; look in
    # the segment before and after the winning sample
    candidates = []
    for i in (best_i - 1, best_i):
        if 0 <= i < n - 1:
            g0 = _tangency(path, i, 0.0, px, py)
            g1 = _tangency(path, i, 1.0, px, py)
            if g0 == 0.0:
                candidates.append((i, 0.0))
            elif g0 * g1 <= 0.0:
                a0, a1, ga = 0.0, 1.0, g0
                for _ in range(60):
                    am = 0.5 * (a0 + a1)
                    gm = _tangency(path, i, am, px, py)
                    if ga * gm <= 0.0:
                        a1 = am
                    else:
                        a0, ga = am, gm
                candidates.append((i, 0.5 * (a0 + a1)))
    if not candidates:
        # pose projects beyond the table ends; clamp to the nearest endpoint
        i, a = (0, 0.0) if best_i == 0 else (n - 2, 1.0)
        candidates.append((i, a))
    i, a = candidates[0] if len(candidates) == 1 else min(
        candidates,
        key=lambda c: (path._interp(c[0], c[1])[1] - px) ** 2
        + (path._interp(c[0], c[1])[2] - py) ** 2,
    )

    s_d, x_d, y_d, theta_d, kappa_d = path._interp(i, a)
    e_x = x_d - px
    e_y = y_d - py
    l = -e_x * math.sin(theta_d) + e_y * math.cos(theta_d)
    e_theta = wrap_angle(theta_d - ptheta)
    return LateralErrorState(l=l, e_theta=e_theta, s_d=s_d, theta_d=theta_d, kappa_d=kappa_d)


def lateral_error_derivatives(err: LateralErrorState, delta: float, d: float,
                              L: float, r_s: float, kappa_d: float) -> tuple[float, float]:
    """Distance-domain error model: l' = sin(e_theta) and
    l'' = cos(e_theta) (r_s kappa_d - tan(delta+d)/L)."""
    lp = math.sin(err.e_theta)
    lpp = math.cos(err.e_theta) * (r_s * kappa_d - math.tan(delta + d) / L)
    return lp, lpp


def _check_heading(e_theta: float) -> float:
    if abs(e_theta) >= HEADING_LIMIT:
        raise SteeringLimitError(
            f"|e_theta| = {abs(e_theta):g} rad at the pi/2 sec() singularity"
        )
    return 1.0 / math.cos(e_theta)


def lateral_controller_known_d(err: LateralErrorState, kappa_d: float, d: float,
                               L: float, k0: float, k1: float) -> float:
    """Known-disturbance feedback linearization (r_s = 1 assumed):

    delta = arctan(L (kappa_d + sec(e_theta)(k0 l + k1 sin e_theta))) - d,
    which turns the error model into l'' = -k0 l - k1 l'.
    """
    sec = _check_heading(err.e_theta)
    return math.atan(L * (kappa_d + sec * (k0 * err.l + k1 * math.sin(err.e_theta)))) - d


class LateralObserverController:
    """Unknown-disturbance lateral law in the distance domain.

    u_x = k0 l + k1 sin(e_theta) enters with a negative input coefficient
    (-cos e_theta / L), so the estimate accumulates d^ = omega_d (sin e_theta
    + integral of u_x ds); the curvature feedforward is absorbed into d^. The
    integral advances by ds = v dt and freezes near zero speed.
    """

    def __init__(self, L: float, k0: float, k1: float, omega_d: float,
                 rule: str = RECTANGULAR):
        if rule not in RULES:
            raise ConfigError(f"unknown quadrature rule {rule!r}")
        if not (omega_d > 0.0):
            raise ConfigError(f"controller.omega_d: must be positive, got {omega_d!r}")
        self.L = L
        self.k0 = k0
        self.k1 = k1
        self.omega_d = omega_d
        self._integ = Integrator(rule)
        self.u_x = 0.0
        self.d_hat = 0.0

    def step(self, err: LateralErrorState, ds: float) -> float:
        sec = _check_heading(err.e_theta)
        sin_et = math.sin(err.e_theta)
        u_x = self.k0 * err.l + self.k1 * sin_et
        if ds > ZERO_SPEED:
            integral = self._integ.push(u_x, ds)
        else:
            integral = self._integ.total
        d_hat = self.omega_d * (sin_et + integral)
        self.u_x = u_x
        self.d_hat = d_hat
        return math.atan(self.L * sec * (u_x + d_hat))


def _build_path(opts: dict) -> FrenetPath:
    kind = opts.get("kind", "line")
    spacing = float(opts.get("spacing", 0.25))
    if kind == "line":
        return FrenetPath.line(float(opts.get("length", 200.0)), spacing)
    if kind == "circle":
        return FrenetPath.circle(float(opts.get("radius", 50.0)),
                                 float(opts.get("arc", 300.0)), spacing)
    if kind == "csv":
        if "file" not in opts:
            raise ConfigError("path.file: required for path.kind = csv")
        return FrenetPath.from_csv(opts["file"])
    raise ConfigError(f"path.kind: unknown kind {kind!r}")


def run(scenario: Scenario) -> SimTrace:
    opts = scenario.plant
    L = float(opts.get("wheelbase", 2.7))
    v = float(opts.get("speed", 10.0))
    if not (v > 0.0):
        raise ConfigError(f"plant.speed: must be positive, got {v!r}")
    plant = Bicycle(L, v)
    path = _build_path(opts.get("path", {"kind": "line"}))
    capture = float(opts.get("capture_radius", DEFAULT_CAPTURE))

    copts = scenario.controller
    kind = copts.get("kind", "observer")
    omega = float(copts.get("omega", 0.5))  # rad/m, distance-domain pole
    k0 = omega * omega
    k1 = 2.0 * omega
    bias = scenario.disturbance  # steering disturbance signal d(t) [rad]

    if kind == "observer":
        controller = LateralObserverController(
            L, k0, k1, float(copts.get("omega_d", 2.0)),
            rule=copts.get("quadrature", RECTANGULAR),
        )
    elif kind == "known_d":
        controller = None
    else:
        raise ConfigError(
            f"controller.kind: unknown kind {kind!r}, expected 'observer' or 'known_d'"
        )

    state = [float(x) for x in opts.get("x0", (0.0, 0.0, 0.0))]
    if len(state) != 3:
        raise ConfigError(f"plant.x0: expected 3 values (x, y, theta), got {len(state)}")

    dt = scenario.dt
    ds = v * dt
    n_steps = scenario.n_steps
    # measurement noise channels: x(0), y(1), theta(2); the controller sees
    # the noised pose, the trace records the true one
    noise = None if scenario.noise.silent else noise_table(scenario.noise, 3, n_steps + 1)
    names = ["t", "x", "y", "theta", "s_d", "l", "e_theta", "delta",
             "u_x", "d_hat", "d_true", "d_lump", "r_s"]
    rec = TraceRecorder(names, scenario.decimation)

    hint = None
    prev_sd = None
    for k in range(n_steps + 1):
        t = k * dt
        check_state(state, t, k)
        if noise is None:
            pose = state
        else:
            pose = (state[0] + noise[0][k], state[1] + noise[1][k], state[2] + noise[2][k])
        err = frenet_match(path, pose, capture_radius=capture, hint_index=hint)
        hint = int(np.searchsorted(path.s, err.s_d))
        d_now = bias(t)
        if controller is None:
            delta = lateral_controller_known_d(err, err.kappa_d, d_now, L, k0, k1)
            u_x = k0 * err.l + k1 * math.sin(err.e_theta)
            d_hat = math.nan
        else:
            delta = controller.step(err, ds)
            u_x = controller.u_x
            d_hat = controller.d_hat
        # diagnostics: true r_s from matched-point speed, and the lumped term
        r_s = 1.0 if prev_sd is None else (err.s_d - prev_sd) / ds
        prev_sd = err.s_d
        tan_d = math.tan(d_now)
        tan_delta = math.tan(delta)
        d_lump = math.cos(err.e_theta) * (
            r_s * err.kappa_d
            - tan_d * (1.0 + tan_delta * tan_delta) / (L * (1.0 - tan_delta * tan_d))
        )
        rec.record(k, [t, *state, err.s_d, err.l, err.e_theta, delta,
                       u_x, d_hat, d_now, d_lump, r_s])
        if k < n_steps:
            state = rk4_step(plant, state, delta, bias, t, dt)
    return rec.build()
