"""Controller synthesis and stepping.

The control input is split as ``u = (u_x - f_hat) / b`` where

* ``u_x = -sum_i a_i x^(i)`` is state feedback placing all poles of the
  disturbance-free system at ``-omega`` (equal-pole tuning, so the whole
  state-feedback part has the single knob ``omega``), and
* ``f_hat = omega_f * (x^(n-1) - int u_x dt)`` is a first-order observer of
  the lumped disturbance with bandwidth ``omega_f``.

For first- and second-order plants this composition collapses to the classic
PI/PID controller; :func:`reduce_to_pi` and :func:`reduce_to_pid` give the
closed-form gains and :class:`GeneralizedController` can step either the
literal integral form or the algebraically reduced PID form (see the class
docstring for when the two discretizations differ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConfigError, DimensionMismatchError, OrderMismatchError
from .polylti import MAX_ORDER, Polynomial, RationalTransferFunction, binomial_poly, poly_mul
from .quadrature import RECTANGULAR, RULES, Integrator

OBSERVER_FORMS = ("integral", "pid")


@dataclass(frozen=True)
class ControllerConfig:
    """Synthesis inputs.

    ``n`` is the plant order, ``b`` the input coefficient, ``omega`` the
    state-feedback (homogeneous) bandwidth, ``omega_f`` the observer
    bandwidth, and ``dt`` the controller/integration step. Under measurement
    noise, ``omega < omega_f`` is the recommended (not enforced) tuning.
    """

    n: int
    b: float
    omega: float
    omega_f: float
    dt: float

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1 or self.n > MAX_ORDER:
            raise ConfigError(f"n: order must be an integer in [1, {MAX_ORDER}], got {self.n!r}")
        if not (self.b != 0.0 and math.isfinite(self.b)):
            raise ConfigError(f"b: input coefficient must be finite and nonzero, got {self.b!r}")
        if not (self.omega > 0.0):
            raise ConfigError(f"omega: bandwidth must be positive, got {self.omega!r}")
        if not (self.omega_f > 0.0):
            raise ConfigError(f"omega_f: observer bandwidth must be positive, got {self.omega_f!r}")
        if not (self.dt > 0.0):
            raise ConfigError(f"dt: step must be positive, got {self.dt!r}")


@dataclass(frozen=True)
class HomogeneousGains:
    """State-feedback gains; ``a[i]`` multiplies ``x^(i)``, i = 0..n-1."""

    a: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.a)


@dataclass(frozen=True)
class ClassicPidGains:
    """Textbook gains, pre-division by b (the caller applies 1/b)."""

    kp: float
    ki: float
    kd: Optional[float] = None


@dataclass(frozen=True)
class ObserverState:
    """Observer runtime state.

    ``ux_integral`` starts at 0: the omitted initial-value term is treated as
    part of the lumped disturbance. ``prev_ux``/``started`` are quadrature
    bookkeeping (left-rectangular and trapezoidal rules both need the
    previous sample).
    """

    ux_integral: float = 0.0
    f_hat: float = 0.0
    prev_ux: float = 0.0
    started: bool = False


@dataclass(frozen=True)
class PidState:
    """Classic-PID integral accumulator (same quadrature as the observer)."""

    integral: float = 0.0
    prev_e: float = 0.0
    started: bool = False


def synthesize_gains(n: int, omega: float) -> HomogeneousGains:
    """Equal-pole gains: coefficients of (s+omega)^n below the leading term.

    ``a[i] = C(n, n-i) * omega**(n-i)``, all strictly positive.
    """
    poly = binomial_poly(omega, n)  # validates n and omega
    return HomogeneousGains(a=poly.coeffs[:-1])


def homogeneous_control(gains: HomogeneousGains, x_derivs: Sequence[float]) -> float:
    """State feedback ``u_x = -sum a[i] * x_derivs[i]``."""
    if len(x_derivs) != gains.n:
        raise DimensionMismatchError(
            f"expected {gains.n} state derivatives, got {len(x_derivs)}"
        )
    acc = 0.0
    for ai, xi in zip(gains.a, x_derivs):
        acc += ai * xi
    return -acc


def observer_step(
    state: ObserverState,
    x_top: float,
    u_x: float,
    omega_f: float,
    dt: float,
    rule: str = RECTANGULAR,
) -> tuple[ObserverState, float]:
    """Advance the running integral of u_x, then estimate the disturbance.

    Call once per control instant t_k = k*dt with the current ``u_x`` sample.
    The left-rectangular rule integrates past samples only, so the estimate
    ``f_hat = omega_f * (x_top - ux_integral)`` is aligned with t_k.
    """
    if not (dt > 0.0):
        raise ConfigError(f"dt must be positive, got {dt!r}")
    if rule not in RULES:
        raise ConfigError(f"unknown quadrature rule {rule!r}")
    if state.started:
        if rule == RECTANGULAR:
            integral = state.ux_integral + state.prev_ux * dt
        else:
            integral = state.ux_integral + 0.5 * (state.prev_ux + u_x) * dt
    else:
        integral = state.ux_integral
    f_hat = omega_f * (x_top - integral)
    return ObserverState(integral, f_hat, u_x, True), f_hat


def control_output(u_x: float, f_hat: float, b: float) -> float:
    """Final plant input ``u = (u_x - f_hat) / b``."""
    if b == 0.0:
        raise ConfigError("input coefficient b must be nonzero")
    return (u_x - f_hat) / b


def reduce_to_pi(config: ControllerConfig) -> ClassicPidGains:
    """First-order reduction: kp = omega, ki = omega_f * omega (pre-1/b)."""
    if config.n != 1:
        raise OrderMismatchError(f"PI reduction requires n=1, got n={config.n}")
    a0 = config.omega
    return ClassicPidGains(kp=a0, ki=config.omega_f * a0, kd=None)


def reduce_to_pid(config: ControllerConfig) -> ClassicPidGains:
    """Second-order reduction with a1 = 2*omega, a0 = omega**2 (pre-1/b):

    kd = a1 + omega_f, kp = a0 + omega_f*a1, ki = omega_f*a0.
    """
    if config.n != 2:
        raise OrderMismatchError(f"PID reduction requires n=2, got n={config.n}")
    a0 = config.omega * config.omega
    a1 = 2.0 * config.omega
    wf = config.omega_f
    return ClassicPidGains(kp=a0 + wf * a1, ki=wf * a0, kd=a1 + wf)


def classic_pid_step(
    gains: ClassicPidGains,
    state: PidState,
    e: float,
    e_dot: float,
    dt: float,
    b: float = 1.0,
    rule: str = RECTANGULAR,
) -> tuple[PidState, float]:
    """One PID evaluation: ``u = -(kd*e_dot + kp*e + ki*integral(e))/b``.

    The integral accumulates with the same quadrature rule as the observer;
    ``kd`` of None (PI) contributes nothing.
    """
    if not (dt > 0.0):
        raise ConfigError(f"dt must be positive, got {dt!r}")
    if rule not in RULES:
        raise ConfigError(f"unknown quadrature rule {rule!r}")
    if state.started:
        if rule == RECTANGULAR:
            integral = state.integral + state.prev_e * dt
        else:
            integral = state.integral + 0.5 * (state.prev_e + e) * dt
    else:
        integral = state.integral
    kd = gains.kd if gains.kd is not None else 0.0
    u = -(kd * e_dot + gains.kp * e + gains.ki * integral) / b
    return PidState(integral, e, True), u


def closed_loop_tf(config: ControllerConfig) -> RationalTransferFunction:
    """Disturbance-to-state transfer function of the compensated loop:

    ``G(s) = s / ((s+omega)^n (s+omega_f))`` -- the zero at the origin is
    what rejects constant disturbances exactly.
    """
    den = poly_mul(binomial_poly(config.omega, config.n), Polynomial((config.omega_f, 1.0)))
    return RationalTransferFunction(Polynomial((0.0, 1.0)), den)


def observer_tfs(omega_f: float) -> tuple[RationalTransferFunction, RationalTransferFunction]:
    """Observer lag ``G_o = omega_f/(s+omega_f)`` and its complement
    ``G_e = s/(s+omega_f)`` (estimation-error path); G_o + G_e = 1."""
    if not (omega_f > 0.0):
        raise ConfigError(f"omega_f must be positive, got {omega_f!r}")
    den = Polynomial((omega_f, 1.0))
    g_o = RationalTransferFunction(Polynomial((omega_f,)), den)
    g_e = RationalTransferFunction(Polynomial((0.0, 1.0)), den)
    return g_o, g_e


class GeneralizedController:
    """Stateful stepping of the full controller for any order n.

    ``observer_form`` selects how the observer's running integral of u_x is
    discretized:

    * ``"integral"`` (default) accumulates the u_x samples directly, exactly
      as the observer is defined. The estimate then obeys the first-order lag
      d(f_hat)/dt = omega_f*(f - f_hat) along closed-loop trajectories, so
      estimate-error decay and bandwidth studies use this form.
    * ``"pid"`` carries the integral in its reduced form: every a_i*x^(i)
      component of u_x (i >= 1) integrates exactly to a_i*x^(i-1), leaving a
      running integral of x alone. This reproduces the classic PI/PID
      arithmetic identically, step for step, for any measurement sequence
      under a shared quadrature rule. Following the PI reduction, the n=1
      variant omits the direct measurement term from the estimate.

    The two forms agree in continuous time; discretely they differ by the
    quadrature error of the top-derivative channel (and, for n=1, by the
    omitted direct term), which is why both are provided.
    """

    def __init__(
        self,
        config: ControllerConfig,
        rule: str = RECTANGULAR,
        observer_form: str = "integral",
        seed_integral: bool = False,
    ):
        if rule not in RULES:
            raise ConfigError(f"unknown quadrature rule {rule!r}")
        if observer_form not in OBSERVER_FORMS:
            raise ConfigError(f"observer_form must be one of {OBSERVER_FORMS}, got {observer_form!r}")
        self.config = config
        self.gains = synthesize_gains(config.n, config.omega)
        self.rule = rule
        self.observer_form = observer_form
        self.seed_integral = seed_integral
        self._a = self.gains.a
        self._integ = Integrator(rule)
        self.u_x = 0.0
        self.f_hat = 0.0
        self._first = True

    def step(self, z: Sequence[float]) -> float:
        """Consume one measurement vector (x^(0)..x^(n-1)), return u."""
        cfg = self.config
        n = cfg.n
        if len(z) != n:
            raise DimensionMismatchError(f"expected {n} measurements, got {len(z)}")
        a = self._a
        ux = 0.0
        for i in range(n):
            ux += a[i] * z[i]
        ux = -ux
        if self.observer_form == "integral":
            if self._first and self.seed_integral:
                self._integ.total = z[n - 1]
            integral = self._integ.push(ux, cfg.dt)
            f_hat = cfg.omega_f * (z[n - 1] - integral)
        else:
            integral = self._integ.push(z[0], cfg.dt)
            red = a[0] * integral
            for i in range(1, n):
                red += a[i] * z[i - 1]
            top = z[n - 1] if n >= 2 else 0.0
            f_hat = cfg.omega_f * (top + red)
        self._first = False
        self.u_x = ux
        self.f_hat = f_hat
        return (ux - f_hat) / cfg.b


class HomogeneousController:
    """State feedback only (f_hat = 0); the uncompensated loop."""

    def __init__(self, config: ControllerConfig):
        self.config = config
        self.gains = synthesize_gains(config.n, config.omega)
        self.u_x = 0.0
        self.f_hat = 0.0

    def step(self, z: Sequence[float]) -> float:
        self.u_x = homogeneous_control(self.gains, z)
        return self.u_x / self.config.b


class ClassicPidController:
    """Stateful wrapper around :func:`classic_pid_step` (n = 1 or 2)."""

    def __init__(self, config: ControllerConfig, rule: str = RECTANGULAR):
        if config.n == 1:
            self.gains = reduce_to_pi(config)
        elif config.n == 2:
            self.gains = reduce_to_pid(config)
        else:
            raise OrderMismatchError(f"classic PID stepping requires n in {{1, 2}}, got {config.n}")
        if rule not in RULES:
            raise ConfigError(f"unknown quadrature rule {rule!r}")
        self.config = config
        self.rule = rule
        self._integ = Integrator(rule)
        self.u_x = 0.0
        self.f_hat = math.nan  # the classic form has no separate estimate

    def step(self, z: Sequence[float]) -> float:
        cfg = self.config
        if len(z) != cfg.n:
            raise DimensionMismatchError(f"expected {cfg.n} measurements, got {len(z)}")
        e = z[0]
        e_dot = z[1] if cfg.n == 2 else 0.0
        integral = self._integ.push(e, cfg.dt)
        kd = self.gains.kd if self.gains.kd is not None else 0.0
        u = -(kd * e_dot + self.gains.kp * e + self.gains.ki * integral) / cfg.b
        self.u_x = u * cfg.b
        return u
