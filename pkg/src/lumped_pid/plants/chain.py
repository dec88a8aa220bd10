"""nth-order integrator chain x^(n) = f + b*u and its closed-loop runner.

The lumped disturbance is f = f0(t) + sum_i c_i * x^(i) with optional small
state-coupling coefficients c_i; the state vector is (x, xdot, ..., x^(n-1)).
"""

from __future__ import annotations

import math
from typing import Sequence

from ..controller import (
    ClassicPidController,
    ControllerConfig,
    GeneralizedController,
    HomogeneousController,
)
from ..errors import ConfigError
from ..quadrature import RECTANGULAR
from ..sim import PlantModel, Scenario, SimTrace, TraceRecorder, check_state, rk4_step
from ..signals import noise_table

CONTROLLER_KINDS = ("none", "homogeneous", "generalized", "pid")


class IntegratorChain(PlantModel):
    def __init__(self, n: int, b: float, state_coeffs: Sequence[float] = ()):
        if n < 1:
            raise ConfigError(f"plant.order: must be >= 1, got {n}")
        if b == 0.0:
            raise ConfigError("plant.b: input coefficient must be nonzero")
        if state_coeffs and len(state_coeffs) != n:
            raise ConfigError(
                f"plant.state_coeffs: expected {n} coefficients, got {len(state_coeffs)}"
            )
        self.n = n
        self.b = b
        self.state_coeffs = tuple(float(c) for c in state_coeffs)
        self.state_dim = n

    def lumped_disturbance(self, state: Sequence[float], f0: float) -> float:
        f = f0
        for c, x in zip(self.state_coeffs, state):
            f += c * x
        return f

    def derivative(self, state, u, d, t):
        out = list(state[1:])
        out.append(self.lumped_disturbance(state, d) + self.b * u)
        return out

    def measurements(self, state, t):
        return list(state)


def _build_controller(scenario: Scenario, n: int, b: float):
    opts = scenario.controller
    kind = opts.get("kind", "generalized")
    if kind not in CONTROLLER_KINDS:
        raise ConfigError(
            f"controller.kind: unknown kind {kind!r}, expected one of {CONTROLLER_KINDS}"
        )
    if kind == "none":
        return None
    config = ControllerConfig(
        n=n,
        b=b,
        omega=float(opts.get("omega", 1.0)),
        omega_f=float(opts.get("omega_f", 1.0)),
        dt=scenario.dt,
    )
    rule = opts.get("quadrature", RECTANGULAR)
    if kind == "homogeneous":
        return HomogeneousController(config)
    if kind == "pid":
        return ClassicPidController(config, rule=rule)
    return GeneralizedController(
        config,
        rule=rule,
        observer_form=opts.get("observer_form", "integral"),
        seed_integral=bool(opts.get("seed_integral", False)),
    )


def run(scenario: Scenario) -> SimTrace:
    opts = scenario.plant
    n = int(opts.get("order", 1))
    b = float(opts.get("b", 1.0))
    plant = IntegratorChain(n, b, opts.get("state_coeffs", ()))
    x0 = list(opts.get("x0", [0.0] * n))
    if len(x0) != n:
        raise ConfigError(f"plant.x0: expected {n} values, got {len(x0)}")

    controller = _build_controller(scenario, n, b)
    f0 = scenario.disturbance
    dt = scenario.dt
    n_steps = scenario.n_steps
    noise = noise_table(scenario.noise, n, n_steps + 1)

    names = (
        ["t"]
        + [f"x{i}" for i in range(n)]
        + ["u", "f_true", "f_hat"]
        + [f"z{i}" for i in range(n)]
    )
    rec = TraceRecorder(names, scenario.decimation)

    state = [float(v) for v in x0]
    for k in range(n_steps + 1):
        t = k * dt
        check_state(state, t, k)
        z = [state[i] + noise[i][k] for i in range(n)]
        if controller is None:
            u = 0.0
            f_hat = math.nan
        else:
            u = controller.step(z)
            f_hat = controller.f_hat
        f_true = plant.lumped_disturbance(state, f0(t))
        rec.record(k, [t, *state, u, f_true, f_hat, *z])
        if k < n_steps:
            state = rk4_step(plant, state, u, f0, t, dt)
    return rec.build()
