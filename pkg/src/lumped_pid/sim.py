"""Fixed-step closed-loop simulation: plants, RK4, scenarios, traces.

Time is kept on an integer step counter with t = k*dt (never accumulated), so
trace timestamps sit exactly on the grid. Control inputs are held constant
over each integration step (zero-order hold) at the integrator rate. A run is
a pure function of its scenario, seed included.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DivergedError
from .signals import NoiseSpec

# States beyond this magnitude abort the run as diverged rather than waiting
# for overflow, so parameter sweeps can record the failure.
RUNAWAY_BOUND = 1e12


class PlantModel(abc.ABC):
    """Deterministic plant dynamics plus its measurement map."""

    state_dim: int

    @abc.abstractmethod
    def derivative(self, state: Sequence[float], u, d, t: float) -> list[float]:
        """State derivative given held control u and disturbance value d."""

    @abc.abstractmethod
    def measurements(self, state: Sequence[float], t: float) -> list[float]:
        """Measured quantities (before noise)."""


def rk4_step(
    plant: PlantModel,
    state: Sequence[float],
    u,
    d_eval: Callable[[float], object],
    t: float,
    dt: float,
) -> list[float]:
    """Classical 4th-order Runge-Kutta step with u held over the step.

    The disturbance evaluator is sampled at the stage times. Raises
    DivergedError if the new state is non-finite.
    """
    if not (dt > 0.0):
        raise ConfigError(f"dt must be positive, got {dt!r}")
    half = 0.5 * dt
    d0 = d_eval(t)
    dm = d_eval(t + half)
    d1 = d_eval(t + dt)
    k1 = plant.derivative(state, u, d0, t)
    s2 = [x + half * k for x, k in zip(state, k1)]
    k2 = plant.derivative(s2, u, dm, t + half)
    s3 = [x + half * k for x, k in zip(state, k2)]
    k3 = plant.derivative(s3, u, dm, t + half)
    s4 = [x + dt * k for x, k in zip(state, k3)]
    k4 = plant.derivative(s4, u, d1, t + dt)
    sixth = dt / 6.0
    out = [
        x + sixth * (a + 2.0 * (b + c) + d)
        for x, a, b, c, d in zip(state, k1, k2, k3, k4)
    ]
    for x in out:
        if not math.isfinite(x):
            raise DivergedError(f"non-finite state component after step at t={t:g}", t=t)
    return out


def check_state(state: Sequence[float], t: float, step: int) -> None:
    """Per-step non-finite and runaway guard for simulation loops."""
    for x in state:
        if not math.isfinite(x):
            raise DivergedError(f"non-finite state at t={t:g}", t=t, step=step)
        if abs(x) > RUNAWAY_BOUND:
            raise DivergedError(
                f"diverged: |state| exceeded {RUNAWAY_BOUND:g} at t={t:g}", t=t, step=step
            )


@dataclass
class Scenario:
    """Declarative experiment description; see config.py for the file schema."""

    plant_kind: str
    plant: dict
    controller: dict
    disturbance: object
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    dt: float = 1e-3
    duration: float = 1.0
    seed: int = 0
    decimation: int = 1

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ConfigError(f"sim.dt: must be positive, got {self.dt!r}")
        if not (self.duration > 0.0):
            raise ConfigError(f"sim.duration: must be positive, got {self.duration!r}")
        if self.dt > self.duration:
            raise ConfigError("sim.dt: step exceeds duration")
        if self.decimation < 1:
            raise ConfigError("sim.decimation: must be >= 1")
        if self.noise.seed != self.seed:
            # scenario seed is authoritative; NoiseSpec carries it for addressing
            self.noise = NoiseSpec(sigmas=self.noise.sigmas, seed=self.seed)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


class SimTrace:
    """Columnar, uniformly-gridded record of one run."""

    def __init__(self, columns: dict[str, np.ndarray]):
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ConfigError("trace columns must have equal length")
        self.columns = columns

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __contains__(self, name: str) -> bool:
        return name in self.columns

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    @property
    def t(self) -> np.ndarray:
        return self.columns["t"]

    def __len__(self) -> int:
        return len(self.columns["t"])

    def to_csv(self, path) -> None:
        """CSV with one named column per quantity, floats at 17 significant digits."""
        data = np.column_stack([self.columns[name] for name in self.names])
        np.savetxt(path, data, fmt="%.17g", delimiter=",", comments="",
                   header=",".join(self.names))


class TraceRecorder:
    """Accumulates decimated rows during a run."""

    def __init__(self, names: Sequence[str], decimation: int = 1):
        self.names = list(names)
        self.decimation = decimation
        self._rows: list[tuple] = []

    def record(self, step_index: int, values: Sequence[float]) -> None:
        if step_index % self.decimation == 0:
            self._rows.append(tuple(values))

    def build(self) -> SimTrace:
        data = np.asarray(self._rows, dtype=float)
        return SimTrace({name: data[:, i] for i, name in enumerate(self.names)})


def run_scenario(scenario: Scenario) -> SimTrace:
    """Simulate one scenario to completion; bit-reproducible for a fixed seed."""
    from .plants import chain, vehicle, vtol

    runners = {"chain": chain.run, "vtol": vtol.run, "vehicle": vehicle.run}
    try:
        runner = runners[scenario.plant_kind]
    except KeyError:
        raise ConfigError(
            f"plant.kind: unknown plant {scenario.plant_kind!r}, expected one of {sorted(runners)}"
        ) from None
    return runner(scenario)
