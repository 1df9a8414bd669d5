"""Conditional no-jump amplitudes of the three-level atom.

With zero detuning and real drives the amplitudes (c0, c1, c2) obey the real
linear system c' = A c. Their squared norm W(t) is the probability that no
photon has been emitted since the last reset, and it leaks at the emission
rate beta1*c1**2 + beta2*c2**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import kernels
from .model import SystemParams

# Default step in units of 1/beta1, and the largest step accepted.
DT_BETA1 = 0.01
MAX_DT_BETA1 = 0.1
TOL_NORM = 1e-9
TOL_CONS = 1e-8
T0_PRIME_BETA1 = 4.0


class StepSizeError(ValueError):
    """The integration step is too coarse for the fast decay scale."""


class ConditioningError(ValueError):
    """Conditioning on null emission is undefined for a zero-norm state."""


@dataclass(frozen=True)
class AmplitudeState:
    c0: float
    c1: float
    c2: float
    t: float = 0.0

    @classmethod
    def reset(cls) -> AmplitudeState:
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_vector(cls, c, t: float = 0.0) -> AmplitudeState:
        return cls(float(c[0]), float(c[1]), float(c[2]), float(t))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2])

    def scaled(self, a: float) -> AmplitudeState:
        return AmplitudeState(a * self.c0, a * self.c1, a * self.c2, self.t)


@dataclass(frozen=True)
class Generator:
    """d(c0, c1, c2)/dt = matrix @ (c0, c1, c2)."""

    params: SystemParams
    matrix: np.ndarray = field(repr=False, compare=False)

    @property
    def beta1(self) -> float:
        return self.params.beta1


def build_generator(params: SystemParams) -> Generator:
    o1, o2 = params.omega1, params.omega2
    A = np.array(
        [
            [0.0, o1, o2],
            [-o1, -params.beta1 / 2.0, 0.0],
            [-o2, 0.0, -params.beta2 / 2.0],
        ]
    )
    A.setflags(write=False)
    return Generator(params, A)


def default_dt(params: SystemParams) -> float:
    return DT_BETA1 / params.beta1


def _check_dt(dt: float, beta1: float) -> None:
    if not dt > 0:
        raise StepSizeError(f"dt must be > 0, got {dt!r}")
    if dt * beta1 > MAX_DT_BETA1 * (1.0 + 1e-12):
        raise StepSizeError(
            f"dt*beta1 = {dt * beta1:.3g} exceeds {MAX_DT_BETA1}; reduce dt to at most {MAX_DT_BETA1 / beta1:.3g}"
        )


def rk4_step(A: np.ndarray, y: np.ndarray, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of c' = A c, written stage by stage."""
    k1 = A @ y
    k2 = A @ (y + 0.5 * h * k1)
    k3 = A @ (y + 0.5 * h * k2)
    k4 = A @ (y + h * k3)
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True)
class Trajectory:
    """Amplitudes sampled on a uniform grid; behaves as a sequence of states."""

    t: np.ndarray
    c: np.ndarray

    def __len__(self) -> int:
        return self.t.shape[0]

    def __getitem__(self, i) -> AmplitudeState:
        return AmplitudeState.from_vector(self.c[i], self.t[i])

    def __iter__(self) -> Iterator[AmplitudeState]:
        for i in range(len(self)):
            yield self[i]

    @property
    def survival(self) -> np.ndarray:
        c = self.c
        return c[:, 0] * c[:, 0] + c[:, 1] * c[:, 1] + c[:, 2] * c[:, 2]

    @property
    def final(self) -> AmplitudeState:
        return self[-1]


def evolve(
    state: AmplitudeState,
    gen: Generator,
    dt: float,
    n_steps: int,
    stride: int = 1,
    backend: str | None = None,
) -> Trajectory:
    """Fixed-step RK4 integration; returns ``n_steps // stride + 1`` states.

    For this linear, time-independent system one RK4 step is exactly the
    matrix polynomial ``kernels.rk4_matrix(A, dt)``, which is what the
    kernel applies.
    """
    _check_dt(dt, gen.beta1)
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    M = kernels.rk4_matrix(gen.matrix, dt)
    c = kernels.propagate(M, state.vector, n_steps, stride, backend=backend)
    t = state.t + dt * stride * np.arange(c.shape[0])
    return Trajectory(t, c)


def evolve_to(state: AmplitudeState, gen: Generator, duration: float, dt: float | None = None) -> AmplitudeState:
    """Evolve for ``duration`` with the largest step <= dt that tiles it exactly."""
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if duration == 0:
        return state
    dt = default_dt(gen.params) if dt is None else dt
    n = max(1, math.ceil(duration / dt - 1e-9))
    return evolve(state, gen, duration / n, n, stride=n).final


def evolve_spectral(state: AmplitudeState, gen: Generator, times) -> Trajectory:
    """Exact evolution through the eigendecomposition of the generator.

    An alternative to RK4 for very long horizons; the generator must be
    diagonalizable (true away from exactly critical damping).
    """
    times = np.asarray(times, dtype=np.float64)
    lam, V = np.linalg.eig(gen.matrix)
    coef = np.linalg.solve(V, state.vector.astype(complex))
    dts = times - state.t
    c = (np.exp(np.outer(dts, lam)) * coef) @ V.T
    return Trajectory(times, c.real.copy())


def survival(state: AmplitudeState) -> float:
    return state.c0 * state.c0 + state.c1 * state.c1 + state.c2 * state.c2


def emission_rates(state: AmplitudeState, params: SystemParams) -> tuple[float, float]:
    """(bright, dark) photon emission rates in 1/s; their sum is -dW/dt."""
    return params.beta1 * state.c1**2, params.beta2 * state.c2**2


def condition_on_no_jump(state: AmplitudeState) -> AmplitudeState:
    w = survival(state)
    if not w > 0:
        raise ConditioningError("state has zero norm; an emission has certainly occurred")
    return state.scaled(1.0 / math.sqrt(w))


def conservation_residuals(traj: Trajectory, gen: Generator) -> np.ndarray:
    """Per-step |W(t+dt) - W(t) + integral of the emission rate|.

    The integral over each step uses Simpson's rule with the midpoint state
    taken from a half-length RK4 step.
    """
    dt = float(traj.t[1] - traj.t[0])
    p = gen.params
    Mh = kernels.rk4_matrix(gen.matrix, 0.5 * dt)
    c = traj.c
    mid = c[:-1] @ Mh.T
    rate = p.beta1 * c[:, 1] ** 2 + p.beta2 * c[:, 2] ** 2
    rate_mid = p.beta1 * mid[:, 1] ** 2 + p.beta2 * mid[:, 2] ** 2
    integral = dt / 6.0 * (rate[:-1] + 4.0 * rate_mid + rate[1:])
    W = traj.survival
    return np.abs(W[1:] - W[:-1] + integral)


def reset_trajectory(params: SystemParams, t_stop: float, dt: float | None = None, stride: int = 1) -> Trajectory:
    """Trajectory from the reset state (1, 0, 0) on [0, t_stop]."""
    gen = build_generator(params)
    dt = default_dt(params) if dt is None else dt
    n = math.ceil(t_stop / dt - 1e-9)
    return evolve(AmplitudeState.reset(), gen, dt, n, stride=stride)
