"""Monte Carlo photon-emission records.

Every emission returns the atom to |0>, so inter-jump intervals are i.i.d.
with survival function W(t) computed from the reset state. A waiting time is
drawn by solving W(t) = u for uniform u: the reset trajectory is tabulated
once on the integrator grid (``SurvivalTable``), each u is bracketed by a
table step and the crossing is refined by bisection inside that step. The
emitting channel is then chosen in proportion to beta1*c1^2 : beta2*c2^2 at
the jump.
"""

from __future__ import annotations

import enum
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels, propagator
from .model import SystemParams
from .propagator import AmplitudeState, build_generator
from .spectral import exact_eigenvalues

TOL_WT = 1e-6
N_BISECT = 20
CHUNK = 4096
# Smallest u drawn; keeps every draw inside (0, 1).
U_FLOOR = 2.0**-60
MAX_TABLE_STEPS = 50_000_000


class Channel(str, enum.Enum):
    BRIGHT = "bright"  # |1> -> |0>
    DARK = "dark"  # |2> -> |0>


class JumpOutcome(NamedTuple):
    time: float | None
    state: AmplitudeState | None
    censored: bool


class SurvivalTable:
    """Lazily extended table of the no-jump trajectory from ``state0`` on a grid of ``dt``.

    Extension is deterministic, so the tabulated values do not depend on
    the order in which callers request them. Safe to share between threads.
    """

    def __init__(
        self,
        params: SystemParams,
        state0: AmplitudeState | None = None,
        dt: float | None = None,
        max_steps: int = MAX_TABLE_STEPS,
        backend: str | None = None,
    ):
        self.params = params
        self.state0 = AmplitudeState.reset() if state0 is None else state0
        self.dt = propagator.default_dt(params) if dt is None else dt
        gen = build_generator(params)
        propagator._check_dt(self.dt, params.beta1)
        self.M = kernels.rk4_matrix(gen.matrix, self.dt)
        self.P = kernels.rk4_poly(gen.matrix, self.dt)
        self.max_steps = int(max_steps)
        self.backend = backend
        y0 = self.state0.vector
        self._states = y0[None, :].copy()
        w0 = float(y0 @ y0)
        self._wmin = np.array([w0])
        self._lock = threading.Lock()

    @property
    def n_steps(self) -> int:
        return self._states.shape[0] - 1

    @property
    def states(self) -> np.ndarray:
        return self._states

    def ensure(self, w_stop: float, limit: int | None = None) -> None:
        """Extend until the tabulated survival drops below ``w_stop`` or ``limit`` steps."""
        limit = self.max_steps if limit is None else min(limit, self.max_steps)
        with self._lock:
            if self._wmin[-1] < w_stop or self.n_steps >= limit:
                return
            new = kernels.scan_survival(
                self.M, self._states[-1], w_stop, limit - self.n_steps, backend=self.backend
            )[1:]
            if new.shape[0] == 0:
                return
            w = new[:, 0] * new[:, 0] + new[:, 1] * new[:, 1] + new[:, 2] * new[:, 2]
            wmin = np.minimum.accumulate(np.concatenate(([self._wmin[-1]], w)))[1:]
            self._states = np.concatenate((self._states, new))
            self._wmin = np.concatenate((self._wmin, wmin))

    def first_passage(self, us, max_time: float | None = None):
        """Times (since the table start) at which W falls to each u.

        Returns ``(times, states, found)``; entries with ``found == False``
        did not reach u within ``max_time`` (or the step cap) and carry NaN.
        """
        us = np.asarray(us, dtype=np.float64)
        n = us.shape[0]
        times = np.full(n, np.nan)
        states = np.full((n, 3), np.nan)
        if n == 0:
            return times, states, np.zeros(0, dtype=bool)
        cap = self.max_steps
        if max_time is not None:
            cap = min(cap, math.ceil(max_time / self.dt) + 1)
        self.ensure(float(us.min()), cap)
        with self._lock:
            tab, wmin = self._states, self._wmin
        k = np.searchsorted(-wmin, -us, side="right")
        found = (k < wmin.shape[0]) & (k >= 1) & (k <= cap)
        if np.any(found):
            idx = k[found] - 1
            theta, jump = kernels.refine_crossings(tab, idx, us[found], self.P, N_BISECT, backend=self.backend)
            times[found] = (idx + theta) * self.dt
            states[found] = jump
        return times, states, found


def _check_start(state0: AmplitudeState) -> None:
    if abs(propagator.survival(state0) - 1.0) > 1e-9:
        raise ValueError("waiting times are sampled from a normalized (reset or conditioned) state")


def sample_waiting_time(
    state0: AmplitudeState,
    params: SystemParams,
    u: float,
    dt: float | None = None,
    max_time: float | None = None,
    backend: str | None = None,
) -> JumpOutcome:
    """Solve W(t) = u forward from ``state0``; censored if not reached by ``max_time``."""
    _check_start(state0)
    if not 0.0 < u < 1.0:
        raise ValueError("u must lie in (0, 1)")
    start = AmplitudeState(state0.c0, state0.c1, state0.c2, 0.0)
    table = SurvivalTable(params, start, dt=dt, backend=backend)
    times, states, found = table.first_passage(np.array([u]), max_time=max_time)
    if not found[0]:
        return JumpOutcome(None, None, True)
    t = float(times[0])
    return JumpOutcome(t, AmplitudeState.from_vector(states[0], state0.t + t), False)


def sample_waiting_times(
    params: SystemParams,
    us,
    dt: float | None = None,
    max_time: float | None = None,
    table: SurvivalTable | None = None,
    backend: str | None = None,
):
    """Vectorized first-jump times from the reset state; censored entries are NaN."""
    table = SurvivalTable(params, dt=dt, backend=backend) if table is None else table
    times, _, _ = table.first_passage(us, max_time=max_time)
    return times


def select_channel(state: AmplitudeState, params: SystemParams, u2: float) -> Channel:
    r1, r2 = propagator.emission_rates(state, params)
    total = r1 + r2
    if not total > 0:
        raise ValueError("zero emission rate at the jump state")
    return Channel.BRIGHT if u2 * total < r1 else Channel.DARK


def _channels(states: np.ndarray, params: SystemParams, u2: np.ndarray) -> np.ndarray:
    r1 = params.beta1 * states[:, 1] ** 2
    r2 = params.beta2 * states[:, 2] ** 2
    total = r1 + r2
    if np.any(~(total > 0)):
        raise ValueError("zero emission rate at a jump state")
    return u2 * total < r1  # True for bright


@dataclass(frozen=True)
class PhotonRecord:
    times: np.ndarray
    bright: np.ndarray  # bool per event
    horizon: float
    seed: int
    stream: int | None = None

    @property
    def events(self) -> list[tuple[float, Channel]]:
        return [
            (float(t), Channel.BRIGHT if b else Channel.DARK) for t, b in zip(self.times, self.bright)
        ]

    def __len__(self) -> int:
        return self.times.shape[0]

    def intervals(self) -> np.ndarray:
        return np.diff(self.times, prepend=0.0)

    @property
    def open_interval(self) -> float:
        last = self.times[-1] if len(self) else 0.0
        return self.horizon - float(last)


def record_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    """PCG64 stream for one record, derived from (seed, stream index)."""
    ss = np.random.SeedSequence(seed) if stream is None else np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.PCG64(ss))


def _no_drive(params: SystemParams) -> bool:
    return params.omega1 == 0 and params.omega2 == 0


def simulate_record(
    params: SystemParams,
    horizon: float,
    seed: int,
    stream: int | None = None,
    dt: float | None = None,
    table: SurvivalTable | None = None,
    backend: str | None = None,
) -> PhotonRecord:
    """Jump, choose channel, reset; repeat until ``horizon``.

    Uniforms are consumed in (u, u2) pairs from the record's own stream.
    """
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    if _no_drive(params):
        # the ground state is stationary and never emits
        return PhotonRecord(np.zeros(0), np.zeros(0, dtype=bool), horizon, seed, stream)
    table = SurvivalTable(params, dt=dt, backend=backend) if table is None else table
    rng = record_rng(seed, stream)
    t = 0.0
    times: list[np.ndarray] = []
    bright: list[np.ndarray] = []
    while True:
        draws = rng.random((CHUNK, 2))
        u = np.maximum(draws[:, 0], U_FLOOR)
        waits, states, found = table.first_passage(u, max_time=horizon - t)
        stop = np.flatnonzero(~found)
        n_ok = stop[0] if stop.size else CHUNK
        cum = np.cumsum(np.concatenate(([t], waits[:n_ok])))[1:]
        over = np.flatnonzero(cum > horizon)
        if over.size:
            n_ok = over[0]
        if n_ok:
            times.append(cum[:n_ok])
            bright.append(_channels(states[:n_ok], params, draws[:n_ok, 1]))
            t = float(cum[n_ok - 1])
        if n_ok < CHUNK:
            break
    ev_t = np.concatenate(times) if times else np.zeros(0)
    ev_b = np.concatenate(bright) if bright else np.zeros(0, dtype=bool)
    return PhotonRecord(ev_t, ev_b, horizon, seed, stream)


def simulate_records(
    params: SystemParams,
    horizon: float,
    n_records: int,
    seed: int,
    workers: int = 1,
    dt: float | None = None,
    backend: str | None = None,
) -> list[PhotonRecord]:
    """``n_records`` independent records; record i uses stream (seed, i).

    Output is identical for any ``workers``: the survival table is shared
    and deterministic and results are collected in record order.
    """
    table = None if _no_drive(params) else SurvivalTable(params, dt=dt, backend=backend)

    def run(i):
        return simulate_record(params, horizon, seed, stream=i, dt=dt, table=table, backend=backend)

    if workers <= 1:
        return [run(i) for i in range(n_records)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(n_records)))


def default_t3_threshold(params: SystemParams) -> float:
    """1/|Re lambda| of the slowest exact eigenvalue."""
    slow = exact_eigenvalues(params).slowest
    return math.inf if slow.real == 0 else 1.0 / abs(slow.real)


@dataclass(frozen=True)
class DarkStats:
    n_intervals: int
    n_censored: int
    t0_prime: float
    t3_threshold: float
    bin_edges: np.ndarray
    counts: np.ndarray
    bright_counts: np.ndarray
    dark_counts: np.ndarray
    fraction_dark: float
    fraction_extralong: float
    se_dark: float
    se_extralong: float
    channel_counts: dict = field(default_factory=dict)


def standard_error(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n) if n else math.nan


def collect_intervals(records: Sequence[PhotonRecord]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(closed intervals, bright flags of their terminal jumps, open terminal intervals)."""
    iv = [r.intervals() for r in records]
    br = [r.bright for r in records]
    open_iv = np.array([r.open_interval for r in records])
    return (
        np.concatenate(iv) if iv else np.zeros(0),
        np.concatenate(br) if br else np.zeros(0, dtype=bool),
        open_iv,
    )


def log_bins(intervals: np.ndarray, per_decade: int = 10) -> np.ndarray:
    pos = intervals[intervals > 0]
    if pos.size == 0:
        return np.array([0.0, 1.0])
    lo = math.floor(math.log10(pos.min()))
    hi = math.ceil(math.log10(pos.max()))
    if hi == lo:
        hi += 1
    return np.logspace(lo, hi, per_decade * (hi - lo) + 1)


def dark_stats(
    records: Sequence[PhotonRecord],
    params: SystemParams,
    t0_prime: float | None = None,
    t3_threshold: float | None = None,
    bins=None,
    include_censored: bool = False,
) -> DarkStats:
    """Aggregate inter-jump intervals (the first measured from t = 0).

    The open interval after the last event of each record is censored and
    left out unless ``include_censored``; it then enters the histogram and
    the fractions but carries no channel.
    """
    if not records:
        raise ValueError("no records")
    t0 = propagator.T0_PRIME_BETA1 / params.beta1 if t0_prime is None else t0_prime
    t3 = default_t3_threshold(params) if t3_threshold is None else t3_threshold
    iv, br, open_iv = collect_intervals(records)
    if iv.size == 0 and not include_censored:
        raise ValueError("records contain no closed intervals")
    pool = np.concatenate((iv, open_iv)) if include_censored else iv
    edges = log_bins(pool) if bins is None else np.asarray(bins, dtype=np.float64)
    counts, _ = np.histogram(pool, edges)
    bright_counts, _ = np.histogram(iv[br], edges)
    dark_counts, _ = np.histogram(iv[~br], edges)
    n = pool.size
    f_dark = float(np.count_nonzero(pool > t0)) / n
    f_long = float(np.count_nonzero(pool > t3)) / n
    classes = {"short": iv <= t0, "dark": (iv > t0) & (iv <= t3), "extralong": iv > t3}
    channel_counts = {
        name: (int(np.count_nonzero(br & m)), int(np.count_nonzero(~br & m))) for name, m in classes.items()
    }
    return DarkStats(
        n_intervals=int(n),
        n_censored=int(open_iv.size),
        t0_prime=t0,
        t3_threshold=t3,
        bin_edges=edges,
        counts=counts,
        bright_counts=bright_counts,
        dark_counts=dark_counts,
        fraction_dark=f_dark,
        fraction_extralong=f_long,
        se_dark=standard_error(f_dark, n),
        se_extralong=standard_error(f_long, n),
        channel_counts=channel_counts,
    )
