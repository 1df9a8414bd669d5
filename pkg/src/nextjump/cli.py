"""Command-line front end.

Every command reads an optional ``key = value`` config file, applies flag
overrides, and writes a ``#``-prefixed metadata block followed by CSV (or a
plain-text report for ``eigen``). Exit status: 0 success, 2 config error,
1 runtime error.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import propagator, regimes, spectral, trajectories
from .kernels import BACKEND
from .model import (
    TWO_PI,
    SystemParams,
    UndefinedEtaError,
    classify_regime,
    derive_rates,
    figure2_params,
    figure3_params,
    figure4_params,
    figure5_params,
    slow_rate,
)
from .spectral import RegimeWarning

KEYS = (
    "omega1",
    "omega2",
    "beta1",
    "beta2",
    "units",
    "grid_start",
    "grid_stop",
    "grid_step",
    "seed",
    "n_traj",
    "horizon",
    "t0_prime",
    "t3_threshold",
    "out",
    "workers",
    "method",
)
FLOAT_KEYS = {"omega1", "omega2", "beta1", "beta2", "grid_start", "grid_stop", "grid_step", "horizon", "t0_prime", "t3_threshold"}
INT_KEYS = {"seed", "n_traj", "workers"}
COMMANDS = ("figure2", "figure3", "figure4", "figure5", "eigen", "trajectories")
# Rows emitted by figure commands whose grid is derived from the eigenvalues.
DEFAULT_ROWS = 2000
# Record length in units of 1/beta1 (8 ms at the 48 MHz decay rate).
DEFAULT_HORIZON_BETA1 = 3.84e5


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    return f"{float(x):.16e}"


def fmt_complex(z: complex) -> str:
    return f"{fmt(z.real)}{'+' if z.imag >= 0 else '-'}{fmt(abs(z.imag))}j"


def parse_config_text(text: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _convert(key: str, value):
    if value is None:
        return None
    if key in FLOAT_KEYS:
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: not a number: {value!r}") from None
    if key in INT_KEYS:
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key}: not an integer: {value!r}") from None
    if key == "units" and value not in ("angular", "hertz"):
        raise ConfigError(f"units must be 'angular' or 'hertz', got {value!r}")
    if key == "method" and value not in ("rk4", "spectral"):
        raise ConfigError(f"method must be 'rk4' or 'spectral', got {value!r}")
    return value


@dataclass
class RunConfig:
    command: str
    params: SystemParams
    units: str
    options: dict = field(default_factory=dict)

    def get(self, key, default=None):
        value = self.options.get(key)
        return default if value is None else value


def _defaults(command: str) -> SystemParams:
    return {
        "figure2": figure2_params,
        "figure3": figure3_params,
        "figure4": figure4_params,
        "figure5": figure5_params,
        "eigen": figure2_params,
        "trajectories": figure4_params,
    }[command]()


DEFAULT_UNITS = {"figure4": "hertz", "trajectories": "hertz"}


def resolve_config(command: str, file_values: dict[str, str], overrides: dict[str, str]) -> RunConfig:
    """Merge file values and flag overrides; drive frequencies given in hertz
    mode are multiplied by 2*pi, decay rates are used as given."""
    raw = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
    values = {k: _convert(k, v) for k, v in raw.items()}
    units = values.get("units") or DEFAULT_UNITS.get(command, "angular")
    base = _defaults(command)
    scale = TWO_PI if units == "hertz" else 1.0
    o1 = scale * values["omega1"] if values.get("omega1") is not None else base.omega1
    o2 = scale * values["omega2"] if values.get("omega2") is not None else base.omega2
    b1 = values["beta1"] if values.get("beta1") is not None else base.beta1
    b2 = values["beta2"] if values.get("beta2") is not None else base.beta2
    try:
        params = SystemParams(o1, o2, b1, b2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    options = {k: v for k, v in values.items() if k not in ("omega1", "omega2", "beta1", "beta2", "units")}
    return RunConfig(command, params, units, options)


# ---------------------------------------------------------------- output


class Report:
    def __init__(self):
        self.meta: list[tuple[str, str]] = []
        self.columns: list[str] | None = None
        self.rows: list[str] = []
        self.text: list[str] = []

    def note(self, key: str, value) -> None:
        if isinstance(value, float):
            value = fmt(value)
        elif isinstance(value, complex):
            value = fmt_complex(value)
        self.meta.append((key, str(value)))

    def table(self, columns, data) -> None:
        self.columns = list(columns)
        for row in data:
            self.rows.append(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v)) for v in row))

    def render(self) -> str:
        out = io.StringIO()
        for key, value in self.meta:
            out.write(f"# {key}: {value}\n")
        for line in self.text:
            out.write(line + "\n")
        if self.columns is not None:
            out.write(",".join(self.columns) + "\n")
            for r in self.rows:
                out.write(r + "\n")
        return out.getvalue()


def _describe(report: Report, cfg: RunConfig) -> None:
    """Resolved config, derived rates, regime and exact eigenvalues."""
    p = cfg.params
    report.note("command", cfg.command)
    report.note("units", cfg.units)
    report.note("omega1_rad_per_s", p.omega1)
    report.note("omega2_rad_per_s", p.omega2)
    report.note("beta1_per_s", p.beta1)
    report.note("beta2_per_s", p.beta2)
    for key in KEYS:
        if key in ("omega1", "omega2", "beta1", "beta2", "units", "out"):
            continue
        value = cfg.options.get(key)
        if value is not None:
            report.note(key, value)
    report.note("beta_ell", slow_rate(p))
    if p.omega1 > 0:
        r = derive_rates(p)
        report.note("epsilon", r.epsilon)
        report.note("eta", r.eta)
        report.note("alpha", r.alpha)
        if p.omega2 > 0 or r.beta_ell > 0:
            reg = classify_regime(r, p)
            report.note("regime", reg.tag.value)
            report.note("margin", reg.margin)
    else:
        report.note("regime", "undefined (omega1 = 0)")
    for i, z in enumerate(spectral.exact_eigenvalues(p).lambdas):
        report.note(f"eigenvalue_{i}", z)


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    if not step > 0:
        raise ConfigError("grid_step must be > 0")
    if stop < start or start < 0:
        raise ConfigError("grid needs 0 <= grid_start <= grid_stop")
    n = int(math.floor((stop - start) / step * (1 + 1e-12))) + 1
    return start + step * np.arange(n)


def _numeric_on_grid(params: SystemParams, t_stop: float, step: float, method: str):
    """Amplitudes from the reset state at t = k*step, k = 0..floor(t_stop/step)."""
    gen = propagator.build_generator(params)
    n_rows = int(math.floor(t_stop / step * (1 + 1e-12)))
    if method == "spectral":
        t = step * np.arange(n_rows + 1)
        return propagator.evolve_spectral(propagator.AmplitudeState.reset(), gen, t)
    n_sub = max(1, math.ceil(step / propagator.default_dt(params) * (1 - 1e-12)))
    dt = step / n_sub
    return propagator.evolve(propagator.AmplitudeState.reset(), gen, dt, n_rows * n_sub, stride=n_sub)


def _select(traj, start: float, step: float):
    k0 = int(math.ceil(start / step * (1 - 1e-12)))
    return traj.t[k0:], traj.c[k0:]


def _t0(cfg: RunConfig) -> float:
    return cfg.get("t0_prime", regimes.default_onset(cfg.params))


# ---------------------------------------------------------------- commands


def cmd_figure2(cfg: RunConfig) -> Report:
    p = cfg.params
    r = derive_rates(p)
    start = cfg.get("grid_start", 0.0)
    stop = cfg.get("grid_stop", 200.0)
    step = cfg.get("grid_step", 0.05)
    _grid(start, stop, step)
    report = Report()
    _describe(report, cfg)
    report.note("axis", "tau = beta1 * t")
    traj = _numeric_on_grid(p, stop / p.beta1, step / p.beta1, cfg.get("method", "rk4"))
    t, c = _select(traj, start / p.beta1, step / p.beta1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        _, c1_closed, _ = regimes.underdamped_after_reset(t, p)
    W = c[:, 0] ** 2 + c[:, 1] ** 2 + c[:, 2] ** 2
    norm = 4.0 * r.epsilon**2
    tau = p.beta1 * t
    report.table(
        ["tau", "c0", "c1", "c2", "W", "Pbar10_numeric", "Pbar10_closed"],
        zip(tau, c[:, 0], c[:, 1], c[:, 2], W, c[:, 1] ** 2 / norm, c1_closed**2 / norm),
    )
    return report


def cmd_figure3(cfg: RunConfig) -> Report:
    p = cfg.params
    if p.omega1 == 0:
        raise ConfigError("figure3 needs omega1 > 0")
    r = derive_rates(p)
    if not 0 < r.alpha < 1:
        raise ConfigError(f"figure3 needs 0 < alpha < 1, got alpha = {r.alpha:.6g}")
    start = cfg.get("grid_start", 0.0)
    stop = cfg.get("grid_stop", 10.0)
    step = cfg.get("grid_step", 0.01)
    tau_p = _grid(start, stop, step)
    rate = 2.0 * p.beta1 * r.epsilon**2
    t = tau_p / rate
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        c0, _, c2 = regimes.overdamped_dark(t, p)
        t2 = regimes.full_shelving_time(p)
    z = regimes.relative_occupation(c0, c2)
    z_exact, z_lead = regimes.late_time_z(r.alpha)
    report = Report()
    _describe(report, cfg)
    report.note("axis", "tau_prime = 2 * beta1 * epsilon^2 * t, t from dark-period onset")
    report.note("t2", t2)
    report.note("tau_prime_2", rate * t2)
    report.note("Z_late_exact", z_exact)
    report.note("Z_late_leading_order", z_lead)
    report.note("Z_late_difference", z_exact - z_lead)
    report.table(["tau_prime", "P20", "Z"], zip(tau_p, c2**2, z))
    return report


def _derived_stop(p: SystemParams) -> float:
    slow = spectral.exact_eigenvalues(p).slowest
    if slow.real == 0:
        raise ConfigError("no decaying mode; give grid_stop explicitly")
    return 5.0 / abs(slow.real)


def cmd_figure4(cfg: RunConfig) -> Report:
    p = cfg.params
    r = derive_rates(p)
    stop = cfg.get("grid_stop", _derived_stop(p))
    step = cfg.get("grid_step", stop / DEFAULT_ROWS)
    start = cfg.get("grid_start", 0.0)
    _grid(start, stop, step)
    t0 = _t0(cfg)
    gen = propagator.build_generator(p)
    w0 = propagator.survival(propagator.evolve_to(propagator.AmplitudeState.reset(), gen, t0))
    traj = _numeric_on_grid(p, stop, step, cfg.get("method", "rk4"))
    t, c = _select(traj, start, step)
    c = c.copy()
    after = t >= t0
    c[after] /= math.sqrt(w0)
    W = c[:, 0] ** 2 + c[:, 1] ** 2 + c[:, 2] ** 2
    z = regimes.relative_occupation(c[:, 0], c[:, 2])
    names = spectral.named_overdamped_roots(spectral.exact_eigenvalues(p), p)
    report = Report()
    _describe(report, cfg)
    report.note("axis", "t in seconds since reset")
    report.note("lambda3_exact", names["lambda3"].real)
    report.note("lambda3_asymptotic", spectral.overdamped_rates(p)[2])
    report.note("t0_prime", t0)
    report.note("W_at_t0_prime", w0)
    report.note("conditioning", "amplitudes for t >= t0_prime divided by sqrt(W(t0_prime))")
    report.note("P2_conditioned_late", c[-1, 2] ** 2 / W[-1])
    report.note("P2_conditioned_extralong_prediction", 1.0 / (1.0 + r.eta**2 + r.alpha))
    report.table(["t", "P10", "P20", "Z", "W", "P20_conditioned"], zip(t, c[:, 1] ** 2, c[:, 2] ** 2, z, W, c[:, 2] ** 2 / W))
    return report


def cmd_figure5(cfg: RunConfig) -> Report:
    p = cfg.params
    stop = cfg.get("grid_stop", _derived_stop(p))
    step = cfg.get("grid_step", stop / DEFAULT_ROWS)
    start = cfg.get("grid_start", 0.0)
    _grid(start, stop, step)
    traj = _numeric_on_grid(p, stop, step, cfg.get("method", "rk4"))
    t, c = _select(traj, start, step)
    W = c[:, 0] ** 2 + c[:, 1] ** 2 + c[:, 2] ** 2
    report = Report()
    _describe(report, cfg)
    report.note("axis", "t in seconds since reset")
    report.note("closed_forms", "disabled (numeric propagator only)")
    report.table(["t", "P10", "P20", "W"], zip(t, c[:, 1] ** 2, c[:, 2] ** 2, W))
    return report


def cmd_eigen(cfg: RunConfig) -> Report:
    p = cfg.params
    report = Report()
    _describe(report, cfg)
    rep = spectral.eigen_compare(p)
    coeffs = spectral.characteristic_cubic(p)
    B, C = spectral.reduced_cubic(p)
    lines = report.text
    lines.append("characteristic cubic: lambda^3 + p2 lambda^2 + p1 lambda + p0")
    lines.append(f"  p2 = {fmt(coeffs[0])}")
    lines.append(f"  p1 = {fmt(coeffs[1])}")
    lines.append(f"  p0 = {fmt(coeffs[2])}")
    lines.append(f"reduced factor x^2 + B x + C (x = lambda/beta1): B = {fmt(B)}, C = {fmt(C)}")
    lines.append("exact eigenvalues (1/s):")
    for z in rep.exact:
        lines.append(f"  {fmt_complex(z)}   x = {fmt_complex(z / p.beta1)}")
    for title, cmp in (("asymptotic underdamped", rep.underdamped), ("asymptotic overdamped", rep.overdamped)):
        lines.append(f"{title}:")
        for (e, a), err in zip(cmp.pairs, cmp.relative_errors):
            lines.append(f"  {fmt_complex(a)}   exact {fmt_complex(e)}   rel.err {fmt(err)}")
        lines.append(f"  max relative error {fmt(cmp.max_relative_error)}")
    if all(z.imag == 0 for z in rep.exact) and all(z != 0 for z in rep.exact):
        names = spectral.named_overdamped_roots(rep.exact, p)
        l1, l2, l3 = (names[k].real for k in ("lambda1", "lambda2", "lambda3"))
        lines.append(f"real spectrum: lambda1/lambda2 = {fmt(l1 / l2)}, lambda2/lambda3 = {fmt(l2 / l3)}")
    return report


def cmd_trajectories(cfg: RunConfig) -> Report:
    p = cfg.params
    n_traj = cfg.get("n_traj", 8)
    horizon = cfg.get("horizon", DEFAULT_HORIZON_BETA1 / p.beta1)
    seed = cfg.get("seed", 12345)
    workers = cfg.get("workers", 1)
    if n_traj < 1 or not horizon > 0:
        raise ConfigError("n_traj must be >= 1 and horizon > 0")
    t0 = _t0(cfg)
    records = trajectories.simulate_records(p, horizon, n_traj, seed, workers=workers)
    report = Report()
    _describe(report, cfg)
    for key, value in (("n_traj", n_traj), ("horizon", horizon), ("seed", seed)):
        if cfg.options.get(key) is None:
            report.note(key, value)
    n_events = sum(len(rec) for rec in records)
    if n_events == 0:
        report.note("summary", "no events")
        report.table(["bin_lo", "bin_hi", "count", "terminal_channel_bright", "terminal_channel_dark"], [])
        return report
    t3 = cfg.get("t3_threshold", trajectories.default_t3_threshold(p))
    stats = trajectories.dark_stats(records, p, t0_prime=t0, t3_threshold=t3)
    report.note("n_intervals", stats.n_intervals)
    report.note("n_censored", stats.n_censored)
    report.note("t0_prime", t0)
    report.note("t3_threshold", t3)
    gen = propagator.build_generator(p)
    reset = propagator.AmplitudeState.reset()
    w_t0 = propagator.survival(propagator.evolve_to(reset, gen, t0))
    report.note("fraction_dark", stats.fraction_dark)
    report.note("fraction_dark_se", stats.se_dark)
    report.note("survival_at_t0_prime", w_t0)
    report.note("fraction_extralong", stats.fraction_extralong)
    report.note("fraction_extralong_se", stats.se_extralong)
    if math.isfinite(t3):
        report.note("survival_at_t3_threshold", propagator.survival(propagator.evolve_to(reset, gen, t3)))
    if p.omega1 > 0:
        pred = regimes.dark_period_predictions(p, t0)
        report.note("predicted_p_extralong_alpha", pred.p_extralong)
        report.note("predicted_t3", pred.t3)
        report.note("predicted_p_dark_leading", pred.p_dark_leading)
        report.note("predicted_p_end_from_level2_extralong", pred.p_end_from_level2_extralong_exact)
        report.note("predicted_bright_share_dark_period", pred.bright_share_underdamped)
        if stats.se_extralong > 0:
            report.note("z_score_extralong_vs_alpha", (stats.fraction_extralong - pred.p_extralong) / stats.se_extralong)
    for name, (nb, nd) in stats.channel_counts.items():
        report.note(f"channels_{name}", f"bright={nb} dark={nd}")
    rows = [
        (lo, hi, int(n), int(b), int(d))
        for lo, hi, n, b, d in zip(stats.bin_edges[:-1], stats.bin_edges[1:], stats.counts, stats.bright_counts, stats.dark_counts)
    ]
    report.table(["bin_lo", "bin_hi", "count", "terminal_channel_bright", "terminal_channel_dark"], rows)
    return report


HANDLERS = {
    "figure2": cmd_figure2,
    "figure3": cmd_figure3,
    "figure4": cmd_figure4,
    "figure5": cmd_figure5,
    "eigen": cmd_eigen,
    "trajectories": cmd_trajectories,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nextjump", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="FILE")
        for key in KEYS:
            sp.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar=key.upper())
    return parser


def run(argv=None) -> tuple[int, str, str | None]:
    """Run a command; returns (exit code, output text, output path or None)."""
    args = build_parser().parse_args(argv)
    try:
        file_values = {}
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    file_values = parse_config_text(fh.read())
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
        overrides = {key: getattr(args, key) for key in KEYS}
        cfg = resolve_config(args.command, file_values, overrides)
        report = HANDLERS[args.command](cfg)
    except (ConfigError, UndefinedEtaError, regimes.RegimeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2, "", None
    return 0, report.render(), cfg.get("out")


def main(argv=None) -> int:
    try:
        code, text, out = run(argv)
        if code != 0:
            return code
        if out in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except Exception as exc:  # noqa: BLE001 - any failure past config parsing is a runtime error
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
