import io
import math

import numpy as np
import pytest

from nextjump import cli
from nextjump.model import TWO_PI


def body(text):
    return np.genfromtxt(
        io.StringIO("\n".join(x for x in text.splitlines() if not x.startswith("#"))), delimiter=",", names=True
    )


def meta(text):
    return dict(x[2:].split(": ", 1) for x in text.splitlines() if x.startswith("# "))


def test_parse_config_text():
    vals = cli.parse_config_text("omega1 = 0.5  # bright\n\n# comment\nseed=3\n")
    assert vals == {"omega1": "0.5", "seed": "3"}
    with pytest.raises(cli.ConfigError):
        cli.parse_config_text("bogus = 1")
    with pytest.raises(cli.ConfigError):
        cli.parse_config_text("omega1 0.5")


def test_hertz_units_scale_drives_only():
    cfg = cli.resolve_config("figure2", {"units": "hertz", "omega1": "1", "beta1": "10"}, {})
    assert cfg.params.omega1 == pytest.approx(TWO_PI)
    assert cfg.params.beta1 == 10.0


def test_flags_override_file():
    cfg = cli.resolve_config("figure2", {"omega1": "0.1"}, {"omega1": "0.2"})
    assert cfg.params.omega1 == 0.2


@pytest.mark.parametrize(
    "argv",
    [
        ["figure2", "--beta1", "-1"],
        ["figure2", "--omega1", "abc"],
        ["figure2", "--units", "furlongs"],
        ["figure2", "--grid-step", "0"],
        ["figure3", "--omega1", "0.1", "--omega2", "0.5"],
        ["eigen", "--config", "/nonexistent/file.cfg"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    assert "config error" in capsys.readouterr().err


def test_figure2_csv_shape_and_precision():
    code, text, _ = cli.run(["figure2", "--grid-stop", "10"])
    assert code == 0
    d = body(text)
    assert d.dtype.names == ("tau", "c0", "c1", "c2", "W", "Pbar10_numeric", "Pbar10_closed")
    assert len(d) == 201 and d["tau"][-1] == pytest.approx(10.0)
    row = [x for x in text.splitlines() if not x.startswith("#")][2]
    assert all(len(v.split("e")[0].replace("-", "").replace(".", "")) >= 12 for v in row.split(","))


def test_figure2_grid_start():
    d = body(cli.run(["figure2", "--grid-start", "5", "--grid-stop", "6", "--grid-step", "0.5"])[1])
    assert np.allclose(d["tau"], [5.0, 5.5, 6.0])


def test_spectral_method_agrees_with_rk4():
    a = body(cli.run(["figure2", "--grid-stop", "50"])[1])
    b = body(cli.run(["figure2", "--grid-stop", "50", "--method", "spectral"])[1])
    assert np.allclose(a["c0"], b["c0"], atol=1e-8)


def test_figure3_meta():
    m = meta(cli.run(["figure3"])[1])
    assert float(m["tau_prime_2"]) == pytest.approx(math.log(10) / (1 - 0.1))
    assert float(m["Z_late_exact"]) == pytest.approx(0.9 / 1.1)


def test_figure4_conditioned_columns():
    text = cli.run(["figure4"])[1]
    m = meta(text)
    d = body(text)
    assert len(d) == cli.DEFAULT_ROWS + 1
    late = d["P20_conditioned"][-1]
    assert late == pytest.approx(float(m["P2_conditioned_extralong_prediction"]), rel=1e-3)


def test_eigen_report():
    code, text, _ = cli.run(["eigen"])
    assert code == 0 and "max relative error" in text and "exact eigenvalues" in text


def test_trajectories_no_events():
    text = cli.run(["trajectories", "--omega1", "0", "--omega2", "0", "--horizon", "1e-6"])[1]
    assert meta(text)["summary"] == "no events"


def test_out_file(tmp_path):
    out = tmp_path / "f5.csv"
    assert cli.main(["figure5", "--out", str(out)]) == 0
    assert out.read_text().startswith("# command: figure5")


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("grid_stop = 2\ngrid_step = 1\n")
    d = body(cli.run(["figure2", "--config", str(cfg)])[1])
    assert np.allclose(d["tau"], [0, 1, 2])


def test_runtime_error_exit_1(monkeypatch, capsys):
    def boom(cfg):
        raise RuntimeError("kaput")

    monkeypatch.setitem(cli.HANDLERS, "figure5", boom)
    assert cli.main(["figure5"]) == 1
    assert "kaput" in capsys.readouterr().err
