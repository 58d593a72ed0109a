import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from blipfield.cli import ConfigError, main, parse_config
from blipfield.core import make_grid
from blipfield.wavepacket import make_gaussian, read_packet_csv, write_packet_csv

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def write_config(path, payload):
    path.write_text(json.dumps(payload))
    return path


def gaussian(s=1, pol="H", center=0.0, sigma=1.0, k0=0.0):
    return {"kind": "gaussian", "channel": {"s": s, "polarization": pol},
            "parameters": {"center_x": center, "sigma_x": sigma, "k0": k0}}


def last_error(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


def test_evolve_figure1(tmp_path):
    out = tmp_path / "out"
    assert main(["evolve", "--config", str(SCENARIOS / "fig1_counterpropagating.json"), "--out", str(out), "--quiet"]) == 0
    summary = json.loads((out / "evolution.json").read_text())
    assert summary["final_inner_product_abs"] < 1e-12
    assert len(summary["inner_products"]) == 3
    p = read_packet_csv(out / "packet0_t002.csv")
    q = read_packet_csv(out / "packet1_t002.csv")
    # both packets centred on the origin at the last time
    assert np.abs(p.channel(1, "H")).argmax() == np.abs(q.channel(-1, "H")).argmax() == 512


def test_evolve_spectral_report(tmp_path):
    cfg = write_config(tmp_path / "c.json", {
        "grid": {"n_points": 256, "length": 32.0},
        "packets": [gaussian(k0=1.0)],
        "run": {"times": [0.0, 0.5, 1.3]},
    })
    assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
    summary = json.loads((tmp_path / "evolution.json").read_text())
    reports = [snap["report"] for snap in summary["packets"][0]["snapshots"]]
    assert reports[0]["max_deviation"] < 1e-12
    assert reports[1]["max_deviation"] is not None  # 0.5 = 4 dx
    assert reports[2]["max_deviation"] is None
    assert all(r["norm_drift"] < 1e-12 for r in reports)


def test_energy_narrowband(tmp_path, capsys):
    assert main(["energy", "--config", str(SCENARIOS / "narrowband_energy.json"), "--out", str(tmp_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["total"] == pytest.approx(2.0, abs=1e-3)
    assert json.loads((tmp_path / "energy.json").read_text()) == payload
    assert set(payload["per_channel"]) == {"+1H", "+1V", "-1H", "-1V"}


def test_fields_outputs(tmp_path):
    assert main(["fields", "--config", str(SCENARIOS / "blip_fields.json"), "--out", str(tmp_path), "--quiet"]) == 0
    for name in ("kernel_fourier.csv", "kernel_position.csv", "field_profile.csv",
                 "intensity_profile.csv", "poynting_profile.csv"):
        assert (tmp_path / name).exists()
    header = (tmp_path / "field_profile.csv").read_text().splitlines()[0]
    assert header == "x,re_e_y,im_e_y,re_e_z,im_e_z,re_b_y,im_b_y,re_b_z,im_b_z"
    rows = np.loadtxt(tmp_path / "kernel_fourier.csv", delimiter=",", skiprows=1)
    assert np.all(np.diff(rows[:, 0]) > 0)
    flux = np.loadtxt(tmp_path / "poynting_profile.csv", delimiter=",", skiprows=1)[:, 1]
    assert flux.min() >= -1e-15


def test_kernel_exponent(tmp_path):
    assert main(["kernel", "--config", str(SCENARIOS / "kernel.json"), "--out", str(tmp_path), "--quiet"]) == 0
    payload = json.loads((tmp_path / "kernel_tail.json").read_text())
    assert payload["exponent"] == pytest.approx(-1.5, abs=0.05)
    assert payload["intensity_exponent"] == pytest.approx(-3.0, abs=0.1)


def test_validate_defaults(tmp_path):
    assert main(["validate", "--out", str(tmp_path), "--quiet"]) == 0
    payload = json.loads((tmp_path / "validation.json").read_text())
    assert payload["passed"] and len(payload["checks"]) > 10


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        main(["fields", "--config", str(SCENARIOS / "blip_fields.json"), "--out", str(out), "--quiet"])
        main(["evolve", "--config", str(SCENARIOS / "fig1_counterpropagating.json"), "--out", str(out), "--quiet"])
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_custom_file_round_trip(tmp_path):
    g = make_grid(128, 16.0)
    write_packet_csv(make_gaussian(g, -1, "V", 2.0, 0.5, 1.0), tmp_path / "in.csv")
    cfg = write_config(tmp_path / "c.json", {
        "grid": {"n_points": 128, "length": 16.0},
        "packets": [{"kind": "custom-file", "parameters": {"path": "in.csv"}}],
        "run": {"times": [0.0]},
    })
    assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 0
    back = read_packet_csv(tmp_path / "o" / "packet0_t000.csv")
    orig = read_packet_csv(tmp_path / "in.csv")
    assert back.grid == orig.grid
    assert np.max(np.abs(back.amplitudes - orig.amplitudes)) < 1e-15


def test_custom_file_grid_mismatch(tmp_path, capsys):
    write_packet_csv(make_gaussian(make_grid(64, 16.0), 1, "H", 0.0, 1.0), tmp_path / "in.csv")
    cfg = write_config(tmp_path / "c.json", {
        "grid": {"n_points": 128, "length": 16.0},
        "packets": [{"kind": "custom-file", "parameters": {"path": "in.csv"}}],
    })
    assert main(["energy", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert last_error(capsys)["error"] == "config"


@pytest.mark.parametrize("payload", [
    {"grid": {"n_points": 255, "length": 16.0}, "packets": [gaussian()]},
    {"grid": {"n_points": 256, "length": -1.0}, "packets": [gaussian()]},
    {"grid": {"n_points": 256, "length": 16.0}, "packets": [gaussian(s=2)]},
    {"grid": {"n_points": 256, "length": 16.0}, "packets": [gaussian(pol="X")]},
    {"grid": {"n_points": 256, "length": 16.0}, "packets": [gaussian(sigma=0.01)]},
    {"grid": {"n_points": 256, "length": 16.0}, "packets": [gaussian(center=50.0)]},
    {"grid": {"n_points": 256, "length": 16.0}, "packets": [gaussian(), gaussian()]},
    {"grid": {"n_points": 256, "length": 16.0}, "packets": []},
    {"grid": {"n_points": 256, "length": 16.0}, "packets": [gaussian()], "extra": 1},
    {"grid": {"n_points": 256, "length": 16.0}, "packets": [gaussian()], "units": {"hbar": 1}},
    {"packets": [gaussian()]},
])
def test_energy_config_errors(tmp_path, capsys, payload):
    cfg = write_config(tmp_path / "c.json", payload)
    assert main(["energy", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    err = last_error(capsys)
    assert err["status"] == 2 and err["error"] == "config"


def test_blip_index_out_of_range(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {
        "grid": {"n_points": 16, "length": 16.0},
        "packets": [{"kind": "blip", "channel": {"s": 1, "polarization": "H"}, "parameters": {"index": 16}}],
    })
    assert main(["energy", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_evolve_rejects_fractional_shift(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {
        "grid": {"n_points": 64, "length": 16.0},
        "packets": [gaussian()],
        "run": {"times": [0.1], "method": "shift"},
    })
    assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_evolve_needs_times(tmp_path):
    cfg = write_config(tmp_path / "c.json", {"grid": {"n_points": 64, "length": 16.0}, "packets": [gaussian()]})
    assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_missing_config_file(tmp_path, capsys):
    assert main(["energy", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 3
    assert last_error(capsys)["error"] == "io"


def test_invalid_json(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    assert main(["energy", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_config_required_except_validate(tmp_path):
    assert main(["energy", "--out", str(tmp_path)]) == 2


def test_validate_rejects_grid():
    with pytest.raises(ConfigError):
        parse_config({"grid": {"n_points": 8, "length": 1.0}}, "validate")


def test_explicit_units():
    cfg = parse_config({"units": {"hbar": 2.0, "c": 3.0, "epsilon": 0.5, "area": 1.0},
                        "grid": {"n_points": 8, "length": 1.0}, "packets": [gaussian(sigma=0.25)]}, "energy")
    assert cfg.constants.c == 3.0
    assert cfg.constants.mu == pytest.approx(1 / (0.5 * 9.0))


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "blipfield", "kernel", "--config", str(SCENARIOS / "kernel.json"),
         "--out", str(tmp_path), "--quiet"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "kernel_tail.json").exists()
