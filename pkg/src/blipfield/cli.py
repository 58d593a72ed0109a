"""Scenario runner.

Usage::

    blipfield evolve   --config scenario.json --out results/
    blipfield energy   --config scenario.json
    blipfield fields   --config scenario.json --out results/
    blipfield kernel   --config scenario.json --out results/
    blipfield validate [--config validate.json] --out results/

The config is a JSON object with blocks ``units``, ``grid``, ``packets`` and
``run``; unknown keys are rejected.  Exit status: 0 success, 1 a physics
check failed, 2 bad config, 3 I/O error.  Errors go to stderr as a single
JSON line.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .core import NATURAL_UNITS, Grid, PhysicalConstants, make_grid
from .dynamics import evolve_with_report
from .energy import energy_expectation
from .fields import (
    build_kernel,
    field_profile,
    intensity_profile,
    kernel_tail_exponent,
    poynting_profile,
    write_profile_csv,
)
from .validation import run_checks
from .wavepacket import (
    WavePacket,
    inner_product,
    make_blip,
    make_gaussian,
    read_packet_csv,
    write_packet_csv,
)

SUBCOMMANDS = ("evolve", "energy", "fields", "kernel", "validate")

EXIT_OK, EXIT_PHYSICS, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# -- config ------------------------------------------------------------------

@dataclass
class PacketSpec:
    kind: str
    s: int | None = None
    polarization: str | None = None
    parameters: dict[str, Any] = field(default_factory=dict)


@dataclass
class ScenarioConfig:
    constants: PhysicalConstants = NATURAL_UNITS
    grid: Grid | None = None
    packets: list[PacketSpec] = field(default_factory=list)
    run: dict[str, Any] = field(default_factory=dict)
    base_dir: Path = Path(".")


_RUN_KEYS = {
    "evolve": {"times": None, "method": "spectral"},
    "energy": {},
    "fields": {},
    "kernel": {"inner_sites": 8, "outer_fraction": 0.25, "padding": 64},
    "validate": {"seed": 0},
}
_NEEDS_GRID = {"evolve", "energy", "fields", "kernel"}
_PACKET_COUNT = {"evolve": (1, None), "energy": (1, 1), "fields": (1, 1), "kernel": (0, 0), "validate": (0, 0)}


def _require_keys(block: dict, allowed: set[str], where: str, required: set[str] = frozenset()) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(block)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")


def _positive(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ConfigError(f"{where} must be a positive number, got {value!r}")
    return float(value)


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _parse_units(block) -> PhysicalConstants:
    if block == "natural":
        return NATURAL_UNITS
    _require_keys(block, {"hbar", "c", "epsilon", "area"}, "units", {"hbar", "c", "epsilon", "area"})
    return PhysicalConstants(**{k: _positive(v, f"units.{k}") for k, v in block.items()})


def _parse_packet(block, i: int) -> PacketSpec:
    where = f"packets[{i}]"
    _require_keys(block, {"kind", "channel", "parameters"}, where, {"kind", "parameters"})
    kind = block["kind"]
    params = block["parameters"]
    if kind == "custom-file":
        if "channel" in block:
            raise ConfigError(f"{where}: custom-file packets take no channel")
        _require_keys(params, {"path"}, f"{where}.parameters", {"path"})
        if not isinstance(params["path"], str):
            raise ConfigError(f"{where}.parameters.path must be a string")
        return PacketSpec(kind, parameters=dict(params))
    if kind not in ("gaussian", "blip"):
        raise ConfigError(f"{where}: kind must be gaussian, blip or custom-file, got {kind!r}")
    if "channel" not in block:
        raise ConfigError(f"{where}: missing keys ['channel']")
    channel = block["channel"]
    _require_keys(channel, {"s", "polarization"}, f"{where}.channel", {"s", "polarization"})
    if channel["s"] not in (1, -1) or isinstance(channel["s"], bool):
        raise ConfigError(f"{where}.channel.s must be +1 or -1")
    if channel["polarization"] not in ("H", "V"):
        raise ConfigError(f"{where}.channel.polarization must be H or V")

    if kind == "gaussian":
        _require_keys(params, {"center_x", "sigma_x", "k0"}, f"{where}.parameters", {"center_x", "sigma_x"})
        parsed = {
            "center_x": _number(params["center_x"], f"{where}.parameters.center_x"),
            "sigma_x": _positive(params["sigma_x"], f"{where}.parameters.sigma_x"),
            "k0": _number(params.get("k0", 0.0), f"{where}.parameters.k0"),
        }
    else:
        _require_keys(params, {"index"}, f"{where}.parameters", {"index"})
        parsed = {"index": _integer(params["index"], f"{where}.parameters.index")}
    return PacketSpec(kind, channel["s"], channel["polarization"], parsed)


def _parse_run(block, subcommand: str) -> dict[str, Any]:
    defaults = _RUN_KEYS[subcommand]
    _require_keys(block, set(defaults), "run")
    run = {k: v for k, v in defaults.items() if v is not None}
    run.update(block)
    if subcommand == "evolve":
        times = block.get("times")
        if not isinstance(times, list) or not times:
            raise ConfigError("run.times must be a non-empty list")
        run["times"] = [_number(t, "run.times[]") for t in times]
        if any(t < 0 for t in run["times"]):
            raise ConfigError("run.times must be non-negative")
        if run["method"] not in ("spectral", "shift"):
            raise ConfigError("run.method must be spectral or shift")
    elif subcommand == "kernel":
        run["inner_sites"] = _integer(run["inner_sites"], "run.inner_sites")
        run["outer_fraction"] = _positive(run["outer_fraction"], "run.outer_fraction")
        run["padding"] = _integer(run["padding"], "run.padding")
        if run["inner_sites"] < 1 or run["padding"] < 1 or run["outer_fraction"] > 0.5:
            raise ConfigError("run: inner_sites, padding >= 1 and outer_fraction <= 0.5 required")
    elif subcommand == "validate":
        run["seed"] = _integer(run["seed"], "run.seed")
    return run


def parse_config(raw: dict, subcommand: str, base_dir: Path = Path(".")) -> ScenarioConfig:
    """Validate a decoded config object for one subcommand."""
    _require_keys(raw, {"units", "grid", "packets", "run"}, "config")
    cfg = ScenarioConfig(base_dir=base_dir)
    cfg.constants = _parse_units(raw.get("units", "natural"))

    if subcommand in _NEEDS_GRID:
        if "grid" not in raw:
            raise ConfigError(f"{subcommand} needs a grid block")
        grid = raw["grid"]
        _require_keys(grid, {"n_points", "length"}, "grid", {"n_points", "length"})
        try:
            cfg.grid = make_grid(_integer(grid["n_points"], "grid.n_points"),
                                 _positive(grid["length"], "grid.length"))
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None
    elif "grid" in raw:
        raise ConfigError(f"{subcommand} takes no grid block")

    packets = raw.get("packets", [])
    if not isinstance(packets, list):
        raise ConfigError("packets must be a list")
    lo, hi = _PACKET_COUNT[subcommand]
    if len(packets) < lo or (hi is not None and len(packets) > hi):
        want = f"exactly {lo}" if lo == hi else f"at least {lo}"
        raise ConfigError(f"{subcommand} needs {want} packet(s), got {len(packets)}")
    cfg.packets = [_parse_packet(p, i) for i, p in enumerate(packets)]
    cfg.run = _parse_run(raw.get("run", {}), subcommand)
    return cfg


def build_packet(spec: PacketSpec, cfg: ScenarioConfig) -> WavePacket:
    grid = cfg.grid
    try:
        if spec.kind == "gaussian":
            return make_gaussian(grid, spec.s, spec.polarization, **spec.parameters)
        if spec.kind == "blip":
            return make_blip(grid, spec.s, spec.polarization, spec.parameters["index"])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"packet: {exc}") from None
    path = Path(spec.parameters["path"])
    if not path.is_absolute():
        path = cfg.base_dir / path
    packet = read_packet_csv(path)
    if packet.grid != grid:
        raise ConfigError(f"{path}: packet grid ({packet.grid.n_points}, {packet.grid.length}) "
                          f"differs from config grid ({grid.n_points}, {grid.length})")
    return packet


# -- subcommands -------------------------------------------------------------

def _dump(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_evolve(cfg: ScenarioConfig, out: Path) -> tuple[int, dict]:
    packets = [build_packet(spec, cfg) for spec in cfg.packets]
    method = cfg.run["method"]
    records = []
    evolved: dict[int, list[WavePacket]] = {}
    for i, packet in enumerate(packets):
        snaps = []
        evolved[i] = []
        for j, t in enumerate(cfg.run["times"]):
            try:
                state, report = evolve_with_report(packet, t, cfg.constants, method)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            name = f"packet{i}_t{j:03d}.csv"
            write_packet_csv(state, out / name)
            evolved[i].append(state)
            snaps.append({"time": t, "file": name, "report": report.to_dict()})
        records.append({"index": i, "snapshots": snaps})

    overlaps = []
    for a in range(len(packets)):
        for b in range(a + 1, len(packets)):
            for j, t in enumerate(cfg.run["times"]):
                ip = inner_product(evolved[a][j], evolved[b][j])
                overlaps.append({"pair": [a, b], "time": t, "re": ip.real, "im": ip.imag, "abs": abs(ip)})
    payload = {"method": method, "packets": records, "inner_products": overlaps}
    if overlaps:
        payload["final_inner_product_abs"] = max(o["abs"] for o in overlaps if o["time"] == cfg.run["times"][-1])
    _dump(out / "evolution.json", payload)
    return EXIT_OK, payload


def run_energy(cfg: ScenarioConfig, out: Path) -> tuple[int, dict]:
    packet = build_packet(cfg.packets[0], cfg)
    payload = energy_expectation(packet, cfg.constants).to_dict()
    _dump(out / "energy.json", payload)
    return EXIT_OK, payload


def _write_kernel_tables(cfg: ScenarioConfig, out: Path) -> None:
    kernel = build_kernel(cfg.grid, cfg.constants)
    order = np.argsort(cfg.grid.wavenumbers, kind="stable")
    write_profile_csv(out / "kernel_fourier.csv", cfg.grid,
                      {"r_tilde": kernel.fourier_values[order]},
                      x=cfg.grid.wavenumbers[order], axis_name="k")
    order = np.argsort(cfg.grid.displacements, kind="stable")
    write_profile_csv(out / "kernel_position.csv", cfg.grid,
                      {"r": kernel.position_values[order]}, x=cfg.grid.displacements[order])


def run_fields(cfg: ScenarioConfig, out: Path) -> tuple[int, dict]:
    packet = build_packet(cfg.packets[0], cfg)
    kernel = build_kernel(cfg.grid, cfg.constants)
    _write_kernel_tables(cfg, out)
    prof = field_profile(packet, kernel, cfg.constants)
    write_profile_csv(out / "field_profile.csv", cfg.grid, prof.components())
    inten = intensity_profile(packet, kernel, cfg.constants)
    write_profile_csv(out / "intensity_profile.csv", cfg.grid, {"intensity_y": inten[0], "intensity_z": inten[1]})
    flux = poynting_profile(packet, kernel, cfg.constants)
    write_profile_csv(out / "poynting_profile.csv", cfg.grid, {"poynting": flux})
    files = ["kernel_fourier.csv", "kernel_position.csv", "field_profile.csv",
             "intensity_profile.csv", "poynting_profile.csv"]
    return EXIT_OK, {"files": files, "poynting_integral": float(flux.sum() * cfg.grid.dx * cfg.constants.area)}


def run_kernel(cfg: ScenarioConfig, out: Path) -> tuple[int, dict]:
    _write_kernel_tables(cfg, out)
    run = cfg.run
    grid = cfg.grid
    hi = int(run["outer_fraction"] * grid.n_points)
    if hi <= run["inner_sites"] + 1:
        raise ConfigError("fit range is empty; enlarge the grid or lower inner_sites")
    kwargs = dict(inner_sites=run["inner_sites"], outer_fraction=run["outer_fraction"], padding=run["padding"])
    payload = {
        "exponent": kernel_tail_exponent(grid, cfg.constants, **kwargs),
        "intensity_exponent": kernel_tail_exponent(grid, cfg.constants, squared=True, **kwargs),
        "expected_exponent": -1.5,
        "fit_range": [run["inner_sites"] * grid.dx, hi * grid.dx],
        "padding": run["padding"],
    }
    _dump(out / "kernel_tail.json", payload)
    return EXIT_OK, payload


def run_validate(cfg: ScenarioConfig, out: Path) -> tuple[int, dict]:
    checks = run_checks(cfg.run["seed"], cfg.constants)
    payload = {
        "seed": cfg.run["seed"],
        "passed": all(c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
    _dump(out / "validation.json", payload)
    return (EXIT_OK if payload["passed"] else EXIT_PHYSICS), payload


RUNNERS = {
    "evolve": run_evolve,
    "energy": run_energy,
    "fields": run_fields,
    "kernel": run_kernel,
    "validate": run_validate,
}


def run(subcommand: str, cfg: ScenarioConfig, out: Path) -> tuple[int, dict]:
    out.mkdir(parents=True, exist_ok=True)
    return RUNNERS[subcommand](cfg, out)


# -- entry point -------------------------------------------------------------

def _error(status: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"status": status, "error": kind, "message": message}) + "\n")
    return status


def load_config(path: Path | None, subcommand: str) -> ScenarioConfig:
    if path is None:
        if subcommand != "validate":
            raise ConfigError(f"{subcommand} requires --config")
        return parse_config({}, subcommand)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(raw, subcommand, base_dir=path.parent)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="blipfield", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", type=Path, default=None, help="JSON scenario file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--quiet", action="store_true", help="suppress the stdout summary")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, args.subcommand)
        status, payload = run(args.subcommand, cfg, args.out)
    except ConfigError as exc:
        return _error(EXIT_CONFIG, "config", str(exc))
    except OSError as exc:
        return _error(EXIT_IO, "io", str(exc))
    except ValueError as exc:
        # malformed packet files surface here
        return _error(EXIT_CONFIG, "config", str(exc))

    if not args.quiet:
        print(json.dumps(payload, indent=2, sort_keys=True))
    if status == EXIT_PHYSICS:
        failed = [c["name"] for c in payload["checks"] if not c["passed"]]
        return _error(EXIT_PHYSICS, "physics", f"failed checks: {', '.join(failed)}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
