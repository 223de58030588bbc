"""Configuration-driven command line front end.

Subcommands: ``run <config.json>`` executes a scan/simulation described by a
JSON configuration, ``validate`` runs the oracle-equivalence suite and
``version`` prints the library version.  Data files are written
deterministically (17 significant digits, no timestamps); the metadata file
echoes the fully resolved configuration and is itself a valid configuration.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigError, NumericalInconsistency, TriphotonError
from .experiment import (
    IDEAL_EVENT_ORDER,
    DetectionCascade,
    ScanResult,
    default_delay_grid,
    default_phase_grid,
    delay_scan_preparations,
    scan_delays,
    scan_triad,
    simulate_counts,
    theta_for_phase,
    triad_scan_preparations,
)
from .interference import Network
from .modes import qubit_triad_phase
from .oracle import equivalence_report
from .source import SourceParams

_NUMBER = {"type": "number"}
_MATRIX = {
    "type": "array",
    "minItems": 3,
    "maxItems": 3,
    "items": {
        "type": "array",
        "minItems": 3,
        "maxItems": 3,
        "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NUMBER},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode"],
    "properties": {
        "mode": {"enum": ["ideal-scan", "experiment", "validate", "qubit-analysis"]},
        "format": {"enum": ["csv", "json"]},
        "output": {"type": "string"},
        "seed": {"type": "integer"},
        "threads": {"type": "integer", "minimum": 1},
        "preparation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "recipe": {"enum": ["all_H", "static_pi", "dynamic", "custom"]},
                "theta": _NUMBER,
                "delays": {"type": "array", "minItems": 3, "maxItems": 3, "items": _NUMBER},
                "sigma": {"type": "number", "exclusiveMinimum": 0},
                "central_frequency": _NUMBER,
                "polarizations": {
                    "type": "array",
                    "minItems": 3,
                    "maxItems": 3,
                    "items": {"type": "array", "minItems": 4, "maxItems": 4, "items": _NUMBER},
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["delay", "triad"]},
                "start": _NUMBER,
                "stop": _NUMBER,
                "points": {"type": "integer", "minimum": 2},
                "values": {"type": "array", "minItems": 1, "items": _NUMBER},
            },
        },
        "source": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "squeezing": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "purity": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "p_noise_idler": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "p_noise_signal": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "truncation_total_photons": {"type": "integer", "minimum": 2},
                "truncation_noise_photons": {"type": "integer", "minimum": 0},
                "herald_efficiency": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "purity_model": {"enum": ["trace", "weight"]},
            },
        },
        "cascade": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "splitters": {
                    "type": "array",
                    "minItems": 3,
                    "maxItems": 3,
                    "items": {"enum": ["none", "beamsplitter_2way", "tritter_3way"]},
                },
                "detector_efficiency": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "tritter": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"h": _MATRIX, "v": _MATRIX},
        },
        "validation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "instances": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
            },
        },
        "qubit": {
            "type": "object",
            "additionalProperties": False,
            "required": ["r12", "r23", "r31"],
            "properties": {
                "r12": _NUMBER,
                "r23": _NUMBER,
                "r31": _NUMBER,
                "measured_phi": _NUMBER,
                "tolerance": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "provenance": {"type": "object"},
    },
}


def load_config(path: str | Path) -> dict:
    """Read and schema-validate a configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: e.json_path)
    if errors:
        details = "; ".join(f"{e.json_path}: {e.message}" for e in errors)
        raise ConfigError(f"invalid config: {details}")
    return raw


def _resolved(config: dict) -> dict:
    """Configuration with all defaults filled in (round-trips through run())."""
    out = {
        "mode": config["mode"],
        "format": config.get("format", "csv"),
        "output": config.get("output", "run"),
        "seed": config.get("seed", 0),
        "threads": config.get("threads", 1),
    }
    prep = dict(config.get("preparation", {}))
    prep.setdefault("recipe", "all_H")
    prep.setdefault("sigma", 1.0)
    prep.setdefault("central_frequency", 0.0)
    out["preparation"] = prep
    grid = dict(config.get("grid", {}))
    grid.setdefault("kind", "delay" if prep["recipe"] in ("all_H", "static_pi") else "triad")
    out["grid"] = grid
    src = dict(config.get("source", {}))
    for key, value in (
        ("squeezing", 0.16),
        ("purity", 0.9),
        ("p_noise_idler", 0.035),
        ("p_noise_signal", 0.009),
        ("truncation_total_photons", 8),
        ("truncation_noise_photons", 3),
        ("herald_efficiency", 0.5),
        ("purity_model", "trace"),
    ):
        src.setdefault(key, value)
    out["source"] = src
    casc = dict(config.get("cascade", {}))
    casc.setdefault("splitters", ["none", "none", "none"])
    casc.setdefault("detector_efficiency", 0.5)
    out["cascade"] = casc
    if "tritter" in config:
        out["tritter"] = config["tritter"]
    if "validation" in config or config["mode"] == "validate":
        val = dict(config.get("validation", {}))
        val.setdefault("instances", 100)
        val.setdefault("seed", 20260810)
        out["validation"] = val
    if "qubit" in config:
        q = dict(config["qubit"])
        q.setdefault("tolerance", 0.05)
        out["qubit"] = q
    return out


def _grid_values(grid: dict, sigma: float) -> np.ndarray:
    if "values" in grid:
        return np.asarray(grid["values"], dtype=float)
    kind = grid["kind"]
    if "start" in grid or "stop" in grid or "points" in grid:
        missing = [k for k in ("start", "stop", "points") if k not in grid]
        if missing:
            raise ConfigError(f"$.grid: incomplete range, missing {missing}")
        return np.linspace(grid["start"], grid["stop"], grid["points"])
    if kind == "delay":
        return default_delay_grid(sigma)
    return default_phase_grid()


def _parse_matrix(rows) -> Network:
    m = np.array([[complex(re, im) for re, im in row] for row in rows])
    return Network(m)


def _format_number(x: float) -> str:
    return f"{x:.17g}"


def write_series(result: ScanResult, path: Path, fmt: str, column_order=None) -> None:
    names = list(column_order) if column_order else sorted(result.series)
    if fmt == "csv":
        lines = [",".join([result.x_name] + names)]
        for i, x in enumerate(result.x_values):
            row = [_format_number(float(x))]
            row += [_format_number(float(result.series[name][i])) for name in names]
            lines.append(",".join(row))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        payload = {
            "x": {"name": result.x_name, "values": [float(v) for v in result.x_values]},
            "series": {name: [float(v) for v in result.series[name]] for name in names},
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_metadata(path: Path, resolved: dict, extra: dict) -> None:
    payload = dict(resolved)
    payload["provenance"] = {
        "library_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        **extra,
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _run_ideal_scan(resolved: dict) -> tuple[ScanResult, list[str]]:
    prep = resolved["preparation"]
    grid = resolved["grid"]
    sigma = prep["sigma"]
    values = _grid_values(grid, sigma)
    if grid["kind"] == "delay":
        result = scan_delays(prep["recipe"], values, sigma, prep["central_frequency"])
    else:
        thetas = [theta_for_phase(v) for v in values]
        result = scan_triad(thetas, sigma, prep["central_frequency"])
    return result, list(IDEAL_EVENT_ORDER)


def _run_experiment(resolved: dict, threads: int) -> tuple[ScanResult, list[str]]:
    prep = resolved["preparation"]
    grid = resolved["grid"]
    sigma = prep["sigma"]
    values = _grid_values(grid, sigma)
    src_cfg = dict(resolved["source"])
    purity_model = src_cfg.pop("purity_model")
    source = SourceParams(**src_cfg)
    cascade = DetectionCascade(
        tuple(resolved["cascade"]["splitters"]), resolved["cascade"]["detector_efficiency"]
    )
    net_h = net_v = None
    if "tritter" in resolved:
        if "h" in resolved["tritter"]:
            net_h = _parse_matrix(resolved["tritter"]["h"])
        if "v" in resolved["tritter"]:
            net_v = _parse_matrix(resolved["tritter"]["v"])
    if grid["kind"] == "delay":
        preps = delay_scan_preparations(
            prep["recipe"], values, sigma, prep["central_frequency"]
        )
        x_name = "tau"
        xs = values
    else:
        thetas = [theta_for_phase(v) for v in values]
        preps = triad_scan_preparations(thetas, sigma, prep["central_frequency"])
        x_name = "phi"
        xs = values
    result = simulate_counts(
        preps,
        source,
        cascade,
        net_h,
        net_v,
        x_values=xs,
        x_name=x_name,
        purity_model=purity_model,
        threads=threads,
    )
    return result, sorted(result.series)


def run(config_path: str, out_dir: str | None = None, fmt: str | None = None, threads: int | None = None) -> int:
    """Execute a configuration; returns the process exit code."""
    try:
        config = load_config(config_path)
        resolved = _resolved(config)
        if fmt:
            resolved["format"] = fmt
        if threads:
            resolved["threads"] = threads
        directory = Path(out_dir) if out_dir else Path(".")
        directory.mkdir(parents=True, exist_ok=True)
        prefix = resolved["output"]
        mode = resolved["mode"]
        extra: dict = {}

        if mode in ("ideal-scan", "experiment"):
            if mode == "ideal-scan":
                result, order = _run_ideal_scan(resolved)
            else:
                result, order = _run_experiment(resolved, resolved["threads"])
                extra["truncation_deficit"] = result.metadata.get("truncation_deficit")
                extra["herald_probability"] = result.metadata.get("herald_probability")
            ext = "csv" if resolved["format"] == "csv" else "json"
            series_path = directory / f"{prefix}_series.{ext}"
            write_series(result, series_path, resolved["format"], order)
            _write_metadata(directory / f"{prefix}_metadata.json", resolved, extra)
            print(f"wrote {series_path}")
            return 0

        if mode == "validate":
            val = resolved["validation"]
            report = equivalence_report(val["instances"], val["seed"])
            extra.update(report)
            _write_metadata(directory / f"{prefix}_metadata.json", resolved, extra)
            print(
                f"validated {report['events_checked']} events over "
                f"{report['instances']} instances; max deviation {report['max_deviation']:.3e}"
            )
            return 0 if report["max_deviation"] < 1e-9 else 3

        # qubit-analysis
        if "qubit" not in resolved:
            raise ConfigError("qubit-analysis mode requires a 'qubit' block")
        q = resolved["qubit"]
        phases = qubit_triad_phase(q["r12"], q["r23"], q["r31"])
        report = {
            "r12": q["r12"],
            "r23": q["r23"],
            "r31": q["r31"],
            "feasible": bool(phases),
            "qubit_phases": list(phases),
        }
        if "measured_phi" in q:
            from .modes import circular_distance

            dist = min(
                (circular_distance(q["measured_phi"], p) for p in phases), default=math.inf
            )
            report["measured_phi"] = q["measured_phi"]
            report["compatible_with_qubit"] = bool(dist <= q["tolerance"])
            report["distance"] = None if math.isinf(dist) else dist
        out_path = directory / f"{prefix}_qubit.json"
        out_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        _write_metadata(directory / f"{prefix}_metadata.json", resolved, extra)
        print(json.dumps(report, sort_keys=True))
        return 0
    except (ConfigError, jsonschema.ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalInconsistency as exc:
        print(f"numerical inconsistency: {exc}", file=sys.stderr)
        return 3
    except TriphotonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="triphoton",
        description="Simulator for interference of partially distinguishable photons",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a JSON configuration")
    p_run.add_argument("config")
    p_run.add_argument("--format", choices=["csv", "json"], default=None)
    p_run.add_argument("--out-dir", default=None)
    p_run.add_argument("--threads", type=int, default=None)

    p_val = sub.add_parser("validate", help="run the oracle-equivalence suite")
    p_val.add_argument("--instances", type=int, default=100)
    p_val.add_argument("--seed", type=int, default=20260810)

    sub.add_parser("version", help="print the library version")

    args = parser.parse_args(argv)
    if args.command == "version":
        print(__version__)
        return 0
    if args.command == "validate":
        report = equivalence_report(args.instances, args.seed)
        print(
            f"validated {report['events_checked']} events over "
            f"{report['instances']} instances; max deviation {report['max_deviation']:.3e}"
        )
        return 0 if report["max_deviation"] < 1e-9 else 3
    return run(args.config, args.out_dir, args.format, args.threads)


if __name__ == "__main__":
    sys.exit(main())
