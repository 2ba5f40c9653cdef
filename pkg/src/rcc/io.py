"""File formats: states, reference configs, records, windows, traces, reports.

All JSON written here is deterministic (sorted keys, fixed separators);
non-finite floats are rendered as the strings "inf"/"-inf"/"nan" so reports
never depend on a JSON dialect.
"""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .operators import DensityOperator, validate_density
from .reference import (
    ReferenceSet,
    block_reference,
    build_reference,
    sector_reference,
    stabilizer_reference,
)
from .stats import MeasurementRecord
from .windows import BlockPartition, ObservationWindow, ProcessTrace, WindowFamily

DEFAULT_DIM_CAP = 512
DIM_CAP_ENV = "RCC_DIM_CAP"


def dim_cap() -> int:
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{DIM_CAP_ENV}={raw!r} is not an integer") from exc
    if cap < 1:
        raise ConfigError(f"{DIM_CAP_ENV} must be >= 1")
    return cap


def _read_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


def _matrix_from_payload(payload: dict, where: str) -> np.ndarray:
    try:
        dim = int(payload["dim"])
        re = payload["re"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: expected keys 'dim' and 're'") from exc
    im = payload.get("im")
    if im is None:
        im = [[0.0] * dim for _ in range(dim)]
    for name, rows in (("re", re), ("im", im)):
        if len(rows) != dim or any(
            not isinstance(r, (list, tuple)) or len(r) != dim for r in rows
        ):
            raise ConfigError(f"{where}: '{name}' must be a {dim}x{dim} array")
    if dim > dim_cap():
        raise ConfigError(
            f"{where}: dim {dim} exceeds the cap {dim_cap()} "
            f"(override with {DIM_CAP_ENV})"
        )
    return np.array(re, dtype=float) + 1j * np.array(im, dtype=float)


def matrix_to_payload(matrix: np.ndarray) -> dict:
    m = np.asarray(matrix, dtype=complex)
    return {
        "dim": int(m.shape[0]),
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }


def load_state(path) -> DensityOperator:
    """Load a density operator from a state file, repairing tolerable drift."""
    payload = _read_json(path)
    matrix = _matrix_from_payload(payload, str(path))
    try:
        return validate_density(matrix)
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def dump_state(rho: DensityOperator, path) -> None:
    write_json(matrix_to_payload(rho.matrix), path)


def reference_from_config(cfg: dict, where: str = "reference config") -> ReferenceSet:
    """Build a reference set from its JSON description."""
    try:
        kind = cfg["type"]
        g = int(cfg["g"])
        units = int(cfg["addressable_units"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(
            f"{where}: expected keys 'type', 'g', 'addressable_units'"
        ) from exc
    try:
        if kind == "projectors":
            mats = [
                _matrix_from_payload(p, f"{where}: projector {i}")
                for i, p in enumerate(cfg.get("projectors", []))
            ]
            return build_reference(mats, g, units)
        if kind == "sector":
            return sector_reference(
                int(cfg["n_qubits"]), int(cfg["hamming_weight"]), g, units
            )
        if kind == "stabilizer":
            return stabilizer_reference(int(cfg["n_qubits"]), cfg["generators"], g, units)
        if kind == "blocks":
            return block_reference(cfg["blocks"], g, units)
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"{where}: missing key {exc}") from exc
    except Exception as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown reference type {kind!r}")


def load_reference(path) -> ReferenceSet:
    return reference_from_config(_read_json(path), str(path))


def load_record(path) -> MeasurementRecord:
    payload = _read_json(path)
    try:
        return MeasurementRecord(
            protocol=payload["protocol"],
            n=int(payload["n"]),
            counts=payload["counts"],
            meta=payload.get("meta", {}),
        )
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"{path}: missing key {exc}") from exc
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def record_to_payload(record: MeasurementRecord) -> dict:
    return {
        "protocol": record.protocol,
        "n": record.n,
        "counts": dict(record.counts),
        "meta": dict(record.meta),
    }


def dump_record(record: MeasurementRecord, path) -> None:
    write_json(record_to_payload(record), path)


def load_window_family(path) -> WindowFamily:
    payload = _read_json(path)
    try:
        windows = tuple(
            ObservationWindow(
                BlockPartition(tuple(tuple(int(i) for i in b) for b in w["blocks"])),
                xi=float(w["xi"]),
            )
            for w in payload["windows"]
        )
        return WindowFamily(windows)
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"{path}: missing key {exc}") from exc
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_trace_csv(path) -> ProcessTrace:
    """Read a process trace with columns t, Pi, T, C."""
    rows = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            fields = set(reader.fieldnames or ())
            if not {"t", "Pi", "T", "C"} <= fields:
                raise ConfigError(f"{path}: trace CSV needs columns t, Pi, T, C")
            for row in reader:
                rows.append(
                    (float(row["t"]), float(row["Pi"]), float(row["T"]), float(row["C"]))
                )
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: bad numeric value: {exc}") from exc
    if len(rows) < 2:
        raise ConfigError(f"{path}: a trace needs at least 2 rows")
    cols = list(zip(*rows))
    try:
        return ProcessTrace(*(np.array(c) for c in cols))
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def dump_sweep_csv(rows, path) -> None:
    """Write window-sweep rows (xi, entropy bits, complexity structons)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["xi", "S_bits", "C_structons"])
        for xi, s_bits, c_st in rows:
            writer.writerow([repr(float(xi)), repr(float(s_bits)), repr(float(c_st))])


def _sanitize(obj):
    """Replace non-finite floats so serialized reports are dialect-free."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
    return obj


def dumps_json(payload: dict) -> str:
    return json.dumps(_sanitize(payload), sort_keys=True, indent=2) + "\n"


def write_json(payload: dict, path) -> None:
    Path(path).write_text(dumps_json(payload), encoding="utf-8")
