"""Text file formats: recordings, key=value configs, matrices, triplets.

Floats are written with repr() so reading a file back reproduces the
exact float64 bit pattern.  Every writer goes through a temporary file
in the destination directory followed by os.replace, so a concurrent
reader never observes a partially written file.
"""

import os
import tempfile

import numpy as np

from .model import SolverConfig

__all__ = [
    "DataError",
    "read_recording",
    "write_recording",
    "read_config",
    "write_config",
    "read_matrix",
    "write_matrix",
    "read_triplets",
    "write_triplets",
    "solver_config_from_mapping",
]

EYES = ("left", "right")
AXES = ("horizontal", "vertical")

RECORDING_HEADER = "time_ms,angle_deg,eye,axis"
TRIPLET_HEADER = "atom,offset,value"


class DataError(Exception):
    """Malformed or inconsistent input data; mapped to CLI exit code 2."""


def atomic_write(path, text: str) -> None:
    """Write text to path so that readers see the old or the new file."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        # os.replace already consumed tmp on success
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _parse_float(token: str, path, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"{path}: line {line_no}: not a number: {token!r}") from None
    if not np.isfinite(value):
        raise DataError(f"{path}: line {line_no}: non-finite value {token!r}")
    return value


def _parse_int(token: str, path, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise DataError(f"{path}: line {line_no}: not an integer: {token!r}") from None


def write_recording(path, samples, eye: str = "left", axis: str = "horizontal") -> None:
    """Write one channel of a 1 kHz recording as a four-column CSV."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("samples must be a non-empty 1-D array")
    if eye not in EYES or axis not in AXES:
        raise ValueError(f"channel must be eye in {EYES}, axis in {AXES}")
    lines = [RECORDING_HEADER]
    for t, v in enumerate(arr.tolist()):
        lines.append(f"{t},{v!r},{eye},{axis}")
    atomic_write(path, "\n".join(lines) + "\n")


def read_recording(path):
    """Read a recording CSV; returns (samples, eye, axis).

    The file must carry exactly one channel sampled at 1 kHz: integer
    millisecond timestamps increasing in steps of exactly 1.  Any jitter
    is rejected rather than resampled.
    """
    lines = _read_lines(path)
    if not lines or lines[0].strip() != RECORDING_HEADER:
        raise DataError(f"{path}: line 1: expected header {RECORDING_HEADER!r}")
    samples = []
    eye = axis = None
    prev_t = None
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise DataError(f"{path}: line {line_no}: expected 4 fields, got {len(parts)}")
        t = _parse_int(parts[0], path, line_no)
        value = _parse_float(parts[1], path, line_no)
        row_eye, row_axis = parts[2].strip(), parts[3].strip()
        if row_eye not in EYES:
            raise DataError(f"{path}: line {line_no}: unknown eye {row_eye!r}")
        if row_axis not in AXES:
            raise DataError(f"{path}: line {line_no}: unknown axis {row_axis!r}")
        if eye is None:
            eye, axis = row_eye, row_axis
        elif (row_eye, row_axis) != (eye, axis):
            raise DataError(f"{path}: line {line_no}: mixed channels in one file")
        if prev_t is not None and t - prev_t != 1:
            raise DataError(
                f"{path}: line {line_no}: non-uniform sampling "
                f"(step {t - prev_t} ms, expected 1 ms)"
            )
        prev_t = t
        samples.append(value)
    if not samples:
        raise DataError(f"{path}: no data rows")
    return np.array(samples, dtype=np.float64), eye, axis


def write_config(path, mapping) -> None:
    """Write a flat key = value file; floats use repr, lists join with commas."""
    lines = []
    for key, value in mapping.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            rendered = ",".join(_render_scalar(v) for v in value)
        else:
            rendered = _render_scalar(value)
        lines.append(f"{key} = {rendered}")
    atomic_write(path, "\n".join(lines) + "\n")


def _render_scalar(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def read_config(path) -> dict:
    """Read a key = value file into a string-to-string mapping."""
    mapping = {}
    for line_no, line in enumerate(_read_lines(path), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise DataError(f"{path}: line {line_no}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise DataError(f"{path}: line {line_no}: empty key")
        if key in mapping:
            raise DataError(f"{path}: line {line_no}: duplicate key {key!r}")
        mapping[key] = value.strip()
    return mapping


def parse_bool(token: str) -> bool:
    lowered = token.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {token!r}")


def solver_config_from_mapping(mapping) -> SolverConfig:
    """Build a SolverConfig from config-file strings; unknown keys are ignored.

    Ignoring extras lets a fit manifest double as a config file.
    """
    kwargs = {}
    converters = {
        "lambda_frac": float,
        "lambda_tv": float,
        "max_iter": int,
        "mode": str,
        "seed": int,
        "nonneg": parse_bool,
        "literal_schedule": parse_bool,
        "fista_iters": int,
    }
    try:
        for key, conv in converters.items():
            if key in mapping:
                kwargs[key] = conv(mapping[key])
        if "epsilon" in mapping:
            raw = mapping["epsilon"].strip().lower()
            kwargs["epsilon"] = None if raw in ("", "none") else float(mapping["epsilon"])
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise DataError(f"invalid solver config: {exc}") from exc


def write_matrix(path, values, columns) -> None:
    """Write a 2-D array as a CSV with one named column per matrix column."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected a 1-D or 2-D array, got shape {arr.shape}")
    columns = list(columns)
    if len(columns) != arr.shape[1]:
        raise ValueError(f"{len(columns)} column names for {arr.shape[1]} columns")
    lines = [",".join(columns)]
    for row in arr:
        lines.append(",".join(repr(float(v)) for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def read_matrix(path):
    """Read a CSV written by write_matrix; returns (column_names, array)."""
    lines = _read_lines(path)
    if not lines:
        raise DataError(f"{path}: empty file")
    columns = [c.strip() for c in lines[0].split(",")]
    n_cols = len(columns)
    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise DataError(
                f"{path}: line {line_no}: expected {n_cols} fields, got {len(parts)}"
            )
        rows.append([_parse_float(p, path, line_no) for p in parts])
    if not rows:
        raise DataError(f"{path}: no data rows")
    return columns, np.array(rows, dtype=np.float64)


def write_triplets(path, maps) -> None:
    """Write sparse activation maps as (atom, offset, value) rows."""
    arr = np.asarray(maps, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D activation array, got shape {arr.shape}")
    lines = [TRIPLET_HEADER]
    atom_idx, offsets = np.nonzero(arr)
    values = arr[atom_idx, offsets].tolist()
    for k, t, v in zip(atom_idx.tolist(), offsets.tolist(), values):
        lines.append(f"{k},{t},{v!r}")
    atomic_write(path, "\n".join(lines) + "\n")


def read_triplets(path, n_atoms: int, length: int) -> np.ndarray:
    """Read (atom, offset, value) rows back into a dense (n_atoms, length) array."""
    lines = _read_lines(path)
    if not lines or lines[0].strip() != TRIPLET_HEADER:
        raise DataError(f"{path}: line 1: expected header {TRIPLET_HEADER!r}")
    maps = np.zeros((n_atoms, length), dtype=np.float64)
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise DataError(f"{path}: line {line_no}: expected 3 fields, got {len(parts)}")
        k = _parse_int(parts[0], path, line_no)
        t = _parse_int(parts[1], path, line_no)
        if not (0 <= k < n_atoms and 0 <= t < length):
            raise DataError(f"{path}: line {line_no}: index ({k}, {t}) out of range")
        maps[k, t] = _parse_float(parts[2], path, line_no)
    return maps
