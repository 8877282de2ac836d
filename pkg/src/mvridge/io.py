"""File formats: channel and trajectory CSV input, result CSVs, cube dumps.

Every text file starts with ``#`` comment lines carrying the format name,
its version and the frequency convention; numbers are written with 17
significant digits so text roundtrips are lossless.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from pathlib import Path

import numpy as np

from .cwt import ScaleGrid, TransformCube
from .errors import InvalidInputError, NonFiniteError
from .morse import MorseWavelet
from .signal import MultivariateSeries

__all__ = [
    "FORMAT_VERSION",
    "EARTH_RADIUS_KM",
    "read_channels",
    "write_channels",
    "read_trajectories",
    "latlon_to_xy",
    "write_ridges",
    "read_ridges",
    "write_ellipses",
    "dump_cube",
    "load_cube",
    "sample_interval",
]

FORMAT_VERSION = 1
EARTH_RADIUS_KM = 6371.0
FLOAT_FMT = "%.17g"
FREQUENCY_NOTE = "frequencies: freq_rad = 2*pi * freq_cyc (cycles per time unit)"


def _header(kind: str, extra: list[str] | None = None) -> str:
    lines = [f"# mvridge {kind} v{FORMAT_VERSION}", f"# {FREQUENCY_NOTE}"]
    lines += [f"# {e}" for e in extra or []]
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return FLOAT_FMT % v


def _read_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#") and line.strip())]
    if not rows:
        raise InvalidInputError(f"{path}: no header row")
    header = [h.strip() for h in rows[0]]
    return header, rows[1:]


def sample_interval(time: np.ndarray) -> float:
    """Uniform sample interval of a strictly increasing time column.

    Steps must agree with their median to within ``1e-6 * dt``.
    """
    time = np.asarray(time, dtype=float)
    if time.size < 2:
        raise InvalidInputError("need at least two samples")
    if not np.all(np.isfinite(time)):
        raise NonFiniteError("time column has non-finite entries")
    steps = np.diff(time)
    if np.any(steps <= 0):
        raise InvalidInputError("time must be strictly increasing")
    dt = float(np.median(steps))
    if np.max(np.abs(steps - dt)) > 1e-6 * dt:
        raise InvalidInputError("time grid is not uniform; resample before analysis")
    return dt


def _to_float(rows, path) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: non-numeric entry ({exc})") from None
    if arr.ndim != 2:
        raise InvalidInputError(f"{path}: ragged rows")
    return arr


def read_channels(path) -> MultivariateSeries:
    """Read ``time,ch1,...,chN`` into a series; dt is inferred from time."""
    header, rows = _read_table(path)
    if len(header) < 2 or header[0] != "time":
        raise InvalidInputError(f"{path}: header must be time,ch1,...,chN")
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    arr = _to_float(rows, path)
    if arr.shape[1] != len(header):
        raise InvalidInputError(f"{path}: row width does not match header")
    dt = sample_interval(arr[:, 0])
    return MultivariateSeries(arr[:, 1:].T.copy(), dt, float(arr[0, 0]))


def write_channels(path, x: MultivariateSeries, kind: str = "channels", extra: list[str] | None = None):
    n = x.channels
    cols = ["time"] + [f"ch{k + 1}" for k in range(n)]
    with open(path, "w", newline="") as fh:
        fh.write(_header(kind, extra))
        fh.write(",".join(cols) + "\n")
        table = np.vstack([x.time, x.data]).T
        for row in table:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_trajectories(path) -> dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Read ``id,time,lat,lon`` rows grouped by id, in file order."""
    header, rows = _read_table(path)
    if header[:4] != ["id", "time", "lat", "lon"]:
        raise InvalidInputError(f"{path}: header must be id,time,lat,lon")
    groups: dict[str, list] = {}
    for r in rows:
        if len(r) < 4:
            raise InvalidInputError(f"{path}: short row {r}")
        groups.setdefault(r[0].strip(), []).append(r[1:4])
    if not groups:
        raise InvalidInputError(f"{path}: no data rows")
    out = {}
    for key, vals in groups.items():
        arr = _to_float(vals, path)
        out[key] = (arr[:, 0], arr[:, 1], arr[:, 2])
    return out


def latlon_to_xy(time, lat, lon) -> MultivariateSeries:
    """Local tangent-plane east/north positions in km about the mean position."""
    time, lat, lon = (np.asarray(v, dtype=float) for v in (time, lat, lon))
    if not (time.shape == lat.shape == lon.shape):
        raise InvalidInputError("time, lat and lon must have equal lengths")
    if not (np.all(np.isfinite(lat)) and np.all(np.isfinite(lon))):
        raise NonFiniteError("non-finite position")
    if np.any(np.abs(lat) > 90):
        raise InvalidInputError("latitude outside [-90, 90]")
    dt = sample_interval(time)
    lat0 = float(np.mean(lat))
    # average longitude on the circle so records crossing the dateline stay contiguous
    lon0 = math.degrees(math.atan2(np.mean(np.sin(np.radians(lon))), np.mean(np.cos(np.radians(lon)))))
    dlon = (lon - lon0 + 180.0) % 360.0 - 180.0
    dlat = lat - lat0
    if np.ptp(dlat) > 10 or np.ptp(dlon) > 10:
        warnings.warn("record spans more than 10 degrees; tangent-plane projection is inaccurate")
    k = EARTH_RADIUS_KM * math.pi / 180.0
    x = k * math.cos(math.radians(lat0)) * dlon
    y = k * dlat
    return MultivariateSeries(np.vstack([x, y]), dt, float(time[0]))


def _ridge_columns(n: int) -> list[str]:
    cols = ["t", "scale", "freq_rad", "freq_cyc", "edge"]
    cols += [f"{p}_{k + 1}" for k in range(n) for p in ("re", "im")]
    cols += ["omega_hat", "xi_hat"]
    cols += [f"bias_{p}_{k + 1}" for k in range(n) for p in ("re", "im")]
    return cols


def write_ridges(path, curves, time_origin: float = 0.0, extra: list[str] | None = None):
    """Ridge CSV, one row per ridge sample, curves in order.

    Missing estimates are written as ``nan``.
    """
    n = None
    for c in curves:
        if c.signal_estimate is not None:
            n = c.signal_estimate.shape[0]
            break
    n = n or 1
    with open(path, "w", newline="") as fh:
        fh.write(_header("ridges", extra))
        fh.write(",".join(_ridge_columns(n)) + "\n")
        for c in curves:
            L = c.duration
            nanv = np.full(L, np.nan)
            sig = c.signal_estimate if c.signal_estimate is not None else np.full((n, L), np.nan + 0j)
            bias = c.bias_estimate if c.bias_estimate is not None else np.full((n, L), np.nan + 0j)
            omega = c.freq_estimate if c.freq_estimate is not None else nanv
            xi = c.curvature_estimate if c.curvature_estimate is not None else nanv
            freq = c.frequency
            cols = [time_origin + c.dt * c.t_index, c.scale, freq, freq / (2 * np.pi),
                    c.edge_flag.astype(float)]
            for k in range(n):
                cols += [sig[k].real, sig[k].imag]
            cols += [omega, xi]
            for k in range(n):
                cols += [bias[k].real, bias[k].imag]
            table = np.vstack(cols).T
            for row in table:
                fh.write(",".join(_fmt(v) for v in row[:4]) + f",{int(row[4])},"
                         + ",".join(_fmt(v) for v in row[5:]) + "\n")


def read_ridges(path) -> dict[str, np.ndarray]:
    """Ridge CSV as a dict of columns."""
    header, rows = _read_table(path)
    if header[:5] != ["t", "scale", "freq_rad", "freq_cyc", "edge"]:
        raise InvalidInputError(f"{path}: not a ridge file")
    arr = _to_float(rows, path) if rows else np.zeros((0, len(header)))
    return {h: arr[:, i] for i, h in enumerate(header)}


def write_ellipses(path, snapshots, extra: list[str] | None = None):
    with open(path, "w", newline="") as fh:
        fh.write(_header("ellipses", extra))
        fh.write("t,cx,cy,a,b,theta,phi\n")
        for s in snapshots:
            vals = (s.time, s.center[0], s.center[1], s.semi_major, s.semi_minor_signed,
                    s.orientation, s.phase)
            fh.write(",".join(_fmt(v) for v in vals) + "\n")


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def dump_cube(path, cube: TransformCube, config_hash: str = "", time_origin: float = 0.0):
    """Raw little-endian complex128 cube(s) plus a JSON sidecar.

    The binary holds ``w`` followed by ``wt`` and ``wtt`` when present, each
    in C order with shape (channels, levels, samples).
    """
    arrays = [cube.w] + [a for a in (cube.wt, cube.wtt) if a is not None]
    with open(path, "wb") as fh:
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<c16").tobytes())
    meta = {
        "format": "mvridge-cube",
        "version": FORMAT_VERSION,
        "dtype": "<c16",
        "shape": list(cube.shape),
        "derivatives": len(arrays) - 1,
        "beta": cube.wavelet.beta,
        "gamma": cube.wavelet.gamma,
        "dt": cube.dt,
        "time_origin": time_origin,
        "frequencies_rad": [float(f) for f in cube.grid.frequencies],
        "edge_width": [int(e) for e in cube.edge_width],
        "config_hash": config_hash,
        "note": FREQUENCY_NOTE,
    }
    _sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_cube(path) -> tuple[TransformCube, dict]:
    """Inverse of :func:`dump_cube`; returns the cube and the sidecar dict."""
    side = _sidecar_path(path)
    if not side.exists():
        raise InvalidInputError(f"missing sidecar {side}")
    meta = json.loads(side.read_text())
    if meta.get("format") != "mvridge-cube":
        raise InvalidInputError(f"{side}: not a cube sidecar")
    shape = tuple(meta["shape"])
    raw = np.fromfile(path, dtype=meta["dtype"])
    count = meta["derivatives"] + 1
    size = int(np.prod(shape))
    if raw.size != count * size:
        raise InvalidInputError(f"{path}: size does not match sidecar shape")
    arrays = [raw[k * size:(k + 1) * size].reshape(shape).astype(complex) for k in range(count)]
    wavelet = MorseWavelet(meta["beta"], meta["gamma"])
    freqs = np.asarray(meta["frequencies_rad"], dtype=float)
    grid = ScaleGrid(freqs, wavelet.peak_frequency / freqs, meta["dt"])
    cube = TransformCube(arrays[0], grid, wavelet, meta["dt"],
                         arrays[1] if count > 1 else None, arrays[2] if count > 2 else None,
                         np.asarray(meta["edge_width"], dtype=np.int64))
    return cube, meta
