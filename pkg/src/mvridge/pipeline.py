"""End-to-end ridge analysis of a multivariate series, and its outputs."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .cwt import ScaleGrid, TransformCube, transform
from .ellipse import EllipseSnapshot, ellipse_params, snapshot_times
from .errors import InvalidGridError, InvalidInputError
from .morse import MorseWavelet, suitability_check
from .ridges import (
    DEFAULT_FLOOR,
    DEFAULT_LEVEL_JUMP,
    RidgeCurve,
    chain_ridges,
    detect_ridge_points,
    evaluate_curve,
    merge_overlaps,
    residual,
)
from .signal import MultivariateSeries

__all__ = ["PipelineConfig", "PipelineResult", "PRESETS", "run_pipeline", "run_on_cube",
           "write_outputs", "ridge_delta_proxy"]

SCHEMA_VERSION = 1
# stability level assumed by the suitability report when no ridge is found
FALLBACK_DELTA = 0.1


@dataclass(frozen=True)
class PipelineConfig:
    """Wavelet, grid and chaining settings.

    Frequencies are cyclic (cycles per time unit of the input). A
    ``min_cycles`` of ``None`` means ``2 * sqrt(beta * gamma)``; the
    magnitude floor is relative to the largest joint modulus.
    """

    beta: float = 3.0
    gamma: float = 3.0
    levels: int = 82
    fmin: float = 0.01
    fmax: float = 0.28
    max_level_jump: float = DEFAULT_LEVEL_JUMP
    min_cycles: float | None = None
    magnitude_floor: float = DEFAULT_FLOOR
    pad: bool = False

    def __post_init__(self):
        if int(self.levels) != self.levels or self.levels < 3:
            raise InvalidGridError("levels must be an integer >= 3")
        if not (0 < self.fmin < self.fmax):
            raise InvalidGridError(f"need 0 < fmin < fmax, got {self.fmin}, {self.fmax}")
        if self.max_level_jump <= 0:
            raise InvalidInputError("max_level_jump must be positive")
        if self.min_cycles is not None and not self.min_cycles > 0:
            raise InvalidInputError("min_cycles must be positive")
        if not 0 <= self.magnitude_floor < 1:
            raise InvalidInputError("magnitude_floor must lie in [0, 1)")
        MorseWavelet(self.beta, self.gamma)
        # canonical types so equal settings always hash equally
        for name in ("beta", "gamma", "fmin", "fmax", "max_level_jump", "magnitude_floor"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.min_cycles is not None:
            object.__setattr__(self, "min_cycles", float(self.min_cycles))
        object.__setattr__(self, "levels", int(self.levels))
        object.__setattr__(self, "pad", bool(self.pad))

    @property
    def wavelet(self) -> MorseWavelet:
        return MorseWavelet(self.beta, self.gamma)

    @property
    def effective_min_cycles(self) -> float:
        return 2 * self.wavelet.duration if self.min_cycles is None else float(self.min_cycles)

    def check_nyquist(self, dt: float):
        nyquist = 0.5 / dt
        if self.fmax >= nyquist:
            raise InvalidGridError(f"fmax {self.fmax} reaches the Nyquist frequency {nyquist}")

    def grid(self, dt: float) -> ScaleGrid:
        self.check_nyquist(dt)
        return ScaleGrid.from_cyclic(self.levels, self.fmin, self.fmax, self.wavelet, dt)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["min_cycles_effective"] = self.effective_min_cycles
        return d

    def config_hash(self) -> str:
        text = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    @classmethod
    def preset(cls, name: str, **overrides) -> "PipelineConfig":
        if name not in PRESETS:
            raise InvalidInputError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        kw = dict(PRESETS[name])
        kw.update(overrides)
        return cls(**kw)


PRESETS = {
    # the float configuration: P = 3, so 2P = 6 cycles
    "float": dict(beta=3.0, gamma=3.0, levels=82, fmin=0.01, fmax=0.28, min_cycles=6.0),
    # high-frequency floats: P = 2 sqrt(6)
    "float-high": dict(beta=8.0, gamma=3.0, levels=140, fmin=0.01, fmax=0.34, min_cycles=None),
}


@dataclass
class PipelineResult:
    config: PipelineConfig
    series: MultivariateSeries
    cube: TransformCube
    curves: list[RidgeCurve]
    merged: list[RidgeCurve]
    residual: MultivariateSeries
    ellipses: list[EllipseSnapshot] = field(default_factory=list)
    bias_ellipses: list[EllipseSnapshot] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def ridge_delta_proxy(curve: RidgeCurve) -> float:
    """``sup sqrt(xi_hat) / omega_hat`` over the curve's interior samples."""
    if curve.curvature_estimate is None or curve.freq_estimate is None:
        return math.nan
    keep = ~curve.edge_flag & np.isfinite(curve.curvature_estimate) & (curve.freq_estimate > 0)
    if not np.any(keep):
        return math.nan
    return float(np.max(np.sqrt(curve.curvature_estimate[keep]) / curve.freq_estimate[keep]))


def _ellipses(curves, resid: MultivariateSeries, which: str) -> list[EllipseSnapshot]:
    out = []
    for c in curves:
        if c.freq_estimate is None:
            continue
        values = c.signal_estimate if which == "signal" else c.bias_estimate
        if values is None:
            continue
        for k in snapshot_times(c.freq_estimate, c.dt):
            t = int(c.t_index[k])
            a, b, theta, phi = ellipse_params(values[0, k], values[1, k])
            centre = (float(resid.data[0, t]), float(resid.data[1, t]))
            out.append(EllipseSnapshot(t, centre, a, b, theta, phi, float(resid.time[t])))
    return out


def _finite(v):
    return v if v is None or math.isfinite(v) else None


def run_on_cube(config: PipelineConfig, series: MultivariateSeries, cube: TransformCube) -> PipelineResult:
    """Ridge stages of the pipeline on an existing transform cube."""
    points = detect_ridge_points(cube, relative_floor=config.magnitude_floor)
    bound = config.max_level_jump * abs(cube.grid.log_spacing)
    curves = chain_ridges(points, bound, config.effective_min_cycles, cube.dt)
    curves = [evaluate_curve(c, cube) for c in curves]
    merged = merge_overlaps(curves)
    resid = residual(series, merged)
    ellipses, bias_ellipses = [], []
    if series.channels == 2:
        ellipses = _ellipses(merged, resid, "signal")
        bias_ellipses = _ellipses(merged, resid, "bias")

    wavelet = cube.wavelet
    proxies = [ridge_delta_proxy(c) for c in merged]
    finite = [p for p in proxies if math.isfinite(p)]
    delta = min(max(finite), 0.99) if finite else FALLBACK_DELTA
    report = suitability_check(wavelet, delta)
    occupancy = np.zeros(series.samples, np.int64)
    for c in merged:
        occupancy[c.t_index] += 1
    diagnostics = {
        "schema_version": SCHEMA_VERSION,
        "frequency_units": io.FREQUENCY_NOTE,
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "input": {"channels": series.channels, "samples": series.samples, "dt": series.dt,
                  "time_origin": series.time_origin},
        "wavelet": {"beta": wavelet.beta, "gamma": wavelet.gamma,
                    "peak_frequency_rad": wavelet.peak_frequency, "duration": wavelet.duration},
        "grid": {"levels": cube.grid.levels,
                 "fmin_cyc": float(cube.grid.cyclic_frequencies[-1]),
                 "fmax_cyc": float(cube.grid.cyclic_frequencies[0]),
                 "log_spacing": cube.grid.log_spacing,
                 "chaining_bound_logscale": bound},
        "edge_widths": [int(e) for e in cube.edge_width],
        "suitability": report.as_dict(),
        "ridge_points": len(points),
        "ridges": [
            {"start": int(c.t_index[0]), "stop": int(c.t_index[-1]) + 1, "samples": c.duration,
             "cycles": c.cycles, "delta_proxy": _finite(ridge_delta_proxy(c))}
            for c in curves
        ],
        "merged": [
            {"start": int(c.t_index[0]), "stop": int(c.t_index[-1]) + 1, "samples": c.duration,
             "cycles": c.cycles, "delta_proxy": _finite(p),
             "merged_samples": int(c.meta.get("merged_samples", 0))}
            for c, p in zip(merged, proxies)
        ],
        "occupied_samples": int(np.sum(occupancy > 0)),
        "max_oscillations_per_sample": int(occupancy.max()) if occupancy.size else 0,
        "ellipses": len(ellipses),
    }
    return PipelineResult(config, series, cube, curves, merged, resid, ellipses, bias_ellipses, diagnostics)


def run_pipeline(config: PipelineConfig, series: MultivariateSeries) -> PipelineResult:
    """Transform, ridge extraction, merging, residual and (bivariate) ellipses."""
    if series.samples < 2:
        raise InvalidInputError("empty input")
    grid = config.grid(series.dt)
    cube = transform(series, config.wavelet, grid, derivatives=2, pad=config.pad)
    return run_on_cube(config, series, cube)


def write_outputs(result: PipelineResult, outdir, prefix: str = "") -> dict[str, Path]:
    """Write ridges, residual, ellipses and diagnostics; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tag = [f"config_hash {result.diagnostics['config_hash']}"]
    paths = {
        "ridges": outdir / f"{prefix}ridges.csv",
        "residual": outdir / f"{prefix}residual.csv",
        "diagnostics": outdir / f"{prefix}diagnostics.json",
    }
    io.write_ridges(paths["ridges"], result.merged, result.series.time_origin, tag)
    io.write_channels(paths["residual"], result.residual, "residual", tag)
    if result.series.channels == 2:
        paths["ellipses"] = outdir / f"{prefix}ellipses.csv"
        paths["bias_ellipses"] = outdir / f"{prefix}bias_ellipses.csv"
        io.write_ellipses(paths["ellipses"], result.ellipses, tag)
        io.write_ellipses(paths["bias_ellipses"], result.bias_ellipses, tag)
    paths["diagnostics"].write_text(json.dumps(result.diagnostics, indent=2, sort_keys=True) + "\n")
    return paths
