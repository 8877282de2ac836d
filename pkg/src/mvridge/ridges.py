"""Ridge points and curves of the joint transform modulus, and ridge estimates."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .cwt import TransformCube, joint_norm
from .errors import GridTooSmallError, MissingDerivativeError
from .signal import MultivariateSeries

__all__ = [
    "RidgePoints",
    "RidgeCurve",
    "detect_ridge_points",
    "chain_ridges",
    "estimate_signal",
    "estimate_frequency",
    "estimate_curvature",
    "estimate_bias",
    "evaluate_curve",
    "merge_overlaps",
    "residual",
    "ridge_scale_diagnostic",
    "ridge_analysis",
    "default_max_dlogscale",
]

DEFAULT_LEVEL_JUMP = 2
DEFAULT_FLOOR = 1e-3


def _lagrange_weights(log_scales, j, u):
    """Quadratic interpolation weights on levels ``j-1, j, j+1`` at ``u``."""
    u0, u1, u2 = log_scales[j - 1], log_scales[j], log_scales[j + 1]
    l0 = (u - u1) * (u - u2) / ((u0 - u1) * (u0 - u2))
    l1 = (u - u0) * (u - u2) / ((u1 - u0) * (u1 - u2))
    l2 = (u - u0) * (u - u1) / ((u2 - u0) * (u2 - u1))
    return l0, l1, l2


def interpolate_cube(arr: np.ndarray, log_scales: np.ndarray, t, j, u) -> np.ndarray:
    """Values of an (N, S, T) or (S, T) array at fractional log-scales.

    ``j`` is the central level of the three used; it is clipped so that all
    three exist.
    """
    j = np.clip(np.asarray(j), 1, log_scales.size - 2)
    l0, l1, l2 = _lagrange_weights(log_scales, j, np.asarray(u))
    if arr.ndim == 2:
        return l0 * arr[j - 1, t] + l1 * arr[j, t] + l2 * arr[j + 1, t]
    return l0 * arr[:, j - 1, t] + l1 * arr[:, j, t] + l2 * arr[:, j + 1, t]


@dataclass(frozen=True)
class RidgePoints:
    """All ridge points of a cube, ordered by time then level.

    ``level`` is the grid level of the discrete maximum; ``log_scale`` the
    vertex of the parabola through ``log ||w||`` on the adjacent levels.
    """

    t_index: np.ndarray
    level: np.ndarray
    log_scale: np.ndarray
    log_magnitude: np.ndarray
    value: np.ndarray
    omega_hat: np.ndarray
    edge_flag: np.ndarray
    peak_frequency: float

    def __len__(self):
        return self.t_index.size

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_scale)

    @property
    def frequency(self) -> np.ndarray:
        return self.peak_frequency / self.scale

    @property
    def magnitude(self) -> np.ndarray:
        return joint_norm(self.value)

    def at(self, t: int) -> np.ndarray:
        """Indices of the points at sample ``t``."""
        lo, hi = np.searchsorted(self.t_index, [t, t + 1])
        return np.arange(lo, hi)


@dataclass(frozen=True)
class RidgeCurve:
    """A single-valued, time-contiguous ridge and its along-ridge estimates."""

    t_index: np.ndarray
    level: np.ndarray
    log_scale: np.ndarray
    edge_flag: np.ndarray
    peak_frequency: float
    dt: float
    signal_estimate: np.ndarray | None = None
    freq_estimate: np.ndarray | None = None
    curvature_estimate: np.ndarray | None = None
    bias_estimate: np.ndarray | None = None
    cycles: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def duration(self) -> int:
        return self.t_index.size

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_scale)

    @property
    def frequency(self) -> np.ndarray:
        """Scale-equivalent frequency ``omega_psi / s``."""
        return self.peak_frequency / self.scale

    @property
    def power(self) -> np.ndarray:
        if self.signal_estimate is None:
            raise ValueError("curve has no signal estimate yet")
        return np.sum(np.abs(self.signal_estimate) ** 2, axis=0)


def default_max_dlogscale(cube: TransformCube) -> float:
    """Chaining bound: a jump of at most two grid levels per sample."""
    return DEFAULT_LEVEL_JUMP * abs(cube.grid.log_spacing)


def detect_ridge_points(cube: TransformCube, magnitude_floor: float | None = None,
                        relative_floor: float = DEFAULT_FLOOR) -> RidgePoints:
    """Local maxima over scale of the joint modulus ``||w(t, s)||``.

    The absolute ``magnitude_floor`` defaults to ``relative_floor`` times
    the cube maximum.
    """
    if cube.grid.levels < 3:
        raise GridTooSmallError("ridge detection needs at least 3 scale levels")
    mag = joint_norm(cube.w)
    if magnitude_floor is None:
        magnitude_floor = relative_floor * float(mag.max()) if mag.size else 0.0
    log_scales = cube.grid.log_scales
    t, j, u, y = _kernels.detect_maxima(mag, log_scales, magnitude_floor)
    value = interpolate_cube(cube.w, log_scales, t, j, u)
    if cube.wt is not None and t.size:
        dw = interpolate_cube(cube.wt, log_scales, t, j, u)
        omega_hat = np.sum(np.imag(np.conj(value) * dw), axis=0) / np.sum(np.abs(value) ** 2, axis=0)
    else:
        omega_hat = cube.wavelet.peak_frequency / np.exp(u)
    edge = (t < cube.edge_width[j]) | (t >= cube.samples - cube.edge_width[j])
    return RidgePoints(t, j, u, y, value, omega_hat, edge, cube.wavelet.peak_frequency)


def _cycles(omega_hat, edge, dt):
    keep = ~edge & np.isfinite(omega_hat)
    return float(np.sum(np.abs(omega_hat[keep])) * dt / (2 * np.pi))


def chain_ridges(points: RidgePoints, max_dlogscale_per_sample: float, min_cycles: float,
                 dt: float = 1.0) -> list[RidgeCurve]:
    """Link ridge points into curves and drop those shorter than ``min_cycles``.

    Cycles are counted from the transform frequency at the ridge points,
    excluding edge-flagged samples.
    """
    if len(points) == 0:
        return []
    ids = _kernels.chain_points(points.t_index, points.log_scale, points.log_magnitude,
                                max_dlogscale_per_sample)
    order = np.lexsort((points.t_index, ids))
    sorted_ids = ids[order]
    bounds = np.flatnonzero(np.diff(sorted_ids)) + 1
    curves = []
    for idx in np.split(order, bounds):
        cycles = _cycles(points.omega_hat[idx], points.edge_flag[idx], dt)
        if cycles < min_cycles:
            continue
        curves.append(RidgeCurve(points.t_index[idx], points.level[idx], points.log_scale[idx],
                                 points.edge_flag[idx], points.peak_frequency, dt, cycles=cycles))
    curves.sort(key=lambda c: (int(c.t_index[0]), float(c.log_scale[0])))
    return curves


def _interp(curve: RidgeCurve, cube: TransformCube, arr: np.ndarray) -> np.ndarray:
    return interpolate_cube(arr, cube.grid.log_scales, curve.t_index, curve.level, curve.log_scale)


def estimate_signal(curve: RidgeCurve, cube: TransformCube) -> np.ndarray:
    """Transform value along the ridge, the estimated analytic signal (N x L)."""
    return _interp(curve, cube, cube.w)


def estimate_frequency(curve: RidgeCurve, cube: TransformCube) -> np.ndarray:
    """Joint transform frequency along the ridge."""
    if cube.wt is None:
        raise MissingDerivativeError("frequency estimate needs the first time-derivative cube")
    w = _interp(curve, cube, cube.w)
    wt = _interp(curve, cube, cube.wt)
    return np.sum(np.imag(np.conj(w) * wt), axis=0) / np.sum(np.abs(w) ** 2, axis=0)


def _second_deviation(curve, cube):
    if cube.wt is None or cube.wtt is None:
        raise MissingDerivativeError("bias estimate needs both time-derivative cubes")
    w = _interp(curve, cube, cube.w)
    wt = _interp(curve, cube, cube.wt)
    wtt = _interp(curve, cube, cube.wtt)
    omega = np.sum(np.imag(np.conj(w) * wt), axis=0) / np.sum(np.abs(w) ** 2, axis=0)
    return w, omega, wtt - 2j * omega * wt - omega ** 2 * w


def estimate_curvature(curve: RidgeCurve, cube: TransformCube) -> np.ndarray:
    """Joint instantaneous curvature from the transform second deviation."""
    w, _, w2 = _second_deviation(curve, cube)
    return joint_norm(w2) / joint_norm(w)


def estimate_bias(curve: RidgeCurve, cube: TransformCube) -> np.ndarray:
    """Leading bias of the signal estimate, ``P^2/2 * w2 / omega_hat^2`` (N x L)."""
    _, omega, w2 = _second_deviation(curve, cube)
    return 0.5 * cube.wavelet.duration ** 2 * w2 / omega ** 2


def evaluate_curve(curve: RidgeCurve, cube: TransformCube) -> RidgeCurve:
    """Curve with every along-ridge estimate that the cube supports filled in."""
    updates = {"signal_estimate": estimate_signal(curve, cube)}
    if cube.wt is not None:
        updates["freq_estimate"] = estimate_frequency(curve, cube)
        updates["cycles"] = _cycles(updates["freq_estimate"], curve.edge_flag, curve.dt)
    if cube.wt is not None and cube.wtt is not None:
        updates["curvature_estimate"] = estimate_curvature(curve, cube)
        updates["bias_estimate"] = estimate_bias(curve, cube)
    return replace(curve, **updates)


def merge_overlaps(curves: list[RidgeCurve]) -> list[RidgeCurve]:
    """Power-weighted combination of curves that share samples.

    Each sample's estimates are averaged with weights ``||x_hat||^2``;
    the result holds at most one estimate per sample, split into
    time-contiguous runs.
    """
    curves = [c for c in curves if c.duration]
    if len(curves) <= 1:
        return list(curves)
    if any(c.signal_estimate is None for c in curves):
        raise ValueError("merge needs curves with signal estimates")
    t_end = max(int(c.t_index[-1]) for c in curves) + 1
    n_ch = curves[0].signal_estimate.shape[0]
    weight = np.zeros(t_end)
    count = np.zeros(t_end, np.int64)
    sig = np.zeros((n_ch, t_end), complex)
    has_freq = all(c.freq_estimate is not None for c in curves)
    has_bias = all(c.bias_estimate is not None for c in curves)
    freq = np.zeros(t_end)
    curv = np.zeros(t_end)
    bias = np.zeros((n_ch, t_end), complex)
    logs = np.zeros(t_end)
    lev = np.zeros(t_end)
    edge = np.zeros(t_end, bool)
    for c in curves:
        p = c.power
        t = c.t_index
        weight[t] += p
        count[t] += 1
        sig[:, t] += p * c.signal_estimate
        logs[t] += p * c.log_scale
        lev[t] += p * c.level
        edge[t] |= c.edge_flag
        if has_freq:
            freq[t] += p * c.freq_estimate
        if has_bias:
            curv[t] += p * c.curvature_estimate
            bias[:, t] += p * c.bias_estimate
    occupied = np.flatnonzero(count > 0)
    runs = np.split(occupied, np.flatnonzero(np.diff(occupied) > 1) + 1)
    peak, dt = curves[0].peak_frequency, curves[0].dt
    merged = []
    for t in runs:
        wsum = np.where(weight[t] > 0, weight[t], 1.0)
        fields = dict(
            t_index=t,
            level=np.rint(lev[t] / wsum).astype(np.int64),
            log_scale=logs[t] / wsum,
            edge_flag=edge[t],
            peak_frequency=peak,
            dt=dt,
            signal_estimate=sig[:, t] / wsum,
            meta={"merged_samples": int(np.sum(count[t] > 1))},
        )
        if has_freq:
            fields["freq_estimate"] = freq[t] / wsum
            fields["cycles"] = _cycles(fields["freq_estimate"], fields["edge_flag"], dt)
        if has_bias:
            fields["curvature_estimate"] = curv[t] / wsum
            fields["bias_estimate"] = bias[:, t] / wsum
        merged.append(RidgeCurve(**fields))
    return merged


def residual(x: MultivariateSeries, curves: list[RidgeCurve]) -> MultivariateSeries:
    """Observed series minus the real part of the merged ridge estimates."""
    data = np.array(x.data, dtype=float)
    for c in merge_overlaps(curves):
        data[:, c.t_index] -= c.signal_estimate.real
    return MultivariateSeries(data, x.dt, x.time_origin)


def ridge_scale_diagnostic(curve: RidgeCurve, truth_frequency, delta: float) -> float:
    """``sup |s_hat * omega_x / omega_psi - 1| / delta**2`` over non-edge samples."""
    truth = np.asarray(truth_frequency, dtype=float)
    keep = ~curve.edge_flag & np.isfinite(truth)
    deviation = np.abs(truth[keep] / curve.frequency[keep] - 1.0)
    return float(deviation.max() / delta ** 2) if deviation.size else 0.0


def ridge_analysis(cube: TransformCube, min_cycles: float | None = None,
                   max_dlogscale_per_sample: float | None = None,
                   magnitude_floor: float | None = None,
                   relative_floor: float = DEFAULT_FLOOR) -> list[RidgeCurve]:
    """Detect, chain, prune and evaluate ridges of a transform cube."""
    if min_cycles is None:
        min_cycles = 2 * cube.wavelet.duration
    if max_dlogscale_per_sample is None:
        max_dlogscale_per_sample = default_max_dlogscale(cube)
    points = detect_ridge_points(cube, magnitude_floor, relative_floor)
    curves = chain_ridges(points, max_dlogscale_per_sample, min_cycles, cube.dt)
    return [evaluate_curve(c, cube) for c in curves]
