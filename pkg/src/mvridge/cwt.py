"""FFT-based analytic wavelet transform of multivariate series."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from .errors import InvalidGridError, InvalidInputError, MissingDerivativeError
from .morse import MorseWavelet
from .signal import MultivariateSeries, radian_frequencies

__all__ = [
    "ScaleGrid",
    "TransformCube",
    "transform",
    "transform_frequency",
    "transform_curvature",
    "joint_norm",
]

# Cells whose joint modulus falls below this fraction of the cube maximum
# are treated as undefined in ratio quantities.
AMPLITUDE_FLOOR = 1e-8


@dataclass(frozen=True)
class ScaleGrid:
    """Log-spaced analysis frequencies (radian, decreasing) and their scales."""

    frequencies: np.ndarray
    scales: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        scales = np.asarray(self.scales, dtype=float)
        if freqs.ndim != 1 or freqs.shape != scales.shape:
            raise InvalidGridError("frequencies and scales must be matching 1-D arrays")
        if freqs.size and (np.any(freqs <= 0) or np.any(np.diff(freqs) >= 0)):
            raise InvalidGridError("frequencies must be positive and strictly decreasing")
        if freqs.size and freqs[0] >= np.pi / self.dt:
            raise InvalidGridError(
                f"maximum frequency {freqs[0]:.6g} rad reaches the Nyquist frequency {np.pi / self.dt:.6g}")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "scales", scales)

    @classmethod
    def from_cyclic(cls, levels: int, f_min: float, f_max: float, wavelet: MorseWavelet,
                    dt: float = 1.0) -> "ScaleGrid":
        """Grid from cyclic frequencies (cycles per time unit)."""
        return cls.from_radian(levels, 2 * np.pi * f_min, 2 * np.pi * f_max, wavelet, dt)

    @classmethod
    def from_radian(cls, levels: int, omega_min: float, omega_max: float, wavelet: MorseWavelet,
                    dt: float = 1.0) -> "ScaleGrid":
        levels = int(levels)
        if levels < 1:
            raise InvalidGridError("grid needs at least one level")
        if not (0 < omega_min < omega_max) and not (levels == 1 and omega_min == omega_max > 0):
            raise InvalidGridError(f"need 0 < f_min < f_max, got {omega_min}, {omega_max}")
        if omega_max >= np.pi / dt:
            raise InvalidGridError(
                f"maximum frequency {omega_max:.6g} rad reaches the Nyquist frequency {np.pi / dt:.6g}")
        freqs = np.geomspace(omega_max, omega_min, levels)
        return cls(freqs, wavelet.peak_frequency / freqs, dt)

    @property
    def levels(self) -> int:
        return self.frequencies.size

    @property
    def log_scales(self) -> np.ndarray:
        return np.log(self.scales)

    @property
    def log_spacing(self) -> float:
        if self.levels < 2:
            return 0.0
        return float(np.mean(np.diff(self.log_scales)))

    @property
    def cyclic_frequencies(self) -> np.ndarray:
        return self.frequencies / (2 * np.pi)


@dataclass(frozen=True)
class TransformCube:
    """Transform ``w`` (N x S x T) and optional time derivatives ``wt``, ``wtt``."""

    w: np.ndarray
    grid: ScaleGrid
    wavelet: MorseWavelet
    dt: float
    wt: np.ndarray | None = None
    wtt: np.ndarray | None = None
    edge_width: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.edge_width is None:
            object.__setattr__(self, "edge_width", edge_widths(self.grid, self.wavelet, self.dt))

    @property
    def shape(self):
        return self.w.shape

    @property
    def channels(self) -> int:
        return self.w.shape[0]

    @property
    def samples(self) -> int:
        return self.w.shape[2]

    def edge_mask(self) -> np.ndarray:
        """Boolean (S, T) mask of cells within ``edge_width`` of either end."""
        t = np.arange(self.samples)
        ew = self.edge_width[:, np.newaxis]
        return (t < ew) | (t >= self.samples - ew)


def edge_widths(grid: ScaleGrid, wavelet: MorseWavelet, dt: float) -> np.ndarray:
    """Samples per level affected by the record ends: two wavelet half-durations."""
    return np.ceil(2 * wavelet.duration / grid.frequencies / dt).astype(np.int64)


def joint_norm(w: np.ndarray) -> np.ndarray:
    """Norm over the leading (channel) axis."""
    return np.sqrt(np.sum(w.real ** 2 + w.imag ** 2, axis=0))


def transform(x: MultivariateSeries, wavelet: MorseWavelet, grid: ScaleGrid, derivatives: int = 0,
              pad: bool = False, block: int = 32) -> TransformCube:
    """Analytic wavelet transform with 1/s normalization.

    Each level multiplies the channel spectra by ``Psi(s_j omega)`` over
    non-negative frequencies and inverts, so a unit cosine at the level's
    frequency returns modulus one. ``derivatives`` in {0, 1, 2} adds exact
    time-derivative cubes through ``(i omega)^k`` factors.
    """
    if not isinstance(x, MultivariateSeries):
        x = MultivariateSeries(x)
    if derivatives not in (0, 1, 2):
        raise InvalidInputError("derivatives must be 0, 1 or 2")
    if wavelet.beta <= 2:
        raise InvalidInputError(f"transform needs beta > 2, got beta = {wavelet.beta}")
    if not math.isclose(grid.dt, x.dt, rel_tol=1e-9):
        raise InvalidGridError(f"grid built for dt = {grid.dt}, series has dt = {x.dt}")
    if grid.levels and grid.frequencies[0] >= np.pi / x.dt:
        raise InvalidGridError("grid exceeds the Nyquist frequency")
    if grid.levels and x.samples * x.dt < 4 * wavelet.duration / grid.frequencies[-1]:
        warnings.warn("record is short compared with the lowest-frequency wavelet", stacklevel=2)

    data = x.data - x.data.mean(axis=1, keepdims=True)
    n_pad = 0
    if pad and grid.levels:
        n_pad = min(int(math.ceil(wavelet.duration / grid.frequencies[-1] / x.dt)), x.samples - 1)
        data = np.pad(data, [(0, 0), (n_pad, n_pad)], mode="symmetric")
    n = data.shape[1]
    spectrum = fft.fft(data, axis=-1)
    omega = radian_frequencies(n, x.dt)
    positive = np.where(omega > 0, 1.0, 0.0)
    if n % 2 == 0:
        positive[n // 2] = 0.5  # Nyquist bin is self-conjugate

    shape = (x.channels, grid.levels, x.samples)
    cubes = [np.empty(shape, dtype=complex) for _ in range(derivatives + 1)]
    factors = [None, 1j * omega, (1j * omega) ** 2][:derivatives + 1]
    for start in range(0, grid.levels, block):
        stop = min(start + block, grid.levels)
        psi = wavelet.evaluate_freq(np.outer(grid.scales[start:stop], np.where(omega > 0, omega, 0.0)))
        filt = spectrum[:, np.newaxis, :] * (psi * positive)[np.newaxis, :, :]
        for cube, factor in zip(cubes, factors):
            block_spec = filt if factor is None else filt * factor
            out = fft.ifft(block_spec, axis=-1)
            cube[:, start:stop, :] = out[..., n_pad:n_pad + x.samples]

    w = cubes[0]
    wt = cubes[1] if derivatives >= 1 else None
    wtt = cubes[2] if derivatives >= 2 else None
    return TransformCube(w, grid, wavelet, x.dt, wt, wtt)


def _valid(cube: TransformCube) -> tuple[np.ndarray, np.ndarray]:
    power = np.sum(np.abs(cube.w) ** 2, axis=0)
    peak = power.max() if power.size else 0.0
    valid = power > (AMPLITUDE_FLOOR ** 2) * peak if peak > 0 else np.zeros_like(power, dtype=bool)
    return power, valid


def transform_frequency(cube: TransformCube) -> np.ndarray:
    """Joint transform frequency ``Im{w^H w_t} / ||w||^2`` over (S, T).

    Cells with negligible modulus are NaN.
    """
    if cube.wt is None:
        raise MissingDerivativeError("transform frequency needs the first time-derivative cube")
    power, valid = _valid(cube)
    numer = np.sum(np.imag(np.conj(cube.w) * cube.wt), axis=0)
    out = np.full(power.shape, np.nan)
    np.divide(numer, power, out=out, where=valid)
    return out


def transform_curvature(cube: TransformCube) -> np.ndarray:
    """Second deviation of the transform, ``w_tt - 2i Omega w_t - Omega^2 w``."""
    if cube.wt is None or cube.wtt is None:
        raise MissingDerivativeError("transform curvature needs both time-derivative cubes")
    omega = np.nan_to_num(transform_frequency(cube))[np.newaxis]
    return cube.wtt - 2j * omega * cube.wt - omega ** 2 * cube.w
