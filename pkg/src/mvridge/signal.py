"""Time-series containers, analytic signals and spectral derivatives."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from .errors import InvalidInputError, NonFiniteError, UnsupportedOrderError

__all__ = [
    "MultivariateSeries",
    "AnalyticSignal",
    "analytic_signal",
    "spectral_derivative",
    "polar_decompose",
    "analytic_multiplier",
    "radian_frequencies",
]


@dataclass(frozen=True)
class MultivariateSeries:
    """N real channels on a shared uniform time grid.

    Parameters
    ----------
    data : array_like, shape (N, T) or (T,)
        Channel samples. A 1-D input is treated as a single channel.
    dt : float
        Sample interval, in whatever time unit the caller uses.
    time_origin : float
        Time of the first sample.
    """

    data: np.ndarray
    dt: float = 1.0
    time_origin: float = 0.0

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 2:
            raise InvalidInputError(
                f"series must have N >= 1 channels and T >= 2 samples, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise NonFiniteError("series contains non-finite samples")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"dt must be positive, got {self.dt}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "time_origin", float(self.time_origin))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def samples(self) -> int:
        return self.data.shape[1]

    @property
    def time(self) -> np.ndarray:
        return self.time_origin + self.dt * np.arange(self.samples)

    @property
    def duration(self) -> float:
        return self.samples * self.dt


@dataclass(frozen=True)
class AnalyticSignal:
    """N complex channels with (numerically) no negative-frequency content.

    ``means`` holds the channel means removed before projection so that
    residuals can be put back on the original baseline.
    """

    data: np.ndarray
    dt: float = 1.0
    means: np.ndarray = field(default=None)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        means = np.zeros(data.shape[0]) if self.means is None else np.asarray(self.means, float)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def samples(self) -> int:
        return self.data.shape[1]

    @property
    def norm(self) -> np.ndarray:
        """Joint amplitude ``||x_+(t)||`` across channels."""
        return np.sqrt(np.sum(np.abs(self.data) ** 2, axis=0))


def radian_frequencies(n: int, dt: float) -> np.ndarray:
    """DFT bin frequencies in radians per time unit, Nyquist taken as positive."""
    omega = 2 * np.pi * fft.fftfreq(n, dt)
    if n % 2 == 0:
        omega[n // 2] = np.pi / dt
    return omega


def analytic_multiplier(n: int) -> np.ndarray:
    """Bin weights that map a real spectrum onto its analytic part.

    Strictly positive bins are doubled, negative bins zeroed, and the DC and
    (for even ``n``) Nyquist bins kept at unit weight, so that the real part
    of the result reproduces the input exactly.
    """
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[1:n // 2] = 2.0
        h[n // 2] = 1.0
    else:
        h[1:(n + 1) // 2] = 2.0
    return h


def _mirror_pad(data: np.ndarray, pad: int) -> np.ndarray:
    pad = min(int(pad), data.shape[-1] - 1)
    if pad <= 0:
        return data
    return np.pad(data, [(0, 0), (pad, pad)], mode="symmetric")


def analytic_signal(x: MultivariateSeries, pad: int = 0) -> AnalyticSignal:
    """Analytic part ``x_+ = x + i H x`` of every channel of ``x``.

    Channel means are removed first. With ``pad > 0`` the record is mirror
    padded by that many samples on each side before the FFT and trimmed
    afterwards, which trades exact reconstruction for reduced wrap-around.
    """
    if not isinstance(x, MultivariateSeries):
        x = MultivariateSeries(x)
    means = x.data.mean(axis=1)
    centred = x.data - means[:, np.newaxis]
    padded = _mirror_pad(centred, pad)
    lead = (padded.shape[1] - centred.shape[1]) // 2
    spectrum = fft.fft(padded, axis=-1)
    z = fft.ifft(spectrum * analytic_multiplier(padded.shape[1]), axis=-1)
    z = z[:, lead:lead + x.samples]
    return AnalyticSignal(np.ascontiguousarray(z), x.dt, means)


def spectral_derivative(z: AnalyticSignal, order: int) -> AnalyticSignal:
    """Time derivative of ``z`` of the given order, via ``(i omega)^order``."""
    if order not in (1, 2, 3):
        raise UnsupportedOrderError(f"derivative order must be 1, 2 or 3, got {order}")
    omega = radian_frequencies(z.samples, z.dt)
    dz = fft.ifft(fft.fft(z.data, axis=-1) * (1j * omega) ** order, axis=-1)
    return AnalyticSignal(dz, z.dt, np.zeros(z.channels))


def polar_decompose(z: AnalyticSignal | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Canonical amplitudes (>= 0) and phases in (-pi, pi] of each channel."""
    data = z.data if isinstance(z, AnalyticSignal) else np.asarray(z, dtype=complex)
    amplitude = np.abs(data)
    phase = np.angle(data)
    phase[phase <= -np.pi] = np.pi
    phase[amplitude == 0] = 0.0
    return amplitude, phase
