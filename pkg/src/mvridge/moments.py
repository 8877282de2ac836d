"""Deviation vectors and joint instantaneous moments of an analytic signal."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft

from .errors import EmptyIntervalError, ShapeError
from .signal import AnalyticSignal, spectral_derivative

__all__ = [
    "DeviationSet",
    "StabilityReport",
    "joint_frequency",
    "deviation_vectors",
    "deviations_from_signal",
    "frequency_error_curve",
    "stability_level",
    "projection_identities",
    "AMPLITUDE_FLOOR",
    "RESOLUTION",
]

AMPLITUDE_FLOOR = 1e-8
RESOLUTION = 256 * np.finfo(float).eps


def _data(z):
    return z.data if isinstance(z, AnalyticSignal) else np.atleast_2d(np.asarray(z, dtype=complex))


def _check_shapes(*arrays):
    shape = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != shape:
            raise ShapeError(f"shape mismatch: {a.shape} vs {shape}")


def _valid_mask(power):
    peak = power.max() if power.size else 0.0
    if peak <= 0:
        return np.zeros(power.shape, dtype=bool)
    return power > AMPLITUDE_FLOOR ** 2 * peak


def _ratio(numer, denom, valid):
    out = np.full(np.shape(denom), np.nan)
    np.divide(numer, denom, out=out, where=valid)
    return out


@dataclass(frozen=True)
class DeviationSet:
    """Intrinsic deviation vectors ``x1, x2, x3`` and scalar joint moments.

    Ratio quantities are NaN where the joint amplitude is below
    ``AMPLITUDE_FLOOR`` times its maximum; ``valid`` marks the rest.
    """

    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    upsilon: np.ndarray
    xi: np.ndarray
    norm: np.ndarray
    valid: np.ndarray
    dt: float = 1.0


@dataclass(frozen=True)
class StabilityReport:
    delta: float
    term_bandwidth: float
    term_curvature: float
    term_jerk_proxy: float
    interval: tuple[int, int]

    @property
    def is_modulated_oscillation(self) -> bool:
        return self.delta < 1


def joint_frequency(z, z1) -> np.ndarray:
    """Power-weighted joint instantaneous frequency ``Im{z^H z'} / ||z||^2``."""
    a, b = _data(z), _data(z1)
    _check_shapes(a, b)
    power = np.sum(np.abs(a) ** 2, axis=0)
    return _ratio(np.sum(np.imag(np.conj(a) * b), axis=0), power, _valid_mask(power))


def frequency_error_curve(z, z1, omega_trial) -> np.ndarray:
    """Normalized squared error ``||z' - i w z||^2 / ||z||^2`` of a trial frequency."""
    a, b = _data(z), _data(z1)
    _check_shapes(a, b)
    power = np.sum(np.abs(a) ** 2, axis=0)
    err = np.sum(np.abs(b - 1j * np.asarray(omega_trial) * a) ** 2, axis=0)
    return _ratio(err, power, _valid_mask(power))


def deviation_vectors(z, z1, z2, z3, dt: float = 1.0) -> DeviationSet:
    """Intrinsic deviation vectors of orders 1-3 and the joint moments.

    The chirp rate is the exact time derivative of the joint frequency,
    ``Im{z^H z''}/||z||^2 - 2 omega Re{z^H z'}/||z||^2``, evaluated from the
    supplied derivatives rather than by differencing ``omega``.
    """
    x, d1, d2, d3 = (_data(v) for v in (z, z1, z2, z3))
    _check_shapes(x, d1, d2, d3)
    if isinstance(z, AnalyticSignal):
        dt = z.dt
    power = np.sum(np.abs(x) ** 2, axis=0)
    valid = _valid_mask(power)
    omega = _ratio(np.sum(np.imag(np.conj(x) * d1), axis=0), power, valid)
    w = np.where(valid, omega, 0.0)

    x1 = d1 - 1j * w * x
    x2 = d2 - 2j * w * d1 - w ** 2 * x
    x3 = d3 - 3j * w * d2 - 3 * w ** 2 * d1 + 1j * w ** 3 * x

    norm = np.sqrt(power)
    proj2 = _ratio(np.sum(np.imag(np.conj(x) * d2), axis=0), power, valid)
    proj1 = _ratio(np.sum(np.real(np.conj(x) * d1), axis=0), power, valid)
    omega_dot = proj2 - 2 * omega * proj1
    upsilon = _ratio(np.sqrt(np.sum(np.abs(x1) ** 2, axis=0)), norm, valid)
    xi = _ratio(np.sqrt(np.sum(np.abs(x2) ** 2, axis=0)), norm, valid)
    return DeviationSet(x1, x2, x3, omega, omega_dot, upsilon, xi, norm, valid, dt)


def deviations_from_signal(z: AnalyticSignal) -> DeviationSet:
    """Convenience wrapper: spectral derivatives then :func:`deviation_vectors`."""
    derivs = [spectral_derivative(z, k) for k in (1, 2, 3)]
    return deviation_vectors(z, *derivs)


def stability_level(d: DeviationSet, interval: tuple[int, int] | None = None,
                    resolution: float = RESOLUTION) -> StabilityReport:
    """Local stability level over ``interval = (start, stop)`` sample indices.

    The jerk term uses ``||x3|| / ||x_+||`` as a computable stand-in for the
    remainder supremum.

    Spectral differentiation of order ``p`` amplifies rounding error by about
    ``(1 + pi / (|omega| dt))**p`` relative to the signal's own ``omega**p``, so
    a per-sample ratio below ``resolution`` times that factor is unresolved and
    counts as zero; otherwise the cube root turns rounding into ~1e-5 for a
    pure oscillation. Pass ``resolution=0`` to disable.
    """
    n = d.omega.size
    start, stop = (0, n) if interval is None else interval
    start, stop = max(int(start), 0), min(int(stop), n)
    sel = slice(start, stop)
    valid = d.valid[sel] & np.isfinite(d.omega[sel]) & (d.omega[sel] != 0)
    if not np.any(valid):
        raise EmptyIntervalError(f"no valid samples in [{start}, {stop})")
    omega = np.abs(d.omega[sel][valid])
    amplification = 1 + np.pi / (omega * d.dt)
    jerk = np.sqrt(np.sum(np.abs(d.x3[:, sel][:, valid]) ** 2, axis=0)) / d.norm[sel][valid]

    def resolved(ratio, p):
        return np.where(ratio > resolution * amplification ** p, ratio, 0.0)

    term_b = float(np.max(resolved(d.upsilon[sel][valid] / omega, 1)))
    term_c = float(np.max(np.sqrt(resolved(d.xi[sel][valid] / omega ** 2, 2))))
    term_j = float(np.max(np.cbrt(resolved(jerk / omega ** 3, 3))))
    return StabilityReport(max(term_b, term_c, term_j), term_b, term_c, term_j, (start, stop))


def _series_derivative(y: np.ndarray, dt: float) -> np.ndarray:
    """Spectral time derivative of an arbitrary (real or complex) series."""
    n = y.shape[-1]
    omega = 2 * np.pi * fft.fftfreq(n, dt)
    if n % 2 == 0:
        omega[n // 2] = 0.0
    out = fft.ifft(fft.fft(y, axis=-1) * 1j * omega, axis=-1)
    return out.real if np.isrealobj(y) else out


def projection_identities(d: DeviationSet, z, interval: tuple[int, int] | None = None) -> dict:
    """Largest residuals of the four exact deviation-vector identities.

    Residuals are normalized per sample by ``|omega|`` powers (and by
    ``||x_+||`` for the vector identities) so they are dimensionless:

    ``amplitude``  ``Re{x^H x1}/||x||^2 - ||x||'/||x||`` and ``Im{x^H x1}``
    ``chirp``      ``Im{x^H x2}/||x||^2 - omega'`` with omega' differentiated
                   spectrally from the omega series
    ``first``      ``x1' + i omega' x - (x2 + i omega x1)``
    ``second``     ``x2' + 2i omega' x1 - (x3 + i omega x2)``
    """
    x = _data(z)
    dt = d.dt
    n = x.shape[-1]
    start, stop = (0, n) if interval is None else interval
    sel = slice(max(int(start), 0), min(int(stop), n))
    power = d.norm ** 2
    valid = d.valid
    omega = np.where(valid, d.omega, 0.0)
    scale = np.abs(omega)
    scale = np.where(scale > 0, scale, np.nan)

    proj1 = np.sum(np.conj(x) * d.x1, axis=0) / np.where(valid, power, np.nan)
    log_norm_rate = _series_derivative(d.norm, dt) / np.where(valid, d.norm, np.nan)
    r_amp = np.abs(proj1 - log_norm_rate) / scale

    omega_dot_spectral = _series_derivative(omega, dt)
    proj2 = np.sum(np.imag(np.conj(x) * d.x2), axis=0) / np.where(valid, power, np.nan)
    r_chirp = np.abs(proj2 - omega_dot_spectral) / scale ** 2

    dx1 = _series_derivative(d.x1, dt)
    dx2 = _series_derivative(d.x2, dt)
    res1 = dx1 + 1j * d.omega_dot * x - (d.x2 + 1j * omega * d.x1)
    res2 = dx2 + 2j * d.omega_dot * d.x1 - (d.x3 + 1j * omega * d.x2)
    r_first = np.sqrt(np.sum(np.abs(res1) ** 2, axis=0)) / (d.norm * scale ** 2)
    r_second = np.sqrt(np.sum(np.abs(res2) ** 2, axis=0)) / (d.norm * scale ** 3)

    def worst(r):
        r = r[sel]
        r = r[np.isfinite(r)]
        return float(r.max()) if r.size else 0.0

    return {"amplitude": worst(r_amp), "chirp": worst(r_chirp),
            "first": worst(r_first), "second": worst(r_second)}
