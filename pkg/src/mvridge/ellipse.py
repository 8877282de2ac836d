"""Time-varying ellipse parameters of a bivariate analytic signal."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipseSnapshot",
    "ellipse_params",
    "ellipse_signal",
    "ellipse_trace",
    "ellipse_outline",
    "snapshot_times",
]


def _wrap(angle, half_period):
    """Wrap into ``(-half_period, half_period]``."""
    out = np.mod(angle + half_period, 2 * half_period) - half_period
    return np.where(out <= -half_period, out + 2 * half_period, out)


def ellipse_params(x_plus, y_plus):
    """Semi-major ``a``, signed semi-minor ``b``, orientation and phase.

    Uses the rotary components ``p = (x + i y)/2`` and ``n = (x - i y)/2``
    of the analytic pair. Orientation is kept in (-pi/2, pi/2] and the
    matching half-turn ambiguity is absorbed into the phase, which lies in
    (-pi, pi]. Positive ``b`` means counter-clockwise motion.
    """
    x_plus = np.asarray(x_plus, dtype=complex)
    y_plus = np.asarray(y_plus, dtype=complex)
    p = 0.5 * (x_plus + 1j * y_plus)
    n = 0.5 * (x_plus - 1j * y_plus)
    abs_p, abs_n = np.abs(p), np.abs(n)
    arg_p = np.where(abs_p > 0, np.angle(p), 0.0)
    arg_n = np.where(abs_n > 0, np.angle(n), 0.0)
    a = abs_p + abs_n
    b = abs_p - abs_n
    theta = 0.5 * (arg_p - arg_n)
    phi = 0.5 * (arg_p + arg_n)
    flip = (theta <= -np.pi / 2) | (theta > np.pi / 2)
    theta = np.where(flip, _wrap(theta, np.pi / 2), theta)
    phi = np.where(flip, phi + np.pi, phi)
    phi = _wrap(phi, np.pi)
    degenerate = a == 0
    theta = np.where(degenerate, 0.0, theta)
    phi = np.where(degenerate, 0.0, phi)
    if np.ndim(a) == 0:
        return float(a), float(b), float(theta), float(phi)
    return a, b, theta, phi


def ellipse_signal(a, b, theta, phi):
    """Inverse of :func:`ellipse_params`: the analytic pair ``(x_+, y_+)``."""
    a, b, theta, phi = (np.asarray(v, dtype=float) for v in (a, b, theta, phi))
    p = 0.5 * (a + b) * np.exp(1j * (theta + phi))
    n = 0.5 * (a - b) * np.exp(1j * (phi - theta))
    return p + n, -1j * (p - n)


def ellipse_trace(a, b, theta, phi, center=(0.0, 0.0)):
    """Real positions ``(x, y)`` described by the ellipse parameters."""
    z = np.exp(1j * np.asarray(theta)) * (np.asarray(a) * np.cos(phi) + 1j * np.asarray(b) * np.sin(phi))
    return center[0] + z.real, center[1] + z.imag


@dataclass(frozen=True)
class EllipseSnapshot:
    t_index: int
    center: tuple[float, float]
    semi_major: float
    semi_minor_signed: float
    orientation: float
    phase: float
    time: float = 0.0


def ellipse_outline(snapshot: EllipseSnapshot, n_points: int = 64, magnification: float = 1.0) -> np.ndarray:
    """Outline of a snapshot as a (2, n_points) array, optionally enlarged."""
    if n_points < 8:
        raise ValueError("ellipse outline needs at least 8 points")
    lam = np.linspace(0, 2 * np.pi, n_points, endpoint=False)
    z = magnification * np.exp(1j * snapshot.orientation) * (
        snapshot.semi_major * np.cos(lam) + 1j * snapshot.semi_minor_signed * np.sin(lam))
    return np.vstack([snapshot.center[0] + z.real, snapshot.center[1] + z.imag])


def snapshot_times(freq_estimate, dt: float) -> np.ndarray:
    """Sample indices spaced by one estimated period along a ridge.

    The first valid sample is always emitted; each further index is the
    first at which the accumulated phase ``sum(omega_hat * dt)`` passes
    another multiple of ``2 pi``.
    """
    omega = np.asarray(freq_estimate, dtype=float)
    valid = np.isfinite(omega) & (omega > 0)
    if not np.any(valid):
        return np.zeros(0, dtype=np.int64)
    step = np.where(valid, omega, 0.0) * dt
    first = int(np.argmax(valid))
    phase = np.concatenate([[0.0], np.cumsum(step[first:-1])]) if omega.size > first else np.zeros(1)
    cycle = np.floor(phase / (2 * np.pi) + 1e-9)
    new = np.flatnonzero(np.diff(cycle) > 0) + 1
    return np.concatenate([[first], first + new]).astype(np.int64)
