"""Generalized Morse wavelets ``a * omega**beta * exp(-omega**gamma)``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft

from .errors import InvalidInputError, NotModulatedError, UnsupportedOrderError

__all__ = ["MorseWavelet", "SuitabilityReport", "suitability_check"]


@dataclass(frozen=True)
class MorseWavelet:
    """Frequency-domain generalized Morse wavelet, normalized to peak value 2.

    Parameters
    ----------
    beta : float
        Decay/duration parameter, > 0. The transform pipeline needs beta > 2.
    gamma : float
        Family shape parameter, > 0. ``gamma = 3`` is the usual choice.
    """

    beta: float = 3.0
    gamma: float = 3.0

    def __post_init__(self):
        for name in ("beta", "gamma"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)

    @property
    def peak_frequency(self) -> float:
        return (self.beta / self.gamma) ** (1.0 / self.gamma)

    @property
    def amplitude_const(self) -> float:
        return 2.0 * (math.e * self.gamma / self.beta) ** (self.beta / self.gamma)

    @property
    def duration(self) -> float:
        """Dimensionless duration ``P = sqrt(beta * gamma)``."""
        return math.sqrt(self.beta * self.gamma)

    def evaluate_freq(self, omega):
        """``Psi(omega)``; zero for ``omega <= 0``."""
        omega = np.asarray(omega, dtype=float)
        out = np.zeros_like(omega)
        pos = omega > 0
        w = omega[pos]
        log_a = math.log(2.0) + (self.beta / self.gamma) * math.log(math.e * self.gamma / self.beta)
        out[pos] = np.exp(log_a + self.beta * np.log(w) - w ** self.gamma)
        return out[()] if out.ndim == 0 else out

    def _log_derivatives(self, omega, p):
        # k-th derivatives of ln Psi = beta ln(omega) - omega**gamma + const
        g = []
        falling = 1.0
        for k in range(1, p + 1):
            falling *= self.gamma - (k - 1)
            g.append(self.beta * (-1) ** (k - 1) * math.factorial(k - 1) * omega ** (-k)
                     - falling * omega ** (self.gamma - k))
        return g

    def dimensionless_derivative(self, p: int, omega=None):
        """``omega**p * Psi^(p)(omega) / Psi(omega)``, closed form for p <= 4.

        Evaluated at the peak frequency when ``omega`` is omitted.
        """
        if p not in (1, 2, 3, 4):
            raise UnsupportedOrderError(f"dimensionless derivative order must be 1..4, got {p}")
        omega = self.peak_frequency if omega is None else np.asarray(omega, dtype=float)
        if np.any(np.asarray(omega) <= 0):
            raise InvalidInputError("dimensionless derivatives need omega > 0")
        g = self._log_derivatives(omega, p)
        g1 = g[0]
        # Psi^(p)/Psi as complete Bell polynomials in the log-derivatives
        if p == 1:
            ratio = g1
        elif p == 2:
            ratio = g[1] + g1 ** 2
        elif p == 3:
            ratio = g[2] + 3 * g1 * g[1] + g1 ** 3
        else:
            g2, g3, g4 = g[1], g[2], g[3]
            ratio = g4 + 4 * g1 * g3 + 3 * g2 ** 2 + 6 * g1 ** 2 * g2 + g1 ** 4
        return omega ** p * ratio

    def time_domain(self, length: int, scale: float = 1.0, dt: float = 1.0) -> np.ndarray:
        """Samples of ``psi(t/s)/s`` centred on index ``length // 2``."""
        if length < 16:
            raise InvalidInputError("time-domain wavelet needs length >= 16")
        if scale <= 0:
            raise InvalidInputError("scale must be positive")
        omega = 2 * np.pi * fft.fftfreq(length, dt)
        psi = fft.ifft(self.evaluate_freq(scale * omega)) / dt
        return fft.fftshift(psi)


@dataclass(frozen=True)
class SuitabilityReport:
    delta: float
    orders: dict
    duration: float
    duration_in_range: bool

    @property
    def passed(self) -> bool:
        return all(entry["pass"] for entry in self.orders.values())

    @property
    def binding_order(self) -> int:
        return min(self.orders, key=lambda p: self.orders[p]["margin"])

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "orders": {str(p): dict(v) for p, v in self.orders.items()},
            "duration": self.duration,
            "duration_in_range": self.duration_in_range,
            "passed": self.passed,
            "binding_order": self.binding_order,
        }


def suitability_check(wavelet: MorseWavelet, delta: float, max_order: int = 4) -> SuitabilityReport:
    """Compare the wavelet's dimensionless derivatives with powers of ``delta``.

    Order ``p`` passes when ``|Psi~_p(omega_psi)| / p!`` is at most
    ``delta**(-p/2)`` for even ``p`` and ``delta**(-(p-1)/2)`` for odd ``p``.
    The margin is the log10 ratio of bound to value, so negative means fail.
    """
    if not 0 < delta:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    if delta >= 1:
        raise NotModulatedError(f"delta = {delta} >= 1: signal is not a modulated oscillation")
    if not 1 <= max_order <= 4:
        raise UnsupportedOrderError("max_order must be in 1..4")
    orders = {}
    for p in range(1, max_order + 1):
        value = abs(float(wavelet.dimensionless_derivative(p))) / math.factorial(p)
        exponent = p / 2 if p % 2 == 0 else (p - 1) / 2
        bound = delta ** (-exponent)
        margin = math.log10(bound / max(value, 1e-300))
        orders[p] = {"value": value, "bound": bound, "margin": margin, "pass": value <= bound}
    P = wavelet.duration
    return SuitabilityReport(delta, orders, P, 1.0 <= P <= math.sqrt(2.0 / delta))
