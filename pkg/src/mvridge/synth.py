"""Synthetic modulated oscillations with closed-form ground truth."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import lfilter

from .ellipse import ellipse_signal
from .errors import InvalidInputError
from .signal import MultivariateSeries

__all__ = ["SyntheticSpec", "Truth", "generate", "float_like_trajectory", "KINDS"]

KINDS = ("pure_oscillation", "phase_signal", "chirp", "gaussian_envelope", "modulated_ellipse")

DEFAULTS = {
    "pure_oscillation": {"omega0": 0.3},
    # sinusoidal frequency modulation: omega = omega0 * (1 + depth * cos(mod_freq * t))
    "phase_signal": {"omega0": 0.3, "depth": 0.1, "mod_freq": 0.01},
    "chirp": {"omega0": 0.3, "rate": 2e-5},
    "gaussian_envelope": {"omega0": 0.3, "sigma": 200.0, "rate": 0.0},
    "modulated_ellipse": {"omega0": 0.3, "a": 1.0, "b": 0.5, "theta": 0.3, "a_mod": 0.2,
                          "theta_rate": 1e-3, "mod_freq": 2e-3},
}


@dataclass
class SyntheticSpec:
    """Recipe for a synthetic signal.

    ``params`` override the kind defaults; ``coefficients`` is the fixed
    complex channel vector (random unit vector from ``seed`` when omitted).
    Times are measured from the record centre for the chirp and Gaussian
    kinds.
    """

    kind: str = "pure_oscillation"
    channels: int = 2
    samples: int = 4096
    dt: float = 1.0
    params: dict = field(default_factory=dict)
    coefficients: list | None = None
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown synthetic kind {self.kind!r}; choose from {KINDS}")
        if self.kind == "modulated_ellipse":
            self.channels = 2
        if self.channels < 1 or self.samples < 2 or not self.dt > 0 or self.noise_sigma < 0:
            raise InvalidInputError("invalid synthetic dimensions or noise level")
        merged = dict(DEFAULTS[self.kind])
        merged.update(self.params or {})
        for k, v in merged.items():
            if not math.isfinite(float(v)):
                raise InvalidInputError(f"parameter {k} is not finite")
        self.params = merged

    def to_json(self) -> str:
        d = asdict(self)
        if self.coefficients is not None:
            d["coefficients"] = [[float(np.real(c)), float(np.imag(c))] for c in self.coefficients]
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SyntheticSpec":
        d = json.loads(text)
        if d.get("coefficients") is not None:
            d["coefficients"] = [complex(re, im) for re, im in d["coefficients"]]
        return cls(**d)


@dataclass
class Truth:
    """Closed-form ground truth; NaN where a kind has no closed form."""

    x_plus: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    upsilon: np.ndarray
    xi: np.ndarray
    x2: np.ndarray
    jerk: np.ndarray
    time: np.ndarray

    def delta(self, interval: tuple[int, int] | None = None) -> float:
        """Local stability level over an index interval, from the truth."""
        sel = slice(None) if interval is None else slice(*interval)
        w = np.abs(self.omega[sel])
        terms = [self.upsilon[sel] / w, np.sqrt(self.xi[sel]) / w, np.cbrt(self.jerk[sel]) / w]
        return float(max(np.nanmax(t) for t in terms))


def _coefficients(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.coefficients is not None:
        c = np.asarray(spec.coefficients, dtype=complex)
        if c.shape != (spec.channels,):
            raise InvalidInputError("coefficients must have one entry per channel")
        return c
    c = rng.standard_normal(spec.channels) + 1j * rng.standard_normal(spec.channels)
    return c / np.linalg.norm(c)


def generate(spec: SyntheticSpec) -> tuple[MultivariateSeries, Truth]:
    """Observed series ``Re{x_+} + noise`` and the closed-form truth."""
    rng = np.random.default_rng(spec.seed)
    coef = _coefficients(spec, rng)
    p = spec.params
    n = spec.samples
    t = spec.dt * np.arange(n)
    tc = t - t[n // 2]
    zeros = np.zeros(n)
    w0 = float(p["omega0"])

    if spec.kind == "pure_oscillation":
        phase = w0 * t
        x_plus = np.exp(1j * phase) * coef[:, None]
        omega, omega_dot, ups, xi_c, jerk_c = np.full(n, w0), zeros, zeros, zeros + 0j, zeros + 0j
    elif spec.kind == "phase_signal":
        depth, wm = float(p["depth"]), float(p["mod_freq"])
        phase = w0 * t + w0 * depth / wm * np.sin(wm * t)
        omega = w0 * (1 + depth * np.cos(wm * t))
        omega_dot = -w0 * depth * wm * np.sin(wm * t)
        omega_ddot = -w0 * depth * wm ** 2 * np.cos(wm * t)
        ups, xi_c, jerk_c = zeros, 1j * omega_dot, 1j * omega_ddot
        x_plus = np.exp(1j * phase) * coef[:, None]
    elif spec.kind == "chirp":
        c = float(p["rate"])
        phase = w0 * tc + 0.5 * c * tc ** 2
        omega = w0 + c * tc
        omega_dot = np.full(n, c)
        ups, xi_c, jerk_c = zeros, np.full(n, 1j * c), zeros + 0j
        x_plus = np.exp(1j * phase) * coef[:, None]
    elif spec.kind == "gaussian_envelope":
        sigma, c = float(p["sigma"]), float(p["rate"])
        u = tc / sigma
        amp = np.exp(-0.5 * u ** 2)
        phase = w0 * tc + 0.5 * c * tc ** 2
        omega = w0 + c * tc
        omega_dot = np.full(n, c)
        rate1 = -u / sigma
        rate2 = (u ** 2 - 1) / sigma ** 2
        rate3 = (3 * u - u ** 3) / sigma ** 3
        ups = np.abs(rate1)
        xi_c = rate2 + 1j * c
        jerk_c = rate3 + 3j * rate1 * c
        x_plus = amp * np.exp(1j * phase) * coef[:, None]
        if w0 * sigma < 10:
            warnings.warn("envelope too short for the carrier; truth is only approximately analytic")
    else:
        wm = float(p["mod_freq"])
        a = float(p["a"]) * (1 + float(p["a_mod"]) * np.sin(wm * t))
        b = np.full(n, float(p["b"]))
        theta = float(p["theta"]) + float(p["theta_rate"]) * t
        phase = w0 * t
        xp, yp = ellipse_signal(a, b, theta, phase)
        x_plus = np.vstack([xp, yp])
        nan = np.full(n, np.nan)
        omega, omega_dot, ups, xi_c, jerk_c = nan, nan, nan, nan + 0j, nan + 0j

    if spec.kind == "chirp" and np.any(omega <= 0):
        warnings.warn("chirp frequency crosses zero inside the record")

    observed = x_plus.real.copy()
    if spec.noise_sigma > 0:
        observed += spec.noise_sigma * rng.standard_normal(observed.shape)
    truth = Truth(
        x_plus=x_plus,
        omega=np.asarray(omega, float),
        omega_dot=np.asarray(omega_dot, float),
        upsilon=np.asarray(ups, float),
        xi=np.abs(xi_c),
        x2=xi_c * x_plus,
        jerk=np.abs(jerk_c),
        time=t,
    )
    return MultivariateSeries(observed, spec.dt), truth


def float_like_trajectory(seed: int = 0, samples: int = 10_000, dt: float = 1.0,
                          amplitude: float = 15.0, background: float = 1.0,
                          f_start: float = 0.25, f_end: float = 0.025) -> tuple[MultivariateSeries, dict]:
    """Bivariate position record mimicking a looping float.

    A mean-reverting red-noise background of innovation ``background``
    (position units per sample) carries an elliptical vortex signal whose
    cyclic frequency falls geometrically from ``f_start`` to ``f_end``.
    Returns the series and a dict with the noiseless oscillation.
    """
    rng = np.random.default_rng(seed)
    t = dt * np.arange(samples)
    frac = t / t[-1]
    freq = 2 * np.pi * f_start * (f_end / f_start) ** frac
    phase = np.concatenate([[0.0], np.cumsum(0.5 * (freq[1:] + freq[:-1]) * dt)])
    envelope = amplitude * (0.8 + 0.2 * np.sin(2 * np.pi * frac * 1.5))
    a = envelope
    b = 0.7 * envelope
    theta = 0.4 + 0.3 * np.sin(2 * np.pi * frac)
    xp, yp = ellipse_signal(a, b, theta, phase)
    oscillation = np.vstack([xp, yp])

    rho = 0.995
    noise = background * rng.standard_normal((2, samples))
    back = lfilter([1.0], [1.0, -rho], noise, axis=1)
    data = oscillation.real + back
    return MultivariateSeries(data, dt), {"x_plus": oscillation, "omega": freq, "background": back}
