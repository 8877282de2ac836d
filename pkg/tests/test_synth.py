import math

import numpy as np
import pytest

from mvridge import (
    InvalidInputError,
    PipelineConfig,
    SyntheticSpec,
    analytic_signal,
    deviations_from_signal,
    ellipse_params,
    ellipse_trace,
    float_like_trajectory,
    generate,
    run_pipeline,
)

N = 8192


def _rel(a, b, sel):
    return np.max(np.abs(a[sel] - b[sel])) / np.max(np.abs(b[sel]))


def test_pure_oscillation_truth():
    s, truth = generate(SyntheticSpec("pure_oscillation", channels=3, samples=512))
    assert s.channels == 3
    assert not np.any(truth.upsilon) and not np.any(truth.xi)
    assert truth.delta() == 0.0
    np.testing.assert_allclose(s.data, truth.x_plus.real)


def test_chirp_truth_is_curvature_only():
    c = 3e-5
    s, truth = generate(SyntheticSpec("chirp", samples=N, params={"rate": c}))
    np.testing.assert_allclose(truth.xi, abs(c))
    np.testing.assert_allclose(truth.omega, 0.3 + c * (truth.time - truth.time[N // 2]))
    np.testing.assert_allclose(truth.x2, 1j * c * truth.x_plus)
    assert not np.any(truth.upsilon)


@pytest.mark.parametrize("kind,params", [
    ("pure_oscillation", {"omega0": 2 * np.pi * 400 / N}),
    ("phase_signal", {"omega0": 2 * np.pi * 400 / N, "mod_freq": 2 * np.pi * 3 / N, "depth": 0.1}),
    ("gaussian_envelope", {}),
    ("gaussian_envelope", {"rate": 1e-4}),
])
def test_truth_matches_moments_of_generated_signal(kind, params):
    # periodic or fully decaying records, so the spectral route has no wrap error
    s, truth = generate(SyntheticSpec(kind, samples=N, params=params))
    d = deviations_from_signal(analytic_signal(s))
    sel = slice(N // 4, 3 * N // 4) if kind != "gaussian_envelope" else slice(N // 2 - 600, N // 2 + 600)
    omega = truth.omega[sel]
    assert _rel(d.omega, truth.omega, sel) <= 1e-4
    assert np.max(np.abs(d.upsilon[sel] - truth.upsilon[sel]) / omega) <= 1e-4
    assert np.max(np.abs(d.xi[sel] - truth.xi[sel]) / omega ** 2) <= 1e-4
    if np.any(truth.xi[sel]):
        assert _rel(d.xi, truth.xi, sel) <= 1e-4


def test_chirp_truth_matches_phase_differences():
    s, truth = generate(SyntheticSpec("chirp", channels=2, samples=N, params={"rate": 2e-5}))
    phase = np.unwrap(np.angle(truth.x_plus[0]))
    # central differences are exact for a quadratic phase
    omega_fd = 0.5 * (phase[2:] - phase[:-2])
    rate_fd = phase[2:] - 2 * phase[1:-1] + phase[:-2]
    np.testing.assert_allclose(omega_fd, truth.omega[1:-1], rtol=1e-9)
    np.testing.assert_allclose(rate_fd, truth.omega_dot[1:-1], atol=1e-9)
    np.testing.assert_allclose(truth.xi, np.abs(truth.omega_dot))


def test_modulated_ellipse_roundtrip():
    s, truth = generate(SyntheticSpec("modulated_ellipse", samples=2000))
    a, b, theta, phi = ellipse_params(truth.x_plus[0], truth.x_plus[1])
    x, y = ellipse_trace(a, b, theta, phi)
    np.testing.assert_allclose(x, s.data[0], atol=1e-10)
    np.testing.assert_allclose(y, s.data[1], atol=1e-10)


def test_noise_and_determinism():
    spec = SyntheticSpec("chirp", channels=2, samples=1000, noise_sigma=0.5, seed=4)
    a, ta = generate(spec)
    b, tb = generate(spec)
    np.testing.assert_array_equal(a.data, b.data)
    np.testing.assert_array_equal(ta.x_plus, tb.x_plus)
    resid = a.data - ta.x_plus.real
    assert np.std(resid) == pytest.approx(0.5, rel=0.1)
    c, _ = generate(SyntheticSpec("chirp", channels=2, samples=1000, noise_sigma=0.5, seed=5))
    assert not np.array_equal(a.data, c.data)


def test_json_roundtrip():
    spec = SyntheticSpec("gaussian_envelope", channels=2, samples=300, params={"sigma": 50.0},
                         coefficients=[1 + 0.5j, -0.2j], noise_sigma=0.1, seed=9)
    back = SyntheticSpec.from_json(spec.to_json())
    assert back == spec
    np.testing.assert_array_equal(generate(back)[0].data, generate(spec)[0].data)


def test_rejects_bad_specs():
    with pytest.raises(InvalidInputError):
        SyntheticSpec("sawtooth")
    with pytest.raises(InvalidInputError):
        SyntheticSpec("chirp", params={"rate": math.inf})
    with pytest.raises(InvalidInputError):
        SyntheticSpec("chirp", noise_sigma=-1)
    with pytest.raises(InvalidInputError):
        generate(SyntheticSpec("chirp", channels=2, coefficients=[1.0]))
    with pytest.warns(UserWarning):
        generate(SyntheticSpec("gaussian_envelope", params={"sigma": 5.0}))


def test_float_like_has_one_dominant_curve():
    series, info = float_like_trajectory(seed=0)
    result = run_pipeline(PipelineConfig.preset("float"), series)
    longest = max(c.duration for c in result.merged)
    assert longest >= 0.6 * series.samples


def test_float_like_zero_amplitude():
    # with the background also off the record is identically zero
    series, _ = float_like_trajectory(seed=0, amplitude=0.0, background=0.0)
    assert run_pipeline(PipelineConfig.preset("float"), series).merged == []
    # with only red noise present, the relative floor scales with the noise and
    # short noise ridges remain; none comes close to the oscillation's extent
    series, _ = float_like_trajectory(seed=0, amplitude=0.0)
    result = run_pipeline(PipelineConfig.preset("float"), series)
    assert all(c.duration < 0.1 * series.samples for c in result.merged)


def test_float_like_amplitude_linearity():
    means = []
    for amp in (15.0, 30.0):
        series, _ = float_like_trajectory(seed=0, amplitude=amp)
        result = run_pipeline(PipelineConfig.preset("float"), series)
        dominant = max(result.merged, key=lambda c: c.duration)
        means.append(np.mean(np.sqrt(dominant.power)))
    assert means[1] / means[0] == pytest.approx(2.0, rel=0.05)
