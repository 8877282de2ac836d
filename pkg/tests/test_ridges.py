import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvridge import (
    GridTooSmallError,
    MorseWavelet,
    MultivariateSeries,
    ScaleGrid,
    chain_ridges,
    detect_ridge_points,
    estimate_bias,
    estimate_frequency,
    estimate_signal,
    joint_norm,
    merge_overlaps,
    residual,
    ridge_analysis,
    ridge_scale_diagnostic,
    transform,
)
from mvridge.ridges import RidgeCurve, default_max_dlogscale

W33 = MorseWavelet(3, 3)


def _tone(n, k, channels=((1.0, 0.0),)):
    t = np.arange(n)
    w = 2 * np.pi * k / n
    return w, MultivariateSeries(np.vstack([a * np.cos(w * t + p) for a, p in channels]))


def test_sinusoid_gives_one_point_per_sample():
    n = 2048
    g = ScaleGrid.from_cyclic(60, 0.01, 0.3, W33)
    w, x = _tone(n, 200)
    cube = transform(x, W33, g, derivatives=1)
    pts = detect_ridge_points(cube)
    counts = np.bincount(pts.t_index, minlength=n)
    assert np.all(counts == 1)
    half_cell = 0.5 * abs(g.log_spacing)
    assert np.all(np.abs(np.log(pts.frequency / w)) <= half_cell)
    assert np.all(pts.level == np.argmin(np.abs(np.log(g.frequencies / w))))


def test_infinite_floor_gives_no_points():
    x = MultivariateSeries(np.random.default_rng(0).standard_normal((2, 512)))
    cube = transform(x, W33, ScaleGrid.from_cyclic(20, 0.02, 0.3, W33))
    assert len(detect_ridge_points(cube, magnitude_floor=np.inf)) == 0
    assert ridge_analysis(cube, magnitude_floor=np.inf) == []


def test_grid_too_small():
    x = MultivariateSeries(np.random.default_rng(0).standard_normal((1, 512)))
    cube = transform(x, W33, ScaleGrid.from_cyclic(2, 0.05, 0.1, W33))
    with pytest.raises(GridTooSmallError):
        detect_ridge_points(cube)


def _brute_maxima(mag):
    out = []
    for t in range(mag.shape[1]):
        col = mag[:, t]
        out.append({j for j in range(1, len(col) - 1) if col[j] > col[j - 1] and col[j] >= col[j + 1]
                    and col[j] > 1e-3 * mag.max()})
    return out


def test_two_tones_two_points_per_sample():
    n = 4096
    t = np.arange(n)
    w1, w2 = 2 * np.pi * 100 / n, 2 * np.pi * 600 / n
    x = MultivariateSeries(np.vstack([np.cos(w1 * t) + 0.7 * np.cos(w2 * t), np.sin(w1 * t)]))
    g = ScaleGrid.from_cyclic(70, 0.01, 0.3, W33)
    cube = transform(x, W33, g)
    pts = detect_ridge_points(cube)
    brute = _brute_maxima(joint_norm(cube.w))
    for ti in range(0, n, 97):
        assert set(pts.level[pts.at(ti)]) == brute[ti]
    mid = slice(500, n - 500)
    assert np.all(np.bincount(pts.t_index, minlength=n)[mid] == 2)

    curves = ridge_analysis(transform(x, W33, g, derivatives=2))
    assert len(curves) == 2
    for c, w, other in zip(sorted(curves, key=lambda c: -c.freq_estimate.mean()), (w2, w1), (w1, w2)):
        keep = ~c.edge_flag
        # wobble is set by the other tone's leakage through the wavelet at this scale
        leak = W33.evaluate_freq(W33.peak_frequency * other / w) / 2
        assert np.std(c.freq_estimate[keep]) / w < 2 * leak * abs(other - w) / w + 1e-6
        assert abs(np.mean(c.freq_estimate[keep]) / w - 1) < 1e-3


def test_chirp_across_grid_is_one_curve():
    n = 6000
    t = np.arange(n)
    f0, f1 = 0.03, 0.2
    rate = 2 * np.pi * (f1 - f0) / n
    x = MultivariateSeries(np.vstack([np.cos(2 * np.pi * f0 * t + 0.5 * rate * t ** 2),
                                      np.sin(2 * np.pi * f0 * t + 0.5 * rate * t ** 2)]))
    g = ScaleGrid.from_cyclic(60, 0.02, 0.25, W33)
    cube = transform(x, W33, g, derivatives=2)
    curves = ridge_analysis(cube)
    assert len(curves) == 1
    c = curves[0]
    assert c.t_index[0] == 0 and c.t_index[-1] == n - 1
    assert np.all(np.diff(c.t_index) == 1)


def test_min_cycles_default_and_pruning():
    n = 2048
    w, x = _tone(n, 100)
    cube = transform(x, W33, ScaleGrid.from_cyclic(40, 0.01, 0.3, W33), derivatives=1)
    pts = detect_ridge_points(cube)
    total_cycles = ridge_analysis(cube)[0].cycles
    assert ridge_analysis(cube, min_cycles=total_cycles + 1) == []
    # default min_cycles is 2P = 6 cycles for beta = gamma = 3
    short = MultivariateSeries(np.cos(w * np.arange(n)) * (np.abs(np.arange(n) - n / 2) < 40))
    curves = ridge_analysis(transform(short, W33, cube.grid, derivatives=1))
    assert all(c.cycles >= 6 for c in curves)
    assert len(pts) == n


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_chaining_invariants(seed):
    rng = np.random.default_rng(seed)
    x = MultivariateSeries(rng.standard_normal((2, 600)))
    cube = transform(x, W33, ScaleGrid.from_cyclic(30, 0.02, 0.3, W33), derivatives=1)
    bound = default_max_dlogscale(cube)
    pts = detect_ridge_points(cube)
    curves = chain_ridges(pts, bound, 0.0)
    seen = set()
    for c in curves:
        assert np.all(np.diff(c.t_index) == 1)
        assert np.all(np.abs(np.diff(c.log_scale)) <= bound + 1e-12)
        keys = {(int(t), float(u)) for t, u in zip(c.t_index, c.log_scale)}
        assert not keys & seen
        seen |= keys
    assert len(seen) == len(pts)
    # interpolated magnitude dominates the flanking grid levels
    mag = joint_norm(cube.w)
    y = pts.log_magnitude
    assert np.all(y >= np.log(mag[pts.level - 1, pts.t_index]) - 1e-12)
    assert np.all(y >= np.log(mag[pts.level + 1, pts.t_index]) - 1e-12)
    assert np.all((pts.log_scale >= cube.grid.log_scales[0]) & (pts.log_scale <= cube.grid.log_scales[-1]))


def test_pure_oscillation_estimates():
    n = 4096
    w, x = _tone(n, 300, ((1.0, 0.0), (0.5, 1.0)))
    cube = transform(x, W33, ScaleGrid.from_cyclic(80, 0.01, 0.3, W33), derivatives=2)
    (c,) = ridge_analysis(cube)
    keep = ~c.edge_flag
    truth = np.sqrt(1 + 0.25)
    assert np.max(np.abs(joint_norm(c.signal_estimate)[keep] / truth - 1)) <= 5e-3
    assert np.max(np.abs(c.freq_estimate[keep] / w - 1)) <= 1e-3
    bias = joint_norm(c.bias_estimate) / joint_norm(c.signal_estimate)
    assert np.max(bias[keep]) <= 1e-3
    assert ridge_scale_diagnostic(c, np.full(n, w), 0.05) <= 0.5


def test_zero_cube_gives_no_estimate():
    cube = transform(MultivariateSeries(np.zeros((2, 512))), W33, ScaleGrid.from_cyclic(20, 0.02, 0.3, W33),
                     derivatives=2)
    assert ridge_analysis(cube) == []


def _gaussian_chirp(delta, w0=0.5, n=8192):
    t = np.arange(n) - n / 2
    sigma = 2 / (delta * w0)
    rate = (delta * w0) ** 2 / 2
    amp = np.exp(-0.5 * (t / sigma) ** 2)
    phase = w0 * t + 0.5 * rate * t ** 2
    x = MultivariateSeries(np.vstack([amp * np.cos(phase), amp * np.sin(phase)]))
    z = np.vstack([amp * np.exp(1j * phase), -1j * amp * np.exp(1j * phase)])
    return x, z, w0 + rate * t, sigma, rate


def _best_curve(cube):
    curves = ridge_analysis(cube, min_cycles=0)
    return max(curves, key=lambda c: np.sum(c.power))


def test_linear_chirp_frequency_second_order():
    n = 8192
    delta = 0.05
    t = np.arange(n) - n / 2
    w0 = 0.4
    rate = (delta * w0) ** 2
    x = MultivariateSeries(np.cos(w0 * t + 0.5 * rate * t ** 2))
    omega = w0 + rate * t
    g = ScaleGrid.from_radian(160, 0.15, 1.2, W33)
    c = _best_curve(transform(x, W33, g, derivatives=1))
    # inner region where the local delta stays near its nominal value
    keep = (np.abs(t[c.t_index]) < 1500) & ~c.edge_flag
    om = omega[c.t_index][keep]
    local_delta = np.sqrt(rate) / om
    assert np.all(np.abs(c.freq_estimate[keep] - om) / om <= 5 * local_delta ** 2)


def test_amplitude_modulated_tone_frequency_unbiased():
    n = 8192
    t = np.arange(n) - n / 2
    w0 = 0.5
    sigma = 400.0
    amp = np.exp(-0.5 * (t / sigma) ** 2)
    x = MultivariateSeries(amp * np.cos(w0 * t))
    c = _best_curve(transform(x, W33, ScaleGrid.from_radian(120, 0.2, 1.2, W33), derivatives=1))
    keep = np.abs(t[c.t_index]) < sigma
    upsilon = np.abs(t[c.t_index][keep]) / sigma ** 2
    err = np.abs(c.freq_estimate[keep] - w0) / w0
    assert np.all(err <= 0.05 * np.max(upsilon / w0))


def test_phase_signal_bias_matches_curvature_law():
    n = 8192
    t = np.arange(n) - n / 2
    w0, rate = 0.5, 4e-5
    phase = w0 * t + 0.5 * rate * t ** 2
    x = MultivariateSeries(np.vstack([np.cos(phase), np.sin(phase)]))
    cube = transform(x, W33, ScaleGrid.from_radian(160, 0.25, 1.0, W33), derivatives=2)
    c = _best_curve(cube)
    keep = np.abs(t[c.t_index]) < 1500
    om = (w0 + rate * t)[c.t_index][keep]
    predicted = 0.5 * W33.duration ** 2 * rate / om ** 2
    measured = joint_norm(estimate_bias(c, cube))[keep] / joint_norm(estimate_signal(c, cube))[keep]
    np.testing.assert_allclose(measured, predicted, rtol=0.3)


def test_gaussian_envelope_bias_ratio():
    x, z, omega, sigma, rate = _gaussian_chirp(0.08)
    cube = transform(x, W33, ScaleGrid.from_radian(160, 0.2, 1.2, W33), derivatives=2)
    c = _best_curve(cube)
    t = np.arange(x.samples) - x.samples / 2
    keep = (np.abs(t[c.t_index]) <= sigma) & ~c.edge_flag
    truth = z[:, c.t_index]
    err = joint_norm(c.signal_estimate - truth)[keep] / joint_norm(truth)[keep]
    pred = joint_norm(c.bias_estimate)[keep] / joint_norm(c.signal_estimate)[keep]
    ratio = err / pred
    assert np.all((ratio >= 0.5) & (ratio <= 2.0))


def _scale_dev(delta):
    x, z, omega, sigma, rate = _gaussian_chirp(delta)
    g = ScaleGrid.from_radian(200, 0.25, 1.0, W33)
    c = _best_curve(transform(x, W33, g, derivatives=1))
    t = np.arange(x.samples) - x.samples / 2
    sel = np.abs(t[c.t_index]) <= sigma
    curve = replace(c, t_index=c.t_index[sel], log_scale=c.log_scale[sel], level=c.level[sel],
                    edge_flag=c.edge_flag[sel])
    return ridge_scale_diagnostic(curve, omega[curve.t_index], delta)


def test_ridge_scale_diagnostic_bounds_and_scaling():
    lo, hi = _scale_dev(0.05), _scale_dev(0.1)
    assert lo <= 5 and hi <= 5
    slope = math.log((hi * 0.1 ** 2) / (lo * 0.05 ** 2)) / math.log(2)
    assert slope == pytest.approx(2, abs=0.5)


def _curve(t0, values, freq, level=5):
    values = np.atleast_2d(np.asarray(values, dtype=complex))
    n = values.shape[1]
    t = np.arange(t0, t0 + n)
    return RidgeCurve(t, np.full(n, level), np.full(n, float(level)), np.zeros(n, bool), 1.0, 1.0,
                      signal_estimate=values, freq_estimate=np.full(n, freq))


def test_merge_non_overlapping_unchanged():
    a = _curve(0, [[1, 2, 3]], 0.3)
    b = _curve(10, [[4, 5]], 0.5)
    merged = merge_overlaps([a, b])
    assert len(merged) == 2
    for m, c in zip(merged, (a, b)):
        np.testing.assert_array_equal(m.t_index, c.t_index)
        np.testing.assert_array_equal(m.signal_estimate, c.signal_estimate)
        np.testing.assert_array_equal(m.freq_estimate, c.freq_estimate)


def test_merge_duplicate_is_idempotent():
    a = _curve(3, [[1 + 1j, 2, 3j], [0.5, 0.1, 1]], 0.4)
    (m,) = merge_overlaps([a, a])
    np.testing.assert_allclose(m.signal_estimate, a.signal_estimate, rtol=1e-15)
    np.testing.assert_allclose(m.freq_estimate, a.freq_estimate, rtol=1e-15)
    assert m.meta["merged_samples"] == 3


def test_merge_power_weighting():
    a = _curve(0, [[2.0, 2.0]], 0.2, level=4)
    b = _curve(1, [[1.0, 1.0]], 0.7, level=9)
    (m,) = merge_overlaps([a, b])
    np.testing.assert_array_equal(m.t_index, [0, 1, 2])
    np.testing.assert_allclose(m.signal_estimate[0], [2.0, (4 * 2.0 + 1 * 1.0) / 5, 1.0])
    np.testing.assert_allclose(m.freq_estimate, [0.2, (4 * 0.2 + 0.7) / 5, 0.7])
    assert m.meta["merged_samples"] == 1


def test_residual_without_curves_is_input():
    x = MultivariateSeries(np.random.default_rng(0).standard_normal((2, 100)))
    np.testing.assert_array_equal(residual(x, []).data, x.data)


def test_residual_of_noiseless_oscillation():
    n = 4096
    t = np.arange(n)
    w = 0.4
    x = MultivariateSeries(np.vstack([np.cos(w * t + 0.01 * np.sin(0.003 * t)), 0.5 * np.sin(w * t)]))
    cube = transform(x, W33, ScaleGrid.from_radian(80, 0.1, 1.5, W33), derivatives=2)
    r = residual(x, ridge_analysis(cube))
    mid = slice(500, n - 500)
    rms = lambda a: np.sqrt(np.mean(a[:, mid] ** 2))
    assert rms(r.data) <= 0.05 * rms(x.data)


def test_residual_of_noisy_oscillation_is_flat_near_ridge_band():
    n = 8192
    t = np.arange(n)
    rng = np.random.default_rng(11)
    w = 2 * np.pi * 1024 / n
    amp = 1.0
    noise_sd = amp / math.sqrt(2) / math.sqrt(10)  # SNR 10 in power
    noise = noise_sd * rng.standard_normal(n)
    x = MultivariateSeries(amp * np.cos(w * t) + noise)
    cube = transform(x, W33, ScaleGrid.from_radian(80, 0.2, 2.0, W33), derivatives=2)
    r = residual(x, ridge_analysis(cube))
    spec = np.abs(np.fft.rfft(r.data[0])) ** 2 / n
    band = slice(1024 - 30, 1024 + 31)
    # white-noise periodogram level; allow 3 dB above it
    assert np.mean(spec[band]) <= 2 * noise_sd ** 2
    assert np.max(spec[1020:1029]) <= 10 * noise_sd ** 2


def test_estimators_agree_with_evaluate_curve():
    w, x = _tone(2048, 150)
    cube = transform(x, W33, ScaleGrid.from_cyclic(40, 0.01, 0.3, W33), derivatives=2)
    (c,) = ridge_analysis(cube)
    np.testing.assert_array_equal(c.freq_estimate, estimate_frequency(c, cube))
    np.testing.assert_array_equal(c.bias_estimate, estimate_bias(c, cube))


def test_determinism():
    rng = np.random.default_rng(5)
    x = MultivariateSeries(rng.standard_normal((2, 3000)) + np.cos(0.3 * np.arange(3000)))
    g = ScaleGrid.from_cyclic(50, 0.01, 0.3, W33)
    a = ridge_analysis(transform(x, W33, g, derivatives=2))
    b = ridge_analysis(transform(x, W33, g, derivatives=2))
    assert len(a) == len(b)
    for ca, cb in zip(a, b):
        for name in ("t_index", "log_scale", "signal_estimate", "freq_estimate", "bias_estimate"):
            np.testing.assert_array_equal(getattr(ca, name), getattr(cb, name))
