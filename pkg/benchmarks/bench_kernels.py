"""Compare the numba and numpy ridge kernels on a float-like record.

Usage: python3 benchmarks/bench_kernels.py [--samples N] [--repeat R]
"""
import argparse
import time

import numpy as np

from mvridge import PipelineConfig, float_like_trajectory, joint_norm, transform
from mvridge import _kernels


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = func()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=10000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    series, _ = float_like_trajectory(seed=0, samples=args.samples)
    cfg = PipelineConfig.preset("float")
    cube = transform(series, cfg.wavelet, cfg.grid(series.dt), derivatives=0)
    mag = joint_norm(cube.w)
    log_scales = cube.grid.log_scales
    floor = 1e-3 * mag.max()
    t, _, u, y = _kernels.detect_maxima_numpy(mag, log_scales, floor)
    bound = 2 * abs(cube.grid.log_spacing)

    # warm up the compiled kernels so compile time is reported separately
    t0 = time.perf_counter()
    _kernels.detect_maxima_numba(mag, log_scales, floor)
    _kernels.chain_points_numba(t, u, y, bound)
    compile_time = time.perf_counter() - t0

    rows = [
        ("detect_maxima", lambda: _kernels.detect_maxima_numba(mag, log_scales, floor),
         lambda: _kernels.detect_maxima_numpy(mag, log_scales, floor)),
        ("chain_points", lambda: _kernels.chain_points_numba(t, u, y, bound),
         lambda: _kernels.chain_points_python(t, u, y, bound)),
    ]
    print(f"cube {mag.shape[0]} levels x {mag.shape[1]} samples, {t.size} ridge points")
    print(f"numba first-call (compile or cache load): {compile_time:.3f} s")
    print(f"{'kernel':<15}{'numba [ms]':>12}{'fallback [ms]':>15}{'speedup':>10}")
    for name, fast, slow in rows:
        tf, a = best_of(fast, args.repeat)
        ts, b = best_of(slow, args.repeat)
        pairs = zip(a, b) if isinstance(a, tuple) else [(a, b)]
        assert all(np.allclose(x, z) for x, z in pairs), f"{name}: flavours disagree"
        print(f"{name:<15}{1e3 * tf:>12.2f}{1e3 * ts:>15.2f}{ts / tf:>10.1f}")


if __name__ == "__main__":
    main()
