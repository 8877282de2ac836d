"""Hot loops of ridge extraction, in numba and pure-numpy flavours.

Both flavours are always importable so they can be compared; the public
dispatchers ``detect_maxima`` and ``chain_points`` pick one according to
``_accel.USE_NUMBA``.
"""
import numpy as np

from . import _accel

_TINY = 1e-300


def _detect_loop(mag, log_scales, floor):
    n_levels, n_times = mag.shape
    count = 0
    for t in range(n_times):
        for j in range(1, n_levels - 1):
            m = mag[j, t]
            if m > floor and m > mag[j - 1, t] and m >= mag[j + 1, t]:
                count += 1
    t_out = np.empty(count, np.int64)
    j_out = np.empty(count, np.int64)
    u_out = np.empty(count, np.float64)
    y_out = np.empty(count, np.float64)
    k = 0
    for t in range(n_times):
        for j in range(1, n_levels - 1):
            m = mag[j, t]
            if m > floor and m > mag[j - 1, t] and m >= mag[j + 1, t]:
                u0 = log_scales[j - 1]
                u1 = log_scales[j]
                u2 = log_scales[j + 1]
                y0 = np.log(max(mag[j - 1, t], _TINY))
                y1 = np.log(m)
                y2 = np.log(max(mag[j + 1, t], _TINY))
                d01 = (y1 - y0) / (u1 - u0)
                d12 = (y2 - y1) / (u2 - u1)
                curv = (d12 - d01) / (u2 - u0)
                if curv < 0:
                    u = 0.5 * (u0 + u1) - d01 / (2.0 * curv)
                    lo = min(u0, u2)
                    hi = max(u0, u2)
                    u = min(max(u, lo), hi)
                    y = y0 + d01 * (u - u0) + curv * (u - u0) * (u - u1)
                else:
                    u = u1
                    y = y1
                t_out[k] = t
                j_out[k] = j
                u_out[k] = u
                y_out[k] = y
                k += 1
    return t_out, j_out, u_out, y_out


def detect_maxima_numpy(mag, log_scales, floor):
    """Vectorized scale-maxima search with parabolic vertex refinement.

    Returns ``(t, j, u, y)``: time index, level of the discrete maximum, the
    refined log-scale and log-magnitude at the parabola vertex, ordered by
    time then level.
    """
    centre = mag[1:-1]
    mask = (centre > floor) & (centre > mag[:-2]) & (centre >= mag[2:])
    t, j = np.nonzero(mask.T)
    j = j + 1
    u0, u1, u2 = log_scales[j - 1], log_scales[j], log_scales[j + 1]
    y0 = np.log(np.maximum(mag[j - 1, t], _TINY))
    y1 = np.log(mag[j, t])
    y2 = np.log(np.maximum(mag[j + 1, t], _TINY))
    d01 = (y1 - y0) / (u1 - u0)
    d12 = (y2 - y1) / (u2 - u1)
    curv = (d12 - d01) / (u2 - u0)
    concave = curv < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = 0.5 * (u0 + u1) - d01 / (2.0 * curv)
    vertex = np.minimum(np.maximum(vertex, np.minimum(u0, u2)), np.maximum(u0, u2))
    u = np.where(concave, vertex, u1)
    y = np.where(concave, y0 + d01 * (u - u0) + curv * (u - u0) * (u - u1), y1)
    return t.astype(np.int64), j.astype(np.int64), u, y


def _chain_loop(t, u, y, bound):
    n = t.size
    ids = np.full(n, -1, np.int64)
    next_id = 0
    prev_lo = 0
    prev_hi = 0
    prev_t = -2
    i = 0
    while i < n:
        cur_t = t[i]
        lo = i
        while i < n and t[i] == cur_t:
            i += 1
        hi = i
        if prev_t == cur_t - 1:
            n_prev = prev_hi - prev_lo
            n_cur = hi - lo
            used_prev = np.zeros(n_prev, np.bool_)
            used_cur = np.zeros(n_cur, np.bool_)
            while True:
                best_a = -1
                best_b = -1
                best_d = np.inf
                best_y = -np.inf
                for a in range(n_prev):
                    if used_prev[a]:
                        continue
                    for b in range(n_cur):
                        if used_cur[b]:
                            continue
                        d = abs(u[lo + b] - u[prev_lo + a])
                        if d > bound:
                            continue
                        yb = y[lo + b]
                        if d < best_d or (d == best_d and yb > best_y):
                            best_d = d
                            best_y = yb
                            best_a = a
                            best_b = b
                if best_a < 0:
                    break
                used_prev[best_a] = True
                used_cur[best_b] = True
                ids[lo + best_b] = ids[prev_lo + best_a]
        for b in range(lo, hi):
            if ids[b] < 0:
                ids[b] = next_id
                next_id += 1
        prev_lo = lo
        prev_hi = hi
        prev_t = cur_t
    return ids


chain_points_python = _chain_loop

if _accel.HAVE_NUMBA:
    detect_maxima_numba = _accel.jit(_detect_loop)
    chain_points_numba = _accel.jit(_chain_loop)
else:  # pragma: no cover
    detect_maxima_numba = None
    chain_points_numba = None


def detect_maxima(mag, log_scales, floor):
    mag = np.ascontiguousarray(mag, dtype=np.float64)
    log_scales = np.ascontiguousarray(log_scales, dtype=np.float64)
    if _accel.USE_NUMBA:
        return detect_maxima_numba(mag, log_scales, float(floor))
    return detect_maxima_numpy(mag, log_scales, float(floor))


def chain_points(t, u, y, bound):
    """Greedy nearest-in-log-scale linking of ridge points between samples.

    Points must be sorted by time. Returns a curve id per point; ties in the
    log-scale jump go to the larger magnitude.
    """
    t = np.ascontiguousarray(t, dtype=np.int64)
    u = np.ascontiguousarray(u, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if _accel.USE_NUMBA:
        return chain_points_numba(t, u, y, float(bound))
    return chain_points_python(t, u, y, float(bound))
