"""Pure-NumPy versions of the hot kernels (fallback when the extension is absent).

Both backends expose the same three functions with identical semantics:

``bilinear_sum(P, Q, sign, amp, v)``
    ``out[r] = sum_c exp(i * sign * <P[r], Q[c]>) * amp[r, c] * v[c]``
``phase_sum(phase, amp, v)``
    ``out[r] = sum_c exp(i * phase[r, c]) * amp[r, c] * v[c]``
``min_mean_deviation(rows)``
    ``out[r] = min over complex c of mean_k |rows[r, k] - c|``
"""

from __future__ import annotations

import numpy as np

MAX_ITER = 500
REL_TOL = 1e-14
FLAT_TOL = 1e-12


def bilinear_sum(P, Q, sign, amp, v):
    theta = sign * (np.asarray(P, float) @ np.asarray(Q, float).T)
    return np.einsum("rc,rc,c->r", np.exp(1j * theta), amp, v)


def phase_sum(phase, amp, v):
    return np.einsum("rc,rc,c->r", np.exp(1j * np.asarray(phase, float)), amp, v)


def _lower_median(x):
    m = x.shape[-1]
    return np.partition(x, (m - 1) // 2, axis=-1)[..., (m - 1) // 2]


def min_mean_deviation(rows):
    rows = np.asarray(rows, dtype=complex)
    if rows.ndim != 2:
        raise ValueError("rows must be 2-D")
    R, m = rows.shape
    out = np.empty(R)
    re, im = rows.real, rows.imag
    c = _lower_median(re) + 1j * _lower_median(im)
    spread_re = np.ptp(re, axis=1)
    spread_im = np.ptp(im, axis=1)
    scale = np.maximum(spread_re, spread_im)
    flat = spread_im <= FLAT_TOL * spread_re
    flat |= spread_re <= FLAT_TOL * spread_im
    flat |= scale == 0.0
    out[:] = np.mean(np.abs(rows - c[:, None]), axis=1)
    idx = np.flatnonzero(~flat)
    if idx.size:
        out[idx] = _weiszfeld(rows[idx], c[idx], scale[idx])
    return out


def _weiszfeld(z, c, scale):
    """Vardi-Zhang modified Weiszfeld iteration, vectorized over rows."""
    best = np.mean(np.abs(z - c[:, None]), axis=1)
    active = np.ones(len(c), dtype=bool)
    tiny = 1e-300
    for _ in range(MAX_ITER):
        if not active.any():
            break
        a = np.flatnonzero(active)
        za, ca = z[a], c[a]
        diff = za - ca[:, None]
        d = np.abs(diff)
        at_point = d <= 1e-15 * scale[a][:, None]
        w = np.where(at_point, 0.0, 1.0 / np.where(at_point, 1.0, d))
        sw = w.sum(axis=1)
        T = (w * za).sum(axis=1) / np.maximum(sw, tiny)
        eta = at_point.sum(axis=1).astype(float)
        Rv = (w * diff).sum(axis=1)
        r = np.abs(Rv)
        optimal = (eta > 0) & (r <= eta)
        ratio = np.where(r > 0, eta / np.where(r > 0, r, 1.0), 0.0)
        cn = np.maximum(0.0, 1.0 - ratio) * T + np.minimum(1.0, ratio) * ca
        cn = np.where(optimal | (sw == 0), ca, cn)
        f = np.mean(np.abs(za - cn[:, None]), axis=1)
        best[a] = np.minimum(best[a], f)
        step = np.abs(cn - ca)
        done = optimal | (sw == 0) | (step <= REL_TOL * scale[a])
        c[a] = cn
        active[a[done]] = False
    return best
