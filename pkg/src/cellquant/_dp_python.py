"""Pure numpy fallback for the dynamic-programming kernel.

Mirrors ``_dpcore.pyx`` operation for operation: same cost formula, same
left-to-right scan and the same tie rule (smallest predecessor wins).
"""

import numpy as np

KIND_ZERO, KIND_ENTROPY, KIND_LINEAR, KIND_POWER = 0, 1, 2, 3


def _hb(c):
    out = np.zeros_like(c)
    inner = (c > 0.0) & (c < 1.0)
    ci = c[inner]
    out[inner] = -ci * np.log2(ci) - (1.0 - ci) * np.log2(1.0 - ci)
    return out


def _penalty(kind, a, b, w):
    if kind == KIND_ZERO:
        return np.zeros_like(w)
    if kind == KIND_ENTROPY:
        out = np.zeros_like(w)
        pos = w > 0.0
        out[pos] = -a * w[pos] * np.log2(w[pos])
        return out
    if kind == KIND_LINEAR:
        return a * w
    return a * np.power(w, b)


def interval_costs(s0, s1, sh, starts, end, beta, kind, a, b):
    """Cost of intervals ``[starts, end)`` for one cell."""
    w = s0[end] - s0[starts]
    x = s1[end] - s1[starts]
    h = sh[end] - sh[starts]
    pos = w > 0.0
    c = np.zeros_like(w)
    c[pos] = x[pos] / w[pos]
    np.clip(c, 0.0, 1.0, out=c)
    d = np.where(pos, np.maximum(w * _hb(c) - h, 0.0), 0.0)
    return beta * d + _penalty(kind, a, b, np.clip(w, 0.0, 1.0))


def dp_solve(s0, s1, sh, beta, kinds, pa, pb):
    """Minimize the summed interval cost over monotone boundary sequences.

    Returns ``(best_cost, boundaries)`` with ``boundaries`` of length N + 1.
    """
    s0 = np.asarray(s0, dtype=np.float64)
    s1 = np.asarray(s1, dtype=np.float64)
    sh = np.asarray(sh, dtype=np.float64)
    m = s0.size - 1
    n_cells = len(kinds)
    prev = np.full(m + 1, np.inf)
    prev[0] = 0.0
    arg = np.zeros((n_cells, m + 1), dtype=np.int64)
    for n in range(n_cells):
        cur = np.empty(m + 1)
        for j in range(m + 1):
            starts = np.arange(j + 1)
            tot = prev[: j + 1] + interval_costs(s0, s1, sh, starts, j, beta,
                                                 int(kinds[n]), float(pa[n]), float(pb[n]))
            k = int(np.argmin(tot))
            cur[j] = tot[k]
            arg[n, j] = k
        prev = cur
    bounds = np.zeros(n_cells + 1, dtype=np.int64)
    bounds[n_cells] = m
    for n in range(n_cells - 1, -1, -1):
        bounds[n] = arg[n, bounds[n + 1]]
    return float(prev[m]), bounds
