# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loop: low-k welfare ascent on wireless utilities.

Mirrors the pure-Python loop operation for operation (same accumulation
orders, same libm calls) so both backends produce bit-identical traces.
Compiled with -ffp-contract=off to keep every multiply/add individually
rounded, matching Python float semantics.
"""

import numpy as np

from libc.math cimport exp, log, log1p, pow, sqrt, isfinite


def run_lowk_box(const double[:, ::1] gains, const double[::1] noise,
                 int qos_id, double qos_param, int k,
                 const double[::1] lower, const double[::1] upper,
                 const double[::1] theta0, const double[::1] gammas, int horizon,
                 double[:, ::1] out_thetas, double[::1] out_welfare,
                 double[:, ::1] out_weights, double[::1] out_gnorms):
    """Run the full ascent loop, filling the per-iteration output arrays.

    qos_id: 0 = log, 1 = -x^-alpha (alpha in qos_param), 2 = log1p, 3 = id.
    Returns -1 on success, or the iteration index at which a utility came
    out non-finite.
    """
    cdef int n = gains.shape[0]
    cdef double[::1] theta = np.empty(n)
    cdef double[::1] es = np.empty(n)
    cdef double[::1] den = np.empty(n)
    cdef double[::1] r = np.empty(n)
    cdef double[::1] u = np.empty(n)
    cdef double[::1] g = np.empty(n)
    cdef long[::1] perm = np.empty(n, dtype=np.int64)
    cdef int t, i, j, l, kk, key_idx
    cdef double acc, val, wsel, c, gt, x, key, gam

    for j in range(n):
        theta[j] = theta0[j]
    wsel = 1.0 / k

    for t in range(horizon):
        for j in range(n):
            es[j] = exp(theta[j])
        for kk in range(n):
            acc = 0.0
            for l in range(n):
                if l != kk:
                    acc += gains[kk, l] * es[l]
            den[kk] = acc + noise[kk]
            r[kk] = gains[kk, kk] * es[kk] / den[kk]
            if qos_id == 0:
                u[kk] = log(r[kk])
            elif qos_id == 1:
                u[kk] = -pow(r[kk], -qos_param)
            elif qos_id == 2:
                u[kk] = log1p(r[kk])
            else:
                u[kk] = r[kk]
            if not isfinite(u[kk]):
                return t

        # Stable insertion sort: ascending utilities, ties by agent index.
        for i in range(n):
            perm[i] = i
        for i in range(1, n):
            key_idx = perm[i]
            key = u[key_idx]
            j = i - 1
            while j >= 0 and u[perm[j]] > key:
                perm[j + 1] = perm[j]
                j -= 1
            perm[j + 1] = key_idx

        acc = 0.0
        for i in range(k):
            acc += u[perm[i]]
        val = acc / k

        for i in range(n):
            out_weights[t, i] = 0.0
        for i in range(k):
            out_weights[t, perm[i]] = wsel

        for j in range(n):
            g[j] = 0.0
        # Ascending agent index over the selected set, matching the
        # pure-Python accumulation order.
        for i in range(n):
            if out_weights[t, i] > 0.0:
                if qos_id == 0:
                    c = 1.0
                elif qos_id == 1:
                    c = qos_param * pow(r[i], -qos_param)
                elif qos_id == 2:
                    c = r[i] / (1.0 + r[i])
                else:
                    c = r[i]
                for j in range(n):
                    if j == i:
                        gt = c
                    else:
                        gt = -(c * gains[i, j] * es[j] / den[i])
                    g[j] += wsel * gt

        acc = 0.0
        for j in range(n):
            acc += g[j] * g[j]

        for j in range(n):
            out_thetas[t, j] = theta[j]
        out_welfare[t] = val
        out_gnorms[t] = sqrt(acc)

        gam = gammas[t]
        for j in range(n):
            x = theta[j] + gam * g[j]
            if x < lower[j]:
                x = lower[j]
            elif x > upper[j]:
                x = upper[j]
            theta[j] = x

    return -1
