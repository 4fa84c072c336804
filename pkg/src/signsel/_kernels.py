"""Compiled inner loops for the closed-form sign decisions.

Both sweeps walk subcarriers ``j0 .. j1-1`` and update the unnormalized
prefix ``h`` in place. The tone table ``w`` holds exp(i 2 pi m / LN) for
m = 0 .. LN-1; subcarrier j at sample n uses ``w[(j n) mod LN]``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def srcm_sweep(h, b, w, j0, j1, N, sigma_b, raw, tie_rtol, signs, stats):
    LN = h.shape[0]
    for j in range(j0, j1):
        if raw:
            c = 1.0
        else:
            delta_sq = 0.5 * (1.0 - j / N)
            c = 1.0 / (sigma_b * sigma_b * N * delta_sq)
        bj = b[j]
        aa = bj.real * bj.real + bj.imag * bj.imag
        stat = 0.0
        mass = 0.0
        idx = 0
        for n in range(LN):
            a = bj * w[idx]
            hn = h[n]
            hh = hn.real * hn.real + hn.imag * hn.imag
            u = c * (hh + aa)
            v = 2.0 * c * (hn.real * a.real + hn.imag * a.imag)
            # P(u+v) - P(u-v) for P(l) = l^3 + 18 l^2 + 72 l
            term = 2.0 * v * (3.0 * u * u + v * v + 36.0 * u + 72.0)
            stat += term
            mass += abs(term)
            idx += j
            if idx >= LN:
                idx -= LN
        if abs(stat) <= tie_rtol * mass:
            stat = 0.0
        x = -1 if stat > 0.0 else 1
        signs[j] = x
        stats[j] = stat
        idx = 0
        for n in range(LN):
            h[n] += x * bj * w[idx]
            idx += j
            if idx >= LN:
                idx -= LN


@njit(cache=True)
def se_sweep(h, b, w, j0, j1, N, sigma_b, kappa, singular_tol, tie_rtol, signs, stats,
             ex_p, ex_m):
    """Run the SE rule until ``j1`` or the first index where beta is singular.

    Returns the index the sweep stopped at.
    """
    LN = h.shape[0]
    for j in range(j0, j1):
        delta_sq = 0.5 * (1.0 - j / N)
        denom = 1.0 - 2.0 * kappa * delta_sq
        if abs(denom) < singular_tol:
            return j
        beta = kappa * delta_sq / denom
        c = 1.0 / (sigma_b * sigma_b * N * delta_sq)
        bj = b[j]
        top = -np.inf
        idx = 0
        for n in range(LN):
            a = bj * w[idx]
            p = h[n] + a
            m = h[n] - a
            ep = beta * c * (p.real * p.real + p.imag * p.imag)
            em = beta * c * (m.real * m.real + m.imag * m.imag)
            ex_p[n] = ep
            ex_m[n] = em
            if ep > top:
                top = ep
            if em > top:
                top = em
            idx += j
            if idx >= LN:
                idx -= LN
        stat = 0.0
        mass = 0.0
        for n in range(LN):
            fp = np.exp(ex_p[n] - top)
            fm = np.exp(ex_m[n] - top)
            stat += fp - fm
            mass += fp + fm
        if abs(stat) <= tie_rtol * mass:
            stat = 0.0
        x = -1 if stat > 0.0 else 1
        signs[j] = x
        stats[j] = stat
        idx = 0
        for n in range(LN):
            h[n] += x * bj * w[idx]
            idx += j
            if idx >= LN:
                idx -= LN
    return j1


@njit(cache=True)
def branch_peaks(base, a, peak_p, peak_m):
    """Row-wise max |base + a|^2 and max |base - a|^2."""
    Q, LN = base.shape
    for q in range(Q):
        top_p = 0.0
        top_m = 0.0
        for n in range(LN):
            s = base[q, n]
            pr = s.real + a[n].real
            pi = s.imag + a[n].imag
            mr = s.real - a[n].real
            mi = s.imag - a[n].imag
            vp = pr * pr + pi * pi
            vm = mr * mr + mi * mi
            if vp > top_p:
                top_p = vp
            if vm > top_m:
                top_m = vm
        peak_p[q] = top_p
        peak_m[q] = top_m
