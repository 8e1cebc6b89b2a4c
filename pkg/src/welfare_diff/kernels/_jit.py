"""Numba-compiled kernels.

Loop-based versions of the estimators, their empirical influence functions and
the bootstrap replicate loops. Signatures and return conventions match
:mod:`welfare_diff.kernels._numpy` exactly.
"""

import math

import numpy as np
from numba import njit

from ._codes import (
    CEIL_SLACK,
    DEGENERATE_MEAN,
    GINI,
    GINI_ABS,
    GINI_NEG,
    GINI_POS,
    LORENZ_NEG,
    LORENZ_POS,
    LORENZ_SIGNED,
    MEAN,
    OK,
    PAIR_TOL,
    UNDEFINED,
)


@njit(cache=True)
def _subsample_sign(code):
    if code == GINI_POS or code == LORENZ_POS:
        return 1
    if code == GINI_NEG or code == LORENZ_NEG:
        return -1
    return 0


@njit(cache=True)
def _normalizer_kind(code):
    if code == GINI_NEG:
        return 1
    if code == GINI_ABS or code == LORENZ_SIGNED:
        return 2
    return 0


@njit(cache=True)
def _is_gini(code):
    return code == GINI or code == GINI_POS or code == GINI_NEG or code == GINI_ABS


@njit(cache=True)
def influence(x, code, p):
    """Plug-in estimate and demeaned empirical IF of one sample.

    Returns ``(theta, psi, mask, status)``; ``psi`` is aligned with ``x`` and
    is zero wherever ``mask`` is False.
    """
    n = x.shape[0]
    psi = np.zeros(n)
    sign = _subsample_sign(code)
    mask = np.empty(n, dtype=np.bool_)
    ns = 0
    for i in range(n):
        if sign == 0:
            inside = True
        elif sign > 0:
            inside = x[i] > 0.0
        else:
            inside = x[i] < 0.0
        mask[i] = inside
        if inside:
            ns += 1

    need = 1 if code == MEAN else 2
    if sign == 0:
        need = 1
    if ns < need:
        return np.nan, psi, mask, UNDEFINED

    pos = np.empty(ns, dtype=np.int64)
    j = 0
    for i in range(n):
        if mask[i]:
            pos[j] = i
            j += 1
    y = np.empty(ns)
    for j in range(ns):
        y[j] = x[pos[j]]

    total = 0.0
    abs_total = 0.0
    for j in range(ns):
        total += y[j]
        abs_total += abs(y[j])
    mu = total / ns

    if code == MEAN:
        for j in range(ns):
            psi[pos[j]] = y[j] - mu
        return mu, psi, mask, OK

    norm_kind = _normalizer_kind(code)
    if norm_kind == 0:
        nu = mu
    elif norm_kind == 1:
        nu = -mu
    else:
        nu = abs_total / ns
    if nu == 0.0:
        return np.nan, psi, mask, DEGENERATE_MEAN

    order = np.argsort(y, kind="mergesort")
    h = np.empty(ns)

    if _is_gini(code):
        # D = (1/n^2) sum (2i - 1 - n) y_(i)  (half the mean absolute difference)
        acc = 0.0
        for r in range(ns):
            acc += (2.0 * (r + 1) - 1.0 - ns) * y[order[r]]
        theta = acc / (ns * ns) / nu
        cum = 0.0
        for r in range(ns):
            v = y[order[r]]
            cum += v
            if norm_kind == 0:
                a = v
            elif norm_kind == 1:
                a = -v
            else:
                a = abs(v)
            h[order[r]] = (2.0 * (r + 1) / ns * v - 2.0 * cum / ns - v - theta * a) / nu
    else:
        k = int(math.ceil(p * ns - CEIL_SLACK * ns))
        if k < 1:
            k = 1
        if k > ns:
            k = ns
        qp = y[order[k - 1]]
        # sum of the k smallest values; equals sum(y[y <= qp]) without ties
        num = 0.0
        for r in range(k):
            num += y[order[r]]
        theta = num / ns / nu
        for j in range(ns):
            v = y[j]
            a = abs(v) if norm_kind == 2 else v
            below = v - qp if v <= qp else 0.0
            h[j] = (below - a * theta) / nu

    # a constant subsample has an identically zero IF; skip rounding residue
    if y[order[0]] == y[order[ns - 1]]:
        return theta, psi, mask, OK
    hbar = 0.0
    for j in range(ns):
        hbar += h[j]
    hbar /= ns
    for j in range(ns):
        psi[pos[j]] = h[j] - hbar
    return theta, psi, mask, OK


@njit(cache=True)
def _pair_moments(x1, x2, m, code, p):
    t1, psi1, mask1, st1 = influence(x1, code, p)
    if st1 != OK:
        return np.nan, np.nan, np.nan, np.nan, np.nan, 0, 0, 0, st1
    t2, psi2, mask2, st2 = influence(x2, code, p)
    if st2 != OK:
        return np.nan, np.nan, np.nan, np.nan, np.nan, 0, 0, 0, st2
    n1 = 0
    s1 = 0.0
    for i in range(x1.shape[0]):
        if mask1[i]:
            n1 += 1
            s1 += psi1[i] * psi1[i]
    n2 = 0
    s2 = 0.0
    for i in range(x2.shape[0]):
        if mask2[i]:
            n2 += 1
            s2 += psi2[i] * psi2[i]
    s1 /= n1
    s2 /= n2

    me = 0
    sa = 0.0
    sb = 0.0
    for i in range(m):
        if mask1[i] and mask2[i]:
            me += 1
            sa += psi1[i]
            sb += psi2[i]
    rho = 0.0
    if me >= 2:
        ma = sa / me
        mb = sb / me
        saa = 0.0
        sbb = 0.0
        sab = 0.0
        qa = 0.0
        qb = 0.0
        for i in range(m):
            if mask1[i] and mask2[i]:
                da = psi1[i] - ma
                db = psi2[i] - mb
                saa += da * da
                sbb += db * db
                sab += da * db
                qa += psi1[i] * psi1[i]
                qb += psi2[i] * psi2[i]
        # centered sums at rounding level of the raw sums mean no variation
        if saa > PAIR_TOL * qa and sbb > PAIR_TOL * qb:
            rho = sab / math.sqrt(saa * sbb)
            if rho > 1.0:
                rho = 1.0
            elif rho < -1.0:
                rho = -1.0
    return t1, t2, s1, s2, rho, me, n1, n2, OK


@njit(cache=True)
def combine(s1, s2, rho, m, n1, n2):
    """Correlation-form variance of the difference, floored at exact zero."""
    tot = n1 + n2
    base = (n2 * s1 + n1 * s2) / tot
    if m >= 2:
        val = base - 2.0 * m / tot * rho * math.sqrt(s1 * s2)
    else:
        val = base
    if val <= 1e-12 * base:
        return 0.0
    return val


@njit(cache=True)
def delta_stats(x1, x2, m, code, p):
    """Moments needed for the overlapping-samples variance.

    Returns ``(theta1, theta2, s1, s2, rho, m_eff, n1_eff, n2_eff, status)``.
    """
    return _pair_moments(x1, x2, m, code, p)


@njit(cache=True)
def _bias_factor(code, bc, n):
    if bc and code == GINI and n > 1:
        return n / (n - 1.0)
    return 1.0


@njit(cache=True)
def boot_single(x, idx, code, p, bc):
    """Bootstrap replicates of one sample.

    ``idx`` is a ``(B, n)`` array of resampling indices. Returns the replicate
    estimates, their standard errors ``sigma*/sqrt(n_eff)`` and a status per
    replicate.
    """
    B = idx.shape[0]
    n = idx.shape[1]
    theta = np.empty(B)
    se = np.empty(B)
    status = np.zeros(B, dtype=np.int64)
    xb = np.empty(n)
    for b in range(B):
        for i in range(n):
            xb[i] = x[idx[b, i]]
        t, psi, mask, st = influence(xb, code, p)
        if st != OK:
            theta[b] = np.nan
            se[b] = np.nan
            status[b] = st
            continue
        ne = 0
        s = 0.0
        for i in range(n):
            if mask[i]:
                ne += 1
                s += psi[i] * psi[i]
        theta[b] = t * _bias_factor(code, bc, ne)
        se[b] = math.sqrt(s / ne / ne)
    return theta, se, status


@njit(cache=True)
def boot_overlap(x1, x2, m, ipair, it1, it2, code, p, bc):
    """Pair-preserving bootstrap replicates of the index difference.

    Matched pairs (the first ``m`` entries of both samples) are drawn jointly
    via ``ipair``; tails are drawn independently via ``it1``/``it2`` (indices
    relative to the tail). Returns ``(delta*, se*, status)`` with
    ``se* = sigma_delta*/sqrt(N*)``.
    """
    B = ipair.shape[0]
    n1 = x1.shape[0]
    n2 = x2.shape[0]
    delta = np.empty(B)
    se = np.empty(B)
    status = np.zeros(B, dtype=np.int64)
    y1 = np.empty(n1)
    y2 = np.empty(n2)
    for b in range(B):
        for i in range(m):
            k = ipair[b, i]
            y1[i] = x1[k]
            y2[i] = x2[k]
        for i in range(n1 - m):
            y1[m + i] = x1[m + it1[b, i]]
        for i in range(n2 - m):
            y2[m + i] = x2[m + it2[b, i]]
        t1, t2, s1, s2, rho, me, e1, e2, st = _pair_moments(y1, y2, m, code, p)
        if st != OK:
            delta[b] = np.nan
            se[b] = np.nan
            status[b] = st
            continue
        t1 *= _bias_factor(code, bc, e1)
        t2 *= _bias_factor(code, bc, e2)
        v = combine(s1, s2, rho, me, e1, e2)
        big_n = e1 * e2 / (e1 + e2)
        delta[b] = t1 - t2
        se[b] = math.sqrt(v / big_n)
    return delta, se, status
