"""Pure-numpy kernels.

Same contract as :mod:`welfare_diff.kernels._jit`. Full-sample index kinds are
evaluated for a whole ``(B, n)`` block of bootstrap replicates at once;
sign-conditional kinds have a data-dependent subsample size and fall back to a
row loop.
"""

import numpy as np

from ._codes import (
    CEIL_SLACK,
    DEGENERATE_MEAN,
    GINI_FAMILY,
    MEAN,
    NORMALIZER,
    OK,
    PAIR_TOL,
    SUBSAMPLE,
    UNDEFINED,
    GINI,
)


def _rows(Y, code, p):
    """Estimates and demeaned IFs for every row of ``Y`` (no masking).

    Returns ``(theta, H, degenerate)`` where ``degenerate`` flags rows whose
    normalizing mean is zero.
    """
    B, n = Y.shape
    mu = Y.mean(axis=1)
    if code == MEAN:
        return mu, Y - mu[:, None], np.zeros(B, dtype=bool)

    kind = NORMALIZER[code]
    if kind == 0:
        nu = mu
        A = Y
    elif kind == 1:
        nu = -mu
        A = -Y
    else:
        A = np.abs(Y)
        nu = A.mean(axis=1)
    bad = nu == 0.0
    nu = np.where(bad, 1.0, nu)

    order = np.argsort(Y, axis=1, kind="stable")
    Ys = np.take_along_axis(Y, order, axis=1)
    if code in GINI_FAMILY:
        r = np.arange(1, n + 1, dtype=np.float64)
        D = ((2.0 * r - 1.0 - n) * Ys).sum(axis=1) / (n * n)
        theta = D / nu
        As = np.take_along_axis(A, order, axis=1)
        cum = np.cumsum(Ys, axis=1)
        Hs = (2.0 * r / n * Ys - 2.0 * cum / n - Ys - theta[:, None] * As) / nu[:, None]
        H = np.empty_like(Hs)
        np.put_along_axis(H, order, Hs, axis=1)
    else:
        k = int(np.ceil(p * n - CEIL_SLACK * n))
        k = min(max(k, 1), n)
        qp = Ys[:, k - 1][:, None]
        below = Y <= qp
        # sum of the k smallest values; equals sum(Y[Y <= qp]) without ties
        theta = Ys[:, :k].sum(axis=1) / n / nu
        H = (np.where(below, Y - qp, 0.0) - A * theta[:, None]) / nu[:, None]
    H = H - H.mean(axis=1, keepdims=True)
    # a constant row has an identically zero IF; drop rounding residue
    H[Ys[:, 0] == Ys[:, -1]] = 0.0
    theta = np.where(bad, np.nan, theta)
    return theta, H, bad


def influence(x, code, p):
    """Plug-in estimate and demeaned empirical IF of one sample.

    Returns ``(theta, psi, mask, status)``; ``psi`` is aligned with ``x`` and
    is zero wherever ``mask`` is False.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    psi = np.zeros(n)
    sign = SUBSAMPLE[code]
    if sign == 0:
        mask = np.ones(n, dtype=bool)
    elif sign > 0:
        mask = x > 0.0
    else:
        mask = x < 0.0
    ns = int(mask.sum())
    if ns < (2 if sign != 0 else 1):
        return np.nan, psi, mask, UNDEFINED
    theta, H, bad = _rows(x[mask][None, :], code, p)
    if bad[0]:
        return np.nan, psi, mask, DEGENERATE_MEAN
    psi[mask] = H[0]
    return float(theta[0]), psi, mask, OK


def _pair_from(psi1, mask1, psi2, mask2, m):
    keep = mask1[:m] & mask2[:m]
    me = int(keep.sum())
    rho = 0.0
    if me >= 2:
        a = psi1[:m][keep]
        b = psi2[:m][keep]
        qa = a @ a
        qb = b @ b
        a = a - a.mean()
        b = b - b.mean()
        saa = a @ a
        sbb = b @ b
        if saa > PAIR_TOL * qa and sbb > PAIR_TOL * qb:
            rho = float(np.clip((a @ b) / np.sqrt(saa * sbb), -1.0, 1.0))
    return rho, me


def delta_stats(x1, x2, m, code, p):
    """Moments needed for the overlapping-samples variance.

    Returns ``(theta1, theta2, s1, s2, rho, m_eff, n1_eff, n2_eff, status)``.
    """
    t1, psi1, mask1, st = influence(x1, code, p)
    if st != OK:
        return np.nan, np.nan, np.nan, np.nan, np.nan, 0, 0, 0, st
    t2, psi2, mask2, st = influence(x2, code, p)
    if st != OK:
        return np.nan, np.nan, np.nan, np.nan, np.nan, 0, 0, 0, st
    n1 = int(mask1.sum())
    n2 = int(mask2.sum())
    s1 = float(psi1 @ psi1) / n1
    s2 = float(psi2 @ psi2) / n2
    rho, me = _pair_from(psi1, mask1, psi2, mask2, m)
    return t1, t2, s1, s2, rho, me, n1, n2, OK


def combine(s1, s2, rho, m, n1, n2):
    """Correlation-form variance of the difference, floored at exact zero."""
    s1 = np.asarray(s1, dtype=np.float64)
    s2 = np.asarray(s2, dtype=np.float64)
    tot = n1 + n2
    base = (n2 * s1 + n1 * s2) / tot
    cov = np.where(np.asarray(m) >= 2, 2.0 * m / tot * rho * np.sqrt(s1 * s2), 0.0)
    val = base - cov
    val = np.where(val <= 1e-12 * base, 0.0, val)
    return float(val) if val.ndim == 0 else val


def _bias_factor(code, bc, n):
    if bc and code == GINI:
        return np.where(n > 1, n / np.maximum(n - 1.0, 1.0), 1.0)
    return 1.0


def boot_single(x, idx, code, p, bc):
    """Bootstrap replicates of one sample.

    ``idx`` is a ``(B, n)`` array of resampling indices. Returns the replicate
    estimates, their standard errors ``sigma*/sqrt(n_eff)`` and a status per
    replicate.
    """
    x = np.asarray(x, dtype=np.float64)
    B, n = idx.shape
    if SUBSAMPLE[code] == 0:
        theta, H, bad = _rows(x[idx], code, p)
        se = np.sqrt((H * H).sum(axis=1) / n / n)
        status = np.where(bad, DEGENERATE_MEAN, OK).astype(np.int64)
        se = np.where(bad, np.nan, se)
        return theta * _bias_factor(code, bc, n), se, status

    theta = np.empty(B)
    se = np.empty(B)
    status = np.zeros(B, dtype=np.int64)
    for b in range(B):
        t, psi, mask, st = influence(x[idx[b]], code, p)
        status[b] = st
        if st != OK:
            theta[b] = se[b] = np.nan
            continue
        ne = mask.sum()
        theta[b] = t
        se[b] = np.sqrt(psi @ psi / ne / ne)
    return theta, se, status


def _corr_rows(A, B_):
    qa = (A * A).sum(axis=1)
    qb = (B_ * B_).sum(axis=1)
    A = A - A.mean(axis=1, keepdims=True)
    B_ = B_ - B_.mean(axis=1, keepdims=True)
    saa = (A * A).sum(axis=1)
    sbb = (B_ * B_).sum(axis=1)
    ok = (saa > PAIR_TOL * qa) & (sbb > PAIR_TOL * qb)
    denom = np.sqrt(np.where(ok, saa * sbb, 1.0))
    return np.where(ok, np.clip((A * B_).sum(axis=1) / denom, -1.0, 1.0), 0.0)


def boot_overlap(x1, x2, m, ipair, it1, it2, code, p, bc):
    """Pair-preserving bootstrap replicates of the index difference.

    Matched pairs (the first ``m`` entries of both samples) are drawn jointly
    via ``ipair``; tails are drawn independently via ``it1``/``it2`` (indices
    relative to the tail). Returns ``(delta*, se*, status)`` with
    ``se* = sigma_delta*/sqrt(N*)``.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    n1 = x1.shape[0]
    n2 = x2.shape[0]
    Y1 = np.concatenate([x1[ipair], x1[m + it1]], axis=1)
    Y2 = np.concatenate([x2[ipair], x2[m + it2]], axis=1)
    B = Y1.shape[0]

    if SUBSAMPLE[code] == 0:
        t1, H1, bad1 = _rows(Y1, code, p)
        t2, H2, bad2 = _rows(Y2, code, p)
        s1 = (H1 * H1).sum(axis=1) / n1
        s2 = (H2 * H2).sum(axis=1) / n2
        rho = _corr_rows(H1[:, :m], H2[:, :m]) if m >= 2 else np.zeros(B)
        v = combine(s1, s2, rho, m, n1, n2)
        big_n = n1 * n2 / (n1 + n2)
        bad = bad1 | bad2
        delta = t1 * _bias_factor(code, bc, n1) - t2 * _bias_factor(code, bc, n2)
        se = np.where(bad, np.nan, np.sqrt(v / big_n))
        status = np.where(bad, DEGENERATE_MEAN, OK).astype(np.int64)
        return np.where(bad, np.nan, delta), se, status

    delta = np.empty(B)
    se = np.empty(B)
    status = np.zeros(B, dtype=np.int64)
    for b in range(B):
        t1, t2, s1, s2, rho, me, e1, e2, st = delta_stats(Y1[b], Y2[b], m, code, p)
        status[b] = st
        if st != OK:
            delta[b] = se[b] = np.nan
            continue
        v = combine(s1, s2, rho, me, e1, e2)
        delta[b] = t1 - t2
        se[b] = np.sqrt(v / (e1 * e2 / (e1 + e2)))
    return delta, se, status
