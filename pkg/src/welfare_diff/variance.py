"""Variance of index differences between two overlapping samples.

Two samples overlap when their first ``m`` observations are matched pairs and
the remaining observations are independent. The variance of
``theta1_hat - theta2_hat`` then combines the two per-sample IF variances with
a covariance term driven by the matched pairs only.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .indices import IndexKind, as_sample, check_domain, raise_status

__all__ = [
    "DeltaVarianceReport",
    "PairedDataset",
    "delta_variance",
    "delta_variance_matrix",
    "delta_variance_naive",
    "sample_variance_of_if",
]


@dataclass(frozen=True, eq=False)
class PairedDataset:
    """Two samples whose first ``m`` observations are matched pairs.

    Attributes:
        pairs: ``(m, 2)`` array of matched observations.
        tail1: Unmatched observations of sample 1.
        tail2: Unmatched observations of sample 2.
    """

    pairs: np.ndarray
    tail1: np.ndarray
    tail2: np.ndarray

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "tail1", as_sample(self.tail1, "tail1"))
        object.__setattr__(self, "tail2", as_sample(self.tail2, "tail2"))
        if not np.all(np.isfinite(pairs)):
            raise ValueError("pairs contain non-finite values")
        if self.n1 < 2 or self.n2 < 2:
            raise ValueError(f"each sample needs at least 2 observations, got n1={self.n1}, n2={self.n2}")
        for name in ("pairs", "tail1", "tail2"):
            getattr(self, name).setflags(write=False)

    @classmethod
    def from_samples(cls, x1, x2, m):
        """Split two samples whose first ``m`` entries are pairs."""
        x1 = as_sample(x1, "x1")
        x2 = as_sample(x2, "x2")
        if not 0 <= m <= min(x1.size, x2.size):
            raise ValueError(f"m={m} must lie in [0, min(n1, n2)]")
        return cls(np.column_stack([x1[:m], x2[:m]]), x1[m:], x2[m:])

    @property
    def m(self):
        return self.pairs.shape[0]

    @property
    def n1(self):
        return self.m + self.tail1.size

    @property
    def n2(self):
        return self.m + self.tail2.size

    @property
    def N(self):
        return self.n1 * self.n2 / (self.n1 + self.n2)

    @property
    def x1(self):
        return np.concatenate([self.pairs[:, 0], self.tail1])

    @property
    def x2(self):
        return np.concatenate([self.pairs[:, 1], self.tail2])

    def without_pairs(self):
        """Same observations with the pairing forgotten (``m = 0``)."""
        return PairedDataset(np.empty((0, 2)), self.x1, self.x2)

    def __eq__(self, other):
        if not isinstance(other, PairedDataset):
            return NotImplemented
        return (
            np.array_equal(self.pairs, other.pairs)
            and np.array_equal(self.tail1, other.tail1)
            and np.array_equal(self.tail2, other.tail2)
        )

    def __repr__(self):
        return f"PairedDataset(m={self.m}, n1={self.n1}, n2={self.n2})"


@dataclass(frozen=True)
class DeltaVarianceReport:
    """Components of the variance of an index difference.

    For sign-conditional kinds ``n1``, ``n2`` and ``m`` are the effective
    counts (observations in the subsample; pairs with both members in it).
    ``sigma_delta_sq`` is the asymptotic variance of ``sqrt(N) * delta``, so
    the standard error of ``delta`` is ``sqrt(sigma_delta_sq / N)``.
    """

    theta1: float | np.ndarray
    theta2: float | np.ndarray
    sigma1_sq: float | np.ndarray
    sigma2_sq: float | np.ndarray
    rho_hat: float | np.ndarray
    m: int
    n1: int
    n2: int
    sigma_delta_sq: float | np.ndarray

    @property
    def N(self):
        return self.n1 * self.n2 / (self.n1 + self.n2)

    @property
    def delta(self):
        return self.theta1 - self.theta2

    @property
    def se(self):
        """Standard error of the difference (scalar kinds)."""
        return float(np.sqrt(self.sigma_delta_sq / self.N))


def sample_variance_of_if(sample, kind):
    """Plug-in asymptotic variance ``mean(psi**2)`` of an index.

    Uses divisor ``n`` (``n_eff`` for sign-conditional kinds). For a Lorenz
    vector the covariance matrix of the IF columns is returned.
    """
    from .indices import influence

    iv = influence(sample, kind)
    if kind.is_vector:
        psi = iv.values
        return psi.T @ psi / psi.shape[0]
    v = iv.in_domain
    return float(v @ v / v.size)


def _check(data, kind):
    check_domain(data.x1, kind)
    check_domain(data.x2, kind)


def _bias(kind, n):
    return n / (n - 1) if kind.bias_corrected else 1.0


def delta_variance(data, kind):
    """Correlation-form variance of ``theta1_hat - theta2_hat``.

    ``(n2*s1 + n1*s2)/(n1+n2) - 2m/(n1+n2) * rho * sqrt(s1*s2)``, with ``rho``
    the correlation of full-sample IF values across matched pairs. The result
    is nonnegative by construction; values within rounding of zero are set to
    exactly zero. With fewer than two usable pairs the covariance term is 0.

    Lorenz vectors are delegated to :func:`delta_variance_matrix`.

    Returns:
        DeltaVarianceReport
    """
    if kind.is_vector:
        return delta_variance_matrix(data, kind.ps)
    _check(data, kind)
    x1, x2 = data.x1, data.x2
    t1, t2, s1, s2, rho, me, e1, e2, st = kernels.delta_stats(x1, x2, data.m, kind.code, kind.lorenz_p)
    raise_status(st, kind)
    v = kernels.combine(s1, s2, rho, me, e1, e2)
    return DeltaVarianceReport(
        theta1=float(t1) * _bias(kind, e1),
        theta2=float(t2) * _bias(kind, e2),
        sigma1_sq=float(s1),
        sigma2_sq=float(s2),
        rho_hat=float(rho),
        m=int(me),
        n1=int(e1),
        n2=int(e2),
        sigma_delta_sq=float(v),
    )


def delta_variance_naive(data, kind):
    """Covariance-form variance with IFs refit on the matched subsample.

    ``w1*s1 + w2*s2 - 2m/(n1+n2) * cov12`` where ``cov12`` is the covariance of
    IFs computed on the ``m`` matched observations alone. Not guaranteed to be
    nonnegative; provided for diagnostics only.
    """
    rep = delta_variance(data, kind)
    n1, n2 = rep.n1, rep.n2
    base = (n2 * rep.sigma1_sq + n1 * rep.sigma2_sq) / (n1 + n2)
    if data.m < 2:
        return base
    p1 = data.pairs[:, 0].copy()
    p2 = data.pairs[:, 1].copy()
    r1 = kernels.influence(p1, kind.code, kind.lorenz_p)
    r2 = kernels.influence(p2, kind.code, kind.lorenz_p)
    if r1[3] != 0 or r2[3] != 0:
        return base
    keep = r1[2] & r2[2]
    me = int(keep.sum())
    if me < 2:
        return base
    cov = float(r1[1][keep] @ r2[1][keep]) / me
    return base - 2.0 * me / (n1 + n2) * cov


def _psd_sqrt(S, inverse=False):
    w, V = np.linalg.eigh((S + S.T) / 2)
    tol = max(w.max(initial=0.0), 0.0) * S.shape[0] * 1e-12
    keep = w > tol
    r = np.zeros_like(w)
    r[keep] = 1.0 / np.sqrt(w[keep]) if inverse else np.sqrt(w[keep])
    return (V * r) @ V.T


def delta_variance_matrix(data, ps, form="canonical"):
    """Covariance matrix of a vector of Lorenz-ordinate differences.

    ``w1*S1 + w2*S2 - m/(n1+n2) * (C + C.T)`` with ``Sk`` the IF covariance of
    sample ``k`` and ``C`` a cross term built from the matched pairs.

    Args:
        data: PairedDataset.
        ps: Strictly increasing ordinates in ``(0, 1)``.
        form: ``"canonical"`` (default) uses
            ``C = S1^(1/2) K S2^(1/2)`` with ``K`` the whitened cross
            covariance of the pair IFs, which is always positive
            semidefinite. ``"diagonal"`` uses ``C = D1^(1/2) R D2^(1/2)`` with
            ``Dk = diag(Sk)`` and ``R`` the pair cross-correlation matrix;
            it reduces to the same scalar formula but can lose
            semidefiniteness when ordinates are strongly correlated.

    Returns:
        DeltaVarianceReport with matrix-valued fields; ``rho_hat`` is the
        cross-correlation matrix of the pair IF columns.
    """
    kind = IndexKind.lorenz_vector(ps)
    _check(data, kind)
    from .indices import lorenz_vector_influence

    P1 = lorenz_vector_influence(data.x1, kind.ps)
    P2 = lorenz_vector_influence(data.x2, kind.ps)
    n1, n2, m = data.n1, data.n2, data.m
    S1 = P1.T @ P1 / n1
    S2 = P2.T @ P2 / n2
    tot = n1 + n2
    sig = (n2 * S1 + n1 * S2) / tot
    s = len(kind.ps)
    R = np.zeros((s, s))
    if m >= 2:
        A = P1[:m] - P1[:m].mean(axis=0)
        B = P2[:m] - P2[:m].mean(axis=0)
        Saa = A.T @ A / m
        Sbb = B.T @ B / m
        Sab = A.T @ B / m
        da = np.sqrt(np.diag(Saa))
        db = np.sqrt(np.diag(Sbb))
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(np.outer(da, db) > 0, Sab / np.outer(da, db), 0.0)
        if form == "canonical":
            K = _psd_sqrt(Saa, inverse=True) @ Sab @ _psd_sqrt(Sbb, inverse=True)
            C = _psd_sqrt(S1) @ K @ _psd_sqrt(S2)
        elif form == "diagonal":
            C = np.sqrt(np.diag(S1))[:, None] * R * np.sqrt(np.diag(S2))[None, :]
        else:
            raise ValueError(f"unknown form {form!r}")
        sig = sig - m / tot * (C + C.T)
    t1 = np.array([kernels.influence(data.x1, k.code, k.p)[0] for k in kind.scalar_kinds()])
    t2 = np.array([kernels.influence(data.x2, k.code, k.p)[0] for k in kind.scalar_kinds()])
    return DeltaVarianceReport(t1, t2, S1, S2, R, m, n1, n2, sig)
