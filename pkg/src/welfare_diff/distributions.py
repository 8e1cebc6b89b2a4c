"""Singh-Maddala distribution, standard normal primitives and copula sampling."""

from dataclasses import dataclass

import numpy as np
from scipy import special


@dataclass(frozen=True)
class SinghMaddala:
    """Singh-Maddala (Burr XII) distribution.

    ``F(x) = 1 - (1 + (x/b)**a)**(-q)`` for ``x >= 0``.

    Attributes:
        b: Scale parameter, positive.
        a: First shape parameter, positive.
        q: Second shape parameter with ``q > 1/a`` so the mean is finite.
    """

    b: float
    a: float
    q: float

    def __post_init__(self):
        if not (self.b > 0 and self.a > 0 and self.q > 0):
            raise ValueError(f"invalid Singh-Maddala parameters {self}")
        if self.a * self.q <= 1:
            raise ValueError(f"need q > 1/a for a finite mean, got {self}")

    @property
    def beta(self):
        """Stability (upper-tail) index ``a*q``."""
        return self.a * self.q

    def cdf(self, x):
        return sm_cdf(self, x)

    def sf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return (1.0 + (np.maximum(x, 0.0) / self.b) ** self.a) ** (-self.q)

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = (np.maximum(x, 0.0) / self.b) ** self.a
        with np.errstate(divide="ignore", invalid="ignore"):
            d = self.a * self.q * y / np.where(x > 0, x, 1.0) * (1.0 + y) ** (-self.q - 1.0)
        return np.where(x > 0, d, 0.0)

    def quantile(self, p):
        return sm_quantile(self, p)

    def quantile_sf(self, s):
        """Quantile in terms of the survival probability ``s = 1 - p``.

        Accurate deep in the upper tail where ``1 - p`` would round to zero.
        """
        s = np.asarray(s, dtype=np.float64)
        # (1-p)^(-1/q) - 1 via expm1 keeps precision for small p
        inner = np.expm1(-np.log(s) / self.q)
        return self.b * inner ** (1.0 / self.a)

    def moment(self, k):
        """Raw moment ``E[X**k]``; infinite when ``k >= a*q``."""
        if k >= self.beta:
            return np.inf
        return self.b**k * self.q * special.beta(1.0 + k / self.a, self.q - k / self.a)

    @property
    def mean(self):
        return self.moment(1.0)

    @property
    def var(self):
        return self.moment(2.0) - self.mean**2

    def partial_mean(self, x):
        """``E[X * 1(X <= x)]``."""
        x = np.asarray(x, dtype=np.float64)
        y = (np.maximum(x, 0.0) / self.b) ** self.a
        t = np.where(np.isinf(y), 1.0, y / (1.0 + y))
        return self.mean * special.betainc(1.0 + 1.0 / self.a, self.q - 1.0 / self.a, t)

    @property
    def gini(self):
        """Closed-form Gini index."""
        a, q = self.a, self.q
        lg = special.gammaln
        return 1.0 - np.exp(lg(q) + lg(2 * q - 1 / a) - lg(q - 1 / a) - lg(2 * q))

    def lorenz(self, p):
        """Population Lorenz ordinate ``L(p)``."""
        return self.partial_mean(self.quantile(p)) / self.mean

    def rvs(self, size, rng):
        """Draw ``size`` values using the given ``numpy.random.Generator``."""
        return self.quantile_sf(1.0 - rng.random(size))


@dataclass(frozen=True)
class GaussianCopula:
    """Gaussian copula with correlation ``rho`` in ``[-1, 1]``."""

    rho: float

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"copula correlation must lie in [-1, 1], got {self.rho}")

    def normals(self, m, rng):
        """``(m, 2)`` bivariate standard normals with correlation ``rho``."""
        z = rng.standard_normal((m, 2))
        c = np.sqrt(max(0.0, 1.0 - self.rho * self.rho))
        z[:, 1] = self.rho * z[:, 0] + c * z[:, 1]
        return z


def sm_cdf(dist, x):
    """CDF of a Singh-Maddala distribution (zero for ``x <= 0``)."""
    x = np.asarray(x, dtype=np.float64)
    y = (np.maximum(x, 0.0) / dist.b) ** dist.a
    out = -np.expm1(-dist.q * np.log1p(y))
    return float(out) if out.ndim == 0 else out


def sm_quantile(dist, p):
    """Quantile function ``b * ((1-p)**(-1/q) - 1)**(1/a)``.

    Raises:
        ValueError: if ``p`` lies outside ``[0, 1)``; ``p = 1`` is an unbounded
            quantile.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(p >= 1.0):
        raise ValueError("unbounded quantile: p must be < 1")
    if np.any(p < 0.0) or np.any(np.isnan(p)):
        raise ValueError("quantile probability must lie in [0, 1)")
    inner = np.expm1(-np.log1p(-p) / dist.q)
    out = dist.b * inner ** (1.0 / dist.a)
    return float(out) if out.ndim == 0 else out


def normal_cdf(z):
    """Standard normal CDF via the complementary error function."""
    z = np.asarray(z, dtype=np.float64)
    out = 0.5 * special.erfc(-z / np.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def normal_pdf(z):
    z = np.asarray(z, dtype=np.float64)
    return np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)


# Acklam's rational approximation coefficients
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p):
    q = np.minimum(p, 1.0 - p)
    out = np.empty_like(p)
    central = q >= _P_LOW
    r = p[central] - 0.5
    s = r * r
    num = (((((_A[0] * s + _A[1]) * s + _A[2]) * s + _A[3]) * s + _A[4]) * s + _A[5]) * r
    den = ((((_B[0] * s + _B[1]) * s + _B[2]) * s + _B[3]) * s + _B[4]) * s + 1.0
    out[central] = num / den
    tail = ~central
    t = np.sqrt(-2.0 * np.log(q[tail]))
    num = ((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5]
    den = (((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0
    out[tail] = np.where(p[tail] < 0.5, num / den, -num / den)
    return out


def normal_quantile(p):
    """Standard normal quantile.

    Rational approximation followed by one Halley refinement step; absolute
    error is at the level of double rounding.

    Raises:
        ValueError: if any ``p`` lies outside the open interval ``(0, 1)``.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise ValueError("normal_quantile requires 0 < p < 1")
    x = _acklam(np.atleast_1d(p))
    # Halley step on the tail that is numerically better resolved
    upper = np.atleast_1d(p) > 0.5
    e = np.where(upper, normal_cdf(-x) - (1.0 - np.atleast_1d(p)), normal_cdf(x) - np.atleast_1d(p))
    e = np.where(upper, -e, e)
    u = e * np.sqrt(2.0 * np.pi) * np.exp(0.5 * x * x)
    x = x - u / (1.0 + 0.5 * x * u)
    return float(x[0]) if p.ndim == 0 else x.reshape(p.shape)


def sample_paired(dist1, dist2, copula, m, rng):
    """Draw ``m`` dependent pairs through a Gaussian copula.

    Each pair is ``(Q1(Phi(Z1)), Q2(Phi(Z2)))`` with ``corr(Z1, Z2) = rho``.
    Quantiles are evaluated from the survival probability ``Phi(-Z)`` so the
    upper tail is not truncated by rounding.

    Args:
        dist1, dist2: Marginal distributions.
        copula: Gaussian copula.
        m: Number of pairs.
        rng: ``numpy.random.Generator``; consumed.

    Returns:
        ``(m, 2)`` array.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    z = copula.normals(m, rng)
    out = np.empty((m, 2))
    out[:, 0] = dist1.quantile_sf(normal_cdf(-z[:, 0]))
    out[:, 1] = dist2.quantile_sf(normal_cdf(-z[:, 1]))
    return out
