"""Population index values and influence functions of known distributions.

Functionals are evaluated by adaptive quadrature on the quantile
representation, e.g. ``mean = int_0^1 Q(u) du`` and
``Gini = (1/mean) int_0^1 (2u - 1) Q(u) du``. The algebraic singularity of
``Q`` at ``u = 1`` is handled with an ``(1-u)**(-1/beta)`` quadrature weight.
Closed forms on :class:`~welfare_diff.distributions.SinghMaddala` serve as
cross-checks.
"""

from functools import lru_cache

import numpy as np
from scipy import integrate

__all__ = ["population_index", "true_influence"]


def _int_q(dist, g, lo=0.0, hi=1.0):
    """``int_lo^hi g(u) Q(u) du`` for a Singh-Maddala quantile ``Q``."""
    w = -1.0 / dist.beta

    if hi < 1.0:
        val, _ = integrate.quad(lambda u: g(u) * dist.quantile(u), lo, hi, limit=200, epsabs=0, epsrel=1e-12)
        return val

    def smooth(u):
        # Q(u) * (1-u)^(1/beta) = b * (1 - (1-u)^(1/q))^(1/a), bounded on [0, 1]
        return g(u) * dist.b * (-np.expm1(np.log1p(-u) / dist.q)) ** (1.0 / dist.a) if u < 1.0 else g(u) * dist.b

    val, _ = integrate.quad(smooth, lo, hi, weight="alg", wvar=(0.0, w), limit=200, epsabs=0, epsrel=1e-12)
    return val


@lru_cache(maxsize=None)
def population_index(dist, kind):
    """Population value of a Mean, Gini or Lorenz-ordinate functional.

    Args:
        dist: Frozen distribution with ``quantile`` and ``beta`` attributes.
        kind: IndexKind with tag ``mean``, ``gini`` or ``lorenz``.

    Raises:
        ValueError: unsupported kind or infinite mean.
    """
    if dist.beta <= 1.0:
        raise ValueError(f"{dist} has an infinite mean")
    mu = _int_q(dist, lambda u: 1.0)
    if not np.isfinite(mu):
        raise ValueError(f"{dist} has a non-finite mean")
    if kind.tag == "mean":
        return mu
    if kind.tag == "gini":
        return _int_q(dist, lambda u: 2.0 * u - 1.0) / mu
    if kind.tag == "lorenz":
        return _int_q(dist, lambda u: 1.0, 0.0, kind.p) / mu
    raise ValueError(f"population values are available for mean, gini and lorenz, not {kind}")


def true_influence(dist, kind):
    """Population influence function ``psi(x)`` as a vectorized callable.

    * mean: ``x - mu``
    * Gini: ``(2x F(x) - 2C(x) - (1+I) x)/mu + 1 - I`` with ``C`` the
      partial mean ``E[X 1(X <= x)]``
    * Lorenz: ``((x - Q) 1(x <= Q) - x L)/mu + p Q/mu``

    Each has mean zero under ``dist``.
    """
    mu = dist.mean
    if kind.tag == "mean":
        return lambda x: np.asarray(x, dtype=np.float64) - mu
    if kind.tag == "gini":
        g = dist.gini

        def psi(x):
            x = np.asarray(x, dtype=np.float64)
            return (2 * x * dist.cdf(x) - 2 * dist.partial_mean(x) - (1 + g) * x) / mu + 1 - g

        return psi
    if kind.tag == "lorenz":
        p = kind.p
        qp = dist.quantile(p)
        lp = dist.lorenz(p)

        def psi(x):
            x = np.asarray(x, dtype=np.float64)
            return (np.where(x <= qp, x - qp, 0.0) - x * lp) / mu + p * qp / mu

        return psi
    raise ValueError(f"true influence functions are available for mean, gini and lorenz, not {kind}")
