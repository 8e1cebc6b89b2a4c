"""Confidence intervals and tests for welfare indices and their differences.

Methods for a difference ``theta1 - theta2``:

* ``im-asym`` / ``im-boot``: intersection method; per-sample intervals at
  Bonferroni-split levels combined as ``[L1 - U2, U1 - L2]``. Valid under any
  dependence between the samples, but conservative.
* ``os-asym`` / ``os-boot``: overlapping-samples asymptotic interval and
  pair-preserving studentized bootstrap.
* ``is-asym`` / ``is-boot``: the same intervals computed as if the samples
  were independent (pairing ignored). Included as a benchmark; incorrect when
  the pairs are dependent.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .distributions import normal_quantile
from .indices import as_sample, check_domain, raise_status
from .kernels import codes
from .variance import delta_variance

__all__ = [
    "METHODS",
    "BootstrapConfig",
    "ConfidenceInterval",
    "DegenerateBootstrapError",
    "TestResult",
    "ci_independent_naive",
    "ci_intersection",
    "ci_intersection_method",
    "ci_overlap_asym",
    "ci_overlap_boot",
    "ci_per_sample_asym",
    "ci_per_sample_boot",
    "confidence_interval",
    "order_statistic_rank",
    "test_delta",
]

METHODS = ("im-asym", "im-boot", "os-asym", "os-boot", "is-asym", "is-boot")
_SLACK = 1e-9


class DegenerateBootstrapError(RuntimeError):
    """A bootstrap replicate had zero standard error even after a retry."""


@dataclass(frozen=True)
class ConfidenceInterval:
    """Two-sided confidence interval.

    Attributes:
        lower, upper: Bounds.
        level: Nominal coverage ``1 - alpha``.
        method: One of ``IM-Asym``, ``IM-Boot``, ``OS-Asym``, ``OS-Boot``,
            ``IS-Asym``, ``IS-Boot``, ``PerSample-Asym``, ``PerSample-Boot``.
        estimate: Point estimate the interval is built around.
        degenerate: True when the estimated standard error is zero and the
            interval collapses to a point.
    """

    lower: float
    upper: float
    level: float
    method: str
    estimate: float = math.nan
    degenerate: bool = False

    def __post_init__(self):
        for name in ("lower", "upper", "level", "estimate"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "degenerate", bool(self.degenerate))
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, value):
        return bool(self.lower <= value <= self.upper)

    def to_dict(self):
        return {
            "lower": self.lower,
            "upper": self.upper,
            "level": self.level,
            "method": self.method,
            "estimate": self.estimate,
            "degenerate": self.degenerate,
        }


def _nearest_valid_b(alpha, B):
    lo = max(1, math.floor(alpha * (B + 1)))
    cands = {round(k / alpha) - 1 for k in (lo, lo + 1)}
    return sorted(b for b in cands if b >= 1 and _valid(alpha, b))


def _valid(alpha, B):
    k = alpha * (B + 1)
    return round(k) >= 1 and abs(k - round(k)) < 1e-9


@dataclass(frozen=True)
class BootstrapConfig:
    """Bootstrap settings.

    Attributes:
        B: Number of bootstrap replicates; ``alpha * (B + 1)`` must be a
            positive integer (e.g. ``B = 399`` for ``alpha = 0.05``).
        seed: Anything accepted by ``numpy.random.default_rng`` (int,
            SeedSequence, Generator) or None for fresh entropy.
        alpha: Nominal non-coverage.
    """

    B: int = 399
    seed: object = None
    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.B) != self.B or self.B < 1:
            raise ValueError(f"B must be a positive integer, got {self.B}")
        if not _valid(self.alpha, self.B):
            hint = _nearest_valid_b(self.alpha, self.B)
            msg = f"alpha*(B+1) = {self.alpha * (self.B + 1):g} must be a positive integer"
            if hint:
                msg += f"; try B = {' or '.join(map(str, hint))}"
            raise ValueError(msg)

    def generator(self):
        return _rng(self.seed)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class TestResult:
    """Result of a two-sided test of ``theta1 - theta2 = null_value``."""

    statistic: float
    p_value: float
    null_value: float
    method: str = "asym"
    estimate: float = math.nan
    degenerate: bool = False

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "null_value": self.null_value,
            "method": self.method,
            "estimate": self.estimate,
            "degenerate": self.degenerate,
        }


def order_statistic_rank(p, B):
    """1-based rank ``ceil(p*B)`` of the bootstrap ``p``-quantile."""
    return min(max(math.ceil(p * B - _SLACK), 1), B)


def _quantiles(T, alpha):
    Ts = np.sort(T)
    B = Ts.size
    return Ts[order_statistic_rank(alpha / 2, B) - 1], Ts[order_statistic_rank(1 - alpha / 2, B) - 1]


def _require_scalar(kind):
    if kind.is_vector:
        raise TypeError("confidence intervals are defined for scalar index kinds only")


# -- single sample --------------------------------------------------------

def _single(x, kind):
    check_domain(x, kind)
    theta, psi, mask, st = kernels.influence(x, kind.code, kind.lorenz_p)
    raise_status(st, kind)
    ne = int(mask.sum())
    if kind.bias_corrected:
        theta *= ne / (ne - 1)
    return float(theta), math.sqrt(float(psi @ psi) / ne / ne)


def ci_per_sample_asym(sample, kind, alpha=0.05):
    """Asymptotic interval ``theta_hat -/+ z * sigma_hat / sqrt(n)``."""
    _require_scalar(kind)
    x = as_sample(sample)
    theta, se = _single(x, kind)
    half = normal_quantile(1 - alpha / 2) * se
    return ConfidenceInterval(theta - half, theta + half, 1 - alpha, "PerSample-Asym", theta, se == 0.0)


def _boot_single_stats(x, kind, B, rng):
    n = x.shape[0]
    idx = rng.integers(0, n, size=(B, n))
    t, s, st = kernels.boot_single(x, idx, kind.code, kind.lorenz_p, kind.bias_corrected)
    bad = (st != codes.OK) | ~(s > 0)
    for j in np.flatnonzero(bad):
        r = rng.integers(0, n, size=(1, n))
        t1, s1, st1 = kernels.boot_single(x, r, kind.code, kind.lorenz_p, kind.bias_corrected)
        if st1[0] != codes.OK or not s1[0] > 0:
            raise DegenerateBootstrapError(
                "degenerate bootstrap: replicate standard error is zero after a retry"
            )
        t[j], s[j] = t1[0], s1[0]
    return t, s


def ci_per_sample_boot(sample, kind, cfg, alpha=None):
    """Studentized (percentile-t) bootstrap interval for one sample.

    ``[theta - se*q(1-a/2), theta - se*q(a/2)]`` where ``q(p)`` is the
    ``ceil(p*B)``-th order statistic of ``T* = (theta* - theta)/se*``.

    Args:
        sample: Observations.
        kind: Scalar IndexKind.
        cfg: BootstrapConfig.
        alpha: Override of ``cfg.alpha`` (used by the intersection method).

    Raises:
        DegenerateBootstrapError: a replicate has zero standard error twice.
    """
    _require_scalar(kind)
    alpha = cfg.alpha if alpha is None else alpha
    x = as_sample(sample)
    theta, se = _single(x, kind)
    t, s = _boot_single_stats(x, kind, cfg.B, cfg.generator())
    T = np.where(s > 0, (t - theta) / np.where(s > 0, s, 1.0), 0.0)
    qlo, qhi = _quantiles(T, alpha)
    return ConfidenceInterval(theta - se * qhi, theta - se * qlo, 1 - alpha, "PerSample-Boot", theta, se == 0.0)


def ci_intersection(ci1, ci2, alpha=0.05):
    """Intersection-method interval ``[L1 - U2, U1 - L2]`` for a difference.

    Raises:
        ValueError: if the per-sample non-coverages exceed ``alpha``
            ("Bonferroni budget violated").
    """
    a1 = 1 - ci1.level
    a2 = 1 - ci2.level
    if a1 + a2 > alpha + 1e-12:
        raise ValueError(f"Bonferroni budget violated: {a1:g} + {a2:g} > {alpha:g}")
    kinds = {ci1.method, ci2.method}
    if kinds == {"PerSample-Asym"}:
        method = "IM-Asym"
    elif kinds == {"PerSample-Boot"}:
        method = "IM-Boot"
    else:
        method = "IM"
    return ConfidenceInterval(
        ci1.lower - ci2.upper,
        ci1.upper - ci2.lower,
        1 - alpha,
        method,
        ci1.estimate - ci2.estimate,
        ci1.degenerate and ci2.degenerate,
    )


def ci_intersection_method(data, kind, alpha=0.05, mode="asym", cfg=None, split=None):
    """Intersection-method interval computed from a paired dataset.

    Args:
        split: ``(alpha1, alpha2)`` with ``alpha1 + alpha2 <= alpha``; defaults
            to ``(alpha/2, alpha/2)``.
        mode: ``"asym"`` or ``"boot"``. Bootstrap mode uses two independent
            child streams of ``cfg.seed``, one per sample.
    """
    a1, a2 = split if split is not None else (alpha / 2, alpha / 2)
    if mode == "asym":
        c1 = ci_per_sample_asym(data.x1, kind, a1)
        c2 = ci_per_sample_asym(data.x2, kind, a2)
    elif mode == "boot":
        cfg = cfg or BootstrapConfig(alpha=alpha)
        g1, g2 = _children(cfg.seed, 2)
        c1 = ci_per_sample_boot(data.x1, kind, BootstrapConfig(cfg.B, g1, cfg.alpha), a1)
        c2 = ci_per_sample_boot(data.x2, kind, BootstrapConfig(cfg.B, g2, cfg.alpha), a2)
    else:
        raise ValueError(f"mode must be 'asym' or 'boot', got {mode!r}")
    return ci_intersection(c1, c2, alpha)


def _children(seed, k):
    if isinstance(seed, np.random.Generator):
        return seed.spawn(k)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(c) for c in ss.spawn(k)]


# -- overlapping samples ---------------------------------------------------

def ci_overlap_asym(data, kind, alpha=0.05, _method="OS-Asym"):
    """Asymptotic interval ``delta -/+ z * sigma_delta / sqrt(N)``."""
    _require_scalar(kind)
    rep = delta_variance(data, kind)
    se = rep.se
    half = normal_quantile(1 - alpha / 2) * se
    d = rep.delta
    return ConfidenceInterval(d - half, d + half, 1 - alpha, _method, d, se == 0.0)


def _draw(rng, m, t1, t2, B):
    ipair = rng.integers(0, m, size=(B, m)) if m else np.empty((B, 0), dtype=np.int64)
    it1 = rng.integers(0, t1, size=(B, t1)) if t1 else np.empty((B, 0), dtype=np.int64)
    it2 = rng.integers(0, t2, size=(B, t2)) if t2 else np.empty((B, 0), dtype=np.int64)
    return ipair, it1, it2


def _studentized(d, ds, ss):
    """``(d* - d)/se*`` with 0/0 read as 0; NaN marks an unusable replicate."""
    T = np.full(ds.shape, np.nan)
    pos = ss > 0
    T[pos] = (ds[pos] - d) / ss[pos]
    tie = (ss == 0) & (np.abs(ds - d) <= 1e-12 * max(1.0, abs(d)))
    T[tie] = 0.0
    return T


def _overlap_boot_stats(data, kind, B, rng):
    """Returns ``(report, T*)``; ``T*`` is None when ``sigma_delta`` is zero."""
    rep = delta_variance(data, kind)
    if rep.sigma_delta_sq == 0.0:
        return rep, None
    x1, x2, m = data.x1, data.x2, data.m
    t1, t2 = data.tail1.size, data.tail2.size
    args = (kind.code, kind.lorenz_p, kind.bias_corrected)
    ds, ss, st = kernels.boot_overlap(x1, x2, m, *_draw(rng, m, t1, t2, B), *args)
    T = _studentized(rep.delta, ds, ss)
    for j in np.flatnonzero(~np.isfinite(T) | (st != codes.OK)):
        d1, s1, st1 = kernels.boot_overlap(x1, x2, m, *_draw(rng, m, t1, t2, 1), *args)
        T1 = _studentized(rep.delta, d1, s1)
        if st1[0] != codes.OK or not np.isfinite(T1[0]):
            raise DegenerateBootstrapError(
                "degenerate bootstrap: replicate standard error is zero after a retry"
            )
        T[j] = T1[0]
    return rep, T


def ci_overlap_boot(data, kind, cfg, _method="OS-Boot"):
    """Pair-preserving studentized bootstrap interval for ``theta1 - theta2``.

    Matched pairs are resampled jointly from the ``m`` pairs; unmatched tails
    are resampled independently from their own observations. Each replicate
    is studentized with its own overlapping-samples standard error. When the
    sample standard error is zero the interval collapses to the estimate.
    """
    _require_scalar(kind)
    rep, T = _overlap_boot_stats(data, kind, cfg.B, cfg.generator())
    d = rep.delta
    if T is None:
        return ConfidenceInterval(d, d, 1 - cfg.alpha, _method, d, True)
    se = rep.se
    qlo, qhi = _quantiles(T, cfg.alpha)
    return ConfidenceInterval(d - se * qhi, d - se * qlo, 1 - cfg.alpha, _method, d, False)


def ci_independent_naive(data, kind, alpha=0.05, mode="asym", cfg=None):
    """Interval that wrongly treats the two samples as independent.

    The pairing is dropped (``m = 0``), which zeroes the covariance term and,
    in bootstrap mode, resamples the two samples separately.
    """
    flat = data.without_pairs()
    if mode == "asym":
        return ci_overlap_asym(flat, kind, alpha, _method="IS-Asym")
    if mode == "boot":
        cfg = cfg or BootstrapConfig(alpha=alpha)
        return ci_overlap_boot(flat, kind, cfg, _method="IS-Boot")
    raise ValueError(f"mode must be 'asym' or 'boot', got {mode!r}")


def confidence_interval(data, kind, method, alpha=0.05, cfg=None):
    """Dispatch on a method name from :data:`METHODS`."""
    method = method.lower()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    family, mode = method.split("-")
    if mode == "boot":
        cfg = cfg or BootstrapConfig(alpha=alpha)
        alpha = cfg.alpha
    if family == "im":
        return ci_intersection_method(data, kind, alpha, mode, cfg)
    if family == "is":
        return ci_independent_naive(data, kind, alpha, mode, cfg)
    if mode == "asym":
        return ci_overlap_asym(data, kind, alpha)
    return ci_overlap_boot(data, kind, cfg)


def test_delta(data, kind, null_value=0.0, mode="asym", cfg=None):
    """Two-sided test of ``theta1 - theta2 = null_value``.

    ``T = (delta - c) / se``. The asymptotic p-value is ``2*(1 - Phi(|T|))``.
    The bootstrap p-value is the equal-tail
    ``2*min(#{T* <= T}, #{T* >= T})/B`` clamped to ``[1/B, 1]``, with ``T*``
    from the pair-preserving bootstrap. A zero standard error gives ``p = 1``
    when ``delta == c`` and ``p = 0`` (flagged degenerate) otherwise.
    """
    _require_scalar(kind)
    c = float(null_value)
    if mode == "asym":
        rep, Tb = delta_variance(data, kind), None
    elif mode == "boot":
        cfg = cfg or BootstrapConfig()
        rep, Tb = _overlap_boot_stats(data, kind, cfg.B, cfg.generator())
    else:
        raise ValueError(f"mode must be 'asym' or 'boot', got {mode!r}")
    d = rep.delta
    if rep.sigma_delta_sq == 0.0:
        same = d == c
        stat = 0.0 if same else math.copysign(math.inf, d - c)
        return TestResult(stat, 1.0 if same else 0.0, c, mode, d, True)
    T = (d - c) / rep.se
    if mode == "asym":
        p = math.erfc(abs(T) / math.sqrt(2.0))
    else:
        B = Tb.size
        k = min(np.count_nonzero(Tb <= T), np.count_nonzero(Tb >= T))
        p = min(max(2.0 * k / B, 1.0 / B), 1.0)
    return TestResult(float(T), float(p), c, mode, d, False)
