"""Plug-in welfare indices and their empirical influence functions.

Supported functionals are the mean, the Gini index (optionally bias
corrected), Lorenz-curve ordinates and a family of sign-aware measures for
variables that take negative values:

* ``gini-pos-part`` / ``gini-neg-part``: Gini index within the strictly
  positive / strictly negative subsample, normalized by the absolute
  subsample mean.
* ``gini-positive``: Gini of the whole sample normalized by ``mean(|x|)``.
* ``lorenz-pos-part`` / ``lorenz-neg-part``: Lorenz ordinate within the
  positive / negative subsample.
* ``lorenz-signed``: Lorenz ordinate of the whole sample normalized by
  ``mean(|x|)``; may be negative and non-monotone.

Zero observations belong to neither sign-conditional subsample.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .kernels import codes

__all__ = [
    "DegenerateMeanError",
    "DomainError",
    "IndexKind",
    "InfluenceVector",
    "UndefinedIndexError",
    "as_sample",
    "estimate",
    "influence",
    "kakwani_scale",
    "lorenz_vector_influence",
]


class UndefinedIndexError(ValueError):
    """The subsample an index lives on is empty or too small."""


class DegenerateMeanError(ZeroDivisionError):
    """The normalizing mean of an index is zero."""


class DomainError(ValueError):
    """The sample violates the domain of a classical index (negative values)."""


_TAGS = {
    "mean": codes.MEAN,
    "gini": codes.GINI,
    "lorenz": codes.LORENZ,
    "lorenz-vector": codes.LORENZ,
    "gini-pos-part": codes.GINI_POS,
    "gini-neg-part": codes.GINI_NEG,
    "gini-positive": codes.GINI_ABS,
    "lorenz-pos-part": codes.LORENZ_POS,
    "lorenz-neg-part": codes.LORENZ_NEG,
    "lorenz-signed": codes.LORENZ_SIGNED,
}
_NEEDS_P = {"lorenz", "lorenz-pos-part", "lorenz-neg-part", "lorenz-signed"}
_CLASSICAL = {"gini", "lorenz", "lorenz-vector"}


@dataclass(frozen=True)
class IndexKind:
    """Selector for the functional under study.

    Use the constructors (``IndexKind.gini()``, ``IndexKind.lorenz(0.5)``, ...)
    or :meth:`parse` rather than building instances by hand.
    """

    tag: str
    p: float | None = None
    ps: tuple = ()
    bias_corrected: bool = False

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown index kind {self.tag!r}; choose from {sorted(_TAGS)}")
        if self.tag in _NEEDS_P:
            if self.p is None or not 0.0 < self.p < 1.0:
                raise ValueError(f"{self.tag} needs 0 < p < 1, got {self.p}")
        elif self.p is not None:
            raise ValueError(f"{self.tag} takes no p")
        if self.tag == "lorenz-vector":
            ps = np.asarray(self.ps, dtype=np.float64)
            if ps.size == 0 or np.any((ps <= 0) | (ps >= 1)) or np.any(np.diff(ps) <= 0):
                raise ValueError("lorenz-vector needs strictly increasing ps inside (0, 1)")
            object.__setattr__(self, "ps", tuple(float(v) for v in ps))
        elif self.ps:
            raise ValueError(f"{self.tag} takes no ps")
        if self.bias_corrected and self.tag != "gini":
            raise ValueError("bias correction applies to the plain Gini only")

    @classmethod
    def mean(cls):
        return cls("mean")

    @classmethod
    def gini(cls, bias_corrected=False):
        return cls("gini", bias_corrected=bias_corrected)

    @classmethod
    def lorenz(cls, p):
        return cls("lorenz", p=float(p))

    @classmethod
    def lorenz_vector(cls, ps):
        return cls("lorenz-vector", ps=tuple(ps))

    @classmethod
    def gini_positive_part(cls):
        return cls("gini-pos-part")

    @classmethod
    def gini_negative_part(cls):
        return cls("gini-neg-part")

    @classmethod
    def gini_positive(cls):
        return cls("gini-positive")

    @classmethod
    def lorenz_positive_part(cls, p):
        return cls("lorenz-pos-part", p=float(p))

    @classmethod
    def lorenz_negative_part(cls, p):
        return cls("lorenz-neg-part", p=float(p))

    @classmethod
    def lorenz_signed(cls, p):
        return cls("lorenz-signed", p=float(p))

    @classmethod
    def parse(cls, name, p=None):
        """Build a kind from its CLI name, e.g. ``parse("lorenz", p=0.5)``.

        ``gini-bc`` selects the bias-corrected Gini. For ``lorenz`` a sequence
        of several ``p`` values selects a Lorenz vector.
        """
        name = name.strip().lower().replace("_", "-")
        if name == "gini-bc":
            return cls.gini(bias_corrected=True)
        if p is not None and np.ndim(p) > 0:
            p = list(p)
            if name == "lorenz" and len(p) > 1:
                return cls.lorenz_vector(p)
            p = p[0] if p else None
        if name in _NEEDS_P:
            if p is None:
                raise ValueError(f"index {name!r} requires p")
            return cls(name, p=float(p))
        return cls(name)

    @property
    def code(self):
        return _TAGS[self.tag]

    @property
    def lorenz_p(self):
        return 0.0 if self.p is None else self.p

    @property
    def is_vector(self):
        return self.tag == "lorenz-vector"

    @property
    def classical(self):
        """Whether the kind requires nonnegative data."""
        return self.tag in _CLASSICAL

    @property
    def sign_conditional(self):
        return codes.SUBSAMPLE[self.code] != 0

    def scalar_kinds(self):
        """Component scalar kinds (one per ordinate for a Lorenz vector)."""
        if self.is_vector:
            return [IndexKind.lorenz(p) for p in self.ps]
        return [self]

    def __str__(self):
        if self.bias_corrected:
            return "gini-bc"
        if self.p is not None:
            return f"{self.tag}(p={self.p:g})"
        if self.ps:
            return f"lorenz({','.join(f'{v:g}' for v in self.ps)})"
        return self.tag


@dataclass(frozen=True)
class InfluenceVector:
    """Empirical influence-function values aligned with the input sample.

    Attributes:
        values: ``psi_i`` for each observation in original order; NaN for
            observations outside a sign-conditional subsample.
        index_estimate: Plug-in estimate of the index.
        mask: True where the observation belongs to the index's domain.
    """

    values: np.ndarray
    index_estimate: float
    mask: np.ndarray = field(repr=False)

    @property
    def in_domain(self):
        return self.values[self.mask]

    @property
    def n_eff(self):
        return int(self.mask.sum())


def as_sample(x, name="sample"):
    """Validate and convert a one-dimensional sample to a float array."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def check_domain(x, kind):
    if kind.classical and x.size and x.min() < 0:
        raise DomainError(
            f"{kind} requires nonnegative data; use a sign-aware kind for negative values"
        )


def raise_status(status, kind):
    if status == codes.UNDEFINED:
        raise UndefinedIndexError(f"undefined index: too few observations in the domain of {kind}")
    if status == codes.DEGENERATE_MEAN:
        raise DegenerateMeanError(f"degenerate mean: normalizing mean of {kind} is zero")


def _scalar(x, kind):
    theta, psi, mask, status = kernels.influence(x, kind.code, kind.lorenz_p)
    raise_status(status, kind)
    if kind.bias_corrected:
        n = x.shape[0]
        theta = theta * n / (n - 1) if n > 1 else theta
    return float(theta), psi, mask


def estimate(sample, kind):
    """Plug-in estimate of an index.

    Args:
        sample: One-dimensional array of observations.
        kind: :class:`IndexKind`.

    Returns:
        float, or an array of ordinates for a Lorenz vector.

    Raises:
        DomainError: negative values for a classical Gini/Lorenz kind.
        UndefinedIndexError: empty relevant subsample.
        DegenerateMeanError: zero normalizing mean.
    """
    x = as_sample(sample)
    check_domain(x, kind)
    if kind.is_vector:
        return np.array([_scalar(x, k)[0] for k in kind.scalar_kinds()])
    return _scalar(x, kind)[0]


def influence(sample, kind):
    """Demeaned empirical influence function of an index.

    The Gini IF uses ranks, so values are returned in the original observation
    order and pairs across two samples stay aligned. For a Lorenz vector the
    values form an ``(n, s)`` matrix.

    Returns:
        InfluenceVector
    """
    x = as_sample(sample)
    check_domain(x, kind)
    if kind.is_vector:
        cols = lorenz_vector_influence(x, kind.ps)
        est = estimate(x, kind)
        return InfluenceVector(cols, est, np.ones(x.shape[0], dtype=bool))
    theta, psi, mask = _scalar(x, kind)
    values = np.where(mask, psi, np.nan)
    return InfluenceVector(values, theta, mask)


def lorenz_vector_influence(sample, ps):
    """Influence-function matrix of several Lorenz ordinates.

    Returns:
        ``(n, s)`` array whose column ``j`` is the IF of ``L(ps[j])``.
    """
    kind = IndexKind.lorenz_vector(ps)
    x = as_sample(sample)
    check_domain(x, kind)
    return np.column_stack([_scalar(x, k)[1] for k in kind.scalar_kinds()])


def kakwani_scale(adults, ch05, ch614, ch1517, workers):
    """Household equivalence scale.

    ``(adults + 0.2*ch05 + 0.4*ch614 + 0.7*ch1517)**0.8 + 0.1*workers``.
    Accepts scalars or arrays.

    Raises:
        ValueError: negative counts, or a household with no members
            ("empty household").
    """
    ad, c1, c2, c3, w = (np.asarray(v, dtype=np.float64) for v in (adults, ch05, ch614, ch1517, workers))
    if any(np.any(v < 0) for v in (ad, c1, c2, c3, w)):
        raise ValueError("household counts must be nonnegative")
    if np.any(ad + c1 + c2 + c3 < 1):
        raise ValueError("empty household: at least one adult or child is required")
    out = (ad + 0.2 * c1 + 0.4 * c2 + 0.7 * c3) ** 0.8 + 0.1 * w
    return float(out) if out.ndim == 0 else out
