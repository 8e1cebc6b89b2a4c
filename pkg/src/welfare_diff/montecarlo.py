"""Simulation designs and coverage experiments.

Design catalog (``F1 = SM(1, 1.6971, 8.3679)`` throughout):

* ``IA``..``ID``: ``m = round(lambda*n)`` Gaussian-copula pairs plus iid
  tails; ``F2`` is SM(0.4, 2.8, 1.7), SM(0.4, 2, 1.5), SM(0.4, 1.4, 1.5),
  SM(0.4, 1.1, 1.1) respectively.
* ``IIA``: as ``IA`` but each sample's matched part is replaced by its own
  order statistics, so the observed pairing is not the true one. ``rho`` may
  be ``"uniform"`` to redraw it from U(-1, 1) for every replication.
* ``IIB``: ``2n`` iid draws ``Y`` from ``F2``; sample 1 is
  ``Y[2i-1] - Y[2i]`` and is paired with ``Y[2i-1]``; sample 2 is all of
  ``Y``. Matched and unmatched parts are dependent.

Replication ``r`` of a study seeded with ``seed`` draws data from
``SeedSequence(seed, spawn_key=(r, 0))`` and bootstrap indices for method
``j`` from ``SeedSequence(seed, spawn_key=(r, 1, j))``, so results do not
depend on the number of workers or on which other methods are requested.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .distributions import GaussianCopula, SinghMaddala, sample_paired
from .inference import METHODS, BootstrapConfig, confidence_interval
from .population import population_index, true_influence
from .variance import PairedDataset

__all__ = [
    "CATALOG",
    "DgpSpec",
    "McResult",
    "dgp",
    "generate",
    "rho_theta_curve",
    "run_coverage",
    "std_increase_table",
    "true_delta",
]

F1 = SinghMaddala(1.0, 1.6971, 8.3679)
CATALOG = {
    "IA": (F1, SinghMaddala(0.4, 2.8, 1.7)),
    "IB": (F1, SinghMaddala(0.4, 2.0, 1.5)),
    "IC": (F1, SinghMaddala(0.4, 1.4, 1.5)),
    "ID": (F1, SinghMaddala(0.4, 1.1, 1.1)),
    "IIA": (F1, SinghMaddala(0.4, 2.8, 1.7)),
    "IIB": (None, F1),
}
TAGS = tuple(CATALOG) + ("Custom",)
WORKERS_ENV = "WELFARE_DIFF_WORKERS"


@dataclass(frozen=True)
class DgpSpec:
    """One cell of a simulation design.

    Attributes:
        tag: ``IA``, ``IB``, ``IC``, ``ID``, ``IIA``, ``IIB`` or ``Custom``.
        dist1, dist2: Marginals (``dist1`` is unused for ``IIB``).
        rho: Copula correlation, or ``"uniform"`` (``IIA`` only).
        lam: Overlap portion in ``[0, 1]``.
        n1, n2: Sample sizes.
    """

    tag: str
    dist1: SinghMaddala | None
    dist2: SinghMaddala
    rho: float | str = 0.0
    lam: float = 0.0
    n1: int = 100
    n2: int = 100

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown design {self.tag!r}; choose from {TAGS}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if isinstance(self.rho, str):
            if self.rho != "uniform" or self.tag != "IIA":
                raise ValueError("rho='uniform' is only defined for design IIA")
        elif not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.tag == "IIB":
            if self.n2 != 2 * self.n1:
                raise ValueError("design IIB requires n2 = 2*n1")
        elif self.m > min(self.n1, self.n2):
            raise ValueError("round(lambda*n1) exceeds the smaller sample size")

    @property
    def m(self):
        """Number of matched pairs, ``lambda*n1`` rounded half up."""
        if self.tag == "IIB":
            return self.n1
        return math.floor(self.lam * self.n1 + 0.5 + 1e-9)

    @property
    def cell(self):
        return (self.rho, self.lam, self.n1)


def dgp(tag, rho=0.0, lam=0.0, n=100, n2=None):
    """Catalog design ``tag`` with the given cell parameters."""
    tag = tag.upper().replace("-", "")
    if tag not in CATALOG:
        raise ValueError(f"unknown catalog design {tag!r}; choose from {', '.join(CATALOG)}")
    d1, d2 = CATALOG[tag]
    if tag == "IIB":
        return DgpSpec(tag, d1, d2, 0.0, 1.0, n, 2 * n)
    return DgpSpec(tag, d1, d2, rho, lam, n, n if n2 is None else n2)


def generate(spec, rng):
    """Draw one PairedDataset from a design.

    Args:
        spec: DgpSpec.
        rng: ``numpy.random.Generator`` (or a seed for one).
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if spec.tag == "IIB":
        y = spec.dist2.rvs(spec.n2, rng)
        odd, even = y[0::2], y[1::2]
        return PairedDataset(np.column_stack([odd - even, odd]), np.empty(0), even)
    rho = rng.uniform(-1.0, 1.0) if spec.rho == "uniform" else spec.rho
    m = spec.m
    pairs = sample_paired(spec.dist1, spec.dist2, GaussianCopula(rho), m, rng)
    if spec.tag == "IIA":
        pairs = np.sort(pairs, axis=0)
    tail1 = spec.dist1.rvs(spec.n1 - m, rng)
    tail2 = spec.dist2.rvs(spec.n2 - m, rng)
    return PairedDataset(pairs, tail1, tail2)


def true_delta(spec, kind):
    """Population difference ``theta(F1) - theta(F2)`` of a design.

    ``IIB`` supports the mean only (sample 1 there has mean zero).
    """
    if spec.tag == "IIB":
        if kind.tag != "mean":
            raise ValueError("design IIB supports kind=mean only")
        return -population_index(spec.dist2, kind)
    return population_index(spec.dist1, kind) - population_index(spec.dist2, kind)


@dataclass(frozen=True)
class McResult:
    """Coverage summary of one method in one design cell.

    ``coverage = covered / reps``; failed replications count as not covered
    and are excluded from ``mean_width``.
    """

    method: str
    coverage: float
    mean_width: float
    reps: int
    covered: int
    missed: int
    failed: int
    cell: tuple

    def to_dict(self):
        rho, lam, n = self.cell
        return {
            "method": self.method,
            "rho": rho,
            "lambda": lam,
            "n": n,
            "coverage": self.coverage,
            "mean_width": self.mean_width,
            "reps": self.reps,
            "covered": self.covered,
            "missed": self.missed,
            "failed": self.failed,
        }


def _method_name(method):
    if callable(method):
        return getattr(method, "__name__", repr(method))
    return method.lower()


def _one_rep(args):
    spec, kind, methods, B, alpha, seed, r, target = args
    data = generate(spec, np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r, 0))))
    out = []
    for method in methods:
        j = METHODS.index(method) if isinstance(method, str) else len(METHODS) + methods.index(method)
        cfg = BootstrapConfig(B, np.random.SeedSequence(seed, spawn_key=(r, 1, j)), alpha)
        try:
            if callable(method):
                ci = method(data, kind, alpha, cfg)
            else:
                ci = confidence_interval(data, kind, method, alpha, cfg)
        except (ArithmeticError, ValueError, RuntimeError):
            out.append((None, math.nan))
            continue
        out.append((ci.contains(target), float(ci.width)))
    return out


def _run_reps(tasks, workers):
    if workers <= 1 or len(tasks) < 2:
        return [_one_rep(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_one_rep, tasks, chunksize=chunk))


def default_workers():
    """Worker count from ``$WELFARE_DIFF_WORKERS`` (default 1)."""
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_coverage(spec, kind, methods, reps, cfg=None, seed=0, workers=None, target=None):
    """Coverage and mean width of CI methods over simulated replications.

    Args:
        spec: DgpSpec.
        kind: Scalar IndexKind.
        methods: Method names from :data:`~welfare_diff.inference.METHODS`
            or callables ``f(data, kind, alpha, cfg) -> ConfidenceInterval``
            (picklable when ``workers > 1``).
        reps: Number of replications.
        cfg: BootstrapConfig supplying ``B`` and ``alpha``; its seed is
            ignored in favor of per-replication streams derived from
            ``seed``.
        seed: Master seed.
        workers: Process count; defaults to ``$WELFARE_DIFF_WORKERS`` or 1.
        target: True difference; defaults to :func:`true_delta`.

    Returns:
        list of McResult, one per method in input order.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    cfg = cfg or BootstrapConfig()
    methods = [m.lower() if isinstance(m, str) else m for m in methods]
    for m in methods:
        if isinstance(m, str) and m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    target = true_delta(spec, kind) if target is None else target
    workers = default_workers() if workers is None else workers
    tasks = [(spec, kind, methods, cfg.B, cfg.alpha, seed, r, target) for r in range(reps)]
    rows = _run_reps(tasks, workers)

    results = []
    for j, method in enumerate(methods):
        hits = [row[j] for row in rows]
        covered = sum(1 for h, _ in hits if h is True)
        missed = sum(1 for h, _ in hits if h is False)
        failed = reps - covered - missed
        widths = [w for h, w in hits if h is not None]
        mean_width = math.fsum(widths) / len(widths) if widths else math.nan
        results.append(
            McResult(_method_name(method), covered / reps, mean_width, reps, covered, missed, failed, spec.cell)
        )
    return results


def _pair_moments(spec, kinds, rho, m, reps, seed):
    """Per-kind pooled ``(v1, v2, mean corr)`` of true IFs over ``reps`` draws."""
    psis = [(true_influence(spec.dist1, k), true_influence(spec.dist2, k)) for k in kinds]
    sums = np.zeros((len(kinds), 3))
    cop = GaussianCopula(rho)
    for r in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r, 0)))
        xy = sample_paired(spec.dist1, spec.dist2, cop, m, rng)
        for i, (p1, p2) in enumerate(psis):
            a = p1(xy[:, 0])
            b = p2(xy[:, 1])
            va = a.var()
            vb = b.var()
            c = np.mean((a - a.mean()) * (b - b.mean())) / math.sqrt(va * vb) if va > 0 and vb > 0 else 0.0
            sums[i] += (a @ a / m, b @ b / m, c)
    return sums / reps


def rho_theta_curve(spec, kind, rhos, m, reps, seed=0):
    """Average matched-pair correlation of true IF values across a rho grid.

    Returns:
        list of ``(rho, mean_rho_theta)``.
    """
    return [(float(rho), float(_pair_moments(spec, [kind], rho, m, reps, seed)[0, 2])) for rho in rhos]


def std_increase_table(spec, kinds, rhos, lambdas, reps, n, seed=0):
    """Relative increase of the independence-assuming standard error.

    For each ``rho``, ``reps`` samples of ``n`` copula pairs give pooled true-IF
    variances ``v1``, ``v2`` and correlation ``rho_theta``. With equal sample
    sizes, ``sigma_I**2 = (v1 + v2)/2`` and
    ``sigma_D**2 = sigma_I**2 - lambda * rho_theta * sqrt(v1 v2)``; the cell
    value is ``100 * (sigma_I/sigma_D - 1)``.

    Returns:
        list of dicts with keys ``kind``, ``rho``, ``lambda``, ``increase_pct``
        and ``rho_theta``.
    """
    rows = []
    for rho in rhos:
        mom = _pair_moments(spec, kinds, rho, n, reps, seed)
        for kind, (v1, v2, c) in zip(kinds, mom):
            s_i = math.sqrt(0.5 * v1 + 0.5 * v2)
            for lam in lambdas:
                s_d = math.sqrt(max(0.5 * v1 + 0.5 * v2 - lam * c * math.sqrt(v1 * v2), 0.0))
                inc = 100.0 * (s_i / s_d - 1.0) if s_d > 0 else math.inf
                rows.append(
                    {"kind": str(kind), "rho": float(rho), "lambda": float(lam), "increase_pct": inc, "rho_theta": float(c)}
                )
    return rows


def with_cell(spec, rho=None, lam=None, n=None):
    """Copy of ``spec`` with some cell parameters replaced."""
    changes = {}
    if rho is not None:
        changes["rho"] = rho
    if lam is not None:
        changes["lam"] = lam
    if n is not None:
        changes["n1"] = n
        changes["n2"] = 2 * n if spec.tag == "IIB" else n
    return replace(spec, **changes)
