import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from welfare_diff.kernels import codes

settings.register_profile(
    "default", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pairwise_gini(x, norm, chunk=512):
    """Mean absolute difference over all n^2 ordered pairs divided by 2*norm."""
    x = np.asarray(x, dtype=float)
    total = math.fsum(np.abs(x[i : i + chunk, None] - x[None, :]).sum() for i in range(0, x.size, chunk))
    return total / (2.0 * x.size**2 * norm)


def brute_lorenz(x, p, norm):
    """L(p) from the inf-quantile: sum of x_i <= X_(ceil(pn)), over n*norm."""
    xs = np.sort(x)
    k = codes.lorenz_rank(p, x.size)
    q = xs[k - 1]
    return x[x <= q].sum() / x.size / norm


def brute_extended(x, kind):
    """Double-sum / subsample oracle for the sign-aware kinds."""
    pos, neg = x[x > 0], x[x < 0]
    tag = kind.tag
    if tag == "gini-pos-part":
        return pairwise_gini(pos, pos.mean())
    if tag == "gini-neg-part":
        return pairwise_gini(neg, abs(neg.mean()))
    if tag == "gini-positive":
        return pairwise_gini(x, np.abs(x).mean())
    if tag == "lorenz-pos-part":
        return brute_lorenz(pos, kind.p, pos.mean())
    if tag == "lorenz-neg-part":
        return brute_lorenz(neg, kind.p, neg.mean())
    if tag == "lorenz-signed":
        return brute_lorenz(x, kind.p, np.abs(x).mean())
    raise AssertionError(tag)


def mixed_sample(rng, n, p_neg=0.3, p_zero=0.02):
    """Mixed-sign draws: lognormal magnitudes, some negatives and exact zeros."""
    mag = rng.lognormal(0.0, 1.0, n)
    u = rng.random(n)
    return np.where(u < p_zero, 0.0, np.where(u < p_zero + p_neg, -0.4 * mag, mag))


ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    """Store one acceptance line; printed in the terminal summary."""
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
