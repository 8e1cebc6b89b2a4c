import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal

from conftest import brute_extended, mixed_sample, pairwise_gini
from welfare_diff.distributions import SinghMaddala
from welfare_diff.indices import (
    DegenerateMeanError,
    DomainError,
    IndexKind,
    UndefinedIndexError,
    estimate,
    influence,
    kakwani_scale,
    lorenz_vector_influence,
)

K = IndexKind
EXTENDED = [
    K.gini_positive_part(),
    K.gini_negative_part(),
    K.gini_positive(),
    K.lorenz_positive_part(0.4),
    K.lorenz_negative_part(0.4),
    K.lorenz_signed(0.4),
]


# -- IndexKind ---------------------------------------------------------------

def test_kind_validation():
    with pytest.raises(ValueError):
        K.lorenz(0.0)
    with pytest.raises(ValueError):
        K.lorenz(1.0)
    with pytest.raises(ValueError):
        K.lorenz_vector([0.5, 0.3])
    with pytest.raises(ValueError):
        K("gini", p=0.5)
    with pytest.raises(ValueError):
        K("unknown")


def test_kind_parse():
    assert K.parse("gini") == K.gini()
    assert K.parse("gini-bc") == K.gini(bias_corrected=True)
    assert K.parse("lorenz", [0.5]) == K.lorenz(0.5)
    assert K.parse("lorenz", [0.2, 0.5]) == K.lorenz_vector([0.2, 0.5])
    assert K.parse("lorenz_signed", 0.3) == K.lorenz_signed(0.3)
    with pytest.raises(ValueError):
        K.parse("lorenz")


# -- estimate ----------------------------------------------------------------

def test_gini_examples():
    assert estimate(np.full(7, 3.2), K.gini()) == pytest.approx(0.0, abs=1e-15)
    assert estimate([1.0, 2.0, 3.0], K.gini()) == pytest.approx(2 / 9, rel=1e-14)
    assert estimate([1.0, 2.0, 3.0], K.gini(bias_corrected=True)) == pytest.approx(2 / 9 * 3 / 2)


def test_lorenz_equality_diagonal():
    x = np.full(10, 4.0)
    for k in range(1, 10):
        assert estimate(x, K.lorenz(k / 10)) == pytest.approx(k / 10, rel=1e-14)


def test_mean_example():
    assert estimate([1.0, 2.0, 3.0], K.mean()) == 2.0


def test_gini_positive_example():
    x = np.array([-2.0, -1.0, 1.0, 2.0])
    pairs = np.abs(x[:, None] - x[None, :]).mean()
    assert estimate(x, K.gini_positive()) == pytest.approx(pairs / (2 * 1.5), rel=1e-14)


def test_lorenz_vector_estimate():
    x = np.random.default_rng(0).lognormal(size=50)
    v = estimate(x, K.lorenz_vector([0.2, 0.5, 0.8]))
    assert_allclose(v, [estimate(x, K.lorenz(p)) for p in (0.2, 0.5, 0.8)])


@pytest.mark.parametrize("kind", EXTENDED, ids=str)
def test_extended_match_brute_force(kind):
    x = mixed_sample(np.random.default_rng(5), 400)
    assert estimate(x, kind) == pytest.approx(brute_extended(x, kind), rel=1e-12)


def test_errors():
    with pytest.raises(DomainError):
        estimate([-1.0, 2.0], K.gini())
    with pytest.raises(DomainError):
        estimate([-1.0, 2.0], K.lorenz(0.5))
    assert estimate([-1.0, 2.0], K.mean()) == 0.5
    with pytest.raises(DegenerateMeanError):
        estimate([0.0, 0.0, 0.0], K.gini())
    with pytest.raises(DegenerateMeanError):
        estimate([0.0, 0.0], K.gini_positive())
    with pytest.raises(UndefinedIndexError, match="undefined index"):
        estimate([1.0, 2.0, 3.0], K.gini_negative_part())
    with pytest.raises(UndefinedIndexError):
        estimate([-1.0, 0.0, 3.0], K.lorenz_positive_part(0.5))
    with pytest.raises(ValueError):
        estimate([1.0, np.nan], K.mean())


# -- influence ---------------------------------------------------------------

def test_mean_influence():
    iv = influence([1.0, 2.0, 3.0], K.mean())
    assert_allclose(iv.values, [-1.0, 0.0, 1.0])
    assert iv.index_estimate == 2.0


def test_gini_influence_closed_form_small():
    # x = (3, 1, 2): ranks 3, 1, 2; I = 2/9, mu = 2
    x = np.array([3.0, 1.0, 2.0])
    g = 2 / 9
    h = np.array([
        (2 * 3 / 3 * 3 - 2 / 3 * 6 - (g + 1) * 3) / 2,
        (2 * 1 / 3 * 1 - 2 / 3 * 1 - (g + 1) * 1) / 2,
        (2 * 2 / 3 * 2 - 2 / 3 * 3 - (g + 1) * 2) / 2,
    ])
    assert_allclose(influence(x, K.gini()).values, h - h.mean(), atol=1e-15)


def test_sign_conditional_mask():
    x = np.array([-1.0, 0.0, 2.0, 3.0, -4.0, 5.0])
    iv = influence(x, K.gini_positive_part())
    assert_array_equal(iv.mask, x > 0)
    assert np.all(np.isnan(iv.values[~iv.mask]))
    assert iv.in_domain.mean() == pytest.approx(0.0, abs=1e-15)
    assert_allclose(iv.in_domain, influence(x[x > 0], K.gini()).values)


def _jackknife(x, kind):
    n = x.size
    t = np.array([estimate(np.delete(x, i), kind) for i in range(n)])
    return (n - 1) * (t.mean() - t), (n - 1) / n * np.sum((t - t.mean()) ** 2)


def test_gini_variance_matches_jackknife():
    x = SinghMaddala(1, 1.6971, 8.3679).rvs(500, np.random.default_rng(7))
    psi = influence(x, K.gini()).values
    _, jk = _jackknife(x, K.gini())
    assert psi @ psi / x.size**2 == pytest.approx(jk, rel=0.10)


GINI_KINDS = [K.gini(), K.gini_positive_part(), K.gini_negative_part(), K.gini_positive()]


@pytest.mark.parametrize("kind", GINI_KINDS, ids=str)
def test_gini_family_matches_jackknife(kind):
    """The empirical IF reproduces delete-one pseudo-values and their variance."""
    rng = np.random.default_rng(11)
    x = mixed_sample(rng, 1500) if not kind.classical else rng.lognormal(size=1500)
    iv = influence(x, kind)
    pseudo, jk = _jackknife(x, kind)
    psi = iv.in_domain
    ne = iv.n_eff
    # deleting a point changes the subsample size, so pseudo-values carry n/ne
    scaled = x.size / ne * psi
    assert np.corrcoef(psi, pseudo[iv.mask])[0, 1] > 0.99
    assert psi @ psi / ne**2 == pytest.approx(jk, rel=0.10)
    assert np.median(np.abs(pseudo[iv.mask] - scaled)) < 0.05 * np.std(scaled)


@pytest.mark.parametrize("kind", EXTENDED + [K.gini(), K.lorenz(0.4)], ids=str)
def test_influence_variance_matches_monte_carlo(kind):
    """mean(psi^2)/n_eff tracks the sampling variance of the estimator."""
    rng = np.random.default_rng(12)
    n, reps = 1000, 400
    est, var = [], []
    for _ in range(reps):
        x = mixed_sample(rng, n) if not kind.classical else rng.lognormal(size=n)
        iv = influence(x, kind)
        est.append(iv.index_estimate)
        v = iv.in_domain
        var.append(v @ v / v.size**2)
    assert np.var(est) == pytest.approx(np.mean(var), rel=0.15)


def test_gini_neg_part_sign_convention():
    """A point added far below the negative mass raises the negative-part Gini."""
    rng = np.random.default_rng(3)
    neg = -rng.lognormal(size=300)
    iv = influence(neg, K.gini_negative_part())
    assert iv.values[np.argmin(neg)] > 0
    bumped = np.append(neg, neg.min() * 2)
    assert estimate(bumped, K.gini_negative_part()) > estimate(neg, K.gini_negative_part())


def test_lorenz_vector_influence_columns():
    x = np.random.default_rng(2).lognormal(size=200)
    M = lorenz_vector_influence(x, [0.3, 0.6])
    assert M.shape == (200, 2)
    assert_allclose(M[:, 0], influence(x, K.lorenz(0.3)).values)
    assert_allclose(M.mean(axis=0), 0.0, atol=1e-14)
    assert np.linalg.eigvalsh(M.T @ M / 200).min() >= -1e-14
    assert_allclose(
        lorenz_vector_influence(x, [0.3])[:, 0], influence(x, K.lorenz(0.3)).values
    )


# -- properties --------------------------------------------------------------

positive = arrays(np.float64, st.integers(3, 50), elements=st.floats(0.01, 1e3), unique=True)
mixed = arrays(
    np.float64,
    st.integers(6, 50),
    elements=st.floats(-1e3, 1e3).filter(lambda v: abs(v) > 1e-3),
    unique=True,
).filter(lambda a: (a > 0).sum() >= 2 and (a < 0).sum() >= 2)


@given(positive, st.floats(0.01, 100))
def test_scale_invariance(x, c):
    for kind in (K.gini(), K.lorenz(0.5)):
        assert estimate(c * x, kind) == pytest.approx(estimate(x, kind), rel=1e-12)
    # power-of-two scaling is exact
    assert estimate(4.0 * x, K.gini()) == estimate(x, K.gini())


@given(mixed, st.floats(0.01, 100))
def test_scale_invariance_extended(x, c):
    for kind in EXTENDED:
        assert estimate(c * x, kind) == pytest.approx(estimate(x, kind), rel=1e-10, abs=1e-12)


@given(positive)
def test_gini_pairwise_oracle(x):
    assert estimate(x, K.gini()) == pytest.approx(pairwise_gini(x, x.mean()), rel=1e-10)


@given(mixed)
def test_extended_oracles(x):
    for kind in EXTENDED:
        assert estimate(x, kind) == pytest.approx(brute_extended(x, kind), rel=1e-10, abs=1e-12)


@given(positive)
def test_lorenz_bounds_and_monotone(x):
    ps = np.linspace(0.05, 0.95, 19)
    L = np.array([estimate(x, K.lorenz(p)) for p in ps])
    assert np.all(L >= 0)
    assert np.all(L <= ps + 1 / x.size + 1e-12)
    assert np.all(np.diff(L) >= -1e-12)


@given(mixed)
def test_influence_demeaned(x):
    for kind in EXTENDED + [K.mean()]:
        v = influence(x, kind).in_domain
        assert abs(v.mean()) <= 1e-10 * max(np.abs(v).max(), 1e-300)


@given(positive)
def test_influence_demeaned_classical(x):
    for kind in (K.gini(), K.lorenz(0.3)):
        v = influence(x, kind).values
        assert abs(v.mean()) <= 1e-10 * max(np.abs(v).max(), 1e-300)


@given(mixed, st.randoms(use_true_random=False))
def test_permutation_equivariance(x, r):
    perm = np.arange(x.size)
    r.shuffle(perm)
    for kind in EXTENDED + [K.mean(), K.gini_positive()]:
        a = influence(x, kind).values
        b = influence(x[perm], kind).values
        assert_allclose(b, a[perm], rtol=1e-9, atol=1e-12)


@given(positive, st.randoms(use_true_random=False))
def test_permutation_equivariance_gini(x, r):
    perm = np.arange(x.size)
    r.shuffle(perm)
    assert_allclose(influence(x[perm], K.gini()).values, influence(x, K.gini()).values[perm], atol=1e-12)


def test_mean_if_correlation_is_pearson():
    rng = np.random.default_rng(4)
    a = rng.lognormal(size=300)
    b = a + rng.normal(size=300)
    ra = influence(a, K.mean()).values
    rb = influence(b, K.mean()).values
    assert np.corrcoef(ra, rb)[0, 1] == pytest.approx(np.corrcoef(a, b)[0, 1], rel=1e-13)


def test_ties_share_influence_values():
    # rank and cumulative-sum terms grow together inside a tie block
    x = np.array([2.0, 1.0, 2.0, 3.0, 2.0])
    v = influence(x, K.gini()).values
    assert v[0] == pytest.approx(v[2], abs=1e-15)
    assert v[0] == pytest.approx(v[4], abs=1e-15)
    perm = np.array([4, 3, 0, 1, 2])
    assert_allclose(influence(x[perm], K.gini()).values, v[perm], atol=1e-15)


# -- equivalence scale -------------------------------------------------------

def test_kakwani_scale():
    assert kakwani_scale(1, 0, 0, 0, 0) == 1.0
    assert kakwani_scale(2, 0, 0, 0, 2) == pytest.approx(2**0.8 + 0.2, rel=1e-15)
    assert kakwani_scale(2, 0, 0, 0, 2) == pytest.approx(1.9411, abs=5e-5)
    assert kakwani_scale(1, 1, 0, 0, 0) == pytest.approx(1.1570, abs=5e-5)
    assert kakwani_scale(0, 0, 0, 1, 0) == pytest.approx(0.7**0.8)
    assert_allclose(kakwani_scale([1, 2], [0, 0], [0, 0], [0, 0], [0, 2]), [1.0, 2**0.8 + 0.2])
    with pytest.raises(ValueError, match="empty household"):
        kakwani_scale(0, 0, 0, 0, 1)
    with pytest.raises(ValueError):
        kakwani_scale(-1, 2, 0, 0, 0)
