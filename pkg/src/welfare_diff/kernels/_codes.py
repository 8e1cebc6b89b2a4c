"""Integer codes shared by both kernel backends.

Each index family is identified by a code; the subsample it lives on and the
normalizing mean are implied by the code.
"""

import math

MEAN = 0
GINI = 1
LORENZ = 2
GINI_POS = 3
GINI_NEG = 4
GINI_ABS = 5
LORENZ_POS = 6
LORENZ_NEG = 7
LORENZ_SIGNED = 8

# subsample selector: 0 = all observations, 1 = x > 0, -1 = x < 0
SUBSAMPLE = {
    MEAN: 0,
    GINI: 0,
    LORENZ: 0,
    GINI_POS: 1,
    GINI_NEG: -1,
    GINI_ABS: 0,
    LORENZ_POS: 1,
    LORENZ_NEG: -1,
    LORENZ_SIGNED: 0,
}

# normalizer: 0 = mean, 1 = -mean (i.e. |mean| of a negative subsample),
# 2 = mean of |x|
NORMALIZER = {
    MEAN: 0,
    GINI: 0,
    LORENZ: 0,
    GINI_POS: 0,
    GINI_NEG: 1,
    GINI_ABS: 2,
    LORENZ_POS: 0,
    LORENZ_NEG: 0,
    LORENZ_SIGNED: 2,
}

GINI_FAMILY = (GINI, GINI_POS, GINI_NEG, GINI_ABS)
LORENZ_FAMILY = (LORENZ, LORENZ_POS, LORENZ_NEG, LORENZ_SIGNED)

# status returned alongside kernel results
OK = 0
UNDEFINED = 1  # relevant subsample too small
DEGENERATE_MEAN = 2  # normalizing mean is zero

# ceil(p * n) is taken after subtracting this relative slack so that products
# such as 0.7 * 10 = 7.000000000000001 do not jump to the next order statistic
CEIL_SLACK = 1e-12

# centered pair sums below this fraction of the raw sums are treated as zero
# variation (cancellation noise), giving a zero matched-pair correlation
PAIR_TOL = 1e-20


def lorenz_rank(p, n):
    """1-based order-statistic index of the empirical p-quantile."""
    k = int(math.ceil(p * n - CEIL_SLACK * n))
    return min(max(k, 1), n)
