import pytest

from hyf import validate_series

# worked example used throughout: two price legs with ten interval
# overlaps, merged label string BAAAABAABBBAB, covariance -30
GOLDEN_TIMES_A = (2, 3, 4, 5, 7, 8, 11.5)
GOLDEN_PRICES_A = (10, 15, 25, 10, 5, 1, 5)
GOLDEN_TIMES_B = (1, 6, 9, 10, 11, 12)
GOLDEN_PRICES_B = (5, 10, 15, 20, 25, 20)

GOLDEN_PAIRS = [
    (1, 1), (2, 1), (3, 1), (4, 1), (4, 2),
    (5, 2), (6, 2), (6, 3), (6, 4), (6, 5),
]
GOLDEN_MERGE = "BAAAABAABBBAB"
GOLDEN_COVARIANCE = -30.0


@pytest.fixture
def golden_pair():
    s1 = validate_series(GOLDEN_TIMES_A, GOLDEN_PRICES_A, "A")
    s2 = validate_series(GOLDEN_TIMES_B, GOLDEN_PRICES_B, "B")
    return s1, s2
