import functools

import pytest

from posapprox import enumerate_best_approximations, parse_descriptor

SQRT2 = "alg:-2,0,1@[1,2]"
SQRT3 = "alg:-3,0,1@[1,2]"
CBRT2 = "alg:-2,0,0,1@[1,2]"
CBRT4 = "alg:-4,0,0,1@[1,2]"

# Quadratic irrationals within ~1e-5 of 2/5 and 1/6.  Their large partial
# quotients put the sequence into the second case of the dispatcher: nu=2
# goes through the Lemma 1 body (gap condition), nu=3 through the planar lattice.
NEAR_RATIONAL_1 = "alg:2559999996800,-12800000000000,16000000000000@[40001413/100000000,2500089/6250000]"
NEAR_RATIONAL_2 = "alg:359999996112,-4320000000000,12960000000000@[50005193/300000000,25002613/150000000]"

PAIRS = {
    "sqrt": (SQRT2, SQRT3),
    "cbrt": (CBRT2, CBRT4),
    "near_rational": (NEAR_RATIONAL_1, NEAR_RATIONAL_2),
}


@functools.lru_cache(maxsize=None)
def sequence(name: str, height: int):
    a1, a2 = (parse_descriptor(d) for d in PAIRS[name])
    return enumerate_best_approximations(a1, a2, height)


@pytest.fixture(scope="session")
def seq_cache():
    return sequence
