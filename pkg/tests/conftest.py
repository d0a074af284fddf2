import numpy as np
import pytest

from infconv import funcrep as fr


def power_profile(n, coef, q, rmax=30.0, num=1024, offset=0.0):
    """Profile of g(r) = offset - coef * r^q with exact evaluator and tail."""
    r = fr.make_radial_grid(rmax, num)
    exact = lambda rr: offset - coef * np.power(rr, q)
    dlog = lambda rr: -coef * q * np.power(rr, q - 1.0)
    return fr.RadialProfile(n, r, exact(r), tail=fr.TailDecay(offset, coef, q),
                            exact=exact, exact_dlog=dlog)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
