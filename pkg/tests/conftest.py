import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fqmzv.fqarith import FiniteField, RatFunc

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")


@pytest.fixture(scope="session")
def F2():
    return FiniteField(2)


@pytest.fixture(scope="session")
def F3():
    return FiniteField(3)


@pytest.fixture(scope="session")
def F4():
    return FiniteField(2, 2)


FIELDS = [(2, 1), (3, 1), (2, 2), (5, 1)]


def field_of(pe):
    return FiniteField(*pe)


def polys(field, max_deg=5, nonzero=False):
    """Hypothesis strategy for polynomials over ``field``."""
    coeff = st.integers(0, field.q - 1)

    def build(codes):
        return field.poly([field.from_code(c) for c in codes])

    strat = st.lists(coeff, min_size=0, max_size=max_deg + 1).map(build)
    if nonzero:
        strat = strat.filter(lambda f: not f.is_zero())
    return strat


def monic_polys(field, max_deg=4, min_deg=0):
    coeff = st.integers(0, field.q - 1)

    def build(codes):
        return field.poly([field.from_code(c) for c in codes] + [1])

    return st.integers(min_deg, max_deg).flatmap(
        lambda d: st.lists(coeff, min_size=d, max_size=d)).map(build)


def ratfuncs(field, max_deg=4, nonzero=False):
    return st.builds(lambda n, d: RatFunc(field, n, d),
                     polys(field, max_deg, nonzero=nonzero), polys(field, max_deg, nonzero=True))


def rf(field, poly):
    return RatFunc(field, poly)
