import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fqmzv.completions import (
    InfSeries,
    MagnitudeBound,
    PrecisionError,
    VAdicSeries,
    as_place,
    compare_magnitude,
    embed_fraction,
    embed_inf,
    embed_v,
)
from fqmzv.fqarith import RatFunc, inf_valuation, v_valuation

from conftest import FIELDS, field_of, ratfuncs


def reassemble_inf(series):
    field = series.field
    T = field.theta()
    total = RatFunc(field, field.zero_poly())
    for n, c in series.terms():
        total = total + RatFunc(field, field.const(c), field.one_poly()) / RatFunc(field, T) ** n
    return total


def reassemble_v(series):
    field = series.field
    v = RatFunc(field, series.place.v)
    total = RatFunc(field, field.zero_poly())
    for n, a in series.digits():
        total = total + RatFunc(field, a) * v**n
    return total


def close_inf(x, y, prec):
    diff = x - y
    return diff.is_zero() or inf_valuation(diff) > prec


def close_v(x, y, v, prec):
    diff = x - y
    return diff.is_zero() or v_valuation(diff, v)[0] > prec


# ------------------------------------------------------------- examples

def test_embed_inf_examples(F2):
    T = F2.theta()
    one = F2.one_poly()
    s = embed_inf(RatFunc(F2, one, T - one), 3)
    assert [n for n, _ in s.terms()] == [1, 2, 3]
    assert all(c == F2.elem(1) for _, c in s.terms())
    t = embed_inf(RatFunc(F2, T), 10)
    assert t.valuation == -1 and t.terms() == [(-1, F2.elem(1))]
    assert embed_inf(RatFunc(F2, F2.zero_poly()), 5).is_zero()


def test_embed_v_examples(F2):
    T = F2.theta()
    one = F2.one_poly()
    assert embed_v(RatFunc(F2, T), T, 5).digits() == [(1, one)]
    geo = embed_v(RatFunc(F2, one, T - one), T, 2)
    assert geo.digits() == [(0, one), (1, one), (2, one)]
    inv = embed_v(RatFunc(F2, one, T), T, 4)
    assert inv.valuation == -1 and inv.digits() == [(-1, one)]
    assert embed_v(RatFunc(F2, F2.zero_poly()), T, 4).is_zero()


def test_series_arith_examples(F3):
    T = F3.theta()
    x = embed_inf(RatFunc(F3, T + F3.one_poly(), T**3 + T), 12)
    assert (x + (-x)).is_zero()
    prod = embed_inf(RatFunc(F3, F3.one_poly(), T), 20) * embed_inf(RatFunc(F3, T), 20)
    assert prod.terms() == [(0, F3.elem(1))]
    y = embed_v(RatFunc(F3, T + F3.one_poly(), T**2 + T), T, 12)
    assert (y - y).is_zero()


def test_compare_magnitude_examples():
    assert compare_magnitude(-1, "inf", MagnitudeBound(2, 1), strict=True)
    assert compare_magnitude(-2, "inf", MagnitudeBound(2, 1), strict=False)
    assert not compare_magnitude(-2, "inf", MagnitudeBound(2, 1), strict=True)
    assert compare_magnitude(0, "v", MagnitudeBound(0), strict=False)
    assert not compare_magnitude(0, "v", MagnitudeBound(0), strict=True)
    # zero is below every bound
    assert compare_magnitude(None, "v", MagnitudeBound(0), strict=True)


def test_no_digit_beyond_precision(F2):
    s = embed_inf(RatFunc(F2, F2.one_poly(), F2.theta() + F2.one_poly()), 5)
    with pytest.raises(PrecisionError):
        s.coeff(6)
    t = embed_v(RatFunc(F2, F2.one_poly(), F2.theta() + F2.one_poly()), F2.theta(), 5)
    with pytest.raises(PrecisionError):
        t.digit(6)


def test_embed_fraction_skips_gcd(F3):
    T = F3.theta()
    one = F3.one_poly()
    num, den = (T + one) * T**2, (T + one) * (T - one) * T
    for place in (None, as_place(T)):
        a = embed_fraction(num, den, place, 15)
        b = (embed_inf(RatFunc(F3, num, den), 15) if place is None
             else embed_v(RatFunc(F3, num, den), T, 15))
        assert a.agrees(b, 15)


# ----------------------------------------------------------- properties

@pytest.mark.parametrize("pe", FIELDS)
def test_round_trip_products(pe):
    field = field_of(pe)
    v = field.theta() + field.one_poly()

    @settings(max_examples=500)
    @given(ratfuncs(field, 4, nonzero=True), ratfuncs(field, 4, nonzero=True))
    def check(x, y):
        N = 15
        prod = embed_inf(x, N) * embed_inf(y, N)
        assert prod.agrees(embed_inf(x * y, N), min(N, prod.prec))
        assert prod.valuation == inf_valuation(x) + inf_valuation(y)
        ex, ey = embed_v(x, v, N), embed_v(y, v, N)
        prod = ex * ey
        exy = embed_v(x * y, v, N)
        # the product's precision is limited by the factors' valuations
        assert prod.agrees(exy, min(prod.prec, N))
        assert prod.valuation == ex.valuation + ey.valuation

    check()


@pytest.mark.parametrize("pe", FIELDS)
def test_ultrametric_inequality(pe):
    field = field_of(pe)
    v = field.theta()

    @given(ratfuncs(field, 4, nonzero=True), ratfuncs(field, 4, nonzero=True))
    def check(x, y):
        for a, b in ((embed_inf(x, 20), embed_inf(y, 20)), (embed_v(x, v, 20), embed_v(y, v, 20))):
            s = a + b
            if s.is_zero():
                continue
            assert s.valuation >= min(a.valuation, b.valuation)
            if a.valuation != b.valuation:
                assert s.valuation == min(a.valuation, b.valuation)

    check()


@pytest.mark.parametrize("pe", FIELDS)
def test_digits_reassemble_to_the_input(pe):
    field = field_of(pe)
    v = field.theta()**2 + field.one_poly() if field.q == 3 else field.theta() + field.one_poly()

    @given(ratfuncs(field, 4, nonzero=True), st.integers(1, 12))
    def check(x, M):
        assert close_v(reassemble_v(embed_v(x, v, M)), x, v, M)
        assert close_inf(reassemble_inf(embed_inf(x, M)), x, M)

    check()


@pytest.mark.parametrize("pe", FIELDS)
def test_precision_is_honest(pe):
    """Truncating a higher-precision embedding reproduces the lower one."""
    field = field_of(pe)
    v = field.theta()

    @given(ratfuncs(field, 4, nonzero=True), st.integers(1, 10))
    def check(x, M):
        assert embed_inf(x, M + 10).truncate(M).agrees(embed_inf(x, M), M)
        assert embed_v(x, v, M + 10).truncate(M).agrees(embed_v(x, v, M), M)
        assert embed_inf(x, M).prec == M and embed_v(x, v, M).prec == M

    check()


def test_zero_state_is_tagged(F2):
    z = InfSeries.zero(F2, 7)
    assert z.is_zero() and z.valuation is None and z.prec == 7
    w = VAdicSeries.zero(as_place(F2.theta()), 7)
    assert w.is_zero() and w.valuation is None
