import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fqmzv.fqarith import FiniteField, ParseError, RatFunc
from fqmzv.polylog import li_star_inf, li_star_v_conv
from fqmzv.stufflealg import H0Error, StuffleAlgebra, StuffleElement, parse_element

from test_polylog import tuple_sum


def R(field, x):
    return RatFunc.coerce(field, x)


def letters_for(alg):
    field = alg.field
    T = field.theta()
    one = field.one_poly()
    out = []
    for s in (1, 2, 3):
        for u in (one, T, T + one):
            try:
                out.append(alg.letter(s, u))
            except ValueError:
                pass
    return out


def words(alg, max_len=3, min_len=0):
    letters = letters_for(alg)
    return st.lists(st.sampled_from(letters), min_size=min_len, max_size=max_len).map(
        lambda w: StuffleElement.word(alg.field, tuple(w)))


# ------------------------------------------------------------- examples

def test_unit_is_neutral(F3):
    alg = StuffleAlgebra(F3, F3.theta())
    w = StuffleElement.word(F3, (alg.letter(2, F3.theta()), alg.letter(1, F3.one_poly())))
    one = StuffleElement.one(F3)
    assert alg.star(one, w) == w and alg.star(w, one) == w


def test_one_unfolding(F3):
    alg = StuffleAlgebra(F3, F3.theta())
    a = alg.letter(1, F3.theta())
    b = alg.letter(2, F3.one_poly())
    prod = alg.star(StuffleElement.word(F3, (a,)), StuffleElement.word(F3, (b,)))
    expected = (StuffleElement.word(F3, (a, b)) + StuffleElement.word(F3, (b, a))
                - StuffleElement.word(F3, (alg.letter(3, F3.theta()),)))
    assert prod == expected


def test_char_two_collapse(F2):
    alg = StuffleAlgebra(F2, F2.theta())
    z = parse_element(alg, "z[1,T]")
    assert alg.star(z, z).render() == "z[2,T^2]"


def test_eval_examples(F2, F3):
    for field in (F2, F3):
        T = field.theta()
        alg = StuffleAlgebra(field, T)
        z = StuffleElement.word(field, (alg.letter(2, T + field.one_poly()),))
        assert alg.eval_trunc(z, 0) == R(field, T + field.one_poly())
        one = StuffleElement.one(field)
        assert alg.eval_inf(one, 10).terms() == [(0, field.elem(1))]
    alg = StuffleAlgebra(F2, F2.theta())
    z = parse_element(alg, "z[1,T]")
    lhs = alg.eval_v(alg.star(z, z), 20)
    single = alg.eval_v(z, 20)
    assert lhs.agrees((single * single).truncate(20), 20)


def test_multiplicativity_examples(F2, F3):
    alg3 = StuffleAlgebra(F3, F3.theta())
    w = parse_element(alg3, "z[1,T]")
    w2 = parse_element(alg3, "z[2,1]")
    verdict = alg3.multiplicativity_check(w, w2, "trunc", 3)
    assert verdict.ok and verdict.product_value == verdict.separate_value
    assert alg3.multiplicativity_check(StuffleElement.one(F3), w2, "trunc", 3).ok
    alg2 = StuffleAlgebra(F2, F2.theta())
    z = parse_element(alg2, "z[1,T]")
    assert alg2.multiplicativity_check(z, z, "inf", 30).ok
    # Li*_1(T)^2 = Li*_2(T^2) in characteristic 2
    T = R(F2, F2.theta())
    assert (li_star_inf([1], [T], 32) ** 2).truncate(30).agrees(li_star_inf([2], [T * T], 30), 30)


def test_letters_outside_X_are_rejected(F2):
    alg = StuffleAlgebra(F2, F2.theta())
    with pytest.raises(ValueError):
        alg.letter(1, F2.theta() ** 3)  # |T^3|_inf = 8 > 4
    with pytest.raises(ValueError):
        alg.letter(1, RatFunc(F2, F2.one_poly(), F2.theta()))  # |1/T|_T > 1


def test_evaluation_requires_H0(F2):
    alg = StuffleAlgebra(F2, F2.theta())
    w = parse_element(alg, "z[1,1]")
    assert not alg.in_H0(w)
    with pytest.raises(H0Error):
        alg.eval_inf(w, 10)


def test_parser_round_trip_and_errors(F3):
    alg = StuffleAlgebra(F3, F3.theta())
    text = "z[1,T]z[2,1] + 2*z[3,T+1]"
    element = parse_element(alg, text)
    assert parse_element(alg, element.render()) == element
    with pytest.raises(ParseError) as info:
        parse_element(alg, "z[1,T] + z[2")
    assert info.value.pos > 0


def test_truncations_match_tuple_enumeration(F3):
    alg = StuffleAlgebra(F3, F3.theta())
    w = parse_element(alg, "z[1,T]z[2,T+1]z[1,1]")
    (word,) = w.terms
    s = [l.s for l in word]
    u = [l.u for l in word]
    for n in range(4):
        assert alg.eval_trunc(w, n) == tuple_sum(s, u, n, strict=False)


# ----------------------------------------------------------- properties

@pytest.mark.parametrize("p", [2, 3])
def test_star_is_commutative_and_associative(p):
    field = FiniteField(p)
    alg = StuffleAlgebra(field, field.theta())

    @settings(max_examples=100)
    @given(words(alg), words(alg), words(alg))
    def check(x, y, z):
        assert alg.star(x, y) == alg.star(y, x)
        assert alg.star(alg.star(x, y), z) == alg.star(x, alg.star(y, z))

    check()


@pytest.mark.parametrize("p", [2, 3])
def test_H0_closed_and_truncation_multiplicative(p):
    field = FiniteField(p)
    alg = StuffleAlgebra(field, field.theta())
    first = [l for l in letters_for(alg) if alg.in_X0(l)]
    h0 = st.tuples(st.sampled_from(first), st.lists(st.sampled_from(letters_for(alg)), max_size=2)).map(
        lambda t: StuffleElement.word(field, (t[0],) + tuple(t[1])))

    @settings(max_examples=40)
    @given(h0, h0, st.integers(0, 4))
    def check(x, y, n):
        assert alg.in_H0(alg.star(x, y))
        assert alg.multiplicativity_check(x, y, "trunc", n).ok

    check()


def test_evaluations_are_linear(F3):
    T = F3.theta()
    alg = StuffleAlgebra(F3, T)
    rng = random.Random(5)
    first = [l for l in letters_for(alg) if alg.in_X0(l)]
    letters = letters_for(alg)
    alpha = R(F3, T + F3.one_poly())
    beta = RatFunc(F3, F3.one_poly(), T + F3.one_poly())
    for _ in range(10):
        x = StuffleElement.word(F3, (rng.choice(first), rng.choice(letters)))
        y = StuffleElement.word(F3, (rng.choice(first),))
        combo = x.scale(alpha) + y.scale(beta)
        for ev, prec in ((alg.eval_inf, 20), (alg.eval_v, 12)):
            lhs = ev(combo, prec)
            rhs = (ev(x, prec + 2) * alpha + ev(y, prec + 2) * beta).truncate(prec)
            assert lhs.agrees(rhs, prec)
        assert alg.eval_trunc(combo, 3) == alg.eval_trunc(x, 3) * alpha + alg.eval_trunc(y, 3) * beta


def test_multiplicativity_in_both_completions(F3):
    T = F3.theta()
    alg = StuffleAlgebra(F3, T)
    x = parse_element(alg, "z[1,T]z[1,1]")
    y = parse_element(alg, "z[2,T]")
    assert alg.multiplicativity_check(x, y, "inf", 20).ok
    assert alg.multiplicativity_check(x, y, "v", 12).ok
    assert li_star_v_conv([2], [R(F3, T)], T, 12).valuation == 1
