import itertools
import random

import pytest

from fqmzv.checks import _sample_inf_point, _sample_v_point, index_grid, module_grid
from fqmzv.completions import as_place, embed_inf, embed_v
from fqmzv.fqarith import FiniteField, Index, RatFunc, L_factorial
from fqmzv.polylog import (
    _inf_cutoff,
    _v_cutoff,
    chen_weight_coordinate,
    domain_check,
    li_inf,
    li_star_inf,
    li_star_trunc,
    li_star_v_conv,
    li_star_v_extended,
    li_trunc,
)
from fqmzv.tmodule import DomainError, act, build_G, eval_log, special_point


def R(field, x):
    return RatFunc.coerce(field, x)


def tuple_sum(index, u, n, strict):
    """Sum over n >= i_1 >= ... >= i_r >= 0 (strict: >) of prod u_k^{q^{i_k}} / L_{i_k}^{s_k}."""
    field = u[0].field
    total = R(field, field.zero_poly())
    r = len(index)
    for tup in itertools.product(range(n + 1), repeat=r):
        pairs = list(zip(tup, tup[1:]))
        if strict and any(a <= b for a, b in pairs):
            continue
        if not strict and any(a < b for a, b in pairs):
            continue
        term = R(field, field.one_poly())
        for i, s, x in zip(tup, index, u):
            term = term * x.twist(i) / R(field, L_factorial(field, i)) ** s
        total = total + term
    return total


# ------------------------------------------------------------- examples

def test_domain_examples(F2):
    T = R(F2, F2.theta())
    one = R(F2, F2.one_poly())
    d = domain_check([1], [T], F2.theta())
    assert d.in_D_inf and d.in_D_conv_v
    d = domain_check([1], [one], F2.theta())
    assert d.in_D_def_v and not d.in_D_conv_v
    d = domain_check([1], [T * T], F2.theta())
    assert not d.in_D_inf and d.in_X == [True] and d.in_X0 == [False]
    assert any("<" in c for c in d.comparisons)


def test_truncation_examples(F2, F3):
    for field in (F2, F3):
        T = R(field, field.theta())
        one = R(field, field.one_poly())
        q = field.q
        c1 = R(field, field.theta() - field.theta() ** q)
        assert li_star_trunc([3], [T + one], 0) == T + one
        assert li_star_trunc([1], [T], 1) == T + T**q / c1
        expected = T * one + T**q * one / c1 + T**q * one / (c1 * c1)
        assert li_star_trunc([1, 1], [T, one], 1) == expected


@pytest.mark.parametrize("p", [2, 3])
def test_truncations_match_tuple_enumeration(p):
    field = FiniteField(p)
    T = R(field, field.theta())
    one = R(field, field.one_poly())
    points = [([1], [T]), ([2, 1], [T, one]), ([1, 1, 1], [T + one, one, T]),
              ([1, 2], [T / (T + one), T * T])]
    for s, u in points:
        for n in range(4):
            assert li_star_trunc(s, u, n) == tuple_sum(s, u, n, strict=False)
            assert li_trunc(s, u, n) == tuple_sum(s, u, n, strict=True)


def test_depth_one_star_is_plain(F3):
    T = R(F3, F3.theta())
    assert li_star_inf([2], [T], 30).agrees(li_inf([2], [T], 30), 30)


def test_li_star_two_at_one_first_coefficients(F2):
    one = R(F2, F2.one_poly())
    series = li_star_inf([2], [one], 10)
    oracle = embed_inf(li_star_trunc([2], [one], 6), 10)
    assert series.agrees(oracle, 10)
    assert series.terms()[0][0] == 0


def test_v_conv_examples(F2):
    T = R(F2, F2.theta())
    one = R(F2, F2.one_poly())
    v = F2.theta()
    assert li_star_v_conv([1], [R(F2, F2.zero_poly())], v, 10).is_zero()
    series = li_star_v_conv([1, 1], [T, one], v, 5)
    assert series.agrees(embed_v(li_star_trunc([1, 1], [T, one], 4), v, 5), 5)
    with pytest.raises(DomainError):
        li_star_v_conv([1], [one], v, 5)


@pytest.mark.parametrize("pe", [(3, 1), (2, 2)])
def test_extended_value_at_one(pe):
    field = FiniteField(*pe)
    T = R(field, field.theta())
    one = R(field, field.one_poly())
    v = field.theta()
    ext = li_star_v_extended([1], [one], v, 20)
    conv = li_star_v_conv([1], [T], v, 22)
    expected = (conv / (T - one)).truncate(20)
    assert ext.agrees(expected, 20)
    assert not ext.is_zero()


def test_extended_agrees_with_convergent(F3):
    T = R(F3, F3.theta())
    one = R(F3, F3.one_poly())
    v = F3.theta()
    for s, u in (([1], [T]), ([2, 1], [T, one]), ([1, 1], [T * (T + one), T + one])):
        assert li_star_v_extended(s, u, v, 15).agrees(li_star_v_conv(s, u, v, 15), 15)


def test_extended_invariant_under_extra_factors(F2, F3):
    for field in (F2, F3):
        T = field.theta()
        one = field.one_poly()
        s, u = [2, 1], [R(field, T + one), R(field, one)]
        base = li_star_v_extended(s, u, T, 15)
        G = build_G(Index(s).reversed(), list(reversed(u)))
        for d in G.blocks:
            other = li_star_v_extended(s, u, T, 15, extra_factor=T**d - one)
            assert base.agrees(other, 15)


def test_chen_examples(F3):
    T = R(F3, F3.theta())
    one = R(F3, F3.one_poly())
    zero = R(F3, F3.zero_poly())
    x = [zero, zero, T]
    res = chen_weight_coordinate([3], [one], x, "inf", 25)
    assert res.match
    assert res.formula.agrees(li_star_inf([3], [T], 25), 25)
    res = chen_weight_coordinate([2, 1], [T, one], [zero] * 4, "inf", 10)
    assert res.match and res.formula.is_zero()
    # (1,1), (T,1) at the v-adically small point [a] v_{s,u}
    v = F3.theta()
    G = build_G([1, 1], [T, one])
    a = (v**2 - F3.one_poly()) * (v - F3.one_poly())
    y = act(a, G, special_point([1, 1], [T, one]))
    res = chen_weight_coordinate([1, 1], [T, one], y, v, 20)
    assert res.match and not res.logarithm.is_zero()


def test_chen_reports_domain_violations(F2):
    T = R(F2, F2.theta())
    one = R(F2, F2.one_poly())
    with pytest.raises(DomainError):
        chen_weight_coordinate([1], [one], [T**2], "inf", 10)
    with pytest.raises(DomainError):
        chen_weight_coordinate([1], [one], [one], F2.theta(), 10)


# ----------------------------------------------------------- properties

def _grid_with_zero(field):
    T = field.theta()
    one = field.one_poly()
    values = [R(field, field.zero_poly()), R(field, one), R(field, T), R(field, T + one)]
    return [(s, list(u)) for s in index_grid(5, 3)
            for u in itertools.product(values, repeat=s.dep)]


@pytest.mark.parametrize("p", [2, 3])
def test_series_agree_with_truncations(p):
    """li_star_inf / li_star_v_conv equal the exact truncation past their own cutoff."""
    field = FiniteField(p)
    T = field.theta()
    place = as_place(T)
    rng = random.Random(p)
    points = rng.sample(_grid_with_zero(field), 120)
    inf_count = v_count = 0
    for s, u in points:
        d = domain_check(s, u, T)
        if d.in_D_inf:
            series = li_star_inf(s, u, 25)
            if not any(x.is_zero() for x in u):
                n = _inf_cutoff(Index(s), u, 25) + 2
                assert series.agrees(embed_inf(li_star_trunc(s, u, n), 25), 25)
                inf_count += 1
            else:
                assert series.is_zero()
        if d.in_D_conv_v:
            series = li_star_v_conv(s, u, T, 15)
            if not any(x.is_zero() for x in u):
                n = _v_cutoff(Index(s), u, place, 15) + 2
                assert series.agrees(embed_v(li_star_trunc(s, u, n), T, 15), 15)
                v_count += 1
    assert inf_count > 20 and v_count > 5


def test_log_series_consistency_small(F3):
    """(-1)^{r-1} Li*_{reversed}(reversed) is the wt coordinate of log_G(v_{s,u})."""
    T = F3.theta()
    for s, u in random.Random(7).sample(module_grid(F3, max_wt=4), 25):
        G = build_G(s, u)
        sign = -1 if G.r % 2 == 0 else 1
        via_log = eval_log(G, special_point(s, u), "inf", 20, coords=[G.wt_coord])[G.wt_coord]
        series = li_star_inf(Index(s).reversed(), list(reversed(u)), 20)
        assert series.agrees(via_log * sign, 20)


def test_chen_identity_sampled_q3(F3):
    """The key identity away from q = 2, both completions."""
    rng = random.Random(11)
    T = F3.theta()
    for s, u in rng.sample(module_grid(F3, max_wt=4), 15):
        G = build_G(s, u)
        for completion, prec, x in (("inf", 20, _sample_inf_point(G, rng)),
                                    (T, 12, _sample_v_point(G, T, rng))):
            res = chen_weight_coordinate(s, u, x, completion, prec)
            assert res.match, res.first_difference
