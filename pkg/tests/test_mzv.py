import pytest

from fqmzv.checks import field_from_q, index_grid, zeta_bruteforce
from fqmzv.completions import embed_inf
from fqmzv.fqarith import FiniteField, Index, RatFunc, L_degree, inf_valuation, monic_enumerate
from fqmzv.mzv import (
    Certificate,
    CertificateError,
    builtin_certificate,
    chen_product,
    power_sum,
    verify_certificate,
    verify_relation_inf,
    verify_relation_v,
    zeta_degree_cutoff,
    zeta_inf,
    zeta_partial,
    zeta_v,
)
from fqmzv.polylog import li_star_inf, li_star_v_conv


def R(field, x):
    return RatFunc.coerce(field, x)


def depth_two_certificate(field):
    """zeta(1,1) = Li_{(1,1)}(1,1) = Li*_{(1,1)}(1,1) - Li*_{(2)}(1), in certificate form."""
    one = R(field, field.one_poly())
    return Certificate(field, [1, 1], [(-one, [1, 1], [one, one]), (-one, [2], [one])],
                       "star rewriting of the depth-two polylogarithm at (1,1)")


# ------------------------------------------------------------- examples

def test_partial_sum_examples(F2):
    T = F2.theta()
    one = F2.one_poly()
    expected = R(F2, one) + RatFunc(F2, one, T**2 + T)
    assert zeta_partial(F2, [1], 1) == expected
    assert zeta_partial(F2, [1, 1, 1], 1).is_zero()
    assert zeta_partial(F2, [2, 1], 3) == zeta_bruteforce(F2, [2, 1], 3)


@pytest.mark.parametrize("p", [2, 3])
def test_partial_sums_match_bruteforce(p):
    field = FiniteField(p)
    for s in index_grid(4, 2):
        for D in range(4):
            assert zeta_partial(field, s, D) == zeta_bruteforce(field, s, D)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_builtin_certificates_verify(q):
    field = field_from_q(q)
    for s in range(1, q + 1):
        verdict = verify_certificate(builtin_certificate(field, [s]), 60)
        assert verdict.ok, verdict.describe()
        assert "verified through T^-60" in verdict.describe()
    with pytest.raises(CertificateError):
        builtin_certificate(field, [q + 1])


def test_corrupted_certificate_fails(F3):
    T = R(F3, F3.theta())
    one = R(F3, F3.one_poly())
    bad = Certificate(F3, [2], [(one + one / T**3, [2], [one])])
    verdict = verify_certificate(bad, 40)
    assert not verdict.ok and verdict.first_mismatch == 3
    assert "first mismatch" in verdict.describe()
    with pytest.raises(CertificateError):
        zeta_v([2], F3.theta(), 10, cert=bad)


def test_depth_two_certificate_is_checked(F2, F3):
    for field in (F2, F3):
        verdict = verify_certificate(depth_two_certificate(field), 40)
        assert verdict.ok, verdict.describe()


def test_certificate_validation(F2):
    one = R(F2, F2.one_poly())
    T = R(F2, F2.theta())
    with pytest.raises(CertificateError):
        Certificate(F2, [2], [(one, [1], [one])])  # weight mismatch
    with pytest.raises(CertificateError):
        Certificate(F2, [2], [(one, [1, 1], [one, one])])  # deeper than the target
    with pytest.raises(CertificateError):
        Certificate(F2, [1], [(one, [1], [one / T])])  # not integral


@pytest.mark.parametrize("pe", [(2, 1), (2, 2), (3, 2)])
def test_certificate_json_round_trip(pe):
    field = FiniteField(*pe)
    cert = builtin_certificate(field, [2])
    back = Certificate.from_json(cert.to_json())
    assert back.field is field
    assert tuple(back.index) == (2,)
    assert back.terms == cert.terms


def test_zeta_v_examples(F2, F3, F4):
    T4 = F4.theta()
    z = zeta_v([1], T4, 20)
    expected = (li_star_v_conv([1], [R(F4, T4)], T4, 22) / R(F4, T4 - F4.one_poly())).truncate(20)
    assert z.agrees(expected, 20) and not z.is_zero()
    assert zeta_v([1], F2.theta(), 30).is_zero()
    assert zeta_v([2], F3.theta(), 20).is_zero()


def test_chen_product_examples():
    rel = chen_product(1, 1, 2)
    assert rel.render() == "zeta[1] * zeta[1] = 1*zeta[2]"
    rel = chen_product(2, 2, 5)
    assert (2, Index([2, 2])) in rel.right
    rel = chen_product(1, 2, 3)
    assert verify_relation_inf(rel, 40, FiniteField(3)).ok
    assert "i >= 1" in rel.note


def test_relation_verdicts(F2, F4):
    rel = chen_product(1, 1, 2)
    assert verify_relation_inf(rel, 40, F2).ok
    verdict = verify_relation_v(rel, F2.theta(), 30)
    assert verdict.ok and verdict.lhs.is_zero() and verdict.rhs.is_zero()
    rel4 = chen_product(1, 1, 4)
    verdict = verify_relation_v(rel4, F4.theta(), 25)
    assert verdict.ok and not verdict.lhs.is_zero()


def test_missing_certificate_cannot_check(F3):
    rel = chen_product(1, 1, 3)  # needs zeta(1,1)
    verdict = verify_relation_v(rel, F3.theta(), 10)
    assert not verdict.ok and "cannot check" in verdict.note


def test_v_adic_relation_with_depth_two_certificate(F3):
    """zeta(1)^2 = 2 zeta(1,1) + zeta(2) at v = T and v = T^2 + 1, through a supplied certificate."""
    rel = chen_product(1, 1, 3)
    certs = {(1, 1): depth_two_certificate(F3)}
    for v in (F3.theta(), F3.theta() ** 2 + F3.one_poly()):
        verdict = verify_relation_v(rel, v, 12, certs)
        assert verdict.ok, verdict.describe()


# ----------------------------------------------------------- properties

@pytest.mark.parametrize("q", [2, 3, 4])
def test_power_sum_valuation_lemma(q):
    """val_inf(S_d(s)) >= deg L_d, which the degree cutoff of the zeta DP relies on."""
    field = field_from_q(q)
    max_d = {2: 5, 3: 3, 4: 3}[q]
    for d in range(max_d + 1):
        for s in range(1, 9):
            total = R(field, field.zero_poly())
            for a in monic_enumerate(field, d):
                total = total + RatFunc(field, field.one_poly(), a**s)
            assert total == power_sum(field, d, s)
            if not total.is_zero():
                assert inf_valuation(total) >= max(s * d, L_degree(q, d))


@pytest.mark.parametrize("q", [2, 3])
def test_degree_cutoff_is_sufficient(q):
    """Partial sums two degrees past the cutoff agree with zeta_inf at its precision."""
    field = field_from_q(q)
    for s in ([1], [2], [1, 1], [2, 1], [1, 2]):
        N = 20
        D = zeta_degree_cutoff(q, Index(s), N)
        longer = embed_inf(zeta_bruteforce(field, s, D + 2), N)
        assert zeta_inf(s, N, field).agrees(longer, N)


def test_cutoff_values_at_precision_40():
    assert [zeta_degree_cutoff(q, Index([1]), 40) for q in (2, 3, 4)] == [4, 3, 2]


@pytest.mark.parametrize("q", [2, 3, 4])
def test_depth_one_small_weight_is_a_polylog(q):
    field = field_from_q(q)
    one = R(field, field.one_poly())
    for s in range(1, q + 1):
        assert zeta_inf([s], 40, field).agrees(li_star_inf([s], [one], 40), 40)


def test_zeta_v_independent_of_auxiliary_factor(F3, F4):
    for field, s in ((F4, [1]), (F4, [2]), (F3, [1])):
        T = field.theta()
        base = zeta_v(s, T, 15)
        other = zeta_v(s, T, 15, extra_factor=T**2 - field.one_poly())
        assert base.agrees(other, 15)
    cert = depth_two_certificate(F3)
    T = F3.theta()
    base = zeta_v([1, 1], T, 12, cert)
    assert base.agrees(zeta_v([1, 1], T, 12, cert, extra_factor=T - F3.one_poly()), 12)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_all_small_chen_relations(q):
    field = field_from_q(q)
    for r in range(1, 5):
        for s in range(1, 6 - r):
            verdict = verify_relation_inf(chen_product(r, s, q), 40, field)
            assert verdict.ok, (r, s, verdict.describe())


def test_worked_example_closed_forms(F4):
    """q = 4, v = T: zeta(1) = Li*_1(T)/(T-1) and zeta(2) = Li*_2(T^2)/(T^2-1)."""
    T = F4.theta()
    one = F4.one_poly()
    M = 25
    z1 = zeta_v([1], T, M)
    z2 = zeta_v([2], T, M)
    form1 = li_star_v_conv([1], [R(F4, T)], T, M + 2) / R(F4, T - one)
    form2 = li_star_v_conv([2], [R(F4, T**2)], T, M + 2) / R(F4, T**2 - one)
    assert z1.agrees(form1.truncate(M), M)
    assert z2.agrees(form2.truncate(M), M)
    assert (z1 * z1).truncate(M).agrees(z2, M)
