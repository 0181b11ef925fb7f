"""Carlitz multiple (star) polylogarithms over k and in both completions.

Conventions: ``Li*_s(u) = sum over i_1 >= ... >= i_r >= 0`` of
``u_1^{q^{i_1}} ... u_r^{q^{i_r}} / (L_{i_1}^{s_1} ... L_{i_r}^{s_r})``;
the non-star ``Li`` uses strict inequalities.  Arguments are always given in
the order they appear in the sum; the extended v-adic value reverses them
internally when building the module G_{s,u}.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .completions import (
    InfSeries,
    MagnitudeBound,
    VAdicSeries,
    as_place,
    compare_magnitude,
    embed_fraction,
    embed_inf,
    embed_v,
)
from .fqarith import (
    Index,
    RatFunc,
    L_degree,
    L_factorial,
    binomial_mod_p,
    carlitz_factor,
    inf_valuation,
    v_valuation,
)
from .tmodule import DomainError, act, build_G, eval_log, special_point

__all__ = [
    "DomainVerdict",
    "ChenResult",
    "domain_check",
    "li_star_trunc",
    "star_fractions_upto",
    "li_trunc",
    "li_star_inf",
    "li_inf",
    "li_star_v_conv",
    "li_star_v_extended",
    "chen_weight_coordinate",
]


def _field_of(u):
    for x in u:
        if hasattr(x, "field"):
            return x.field
    raise TypeError("cannot determine the field; pass RatFunc or Poly entries")


def _coerce_point(index, u):
    index = Index(index)
    if len(u) != index.dep:
        raise ValueError(f"expected {index.dep} arguments, got {len(u)}")
    field = _field_of(u)
    return index, [RatFunc.coerce(field, x) for x in u], field


def _vinf(x):
    return None if x.is_zero() else inf_valuation(x)


def _vv(x, place):
    return None if x.is_zero() else v_valuation(x, place.v)[0]


# ------------------------------------------------------------------ domains

@dataclass
class DomainVerdict:
    """Membership of a point in the convergence and definition domains."""

    in_D_inf: bool
    in_D_conv_v: bool
    in_D_def_v: bool
    in_X: list
    in_X0: list
    comparisons: list = dc_field(default_factory=list)


def _fmt_abs(val, units, dv=1):
    if val is None:
        return f"|0|_{units} = 0"
    return f"|u|_{units} = q^({-val * (dv if units == 'v' else 1)})"


def domain_check(index, u, v):
    """Exact domain verdicts for the point u at the places infinity and v."""
    index, u, field = _coerce_point(index, u)
    place = as_place(v)
    q = field.q
    comparisons = []
    inf_ok = True
    conv_ok = True
    def_ok = True
    in_x, in_x0 = [], []
    for k, (s, x) in enumerate(zip(index, u)):
        vi, vv = _vinf(x), _vv(x, place)
        bound = MagnitudeBound(s * q, q - 1)
        le_inf = compare_magnitude(vi, "inf", bound, strict=False)
        lt_inf = compare_magnitude(vi, "inf", bound, strict=True)
        le_v = compare_magnitude(vv, "v", MagnitudeBound(0), strict=False, dv=place.dv)
        lt_v = compare_magnitude(vv, "v", MagnitudeBound(0), strict=True, dv=place.dv)
        strict_inf = k == 0
        ok_inf = lt_inf if strict_inf else le_inf
        inf_ok &= ok_inf
        def_ok &= le_v
        conv_ok &= lt_v if k == 0 else le_v
        in_x.append(le_inf and le_v)
        in_x0.append(lt_inf and lt_v)
        rel = "<" if strict_inf else "<="
        comparisons.append(
            f"u_{k + 1}: {_fmt_abs(vi, 'inf')} {rel} q^({bound.exponent}): {ok_inf}; "
            f"{_fmt_abs(vv, 'v', place.dv)} vs 1: <= {le_v}, < {lt_v}")
    return DomainVerdict(inf_ok, conv_ok and def_ok, def_ok, in_x, in_x0, comparisons)


def _require_inf_domain(index, u, q):
    for k, (s, x) in enumerate(zip(index, u)):
        ok = compare_magnitude(_vinf(x), "inf", MagnitudeBound(s * q, q - 1), strict=(k == 0))
        if not ok:
            rel = "<" if k == 0 else "<="
            raise DomainError(
                f"need |u_{k + 1}|_inf {rel} q^({s}q/(q-1)); val_inf(u_{k + 1}) = {_vinf(x)}")


def _require_v_domain(u, place, strict_first):
    for k, x in enumerate(u):
        vv = _vv(x, place)
        ok = compare_magnitude(vv, "v", MagnitudeBound(0), strict=(strict_first and k == 0),
                               dv=place.dv)
        if not ok:
            rel = "<" if (strict_first and k == 0) else "<="
            raise DomainError(f"need |u_{k + 1}|_v {rel} 1; val_v(u_{k + 1}) = {vv}")


# ------------------------------------------------------- truncated sums

def _star_fraction(index, u, n):
    return star_fractions_upto(index, u, n)[n]


def star_fractions_upto(index, u, n):
    """[(num_n', L_{n'}^{wt}) for n' = 0..n]: Li*_{<=n'} for polynomial arguments.

    With S_k(i) = Li*_{<=i}((s_k..s_r); (u_k..u_r)) = num_k(i) / L_i^{w_k}
    (w_k = s_k + ... + s_r), the recursion
    S_k(i) = S_k(i-1) + u_k^{q^i} / L_i^{s_k} * S_{k+1}(i)
    becomes num_k(i) = num_k(i-1) * c_i^{w_k} + u_k^{q^i} * num_{k+1}(i).
    """
    field = u[0].field
    r = len(index)
    weights = [sum(index[k:]) for k in range(r)] + [0]
    polys = [RatFunc.coerce(field, x).num for x in u]
    nums = [None] * (r + 1)
    nums[r] = field.one_poly()
    for k in range(r - 1, -1, -1):
        nums[k] = polys[k] * nums[k + 1]
    out = [(nums[0], field.one_poly())]
    for i in range(1, n + 1):
        c = carlitz_factor(field, i)
        cpow = {}
        new = [None] * (r + 1)
        new[r] = field.one_poly()
        for k in range(r - 1, -1, -1):
            w = weights[k]
            if w not in cpow:
                cpow[w] = c**w
            new[k] = nums[k] * cpow[w] + polys[k].twist(i) * new[k + 1]
        nums = new
        out.append((nums[0], L_factorial(field, i) ** weights[0]))
    return out


def _star_ratfunc(index, u, n):
    field = u[0].field
    r = len(index)
    one = RatFunc(field, field.one_poly())
    sums = [None] * (r + 1)
    sums[r] = one
    for k in range(r - 1, -1, -1):
        sums[k] = u[k] * sums[k + 1]
    for i in range(1, n + 1):
        li = RatFunc(field, L_factorial(field, i))
        new = [None] * (r + 1)
        new[r] = one
        for k in range(r - 1, -1, -1):
            new[k] = sums[k] + u[k].twist(i) / li ** index[k] * new[k + 1]
        sums = new
    return sums[0]


def li_star_trunc(index, u, n):
    """Li*_{<=n}(u): the exact finite sum over n >= i_1 >= ... >= i_r >= 0."""
    index, u, field = _coerce_point(index, u)
    if n < 0:
        raise ValueError("n must be non-negative")
    if all(x.is_poly() for x in u):
        num, den = _star_fraction(index, u, n)
        return RatFunc(field, num, den)
    return _star_ratfunc(index, u, n)


def _plain_fraction(index, u, n):
    """Li_{<=n} (strict inequalities) as (numerator, L_n^{wt}), polynomial u.

    T_k(i) = T_k(i-1) + u_k^{q^i}/L_i^{s_k} * T_{k+1}(i-1), with T_{r+1} = 1
    and T_k(-1) = 0 for k <= r.
    """
    field = u[0].field
    r = len(index)
    weights = [sum(index[k:]) for k in range(r)] + [0]
    polys = [x.num for x in u]
    zero, one = field.zero_poly(), field.one_poly()
    nums = [zero] * r + [one]
    nums[r - 1] = polys[r - 1]
    for k in range(r - 2, -1, -1):
        nums[k] = zero
    for i in range(1, n + 1):
        c = carlitz_factor(field, i)
        new = [None] * (r + 1)
        new[r] = one
        for k in range(r):
            w = weights[k]
            # T_{k+1}(i-1) over L_{i-1}^{w_{k+1}} -> over L_i^{w_{k+1}}
            carried = nums[k + 1] * c ** weights[k + 1] if k + 1 < r else one
            new[k] = nums[k] * c**w + polys[k].twist(i) * carried
        nums = new
    return nums[0], L_factorial(field, n) ** weights[0]


def li_trunc(index, u, n):
    """Li_{<=n}(u): the exact finite sum over n >= i_1 > ... > i_r >= 0."""
    index, u, field = _coerce_point(index, u)
    if all(x.is_poly() for x in u):
        num, den = _plain_fraction(index, u, n)
        return RatFunc(field, num, den)
    one = RatFunc(field, field.one_poly())
    zero = RatFunc(field, field.zero_poly())
    r = len(index)
    sums = [zero] * r + [one]
    sums[r - 1] = u[r - 1]
    for i in range(1, n + 1):
        li = RatFunc(field, L_factorial(field, i))
        new = [None] * (r + 1)
        new[r] = one
        for k in range(r):
            new[k] = sums[k] + u[k].twist(i) / li ** index[k] * sums[k + 1]
        sums = new
    return sums[0]


def _sum_fraction(index, u, n, star):
    """(num, den) for the truncated sum, skipping the gcd when possible."""
    field = u[0].field
    if all(x.is_poly() for x in u):
        return (_star_fraction if star else _plain_fraction)(index, u, n)
    val = _star_ratfunc(index, u, n) if star else li_trunc(index, u, n)
    return val.num, val.den


# --------------------------------------------------------------- infinity

def _inf_cutoff(index, u, prec):
    """Least I with every term having i_1 > I of valuation > prec.

    A term has valuation sum_m g_m(i_m), g_m(i) = q^i val(u_m) + s_m deg L_i.
    On the domain each g_m is minimized at i = 0 and g_1 strictly increases,
    so terms with i_1 > I are bounded below by g_1(I+1) + sum_{m>=2} val(u_m).
    """
    q = u[0].field.q
    rest = sum(inf_valuation(x) for x in u[1:])
    v1 = inf_valuation(u[0])
    i = 0
    while q ** (i + 1) * v1 + index[0] * L_degree(q, i + 1) + rest <= prec:
        i += 1
    return i


def _li_inf(index, u, prec, star):
    index, u, field = _coerce_point(index, u)
    _require_inf_domain(index, u, field.q)
    if any(x.is_zero() for x in u):
        return InfSeries.zero(field, prec)
    cutoff = _inf_cutoff(index, u, prec)
    num, den = _sum_fraction(index, u, cutoff, star)
    return embed_fraction(num, den, None, prec)


def li_star_inf(index, u, prec):
    """Li*_s(u) in k_inf through T^{-prec}."""
    return _li_inf(index, u, prec, True)


def li_inf(index, u, prec):
    """Li_s(u) in k_inf through T^{-prec}."""
    return _li_inf(index, u, prec, False)


# ---------------------------------------------------------------- v-adic

def _v_cutoff(index, u, place, prec):
    """Least I with every term having i_1 > I of v-valuation > prec.

    val_v(L_i) = floor(i / deg v), so a term is bounded below by
    h(i_1) = q^{i_1} val_v(u_1) - wt * floor(i_1 / deg v), and h is
    increasing from the first i with q^i (q-1) val_v(u_1) >= wt.
    """
    q = place.field.q
    v1 = v_valuation(u[0], place.v)[0]
    wt = index.wt
    i = 0
    while True:
        nxt = i + 1
        if q**nxt * (q - 1) * v1 >= wt and q**nxt * v1 - wt * (nxt // place.dv) > prec:
            return i
        i += 1


def li_star_v_conv(index, u, v, prec):
    """Li*_s(u)_v on the convergence domain (|u_1|_v < 1, |u_i|_v <= 1)."""
    index, u, field = _coerce_point(index, u)
    place = as_place(v)
    _require_v_domain(u, place, strict_first=True)
    if any(x.is_zero() for x in u):
        return VAdicSeries.zero(place, prec)
    cutoff = _v_cutoff(index, u, place, prec)
    num, den = _sum_fraction(index, u, cutoff, True)
    return embed_fraction(num, den, place, prec)


def li_star_v_extended(index, u, v, prec, extra_factor=None):
    """Li*_s(u)_v on the closed polydisc |u_i|_v <= 1, through the logarithm.

    With (s', u') the reversed data and G = G_{s',u'}, take
    a(t) = prod_i (v(t)^{d_i} - 1) (times ``extra_factor`` if given); then
    y = [a] v_{s',u'} is v-adically small and
    Li*_s(u)_v = (-1)^{r-1} / a(T) * (wt coordinate of log_G(y)).
    """
    index, u, field = _coerce_point(index, u)
    place = as_place(v)
    _require_v_domain(u, place, strict_first=False)
    if any(x.is_zero() for x in u):
        return VAdicSeries.zero(place, prec)
    g_index = index.reversed()
    g_u = list(reversed(u))
    G = build_G(g_index, g_u)
    one = field.one_poly()
    a = one
    for d in G.blocks:
        a = a * (place.v**d - one)
    if extra_factor is not None:
        a = a * extra_factor
    y = act(a, G, special_point(g_index, g_u))
    for k, c in enumerate(y):
        if not c.is_zero() and v_valuation(c, place.v)[0] < 1:
            raise RuntimeError(f"internal error: [a]v has coordinate {k + 1} with |.|_v >= 1")
    a_val = v_valuation(RatFunc(field, a), place.v)[0]
    wt = G.wt_coord
    w = eval_log(G, y, place, prec + a_val, coords=[wt])[wt]
    result = w / RatFunc(field, a)
    if G.r % 2 == 0:
        result = -result
    return result.truncate(prec)


# ----------------------------------------------------------- key identity

@dataclass
class ChenResult:
    """Both evaluations of the wt coordinate and their agreement."""

    formula: object
    logarithm: object
    match: bool
    precision: int
    first_difference: object = None


def chen_weight_coordinate(index, u, x, completion="inf", prec=30):
    """Evaluate the wt coordinate of log_{G_{s,u}}(x) as a combination of CMSPLs.

    The sum runs over blocks m, positions j and 0 <= l <= d_m - j with
    coefficient (-1)^l binom(d_m - j, l) T^{d_m - j - l}; block 1 contributes
    Li*_{d_1}(T^l x_{1,j}) and block m >= 2 contributes (-1)^{m-1} times
    Li*_{(d_m, s_{m-1}..s_1)}(T^l x_{m,j}, u_{m-1}..u_1)
    - Li*_{(d_{m-1}, s_{m-2}..s_1)}(T^l x_{m,j} u_{m-1}, u_{m-2}..u_1).
    The result is compared against eval_log of the same coordinate.
    """
    index, u, field = _coerce_point(index, u)
    G = build_G(index, u)
    x = [RatFunc.coerce(field, c) for c in x]
    if len(x) != G.d:
        raise ValueError("point dimension mismatch")
    q, p = field.q, field.p
    theta = field.theta()
    inf = completion in ("inf", "∞", None)
    place = None if inf else as_place(completion)
    if inf:
        for a in range(G.d):
            dm = G.blocks[G.block_of[a]]
            j = G.pos_in_block[a]
            bound = MagnitudeBound(dm * q - (dm - j) * (q - 1), q - 1)
            if not compare_magnitude(_vinf(x[a]), "inf", bound, strict=True):
                raise DomainError(f"|x_{a + 1}|_inf is not below q^({bound.exponent})")
    else:
        for a in range(G.d):
            if not compare_magnitude(_vv(x[a], place), "v", MagnitudeBound(0), strict=True,
                                     dv=place.dv):
                raise DomainError(f"|x_{a + 1}|_v >= 1")
        _require_v_domain(u, place, strict_first=False)

    def cmspl(idx, args, extra):
        if any(c.is_zero() for c in args):
            return None
        if inf:
            return li_star_inf(idx, args, prec + extra)
        return li_star_v_conv(idx, args, place, prec)

    total = InfSeries.zero(field, prec) if inf else VAdicSeries.zero(place, prec)
    for m in range(G.r):
        dm = G.blocks[m]
        for j in range(1, dm + 1):
            xmj = x[G.starts[m] + j - 1]
            if xmj.is_zero():
                continue
            for ell in range(dm - j + 1):
                coeff = binomial_mod_p(dm - j, ell, p)
                if coeff == 0:
                    continue
                if (ell + m) % 2:
                    coeff = -coeff
                power = dm - j - ell
                arg = xmj * theta**ell
                if m == 0:
                    val = cmspl(Index([dm]), [arg], power)
                else:
                    idx1 = Index([dm] + [index[k] for k in range(m - 1, -1, -1)])
                    args1 = [arg] + [u[k] for k in range(m - 1, -1, -1)]
                    idx2 = Index([G.blocks[m - 1]] + [index[k] for k in range(m - 2, -1, -1)])
                    args2 = [arg * u[m - 1]] + [u[k] for k in range(m - 2, -1, -1)]
                    first = cmspl(idx1, args1, power)
                    second = cmspl(idx2, args2, power)
                    if first is None and second is None:
                        continue
                    if first is None:
                        val = -second
                    elif second is None:
                        val = first
                    else:
                        val = first - second
                if val is None:
                    continue
                term = val * (field.const(coeff) * theta**power)
                total = total + term.truncate(prec)
    total = total.truncate(prec)
    wt = G.wt_coord
    via_log = eval_log(G, x, "inf" if inf else place, prec, coords=[wt])[wt]
    match = total.agrees(via_log, prec)
    diff = None if match else total.first_difference(via_log)
    return ChenResult(total, via_log, match, prec, diff)


del embed_inf, embed_v
