"""Multiple zeta values over A = F_q[T] at infinity and at a finite place v.

zeta_A(s) = sum over monic a_1, ..., a_r with deg a_1 > ... > deg a_r of
1/(a_1^{s_1} ... a_r^{s_r}).  At infinity this is a direct series built from
the power sums S_d(s) = sum_{a monic, deg a = d} a^{-s}.  At v it is defined
through a decomposition certificate: zeta_A(s) = sum_l b_l (-1)^{dep_l - 1}
Li*_{s_l}(u_l), and the v-adic value replaces each Li* by its v-adic version.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field as dc_field

from .completions import InfSeries, VAdicSeries, as_place, embed_inf
from .fqarith import (
    FiniteField,
    Index,
    RatFunc,
    L_degree,
    binomial_mod_p,
    format_poly,
    format_ratfunc,
    inf_valuation,
    monic_enumerate,
    parse_modulus,
    parse_ratfunc,
    v_valuation,
)
from .polylog import li_star_inf, li_star_v_extended

__all__ = [
    "Certificate",
    "CertificateError",
    "QShuffleRelation",
    "Verdict",
    "power_sum",
    "zeta_partial",
    "zeta_degree_cutoff",
    "zeta_inf",
    "builtin_certificate",
    "verify_certificate",
    "zeta_v",
    "chen_product",
    "verify_relation_inf",
    "verify_relation_v",
]


class CertificateError(ValueError):
    """A certificate is malformed, unverified, or missing."""


# --------------------------------------------------------------- power sums

@functools.lru_cache(maxsize=None)
def _power_sum_cached(field, d, s):
    total = RatFunc(field, field.zero_poly())
    for a in monic_enumerate(field, d):
        total = total + RatFunc(field, field.one_poly(), a**s)
    return total


def power_sum(field, d, s):
    """S_d(s) = sum over monic a of degree d of a^{-s}, by enumeration."""
    if d < 0 or s < 1:
        raise ValueError("need d >= 0 and s >= 1")
    return _power_sum_cached(field, d, s)


def zeta_partial(field, index, D):
    """Exact partial sum of zeta_A(s) over D >= d_1 > d_2 > ... > d_r >= 0.

    Dynamic programming: Z_k(e) = sum_{d < e} S_d(s_k) Z_{k+1}(d).
    """
    index = Index(index)
    r = index.dep
    zero = RatFunc(field, field.zero_poly())
    one = RatFunc(field, field.one_poly())
    # inner[d] = sum over tuples for positions k+1.. with first degree < d
    inner = [one] * (D + 2)
    for k in range(r - 1, -1, -1):
        new = [zero] * (D + 2)
        acc = zero
        for e in range(D + 2):
            new[e] = acc
            if e <= D:
                term = inner[e]
                if not term.is_zero():
                    acc = acc + power_sum(field, e, index[k]) * term
        inner = new
    return inner[D + 1]


def zeta_degree_cutoff(q, index, prec):
    """Least D such that every omitted term (deg a_1 > D) has valuation > prec.

    A tuple with degrees d_1 > ... > d_r has d_i >= r - i, and
    val(S_d(s)) >= max(s d, deg L_d): every summand has valuation s d, and
    the whole power sum has valuation at least deg L_d = (q^{d+1}-q)/(q-1).
    """
    index = Index(index)
    r = index.dep

    def low(s, d):
        return max(s * d, L_degree(q, d))

    rest = sum(low(index[i], r - 1 - i) for i in range(1, r))
    D = r - 1
    while low(index[0], D + 1) + rest <= prec:
        D += 1
    return D


def zeta_inf(index, prec, field):
    """zeta_A(s) in k_inf through T^{-prec}."""
    index = Index(index)
    D = zeta_degree_cutoff(field.q, index, prec)
    return embed_inf(zeta_partial(field, index, D), prec)


# ------------------------------------------------------------- certificates

@dataclass
class Certificate:
    """zeta_A(index) = sum b_l (-1)^{dep(index_l)-1} Li*_{index_l}(u_l)."""

    field: FiniteField
    index: Index
    terms: list
    provenance: str = ""

    def __post_init__(self):
        self.index = Index(self.index)
        terms = []
        for b, idx, u in self.terms:
            idx = Index(idx)
            b = RatFunc.coerce(self.field, b)
            u = [RatFunc.coerce(self.field, x) for x in u]
            if idx.wt != self.index.wt:
                raise CertificateError(f"term index {list(idx)} has weight {idx.wt} != {self.index.wt}")
            if idx.dep > self.index.dep:
                raise CertificateError(f"term index {list(idx)} is deeper than the target")
            if len(u) != idx.dep:
                raise CertificateError("term point length must equal its depth")
            if not all(x.is_poly() for x in u):
                raise CertificateError("certificate points must be integral (in A)")
            terms.append((b, idx, u))
        self.terms = terms

    def to_json(self):
        f = self.field
        doc = {
            "q": {"p": f.p, "e": f.e},
            "index": list(self.index),
            "terms": [{"b": format_ratfunc(b), "index": list(idx),
                       "u": [format_ratfunc(x) for x in u]} for b, idx, u in self.terms],
            "provenance": self.provenance,
        }
        if f.e > 1:
            doc["q"]["modulus"] = modulus_text(f)
        return json.dumps(doc, ensure_ascii=False)

    @classmethod
    def from_json(cls, text, field=None):
        doc = json.loads(text)
        spec = doc["q"]
        if field is None:
            modulus = spec.get("modulus")
            if modulus is not None:
                modulus = parse_modulus(spec["p"], modulus)
            field = FiniteField(spec["p"], spec.get("e", 1), modulus)
        elif (field.p, field.e) != (spec["p"], spec.get("e", 1)):
            raise CertificateError("certificate field does not match")
        terms = []
        for t in doc["terms"]:
            terms.append((parse_ratfunc(field, str(t["b"])), t["index"],
                          [parse_ratfunc(field, str(x)) for x in t["u"]]))
        return cls(field, doc["index"], terms, doc.get("provenance", ""))


def modulus_text(field):
    """The defining polynomial of F_q over F_p, written in g."""
    prime = FiniteField(field.p)
    return format_poly(prime.poly(list(field.modulus)), var="g")


def builtin_certificate(field, index):
    """Depth one with s <= q: zeta_A(s) = Li*_s(1)."""
    index = Index(index)
    if index.dep != 1 or index[0] > field.q:
        raise CertificateError(
            f"no built-in certificate for {list(index)} (only depth one with s <= q)")
    one = RatFunc(field, field.one_poly())
    return Certificate(field, index, [(one, index, [one])],
                       "depth one, s <= q: the Anderson-Thakur polynomial is 1")


@dataclass
class Verdict:
    """Outcome of a finite-precision comparison (verified through the precision, not proved)."""

    ok: bool
    precision: int
    completion: str
    lhs: object
    rhs: object
    first_mismatch: object = None
    note: str = ""

    def describe(self):
        unit = "T^-" if self.completion == "inf" else "v^"
        status = "PASS" if self.ok else "FAIL"
        text = f"{status}: verified through {unit}{self.precision}" if self.ok else \
            f"{status}: first mismatch at exponent {self.first_mismatch}"
        return text + (f" ({self.note})" if self.note else "")


def _certificate_sum_inf(cert, prec):
    total = InfSeries.zero(cert.field, prec)
    for b, idx, u in cert.terms:
        if b.is_zero():
            continue
        extra = max(0, -inf_valuation(b))
        val = li_star_inf(idx, u, prec + extra) * b
        if (idx.dep - 1) % 2:
            val = -val
        total = total + val.truncate(prec)
    return total.truncate(prec)


_verified = {}


def verify_certificate(cert, prec=40):
    """Compare zeta_A(index) with the certificate's combination at infinity."""
    lhs = zeta_inf(cert.index, prec, cert.field)
    rhs = _certificate_sum_inf(cert, prec)
    ok = lhs.agrees(rhs, prec)
    if ok:
        _verified[_cert_key(cert)] = max(prec, _verified.get(_cert_key(cert), 0))
    return Verdict(ok, prec, "inf", lhs, rhs, None if ok else lhs.first_difference(rhs))


def _cert_key(cert):
    return (id(cert.field), tuple(cert.index),
            tuple((b, tuple(idx), tuple(u)) for b, idx, u in cert.terms))


def zeta_v(index, v, prec, cert=None, field=None, verify_prec=40, extra_factor=None):
    """zeta_A(index)_v from a certificate verified at infinity to ``verify_prec``."""
    index = Index(index)
    place = as_place(v)
    field = place.field
    if cert is None:
        cert = builtin_certificate(field, index)
    if tuple(cert.index) != tuple(index):
        raise CertificateError("certificate is for a different index")
    if _verified.get(_cert_key(cert), -1) < verify_prec:
        verdict = verify_certificate(cert, verify_prec)
        if not verdict.ok:
            raise CertificateError(f"certificate failed verification: {verdict.describe()}")
    total = VAdicSeries.zero(place, prec)
    for b, idx, u in cert.terms:
        if b.is_zero():
            continue
        extra = max(0, -v_valuation(b, place.v)[0])
        val = li_star_v_extended(idx, u, place, prec + extra, extra_factor=extra_factor) * b
        if (idx.dep - 1) % 2:
            val = -val
        total = total + val.truncate(prec)
    return total.truncate(prec)


# ---------------------------------------------------------- q-shuffle products

@dataclass
class QShuffleRelation:
    """zeta(left[0]) * zeta(left[1]) = sum_j f_j zeta(index_j), f_j in F_p."""

    p: int
    left: tuple
    right: list = dc_field(default_factory=list)
    note: str = ""

    def render(self):
        lhs = " * ".join(f"zeta{list(ix)}" for ix in self.left)
        parts = [f"{f}*zeta{list(ix)}" for f, ix in self.right]
        return f"{lhs} = " + (" + ".join(parts) if parts else "0")


def chen_product(r, s, q):
    """zeta(r) zeta(s) = zeta(r,s) + zeta(s,r) + zeta(r+s)
    + sum_{i+j=r+s, (q-1)|j} [(-1)^{s-1} C(j-1,s-1) + (-1)^{r-1} C(j-1,r-1)] zeta(i,j),
    with i, j >= 1 and coefficients reduced mod p."""
    if r < 1 or s < 1:
        raise ValueError("r and s must be positive")
    p = _prime_of(q)
    coeffs = {}

    def add(ix, c):
        ix = Index(ix)
        coeffs[ix] = (coeffs.get(ix, 0) + c) % p

    add((r, s), 1)
    add((s, r), 1)
    add((r + s,), 1)
    for j in range(1, r + s):
        i = r + s - j
        if j % (q - 1):
            continue
        c = (-1) ** (s - 1) * binomial_mod_p(j - 1, s - 1, p) + \
            (-1) ** (r - 1) * binomial_mod_p(j - 1, r - 1, p)
        add((i, j), c)
    right = sorted(((c, ix) for ix, c in coeffs.items() if c), key=lambda t: (len(t[1]), tuple(t[1])))
    return QShuffleRelation(p, (Index([r]), Index([s])), right,
                            "correction sum over i >= 1, j >= 1")


def _prime_of(q):
    for p in range(2, q + 1):
        if q % p == 0:
            return p
    raise ValueError("q must be a prime power")


def _product_to(first, second, prec):
    """Product of two lazily computed series, raising their precision until
    the product is known through ``prec`` (negative valuations cost digits)."""
    extra = 0
    while True:
        a, b = first(prec + extra), second(prec + extra)
        prod = a * b
        if prod.prec >= prec:
            return prod.truncate(prec)
        extra += prec - prod.prec


def verify_relation_inf(rel, prec, field):
    """Both sides of the relation in k_inf through T^{-prec}."""
    lhs = _product_to(lambda n: zeta_inf(rel.left[0], n, field),
                      lambda n: zeta_inf(rel.left[1], n, field), prec)
    rhs = InfSeries.zero(field, prec)
    for f, ix in rel.right:
        rhs = rhs + zeta_inf(ix, prec, field) * f
    rhs = rhs.truncate(prec)
    ok = lhs.agrees(rhs, prec)
    return Verdict(ok, prec, "inf", lhs, rhs, None if ok else lhs.first_difference(rhs), rel.note)


def verify_relation_v(rel, v, prec, certs=None):
    """Both sides at v through v^prec; every index needs a certificate."""
    place = as_place(v)
    field = place.field
    certs = dict(certs or {})
    needed = list(rel.left) + [ix for _, ix in rel.right]
    values = {}
    for ix in needed:
        key = tuple(ix)
        if key in values:
            continue
        cert = certs.get(key)
        if cert is None:
            try:
                cert = builtin_certificate(field, ix)
            except CertificateError:
                return Verdict(False, prec, "v", None, None,
                               note=f"cannot check: no certificate for zeta{list(ix)}")
        values[key] = cert
    left = [values[tuple(ix)] for ix in rel.left]
    lhs = _product_to(lambda n: zeta_v(rel.left[0], place, n, left[0]),
                      lambda n: zeta_v(rel.left[1], place, n, left[1]), prec)
    for key, cert in list(values.items()):
        values[key] = zeta_v(Index(key), place, prec, cert)
    rhs = VAdicSeries.zero(place, prec)
    for f, ix in rel.right:
        rhs = rhs + values[tuple(ix)] * f
    rhs = rhs.truncate(prec)
    ok = lhs.agrees(rhs, prec)
    return Verdict(ok, prec, "v", lhs, rhs, None if ok else lhs.first_difference(rhs), rel.note)
