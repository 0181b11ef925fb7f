"""Truncated elements of the completions k_inf = F_q((1/T)) and k_v.

Both series types carry an absolute precision: an InfSeries with precision N
is known modulo T^-(N+1), a VAdicSeries with precision M modulo v^(M+1).
Internally a nonzero series is stored as valuation plus a unit "body" known
to a relative precision K = prec - valuation + 1:

* InfSeries: x = T^-v0 * B(1/T) with B a polynomial of length <= K in X = 1/T.
* VAdicSeries: x = v^v0 * B(T) with B a polynomial reduced modulo v^K and
  coprime to v.

A series that is indistinguishable from zero at its precision is a separate
state (``valuation is None``); it never carries a fabricated valuation.
"""

from __future__ import annotations

import threading
from fractions import Fraction

from .fqarith import (
    FiniteField,
    Poly,
    RatFunc,
    format_poly,
    format_fq,
    inf_valuation,
    irreducible_check,
    v_valuation,
)

__all__ = [
    "InfSeries",
    "VAdicSeries",
    "Place",
    "MagnitudeBound",
    "PrecisionError",
    "embed_inf",
    "embed_v",
    "embed_fraction",
    "compare_magnitude",
]


class PrecisionError(ArithmeticError):
    """An operation would need digits beyond the known precision."""


# ------------------------------------------------------------ infinite place

class InfSeries:
    __slots__ = ("field", "valuation", "body", "prec")

    def __init__(self, field, valuation, body, prec):
        self.field = field
        self.valuation = valuation
        self.body = body
        self.prec = prec

    @classmethod
    def zero(cls, field, prec):
        return cls(field, None, None, prec)

    @classmethod
    def _make(cls, field, valuation, body, prec):
        """Normalize: strip low-order zeros of the body, detect zero state."""
        if valuation is None or valuation > prec:
            return cls.zero(field, prec)
        body = body.truncate(prec - valuation + 1)
        if body.is_zero():
            return cls.zero(field, prec)
        if body.coeff(0).is_zero():
            codes = body.coeff_codes()
            shift = next(i for i, c in enumerate(codes) if c)
            body = body.shift_right(shift)
            valuation += shift
        return cls(field, valuation, body, prec)

    def is_zero(self):
        """True when the series is zero to its precision."""
        return self.valuation is None

    @property
    def rel_prec(self):
        return self.prec - self.valuation + 1

    def coeff(self, n):
        """Coefficient of T^-n; only exponents n <= prec are known."""
        if n > self.prec:
            raise PrecisionError(f"coefficient of T^-{n} beyond precision {self.prec}")
        if self.valuation is None or n < self.valuation:
            return self.field.elem(0)
        return self.body.coeff(n - self.valuation)

    def terms(self):
        """List of (n, c) with c the nonzero coefficient of T^-n."""
        if self.valuation is None:
            return []
        return [(self.valuation + i, self.field.from_code(c))
                for i, c in enumerate(self.body.coeff_codes()) if c]

    def truncate(self, prec):
        if prec >= self.prec:
            return self
        if self.valuation is None:
            return InfSeries.zero(self.field, prec)
        return InfSeries._make(self.field, self.valuation, self.body, prec)

    def _coerce(self, other, mul=False):
        if isinstance(other, InfSeries):
            if other.field is not self.field:
                raise ValueError("series over different fields")
            return other
        if isinstance(other, (RatFunc, Poly, int)):
            # exact operands are embedded far enough to never limit precision
            other = RatFunc.coerce(self.field, other)
            if not mul or other.is_zero():
                return embed_inf(other, self.prec)
            rel = self.rel_prec if self.valuation is not None else 1
            return embed_inf(other, inf_valuation(other) + rel - 1)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec, o.prec)
        if self.valuation is None:
            return InfSeries._make(self.field, o.valuation, o.body, prec)
        if o.valuation is None:
            return InfSeries._make(self.field, self.valuation, self.body, prec)
        v = min(self.valuation, o.valuation)
        a = self.body.shift_left(self.valuation - v)
        b = o.body.shift_left(o.valuation - v)
        return InfSeries._make(self.field, v, a + b, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.valuation is None:
            return self
        return InfSeries(self.field, self.valuation, -self.body, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other, mul=True)
        if o is None:
            return NotImplemented
        if self.valuation is None and o.valuation is None:
            return InfSeries.zero(self.field, self.prec + o.prec + 1)
        if self.valuation is None:
            return InfSeries.zero(self.field, self.prec + o.valuation)
        if o.valuation is None:
            return InfSeries.zero(self.field, o.prec + self.valuation)
        v = self.valuation + o.valuation
        k = min(self.rel_prec, o.rel_prec)
        body = self.body.mul_low(o.body, k)
        return InfSeries._make(self.field, v, body, v + k - 1)

    __rmul__ = __mul__

    def inverse(self):
        if self.valuation is None:
            raise ZeroDivisionError("inverse of a series that is zero to its precision")
        k = self.rel_prec
        body = self.body.inverse_series(k)
        return InfSeries(self.field, -self.valuation, body, -self.valuation + k - 1)

    def __truediv__(self, other):
        o = self._coerce(other, mul=True)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other, mul=True)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = embed_inf(RatFunc(self.field, self.field.one_poly()),
                           max(self.prec * max(n, 1), 0) + 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def twist(self, n=1):
        """x -> x^{q^n}; exponents spread by q^n, precision scales with it."""
        if n == 0:
            return self
        big_q = self.field.q**n
        if self.valuation is None:
            return InfSeries.zero(self.field, big_q * (self.prec + 1) - 1)
        body = Poly(self.field, self.body._f.inflate(big_q))
        k = big_q * self.rel_prec
        v = big_q * self.valuation
        return InfSeries(self.field, v, body, v + k - 1)

    def agrees(self, other, prec=None):
        """Equality of all digits through T^-prec (default: common precision)."""
        o = self._coerce(other)
        if prec is None:
            prec = min(self.prec, o.prec)
        if prec > min(self.prec, o.prec):
            raise PrecisionError("comparison beyond known precision")
        return (self - o).truncate(prec).is_zero()

    def first_difference(self, other):
        d = self - self._coerce(other)
        return d.valuation

    def __repr__(self):
        return f"InfSeries({self.render()})"

    def render(self):
        parts = []
        for n, c in self.terms():
            cs = format_fq(c)
            mono = _inf_monomial(n)
            if mono == "1":
                parts.append(cs if "+" not in cs else f"({cs})")
            elif c.code == 1:
                parts.append(mono)
            else:
                parts.append(f"({cs})*{mono}" if "+" in cs else f"{cs}*{mono}")
        parts.append(f"O(T^-({self.prec + 1}))" if self.prec + 1 >= 0 else f"O(T^{-(self.prec + 1)})")
        return " + ".join(parts)

    __str__ = render


def _inf_monomial(n):
    if n == 0:
        return "1"
    if n == -1:
        return "T"
    if n < 0:
        return f"T^{-n}"
    return f"T^-{n}"


def embed_inf(x, prec):
    """Laurent expansion of x in 1/T, correct through T^-prec."""
    field = x.field
    if isinstance(x, Poly):
        x = RatFunc(field, x)
    if x.is_zero():
        return InfSeries.zero(field, prec)
    dn, dd = x.num.degree(), x.den.degree()
    v = dd - dn
    if v > prec:
        return InfSeries.zero(field, prec)
    k = prec - v + 1
    num = x.num.reverse().truncate(k)
    if x.den.is_one():
        body = num
    else:
        den = x.den.reverse().truncate(k)
        body = num.mul_low(den.inverse_series(k), k)
    return InfSeries(field, v, body, prec)


# ------------------------------------------------------------------ v-adic

class Place:
    """A finite place given by a monic irreducible v, with cached powers."""

    _cache: dict = {}

    def __new__(cls, v):
        key = (id(v.field), v)
        if key in cls._cache:
            return cls._cache[key]
        if not v.is_monic():
            raise ValueError("a place is given by a monic polynomial")
        if not irreducible_check(v):
            raise ValueError(f"{format_poly(v)} is not irreducible")
        place = super().__new__(cls)
        place.v = v
        place.field = v.field
        place.dv = v.degree()
        place.qv = v.field.q**place.dv
        place._pows = [v.field.one_poly(), v]
        place._lock = threading.Lock()
        cls._cache[key] = place
        return place

    def power(self, k):
        if len(self._pows) <= k:
            with self._lock:
                while len(self._pows) <= k:
                    self._pows.append(self._pows[-1] * self.v)
        return self._pows[k]

    def __eq__(self, other):
        return isinstance(other, Place) and self.v == other.v

    def __hash__(self):
        return hash(self.v)

    def __repr__(self):
        return f"Place({format_poly(self.v)})"


def as_place(v):
    return v if isinstance(v, Place) else Place(v)


def _inverse_mod_power(a, place, k):
    """Inverse of a unit a modulo v^k by Newton-Hensel lifting from mod v."""
    v = place.v
    base = a % v
    inv = Poly(a.field, base._f.inverse_mod(v._f)) if v.degree() > 1 else _const_inverse(base)
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        mod = place.power(prec)
        inv = (inv * (2 - a * inv)) % mod
    return inv % place.power(k)


def _const_inverse(c):
    field = c.field
    return field.const(c.coeff(0).inverse())


class VAdicSeries:
    __slots__ = ("place", "valuation", "body", "prec")

    def __init__(self, place, valuation, body, prec):
        self.place = place
        self.valuation = valuation
        self.body = body
        self.prec = prec

    @property
    def field(self):
        return self.place.field

    @classmethod
    def zero(cls, place, prec):
        return cls(place, None, None, prec)

    @classmethod
    def _make(cls, place, valuation, body, prec):
        if valuation is None or valuation > prec:
            return cls.zero(place, prec)
        k = prec - valuation + 1
        body = body % place.power(k)
        if body.is_zero():
            return cls.zero(place, prec)
        v = place.v
        while True:
            quo, rem = divmod(body, v)
            if not rem.is_zero():
                break
            body = quo
            valuation += 1
        if valuation > prec:
            return cls.zero(place, prec)
        return cls(place, valuation, body % place.power(prec - valuation + 1), prec)

    def is_zero(self):
        return self.valuation is None

    @property
    def rel_prec(self):
        return self.prec - self.valuation + 1

    def digits(self):
        """List of (n, a_n) with a_n != 0, deg a_n < deg v."""
        if self.valuation is None:
            return []
        out = []
        body = self.body
        n = self.valuation
        v = self.place.v
        while not body.is_zero() and n <= self.prec:
            body, a = divmod(body, v)
            if not a.is_zero():
                out.append((n, a))
            n += 1
        return out

    def digit(self, n):
        if n > self.prec:
            raise PrecisionError(f"digit of v^{n} beyond precision {self.prec}")
        for m, a in self.digits():
            if m == n:
                return a
        return self.field.zero_poly()

    def truncate(self, prec):
        if prec >= self.prec:
            return self
        if self.valuation is None:
            return VAdicSeries.zero(self.place, prec)
        return VAdicSeries._make(self.place, self.valuation, self.body, prec)

    def _coerce(self, other, mul=False):
        if isinstance(other, VAdicSeries):
            if other.place != self.place:
                raise ValueError("series at different places")
            return other
        if isinstance(other, (RatFunc, Poly, int)):
            other = RatFunc.coerce(self.field, other)
            if not mul or other.is_zero():
                return embed_v(other, self.place, self.prec)
            rel = self.rel_prec if self.valuation is not None else 1
            n, _ = v_valuation(other, self.place.v)
            return embed_v(other, self.place, n + rel - 1)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec, o.prec)
        if self.valuation is None:
            return VAdicSeries._make(self.place, o.valuation, o.body, prec)
        if o.valuation is None:
            return VAdicSeries._make(self.place, self.valuation, self.body, prec)
        v = min(self.valuation, o.valuation)
        a = self.body * self.place.power(self.valuation - v)
        b = o.body * self.place.power(o.valuation - v)
        return VAdicSeries._make(self.place, v, a + b, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.valuation is None:
            return self
        return VAdicSeries(self.place, self.valuation, -self.body, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other, mul=True)
        if o is None:
            return NotImplemented
        if self.valuation is None and o.valuation is None:
            return VAdicSeries.zero(self.place, self.prec + o.prec + 1)
        if self.valuation is None:
            return VAdicSeries.zero(self.place, self.prec + o.valuation)
        if o.valuation is None:
            return VAdicSeries.zero(self.place, o.prec + self.valuation)
        v = self.valuation + o.valuation
        k = min(self.rel_prec, o.rel_prec)
        body = (self.body * o.body) % self.place.power(k)
        return VAdicSeries(self.place, v, body, v + k - 1)

    __rmul__ = __mul__

    def inverse(self):
        if self.valuation is None:
            raise ZeroDivisionError("inverse of a series that is zero to its precision")
        k = self.rel_prec
        body = _inverse_mod_power(self.body, self.place, k)
        return VAdicSeries(self.place, -self.valuation, body, -self.valuation + k - 1)

    def __truediv__(self, other):
        o = self._coerce(other, mul=True)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other, mul=True)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = embed_v(RatFunc(self.field, self.field.one_poly()), self.place,
                         max(self.prec * max(n, 1), 0) + 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def twist(self, n=1):
        """x -> x^{q^n}: valuation and relative precision scale by q^n."""
        if n == 0:
            return self
        big_q = self.field.q**n
        if self.valuation is None:
            return VAdicSeries.zero(self.place, big_q * (self.prec + 1) - 1)
        k = big_q * self.rel_prec
        body = Poly(self.field, self.body._f.inflate(big_q)) % self.place.power(k)
        v = big_q * self.valuation
        return VAdicSeries(self.place, v, body, v + k - 1)

    def agrees(self, other, prec=None):
        o = self._coerce(other)
        if prec is None:
            prec = min(self.prec, o.prec)
        if prec > min(self.prec, o.prec):
            raise PrecisionError("comparison beyond known precision")
        return (self - o).truncate(prec).is_zero()

    def first_difference(self, other):
        return (self - self._coerce(other)).valuation

    def __repr__(self):
        return f"VAdicSeries({self.render()})"

    def render(self):
        parts = []
        for n, a in self.digits():
            s = format_poly(a)
            if " + " in s or ("*" in s and n != 0):
                s = f"({s})"
            if n == 0:
                parts.append(s)
            elif s == "1":
                parts.append("v" if n == 1 else f"v^{n}" if n > 0 else f"v^({n})")
            else:
                parts.append(f"{s}*v" if n == 1 else f"{s}*v^{n}" if n > 0 else f"{s}*v^({n})")
        parts.append(f"O(v^({self.prec + 1}))" if self.prec + 1 < 0 else f"O(v^{self.prec + 1})")
        return " + ".join(parts)

    __str__ = render


def embed_v(x, v, prec):
    """v-adic expansion of x through v^prec."""
    place = as_place(v)
    field = place.field
    x = RatFunc.coerce(field, x)
    if x.is_zero():
        return VAdicSeries.zero(place, prec)
    n, unit = v_valuation(x, place.v)
    if n > prec:
        return VAdicSeries.zero(place, prec)
    k = prec - n + 1
    mod = place.power(k)
    body = unit.num % mod
    if not unit.den.is_one():
        body = (body * _inverse_mod_power(unit.den % mod, place, k)) % mod
    return VAdicSeries(place, n, body, prec)


def embed_fraction(num, den, place, prec):
    """Embed num/den (polynomials, not necessarily coprime) through absolute
    precision prec; ``place`` is None for the infinite place.  Avoids the gcd
    that building a reduced RatFunc would cost."""
    field = num.field
    if place is None:
        if num.is_zero():
            return InfSeries.zero(field, prec)
        v = den.degree() - num.degree()
        if v > prec:
            return InfSeries.zero(field, prec)
        k = prec - v + 1
        nrev = num.reverse().truncate(k)
        if den.is_one():
            return InfSeries(field, v, nrev, prec)
        drev = den.reverse().truncate(k)
        return InfSeries(field, v, nrev.mul_low(drev.inverse_series(k), k), prec)
    if num.is_zero():
        return VAdicSeries.zero(place, prec)
    vn, num = _strip_v(num, place.v)
    vd, den = _strip_v(den, place.v)
    v = vn - vd
    if v > prec:
        return VAdicSeries.zero(place, prec)
    k = prec - v + 1
    mod = place.power(k)
    body = num % mod
    if not den.is_one():
        body = (body * _inverse_mod_power(den % mod, place, k)) % mod
    return VAdicSeries(place, v, body, prec)


def _strip_v(f, v):
    n = 0
    while True:
        quo, rem = divmod(f, v)
        if not rem.is_zero():
            return n, f
        f, n = quo, n + 1


# -------------------------------------------------------------- magnitudes

class MagnitudeBound:
    """The magnitude q^(a/b) held as the exact rational a/b."""

    __slots__ = ("exponent",)

    def __init__(self, a, b=1):
        self.exponent = Fraction(a, b)

    @property
    def a(self):
        return self.exponent.numerator

    @property
    def b(self):
        return self.exponent.denominator

    def __repr__(self):
        return f"q^({self.exponent})"


def compare_magnitude(val, units, bound, strict, dv=1):
    """Decide |x| < q^(a/b) (strict) or |x| <= q^(a/b) for x of valuation ``val``.

    ``units`` is "inf" or "v"; at a finite place |x|_v = q^(-val*dv).
    ``val is None`` stands for x = 0.
    """
    if val is None:
        return True
    a, b = bound.a, bound.b
    if units == "inf":
        lhs = -val * b
    elif units == "v":
        lhs = -val * dv * b
    else:
        raise ValueError(f"unknown units {units!r}")
    return lhs < a if strict else lhs <= a
