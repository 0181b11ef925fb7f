"""Exact arithmetic in F_q, A = F_q[T] and k = F_q(T).

Field elements are small integers (codes) interpreted as polynomials over
F_p in the generator ``g``: code = c_0 + c_1 p + ... + c_{e-1} p^{e-1}.
Field arithmetic is done here in pure Python.  Polynomials are backed by
python-flint's ``fq_default_poly`` which supplies fast multiplication,
division and gcd; everything above that layer is plain Python.
"""

from __future__ import annotations

import atexit
import functools
import gc
import itertools
import re
import threading

import flint

# The cyclic collector may clear a flint polynomial's context reference before
# deallocating it, which crashes at interpreter exit when polynomials sit in
# reference cycles (fields cache their own polynomials).  Freezing the heap at
# exit moves everything to the permanent generation so the final collection
# leaves those cycles alone.
atexit.register(gc.freeze)

# guards the append-only caches shared between threads
_CACHE_LOCK = threading.RLock()

__all__ = [
    "FiniteField",
    "FqElem",
    "Poly",
    "RatFunc",
    "Index",
    "NEG_INFINITY",
    "InfiniteValuation",
    "ParseError",
    "canonical_modulus",
    "irreducible_check",
    "v_valuation",
    "inf_valuation",
    "monic_enumerate",
    "binomial_mod_p",
    "frobenius_twist",
    "L_factorial",
    "carlitz_factor",
    "parse_ratfunc",
    "parse_poly",
    "format_poly",
    "format_ratfunc",
]


class InfiniteValuation(ArithmeticError):
    """Raised when the valuation of zero is requested."""


class ParseError(ValueError):
    def __init__(self, message, text="", pos=0):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.message = message
        self.text = text
        self.pos = pos


class _MinusInfinity:
    """Degree of the zero polynomial.

    It compares below every integer and absorbs integer addition, so
    deg(a*b) = deg a + deg b holds for zero factors as well.  It is not
    an int, so it can never be confused with an actual degree.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "-inf"

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __add__(self, other):
        if isinstance(other, int) or other is self:
            return self
        return NotImplemented

    __radd__ = __add__

    def __hash__(self):
        return hash("-inf-degree")


NEG_INFINITY = _MinusInfinity()


def _is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _prime_factors(n):
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------- fields

def _digits(code, p, e):
    out = []
    for _ in range(e):
        code, r = divmod(code, p)
        out.append(r)
    return out


def _undigits(digits, p):
    code = 0
    for c in reversed(digits):
        code = code * p + c
    return code


def _fp_poly_mulmod(a, b, modulus, p):
    """Multiply digit lists a, b over F_p modulo the monic ``modulus``."""
    e = len(modulus) - 1
    prod = [0] * (2 * e - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for k in range(len(prod) - 1, e - 1, -1):
        c = prod[k]
        if c:
            for j in range(e + 1):
                prod[k - e + j] = (prod[k - e + j] - c * modulus[j]) % p
    return prod[:e]


def _fp_is_irreducible(coeffs, p):
    """Irreducibility over F_p of the polynomial with low-to-high coeffs."""
    return irreducible_check(FiniteField(p).poly(list(coeffs)))


def canonical_modulus(p, e):
    """Least monic irreducible of degree e over F_p.

    Candidates are ordered by the coefficient tuple from the T^{e-1}
    coefficient down to the constant term.  Returns low-to-high coefficients.
    """
    if e == 1:
        return (0, 1)
    for tail in itertools.product(range(p), repeat=e):
        coeffs = tuple(reversed(tail)) + (1,)
        if coeffs[0] == 0:
            continue
        if _fp_is_irreducible(coeffs, p):
            return coeffs
    raise AssertionError("no irreducible polynomial found")


class FiniteField:
    """The field F_q with q = p^e, together with its polynomial ring.

    Instances are cached, so ``FiniteField(2, 2)`` always returns the same
    object and fields compare by identity.
    """

    _cache: dict = {}

    def __new__(cls, p, e=1, modulus=None):
        if modulus is not None:
            modulus = tuple(int(c) % p for c in modulus)
        key = (p, e, modulus)
        if key in cls._cache:
            return cls._cache[key]
        if not isinstance(p, int) or not _is_prime(p):
            raise ValueError(f"characteristic {p!r} is not prime")
        if not isinstance(e, int) or e < 1:
            raise ValueError(f"extension degree {e!r} must be a positive integer")
        if e == 1:
            if modulus is not None and len(modulus) != 2:
                raise ValueError("a prime field takes no modulus")
            chosen = None
        elif modulus is None:
            chosen = canonical_modulus(p, e)
        else:
            if len(modulus) != e + 1 or modulus[-1] != 1:
                raise ValueError(f"modulus must be monic of degree {e}")
            if not _fp_is_irreducible(modulus, p):
                raise ValueError("modulus is not irreducible over F_p")
            chosen = modulus
        full_key = (p, e, chosen)
        with _CACHE_LOCK:
            if full_key in cls._cache:
                field = cls._cache[full_key]
            else:
                field = super().__new__(cls)
                field._setup(p, e, chosen)
                cls._cache[full_key] = field
            cls._cache[key] = field
        return field

    def _setup(self, p, e, modulus):
        self.p = p
        self.e = e
        self.q = p**e
        self.modulus = modulus
        if e == 1:
            self._fctx = flint.fq_default_ctx(p)
        else:
            fp = flint.fmpz_mod_poly_ctx(p)
            self._fctx = flint.fq_default_ctx(p, e, "g", modulus=fp(list(modulus)))
        self._ring = flint.fq_default_poly_ctx(self._fctx)
        self._flint_elems = None
        self._L_cache = [self.one_poly()]

    def __repr__(self):
        if self.e == 1:
            return f"FiniteField({self.p})"
        return f"FiniteField({self.p}, {self.e}, modulus={self.modulus})"

    def __reduce__(self):
        return (FiniteField, (self.p, self.e, self.modulus))

    # elements
    def __call__(self, value):
        return self.elem(value)

    def elem(self, value):
        if isinstance(value, FqElem):
            if value.field is not self:
                raise ValueError("element of a different field")
            return value
        if isinstance(value, int):
            return FqElem(self, value % self.p)
        raise TypeError(f"cannot make a field element from {value!r}")

    def from_code(self, code):
        if not 0 <= code < self.q:
            raise ValueError(f"code {code} out of range for q={self.q}")
        return FqElem(self, code)

    def gen(self):
        """The generator g of F_q over F_p."""
        if self.e == 1:
            raise ValueError("a prime field has no generator g")
        return FqElem(self, self.p)

    def elements(self):
        return [FqElem(self, c) for c in range(self.q)]

    def nonzero_elements(self):
        return [FqElem(self, c) for c in range(1, self.q)]

    def _code_to_flint(self, code):
        if self._flint_elems is None and self.q <= 1 << 16:
            self._flint_elems = [self._fctx(_digits(c, self.p, self.e)) for c in range(self.q)]
        if self._flint_elems is not None:
            return self._flint_elems[code]
        return self._fctx(_digits(code, self.p, self.e))

    def _flint_to_code(self, x):
        return _undigits([int(c) for c in x.to_list()], self.p)

    # polynomials
    def poly(self, coeffs):
        """Polynomial from low-to-high coefficients (ints mod p or FqElem)."""
        flint_coeffs = []
        for c in coeffs:
            if isinstance(c, FqElem):
                flint_coeffs.append(self._code_to_flint(c.code))
            else:
                flint_coeffs.append(int(c) % self.p)
        return Poly(self, self._ring(flint_coeffs))

    def theta(self):
        return Poly(self, self._ring([0, 1]))

    def const(self, c):
        return self.poly([c])

    def zero_poly(self):
        return Poly(self, self._ring([]))

    def one_poly(self):
        return Poly(self, self._ring([1]))

    def monomial(self, n, c=1):
        return Poly(self, self._ring([c]).left_shift(n) if n else self._ring([c]))

    def ratfunc(self, num, den=None):
        return RatFunc(self, num, den)


class FqElem:
    __slots__ = ("field", "code")

    def __init__(self, field, code):
        self.field = field
        self.code = code

    def digits(self):
        return _digits(self.code, self.field.p, self.field.e)

    def is_zero(self):
        return self.code == 0

    def __bool__(self):
        return self.code != 0

    def _coerce(self, other):
        if isinstance(other, FqElem):
            if other.field is not self.field:
                raise ValueError("elements of different fields")
            return other
        if isinstance(other, int):
            return self.field.elem(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        f = self.field
        if f.e == 1:
            return FqElem(f, (self.code + other.code) % f.p)
        a, b = self.digits(), other.digits()
        return FqElem(f, _undigits([(x + y) % f.p for x, y in zip(a, b)], f.p))

    __radd__ = __add__

    def __neg__(self):
        f = self.field
        if f.e == 1:
            return FqElem(f, (-self.code) % f.p)
        return FqElem(f, _undigits([(-x) % f.p for x in self.digits()], f.p))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        f = self.field
        if f.e == 1:
            return FqElem(f, (self.code * other.code) % f.p)
        return FqElem(f, _mul_codes(f.p, f.modulus, self.code, other.code))

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = FqElem(self.field, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self):
        if self.code == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return self ** (self.field.q - 2)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field.elem(other)
        if not isinstance(other, FqElem):
            return NotImplemented
        return self.field is other.field and self.code == other.code

    def __hash__(self):
        return hash((id(self.field), self.code))

    def __repr__(self):
        return f"FqElem({format_fq(self)})"

    def __str__(self):
        return format_fq(self)


@functools.lru_cache(maxsize=1 << 16)
def _mul_codes(p, modulus, a, b):
    e = len(modulus) - 1
    return _undigits(_fp_poly_mulmod(_digits(a, p, e), _digits(b, p, e), modulus, p), p)


def format_fq(x):
    """Render a field element as a polynomial in g (or an integer mod p)."""
    if x.field.e == 1:
        return str(x.code)
    terms = []
    for k, c in reversed(list(enumerate(x.digits()))):
        if c == 0:
            continue
        if k == 0:
            terms.append(str(c))
        else:
            mono = "g" if k == 1 else f"g^{k}"
            terms.append(mono if c == 1 else f"{c}*{mono}")
    return "+".join(terms) if terms else "0"


# ------------------------------------------------------------ polynomials

class Poly:
    """Element of A = F_q[T]; immutable wrapper around a flint polynomial."""

    __slots__ = ("field", "_f", "_hash")

    def __init__(self, field, f):
        self.field = field
        self._f = f
        self._hash = None

    # construction helpers
    def _wrap(self, f):
        return Poly(self.field, f)

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.field is not self.field:
                raise ValueError("polynomials over different fields")
            return other._f
        if isinstance(other, int):
            return self.field._ring([other % self.field.p])
        if isinstance(other, FqElem):
            if other.field is not self.field:
                raise ValueError("polynomials over different fields")
            return self.field._ring([self.field._code_to_flint(other.code)])
        return None

    # structure
    def degree(self):
        d = self._f.degree()
        return NEG_INFINITY if d < 0 else d

    def is_zero(self):
        return self._f.is_zero()

    def __bool__(self):
        return not self._f.is_zero()

    def is_one(self):
        return self._f.is_one()

    def is_constant(self):
        return self._f.degree() <= 0

    def coeff_codes(self):
        """Low-to-high coefficient codes (empty list for zero)."""
        to_code = self.field._flint_to_code
        return [to_code(c) for c in self._f.coeffs()]

    def coeffs(self):
        return [FqElem(self.field, c) for c in self.coeff_codes()]

    def coeff(self, n):
        if n < 0 or n > self._f.degree():
            return FqElem(self.field, 0)
        return FqElem(self.field, self.field._flint_to_code(self._f[n]))

    def leading(self):
        if self.is_zero():
            return FqElem(self.field, 0)
        return FqElem(self.field, self.field._flint_to_code(self._f.leading_coefficient()))

    def is_monic(self):
        return not self.is_zero() and self._f.leading_coefficient().is_one()

    def monic(self):
        if self.is_zero():
            raise ZeroDivisionError("zero polynomial has no monic associate")
        return self._wrap(self._f.monic())

    # arithmetic
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._wrap(self._f + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._wrap(self._f - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._wrap(o - self._f)

    def __neg__(self):
        return self._wrap(-self._f)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._wrap(self._f * o)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of a polynomial; use RatFunc")
        return self._wrap(self._f**n)

    def __divmod__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        quo, rem = divmod(self._f, o)
        return self._wrap(quo), self._wrap(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other):
        """Quotient self/other; raises if the division is not exact."""
        o = self._coerce(other)
        quo, rem = divmod(self._f, o)
        if not rem.is_zero():
            raise ArithmeticError("division is not exact")
        return self._wrap(quo)

    def divides(self, other):
        o = self._coerce(other)
        if self._f.is_zero():
            return o.is_zero()
        return (o % self._f).is_zero()

    def __truediv__(self, other):
        return RatFunc(self.field, self) / other

    def __rtruediv__(self, other):
        return RatFunc.coerce(self.field, other) / RatFunc(self.field, self)

    def gcd(self, other):
        o = self._coerce(other)
        return self._wrap(self._f.gcd(o))

    def twist(self, n=1):
        """Frobenius twist f -> f^{q^n}; coefficients lie in F_q so it spreads exponents."""
        if n == 0 or self.is_constant():
            return self
        return self._wrap(self._f.inflate(self.field.q**n))

    def reverse(self, degree=None):
        """T^degree * f(1/T), degree defaulting to deg f."""
        if degree is None:
            return self._wrap(self._f.reverse())
        return self._wrap(self._f.reverse(degree))

    def truncate(self, n):
        return self._wrap(self._f.truncate(n))

    def shift_left(self, n):
        return self._wrap(self._f.left_shift(n)) if n else self

    def shift_right(self, n):
        return self._wrap(self._f.right_shift(n)) if n else self

    def mul_low(self, other, n):
        return self._wrap(self._f.mul_low(other._f, n))

    def inverse_series(self, n):
        """Inverse as a power series in the variable, mod X^n."""
        return self._wrap(self._f.inverse_series_trunc(n))

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.field is other.field and self._f == other._f
        if isinstance(other, (int, FqElem)):
            return self._f == self._coerce(other)
        if isinstance(other, RatFunc):
            return other == self
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.field), self._f))
        return self._hash

    def __repr__(self):
        return f"Poly({format_poly(self)})"

    def __str__(self):
        return format_poly(self)


def format_poly(f, var="T"):
    if f.is_zero():
        return "0"
    terms = []
    codes = f.coeff_codes()
    for k in range(len(codes) - 1, -1, -1):
        code = codes[k]
        if code == 0:
            continue
        c = format_fq(FqElem(f.field, code))
        multi = "+" in c
        if k == 0:
            terms.append(f"({c})" if multi and len(codes) > 1 else c)
            continue
        mono = var if k == 1 else f"{var}^{k}"
        if code == 1:
            terms.append(mono)
        else:
            terms.append(f"({c})*{mono}" if multi else f"{c}*{mono}")
    return " + ".join(terms)


# -------------------------------------------------------- rational functions

class RatFunc:
    """Element of k = F_q(T) in lowest terms with monic denominator."""

    __slots__ = ("field", "num", "den", "_hash")

    def __init__(self, field, num, den=None, _normalized=False):
        self.field = field
        self._hash = None
        num = _as_poly(field, num)
        if den is None:
            self.num, self.den = num, field.one_poly()
            return
        den = _as_poly(field, den)
        if _normalized:
            self.num, self.den = num, den
            return
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = num, field.one_poly()
            return
        if not den.is_constant():
            g = num._f.gcd(den._f)
            if not g.is_one():
                num = Poly(field, num._f.exact_division(g))
                den = Poly(field, den._f.exact_division(g))
        lc = den._f.leading_coefficient()
        if not lc.is_one():
            inv = lc.inverse()
            num = Poly(field, num._f * inv)
            den = Poly(field, den._f * inv)
        self.num, self.den = num, den

    @staticmethod
    def coerce(field, x):
        if isinstance(x, RatFunc):
            return x
        return RatFunc(field, _as_poly(field, x))

    def _other(self, other):
        if isinstance(other, RatFunc):
            if other.field is not self.field:
                raise ValueError("rational functions over different fields")
            return other
        if isinstance(other, (Poly, int, FqElem)):
            return RatFunc(self.field, _as_poly(self.field, other))
        return None

    def is_zero(self):
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def is_poly(self):
        return self.den.is_one()

    def is_one(self):
        return self.den.is_one() and self.num.is_one()

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self.den.is_one() and o.den.is_one():
            return RatFunc(self.field, self.num + o.num)
        if self.den == o.den:
            return RatFunc(self.field, self.num + o.num, self.den)
        return RatFunc(self.field, self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(self.field, -self.num, self.den, _normalized=True)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self.den.is_one() and o.den.is_one():
            return RatFunc(self.field, self.num * o.num)
        # cross-cancel before multiplying keeps the gcds small
        g1 = self.num.gcd(o.den)
        g2 = o.num.gcd(self.den)
        n1, d2 = self.num, o.den
        if not g1.is_constant():
            n1, d2 = n1.exact_div(g1), d2.exact_div(g1)
        n2, d1 = o.num, self.den
        if not g2.is_constant():
            n2, d1 = n2.exact_div(g2), d1.exact_div(g2)
        num, den = n1 * n2, d1 * d2
        if num.is_zero():
            return RatFunc(self.field, num)
        lc = den._f.leading_coefficient()
        if not lc.is_one():
            inv = lc.inverse()
            num, den = Poly(self.field, num._f * inv), Poly(self.field, den._f * inv)
        return RatFunc(self.field, num, den, _normalized=True)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise ZeroDivisionError("inverse of zero in k")
        return RatFunc(self.field, self.den, self.num)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.field, self.num**n, self.den**n, _normalized=True)

    def twist(self, n=1):
        if n == 0:
            return self
        return RatFunc(self.field, self.num.twist(n), self.den.twist(n), _normalized=True)

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self.field is o.field and self.num == o.num and self.den == o.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den)) if not self.den.is_one() else hash(self.num)
        return self._hash

    def __repr__(self):
        return f"RatFunc({format_ratfunc(self)})"

    def __str__(self):
        return format_ratfunc(self)


def _as_poly(field, x):
    if isinstance(x, Poly):
        if x.field is not field:
            raise ValueError("polynomial over a different field")
        return x
    if isinstance(x, (int, FqElem)):
        return field.const(x)
    raise TypeError(f"cannot interpret {x!r} as a polynomial")


def format_ratfunc(x, var="T"):
    num = format_poly(x.num, var)
    if x.den.is_one():
        return num
    den = format_poly(x.den, var)
    if " + " in num:
        num = f"({num})"
    if " + " in den or "*" in den:
        den = f"({den})"
    return f"{num}/{den}"


# ----------------------------------------------------------------- indices

class Index(tuple):
    """A composition (s_1, ..., s_r) of positive integers."""

    def __new__(cls, parts):
        parts = tuple(int(s) for s in parts)
        if not parts:
            raise ValueError("an index has depth at least 1")
        if any(s < 1 for s in parts):
            raise ValueError(f"index entries must be positive: {parts}")
        return super().__new__(cls, parts)

    @property
    def wt(self):
        return sum(self)

    @property
    def dep(self):
        return len(self)

    def reversed(self):
        return Index(tuple(reversed(self)))

    def tail_sums(self):
        """(d_1, ..., d_r) with d_i = s_i + ... + s_r."""
        out = []
        acc = 0
        for s in reversed(self):
            acc += s
            out.append(acc)
        return tuple(reversed(out))

    def __repr__(self):
        return f"Index({list(self)})"


# -------------------------------------------------------------- operations

def irreducible_check(f):
    """Rabin's test: f of degree n is irreducible over F_q iff
    T^{q^n} = T mod f and gcd(T^{q^{n/r}} - T, f) = 1 for each prime r | n."""
    if f.is_zero():
        raise ValueError("irreducibility of the zero polynomial is undefined")
    n = f.degree()
    if n < 1:
        return False
    if n == 1:
        return True
    field = f.field
    mod = f._f.monic()
    x = field._ring([0, 1])
    q = field.q

    def frob_power(k):
        y = x
        for _ in range(k):
            y = y.pow_mod(q, mod)
        return y

    if frob_power(n) != x % mod:
        return False
    for r in _prime_factors(n):
        h = frob_power(n // r) - x
        if not h.gcd(mod).is_one():
            return False
    return True


def v_valuation(x, v):
    """Return (n, unit) with x = v^n * unit and v coprime to unit."""
    field = v.field
    x = RatFunc.coerce(field, x)
    if x.is_zero():
        raise InfiniteValuation("v-adic valuation of zero")
    n = 0
    num, den = x.num, x.den
    while True:
        quo, rem = divmod(num, v)
        if not rem.is_zero():
            break
        num, n = quo, n + 1
    while True:
        quo, rem = divmod(den, v)
        if not rem.is_zero():
            break
        den, n = quo, n - 1
    return n, RatFunc(field, num, den)


def inf_valuation(x):
    """val_inf(x) = deg(den) - deg(num), so |x|_inf = q^(-val)."""
    if isinstance(x, Poly):
        if x.is_zero():
            raise InfiniteValuation("infinite-place valuation of zero")
        return -x.degree()
    if x.is_zero():
        raise InfiniteValuation("infinite-place valuation of zero")
    return x.den.degree() - x.num.degree()


def monic_enumerate(field, d):
    """All q^d monic polynomials of degree d, lexicographic in the
    coefficient tuple (T^{d-1} coefficient first)."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    out = []
    for tail in itertools.product(range(field.q), repeat=d):
        coeffs = [FqElem(field, c) for c in reversed(tail)] + [FqElem(field, 1)]
        out.append(field.poly(coeffs))
    return out


def binomial_mod_p(n, k, p):
    """C(n, k) mod p by Lucas' theorem."""
    if k < 0 or n < 0 or k > n:
        return 0
    result = 1
    while n or k:
        n, ni = divmod(n, p)
        k, ki = divmod(k, p)
        if ki > ni:
            return 0
        result = result * _small_binomial(ni, ki) % p
    return result


@functools.lru_cache(maxsize=None)
def _small_binomial(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def frobenius_twist(x, n=1):
    """Entrywise q^n-th power of a Poly, RatFunc or nested list thereof."""
    if isinstance(x, (Poly, RatFunc)):
        return x.twist(n)
    if isinstance(x, (list, tuple)):
        return type(x)(frobenius_twist(y, n) for y in x)
    if isinstance(x, FqElem):
        return x
    raise TypeError(f"cannot twist {x!r}")


def carlitz_factor(field, i):
    """T - T^{q^i}."""
    return field.theta() - field.monomial(field.q**i)


def L_factorial(field, i):
    """L_i = prod_{j=1}^{i} (T - T^{q^j}), cached per field."""
    if i < 0:
        raise ValueError("L_i needs i >= 0")
    cache = field._L_cache
    if len(cache) <= i:
        with _CACHE_LOCK:
            while len(cache) <= i:
                j = len(cache)
                cache.append(cache[-1] * carlitz_factor(field, j))
    return cache[i]


def L_degree(q, i):
    return (q ** (i + 1) - q) // (q - 1)


# ------------------------------------------------------------------ parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(\S))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        tokens.append((m.group(m.lastindex), start, m.lastindex))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, field, text, variables):
        self.field = field
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self):
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            want = f"{expected!r}" if expected else "a token"
            raise ParseError(f"expected {want}", self.text, self.pos())
        self.i += 1
        return tok

    def parse(self):
        if not self.tokens:
            raise ParseError("empty expression", self.text, 0)
        value = self.expr()
        if self.peek() is not None:
            raise ParseError(f"unexpected {self.peek()!r}", self.text, self.pos())
        return value

    def expr(self):
        if self.peek() in ("+", "-"):
            sign = self.take()
            value = self.term()
            if sign == "-":
                value = -value
        else:
            value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.power()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.power()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ParseError("division by zero", self.text, self.pos())
                value = value / rhs
        return value

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            tok = self.peek()
            if tok is None or not tok.isdigit():
                raise ParseError("expected an integer exponent", self.text, self.pos())
            self.take()
            n = int(tok)
            if neg:
                if base.is_zero():
                    raise ParseError("negative power of zero", self.text, self.pos())
                n = -n
            base = base**n
        return base

    def atom(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.text, self.pos())
        if tok == "(":
            self.take()
            value = self.expr()
            self.take(")")
            return value
        if tok.isdigit():
            self.take()
            return RatFunc(self.field, self.field.const(int(tok)))
        if tok in self.variables:
            self.take()
            return self.variables[tok]
        raise ParseError(f"unexpected {tok!r}", self.text, self.pos())


def parse_ratfunc(field, text):
    """Parse an element of k in the grammar ``(g+1)*T^2 + g*T + 1`` with ``/``."""
    variables = {"T": RatFunc(field, field.theta())}
    if field.e > 1:
        variables["g"] = RatFunc(field, field.const(field.gen()))
    return _Parser(field, text, variables).parse()


def parse_poly(field, text):
    value = parse_ratfunc(field, text)
    if not value.is_poly():
        raise ParseError("expected a polynomial", text, 0)
    return value.num


def parse_modulus(p, text):
    """Parse a monic polynomial in ``g`` over F_p; returns low-to-high coeffs."""
    prime = FiniteField(p)
    variables = {"g": RatFunc(prime, prime.theta())}
    value = _Parser(prime, text, variables).parse()
    if not value.is_poly():
        raise ParseError("expected a polynomial in g", text, 0)
    return tuple(value.num.coeff_codes())
