"""The word algebra on letters z_{s,u} with the stuffle (star) product.

Words are tuples of letters; elements are finitely supported k-linear
combinations of words.  Evaluation sends z_{s_1,u_1}...z_{s_r,u_r} to
Li*_{(s_1..s_r)}(u_1..u_r), exactly (truncated) or in a completion.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass

from .completions import (
    InfSeries,
    MagnitudeBound,
    VAdicSeries,
    as_place,
    compare_magnitude,
)
from .fqarith import (
    Index,
    L_factorial,
    ParseError,
    RatFunc,
    format_ratfunc,
    inf_valuation,
    parse_ratfunc,
    v_valuation,
)
from .polylog import li_star_inf, li_star_trunc, li_star_v_conv, star_fractions_upto

__all__ = [
    "Letter",
    "StuffleElement",
    "StuffleAlgebra",
    "MultiplicativityVerdict",
    "H0Error",
]


class H0Error(ValueError):
    """A word does not start with a letter of X^0, so its value may diverge."""


@dataclass(frozen=True)
class Letter:
    """The generator z_{s,u}."""

    s: int
    u: RatFunc

    def render(self):
        return f"z[{self.s},{format_ratfunc(self.u).replace(' ', '')}]"

    def sort_key(self):
        return (self.s, self.render())


def _word_key(word):
    return (len(word), tuple(letter.sort_key() for letter in word))


def render_word(word):
    return "".join(letter.render() for letter in word) if word else "1"


class StuffleElement:
    """A finitely supported map word -> coefficient in k (zeros pruned)."""

    __slots__ = ("field", "terms")

    def __init__(self, field, terms=None):
        self.field = field
        clean = {}
        for word, c in (terms or {}).items():
            c = RatFunc.coerce(field, c)
            if not c.is_zero():
                clean[tuple(word)] = c
        self.terms = clean

    @classmethod
    def word(cls, field, word, coeff=1):
        return cls(field, {tuple(word): coeff})

    @classmethod
    def one(cls, field):
        return cls(field, {(): 1})

    def is_zero(self):
        return not self.terms

    def words(self):
        return sorted(self.terms, key=_word_key)

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out[w] + c if w in out else c
        return StuffleElement(self.field, out)

    def __neg__(self):
        return StuffleElement(self.field, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = RatFunc.coerce(self.field, c)
        return StuffleElement(self.field, {w: c * x for w, x in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, StuffleElement):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def render(self):
        if not self.terms:
            return "0"
        parts = []
        for w in self.words():
            c = self.terms[w]
            word = render_word(w)
            if c.is_one():
                text = word
            elif (-c).is_one():
                text = "-" + word
            else:
                coeff = format_ratfunc(c)
                if " " in coeff:
                    coeff = f"({coeff})"
                text = coeff if not w else f"{coeff}*{word}"
            parts.append(text)
        out = parts[0]
        for part in parts[1:]:
            out += " - " + part[1:] if part.startswith("-") else " + " + part
        return out

    def __repr__(self):
        return f"StuffleElement({self.render()})"


@dataclass
class MultiplicativityVerdict:
    ok: bool
    mode: str
    precision: object
    product_value: object
    separate_value: object


class StuffleAlgebra:
    """Letters, the star product and evaluation maps, relative to a place v.

    The sets X (|u|_inf <= q^{sq/(q-1)}, |u|_v <= 1) and X^0 (both strict)
    depend on v, which is fixed when the algebra is built.
    """

    def __init__(self, field, v):
        self.field = field
        self.place = as_place(v)
        self._memo = {}
        self._lock = threading.Lock()
        self._verdicts = {}
        self._frac_memo = {}

    # letters -------------------------------------------------------------
    def letter(self, s, u):
        if s < 1:
            raise ValueError("letters need s >= 1")
        letter = Letter(int(s), RatFunc.coerce(self.field, u))
        if not self.in_X(letter):
            raise ValueError(f"{letter.render()} is not in X for the place v")
        return letter

    def _verdict(self, letter):
        if letter not in self._verdicts:
            q = self.field.q
            u = letter.u
            vi = None if u.is_zero() else inf_valuation(u)
            vv = None if u.is_zero() else v_valuation(u, self.place.v)[0]
            bound = MagnitudeBound(letter.s * q, q - 1)
            one = MagnitudeBound(0)
            dv = self.place.dv
            in_x = (compare_magnitude(vi, "inf", bound, strict=False)
                    and compare_magnitude(vv, "v", one, strict=False, dv=dv))
            in_x0 = (compare_magnitude(vi, "inf", bound, strict=True)
                     and compare_magnitude(vv, "v", one, strict=True, dv=dv))
            self._verdicts[letter] = (in_x, in_x0)
        return self._verdicts[letter]

    def in_X(self, letter):
        return self._verdict(letter)[0]

    def in_X0(self, letter):
        return self._verdict(letter)[1]

    def in_H0(self, element):
        return all(not w or self.in_X0(w[0]) for w in element.terms)

    def element(self, *pairs):
        """Build sum c * word from (coefficient, [(s, u), ...]) pairs."""
        out = StuffleElement(self.field)
        for coeff, letters in pairs:
            word = tuple(self.letter(s, u) for s, u in letters)
            out = out + StuffleElement.word(self.field, word, coeff)
        return out

    # product ---------------------------------------------------------------
    def _merge(self, a, b):
        return Letter(a.s + b.s, a.u * b.u)

    def star_words(self, w1, w2):
        """z_a w * z_b w' = z_a (w * z_b w') + z_b (z_a w * w') - z_{a+b} (w * w')."""
        key = (w1, w2)
        with self._lock:
            hit = self._memo.get(key)
        if hit is not None:
            return hit
        field = self.field
        if not w1:
            result = {w2: RatFunc(field, field.one_poly())}
        elif not w2:
            result = {w1: RatFunc(field, field.one_poly())}
        else:
            a, rest1 = w1[0], w1[1:]
            b, rest2 = w2[0], w2[1:]
            result = {}

            def add(prefix, sub, sign):
                for w, c in sub.items():
                    nw = (prefix,) + w
                    val = c if sign > 0 else -c
                    result[nw] = result[nw] + val if nw in result else val

            add(a, self.star_words(rest1, w2), 1)
            add(b, self.star_words(w1, rest2), 1)
            add(self._merge(a, b), self.star_words(rest1, rest2), -1)
            result = {w: c for w, c in result.items() if not c.is_zero()}
        with self._lock:
            self._memo[key] = result
        return result

    def star(self, x, y):
        out = {}
        for w1, c1 in x.terms.items():
            for w2, c2 in y.terms.items():
                for w, c in self.star_words(w1, w2).items():
                    val = c * c1 * c2
                    out[w] = out[w] + val if w in out else val
        return StuffleElement(self.field, out)

    # evaluation -------------------------------------------------------------
    def _word_args(self, word):
        return Index([l.s for l in word]), [l.u for l in word]

    def eval_trunc(self, element, n):
        """Li*_{<=n} extended k-linearly: an exact element of k."""
        num, den = self.eval_trunc_fraction(element, n)
        return RatFunc(self.field, num, den)

    def _word_fractions(self, word, n):
        """Cached [(num, L_j^{wt}) for j <= n'] (n' >= n) for a word of polynomial letters."""
        with self._lock:
            hit = self._frac_memo.get(word)
        if hit is None or len(hit) <= n:
            idx, us = self._word_args(word)
            hit = star_fractions_upto(idx, us, max(n, 4))
            with self._lock:
                self._frac_memo[word] = hit
        return hit

    def eval_trunc_fraction(self, element, n):
        """The truncated value as (numerator, denominator), not reduced.

        When every letter and coefficient is a polynomial, all words share the
        denominator L_n^W (W the largest weight), so no gcd is ever taken.
        """
        field = self.field
        polynomial = all(c.is_poly() and all(l.u.is_poly() for l in w)
                         for w, c in element.terms.items())
        if not polynomial:
            total = RatFunc(field, field.zero_poly())
            for w, c in element.terms.items():
                if not w:
                    total = total + c
                else:
                    total = total + c * li_star_trunc(*self._word_args(w), n)
            return total.num, total.den
        if not element.terms:
            return field.zero_poly(), field.one_poly()
        top = max(sum(l.s for l in w) for w in element.terms)
        ln = L_factorial(field, n)
        num = field.zero_poly()
        for w, c in element.terms.items():
            weight = sum(l.s for l in w)
            part = self._word_fractions(w, n)[n][0] if w else field.one_poly()
            if top > weight:
                part = part * ln ** (top - weight)
            num = num + c.num * part
        return num, ln**top

    def _require_H0(self, element):
        for w in element.terms:
            if w and not self.in_X0(w[0]):
                raise H0Error(f"word {render_word(w)} does not start with a letter of X^0")

    def eval_inf(self, element, prec):
        self._require_H0(element)
        total = InfSeries.zero(self.field, prec)
        for w, c in element.terms.items():
            extra = -inf_valuation(c)
            if not w:
                val = InfSeries.zero(self.field, prec + max(extra, 0)) + 1
            else:
                val = li_star_inf(*self._word_args(w), prec + max(extra, 0))
            total = total + (val * c).truncate(prec)
        return total.truncate(prec)

    def eval_v(self, element, prec):
        self._require_H0(element)
        place = self.place
        total = VAdicSeries.zero(place, prec)
        for w, c in element.terms.items():
            extra = -v_valuation(c, place.v)[0]
            if not w:
                val = VAdicSeries.zero(place, prec + max(extra, 0)) + 1
            else:
                val = li_star_v_conv(*self._word_args(w), place, prec + max(extra, 0))
            total = total + (val * c).truncate(prec)
        return total.truncate(prec)

    def multiplicativity_check(self, x, y, mode="trunc", precision=3):
        """Compare the value of x * y with the product of the values.

        mode "trunc" is an exact identity in k at truncation ``precision``;
        "inf" and "v" compare through the given absolute precision.
        """
        prod = self.star(x, y)
        if mode == "trunc":
            ln, ld = self.eval_trunc_fraction(prod, precision)
            an, ad = self.eval_trunc_fraction(x, precision)
            bn, bd = self.eval_trunc_fraction(y, precision)
            # exact equality in k by cross-multiplication
            ok = ln * (ad * bd) == (an * bn) * ld
            return MultiplicativityVerdict(ok, mode, precision, RatFunc(self.field, ln, ld),
                                           RatFunc(self.field, an, ad) * RatFunc(self.field, bn, bd))
        if mode == "inf":
            ev = self.eval_inf
        elif mode == "v":
            ev = self.eval_v
        else:
            raise ValueError(f"unknown mode {mode!r}")
        lhs = ev(prod, precision)
        slack = max(_slack(x, self, mode), _slack(y, self, mode))
        a, b = ev(x, precision + slack), ev(y, precision + slack)
        rhs = (a * b).truncate(precision)
        return MultiplicativityVerdict(lhs.agrees(rhs, precision), mode, precision, lhs, rhs)

    # text -------------------------------------------------------------------
    def parse_word(self, text):
        return _parse_word(self, text, 0)

    def parse_element(self, text):
        return parse_element(self, text)

    def render(self, element):
        return element.render()


def _slack(element, algebra, mode):
    """Extra precision so that a product of two values keeps the target."""
    vals = []
    ev = algebra.eval_inf if mode == "inf" else algebra.eval_v
    probe = ev(element, 1)
    if probe.valuation is not None:
        vals.append(-probe.valuation)
    return max([0] + vals) + 2


_LETTER = re.compile(r"\s*z\s*\[\s*(\d+)\s*,([^\]]*)\]")


def _parse_word(algebra, text, offset):
    letters = []
    pos = 0
    stripped = text.strip()
    if stripped == "1":
        return ()
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _LETTER.match(text, pos)
        if not m:
            raise ParseError("expected a letter z[s,u]", text, offset + pos)
        s = int(m.group(1))
        try:
            u = parse_ratfunc(algebra.field, m.group(2))
        except ParseError as exc:
            raise ParseError(exc.message, text, offset + m.start(2) + exc.pos) from None
        letters.append(algebra.letter(s, u))
        pos = m.end()
    if not letters:
        raise ParseError("empty word", text, offset)
    return tuple(letters)


def _split_terms(text):
    """Split at top-level + and - (not inside brackets/parentheses or after ^)."""
    terms = []
    depth = 0
    start = 0
    sign = 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch in "+-" and depth == 0:
            prev = text[:i].rstrip()
            if prev.endswith("^") or prev.endswith("*") or prev == "":
                if prev == "" and ch == "-":
                    sign = -sign
                    start = i + 1
                i += 1
                continue
            terms.append((sign, start, text[start:i]))
            sign = 1 if ch == "+" else -1
            start = i + 1
        i += 1
    terms.append((sign, start, text[start:]))
    return terms


def parse_element(algebra, text):
    """Parse ``c1*word1 + c2*word2 ...``; words are letters z[s,u] or 1."""
    field = algebra.field
    out = StuffleElement(field)
    if not text.strip():
        raise ParseError("empty element", text, 0)
    for sign, start, chunk in _split_terms(text):
        if not chunk.strip():
            raise ParseError("empty term", text, start)
        zpos = chunk.find("z")
        if zpos < 0:
            coeff = parse_ratfunc(field, chunk)
            word = ()
        else:
            head = chunk[:zpos].rstrip()
            if head.endswith("*"):
                head = head[:-1]
            coeff = parse_ratfunc(field, head) if head.strip() else RatFunc(field, field.one_poly())
            word = _parse_word(algebra, chunk[zpos:], start + zpos)
        if sign < 0:
            coeff = -coeff
        out = out + StuffleElement.word(field, word, coeff)
    return out
