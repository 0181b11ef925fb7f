"""t-modules over k: Carlitz tensor powers C^{(x)s} and the modules G_{s,u}.

A module of dimension d with block profile (d_1, ..., d_r) acts by
[t] = T*I + N + E*tau, where N is the block-diagonal nilpotent shift and E
has a single nonzero entry (bottom-left) in every block (l, m) with l <= m.

The logarithm log_G = sum P_i tau^i is computed exactly over k.  The P_i
satisfy the Sylvester-type equation

    (T - T^{q^i}) P_i + N P_i - P_i N = P_{i-1} E^{(i-1)},

which is solved entry by entry by back substitution (rows bottom-up inside a
block, columns left to right).  Rows of block l of P_i only depend on rows of
block l of P_{i-1}, so every row block is extended on its own, holding
polynomial numerators over one common denominator.
"""

from __future__ import annotations

import threading
from fractions import Fraction

from .completions import (
    InfSeries,
    PrecisionError,
    VAdicSeries,
    as_place,
    compare_magnitude,
    embed_fraction,
    embed_inf,
    embed_v,
    MagnitudeBound,
)
from .fqarith import (
    FqElem,
    Index,
    Poly,
    RatFunc,
    L_factorial,
    carlitz_factor,
    inf_valuation,
    v_valuation,
)

__all__ = [
    "DomainError",
    "TauMatPoly",
    "TModule",
    "LogCoeffs",
    "ExpCoeffs",
    "build_carlitz_tensor",
    "build_G",
    "special_point",
    "act",
    "tau_action",
    "d_act",
    "log_coeffs",
    "exp_coeffs",
    "wt_row_oracle",
    "wt_row_oracle_fraction",
    "eval_log",
    "leading_shape_check",
    "congruence_check",
    "shrinkage_check",
]


class DomainError(ValueError):
    """An argument lies outside the region where a series is known to converge."""


# ----------------------------------------------------------------- matrices

def _zero(field):
    return RatFunc(field, field.zero_poly())


def _one(field):
    return RatFunc(field, field.one_poly())


def mat_zero(field, rows, cols):
    z = _zero(field)
    return [[z] * cols for _ in range(rows)]


def mat_identity(field, d):
    m = mat_zero(field, d, d)
    one = _one(field)
    for i in range(d):
        m[i][i] = one
    return m


def mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    field = a[0][0].field
    out = []
    for i in range(rows):
        row = []
        ai = a[i]
        for j in range(cols):
            acc = None
            for k in range(inner):
                x = ai[k]
                if x.is_zero():
                    continue
                y = b[k][j]
                if y.is_zero():
                    continue
                acc = x * y if acc is None else acc + x * y
            row.append(acc if acc is not None else _zero(field))
        out.append(row)
    return out


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(c, a):
    return [[c * x for x in row] for row in a]


def mat_twist(a, n=1):
    return [[x.twist(n) for x in row] for row in a]


def mat_is_zero(a):
    return all(x.is_zero() for row in a for x in row)


# ---------------------------------------------------------------- tau-series

class TauMatPoly:
    """Finite tau-series sum A_i tau^i with (rows x cols) matrices over k."""

    def __init__(self, field, rows, cols, coeffs):
        self.field = field
        self.rows = rows
        self.cols = cols
        coeffs = list(coeffs)
        while coeffs and mat_is_zero(coeffs[-1]):
            coeffs.pop()
        self.coeffs = coeffs

    @classmethod
    def scalar(cls, field, d, c):
        c = RatFunc.coerce(field, c)
        return cls(field, d, d, [mat_scale(c, mat_identity(field, d))])

    def degree(self):
        return len(self.coeffs) - 1

    def coeff(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return mat_zero(self.field, self.rows, self.cols)

    def leading(self):
        return self.coeffs[-1] if self.coeffs else mat_zero(self.field, self.rows, self.cols)

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return TauMatPoly(self.field, self.rows, self.cols,
                          [mat_add(self.coeff(i), other.coeff(i)) for i in range(n)])

    def __sub__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return TauMatPoly(self.field, self.rows, self.cols,
                          [mat_sub(self.coeff(i), other.coeff(i)) for i in range(n)])

    def __mul__(self, other):
        """(sum a_i tau^i)(sum b_j tau^j) = sum a_i b_j^{(i)} tau^{i+j}."""
        if not isinstance(other, TauMatPoly):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return TauMatPoly(self.field, self.rows, other.cols, [])
        out = [None] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                term = mat_mul(a, mat_twist(b, i))
                out[i + j] = term if out[i + j] is None else mat_add(out[i + j], term)
        return TauMatPoly(self.field, self.rows, other.cols, out)

    def __eq__(self, other):
        if not isinstance(other, TauMatPoly):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and self.coeffs == other.coeffs

    def apply(self, x):
        """sum_i A_i x^{(i)} for an exact or truncated column vector x."""
        out = [None] * self.rows
        for i, a in enumerate(self.coeffs):
            xt = [_twist_any(c, i) for c in x]
            for r in range(self.rows):
                for c in range(self.cols):
                    if a[r][c].is_zero():
                        continue
                    term = xt[c] * a[r][c]
                    out[r] = term if out[r] is None else out[r] + term
        return [o if o is not None else _zero_like(x[0], self.field) for o in out]


def _twist_any(x, n):
    return x.twist(n) if n else x


def _zero_like(x, field):
    if isinstance(x, (InfSeries, VAdicSeries)):
        return x * 0
    return _zero(field)


# ----------------------------------------------------------------- modules

class TModule:
    """The module G_{s,u}; C^{(x)s} is the depth-one case."""

    def __init__(self, index, u):
        index = Index(index)
        if len(u) != index.dep:
            raise ValueError(f"expected {index.dep} point entries, got {len(u)}")
        field = _field_of(u)
        self.field = field
        self.index = index
        self.u = [RatFunc.coerce(field, x) for x in u]
        self.r = index.dep
        self.blocks = index.tail_sums()
        self.d = sum(self.blocks)
        self.starts = []
        acc = 0
        for dl in self.blocks:
            self.starts.append(acc)
            acc += dl
        self.block_of = []
        self.pos_in_block = []
        for ell, dl in enumerate(self.blocks):
            for j in range(dl):
                self.block_of.append(ell)
                self.pos_in_block.append(j + 1)
        # nonzero entry of E[l m] (0-based block indices), l <= m
        self.e_values = {}
        for ell in range(self.r):
            for m in range(ell, self.r):
                val = _one(field)
                for e in range(ell, m):
                    val = val * self.u[e]
                if (m - ell) % 2:
                    val = -val
                self.e_values[(ell, m)] = val
        self._lock = threading.Lock()
        self._log = None
        self._exp = None
        self._phi_cache = {}

    @property
    def wt_coord(self):
        """0-based position of the wt(s) coordinate (last row of block 1)."""
        return self.blocks[0] - 1

    def last_row(self, ell):
        return self.starts[ell] + self.blocks[ell] - 1

    def first_col(self, m):
        return self.starts[m]

    def N_matrix(self):
        n = mat_zero(self.field, self.d, self.d)
        one = _one(self.field)
        for a in range(self.d - 1):
            if self.block_of[a] == self.block_of[a + 1]:
                n[a][a + 1] = one
        return n

    def E_matrix(self):
        e = mat_zero(self.field, self.d, self.d)
        for (ell, m), val in self.e_values.items():
            e[self.last_row(ell)][self.first_col(m)] = val
        return e

    def d_t(self):
        """d[t] = T*I + N."""
        m = self.N_matrix()
        theta = RatFunc(self.field, self.field.theta())
        for a in range(self.d):
            m[a][a] = theta
        return m

    def t_action(self):
        return TauMatPoly(self.field, self.d, self.d, [self.d_t(), self.E_matrix()])

    def apply_t(self, x):
        """[t](x) = (T + N) x + E x^{(1)}, coordinate-wise."""
        theta = self.field.theta()
        out = []
        xt = {}
        for a in range(self.d):
            y = x[a] * theta
            if a + 1 < self.d and self.block_of[a + 1] == self.block_of[a]:
                y = y + x[a + 1]
            ell = self.block_of[a]
            if a == self.last_row(ell):
                for m in range(ell, self.r):
                    ev = self.e_values[(ell, m)]
                    if ev.is_zero():
                        continue
                    b = self.first_col(m)
                    if b not in xt:
                        xt[b] = x[b].twist(1)
                    y = y + xt[b] * ev
            out.append(y)
        return out

    def log(self):
        with self._lock:
            if self._log is None:
                self._log = LogCoeffs(self)
            return self._log

    def exp(self):
        with self._lock:
            if self._exp is None:
                self._exp = ExpCoeffs(self)
            return self._exp

    def __repr__(self):
        return f"TModule(index={list(self.index)}, u={[str(x) for x in self.u]})"


def _field_of(values):
    for x in values:
        if isinstance(x, (RatFunc, Poly)):
            return x.field
    raise TypeError("cannot determine the field from the point entries; pass RatFunc values")


def build_carlitz_tensor(field, s):
    return TModule(Index([s]), [RatFunc(field, field.one_poly())])


def build_G(index, u):
    return TModule(index, u)


def special_point(index, u):
    """v_{s,u}: entry (-1)^{r-m} u_m...u_r at the last position of block m."""
    index = Index(index)
    field = _field_of(u)
    u = [RatFunc.coerce(field, x) for x in u]
    if len(u) != index.dep:
        raise ValueError("point length must equal the depth")
    blocks = index.tail_sums()
    r = index.dep
    out = []
    for m, dm in enumerate(blocks):
        out.extend([_zero(field)] * (dm - 1))
        val = _one(field)
        for e in range(m, r):
            val = val * u[e]
        if (r - 1 - m) % 2:
            val = -val
        out.append(val)
    return out


# ----------------------------------------------------------------- actions

def _coeffs_of(a, field):
    if isinstance(a, Poly):
        if a.field is not field:
            raise ValueError("polynomial over a different field")
        return a.coeffs()
    if isinstance(a, RatFunc) and a.is_poly():
        return a.num.coeffs()
    raise TypeError("expected a polynomial in t")


def act(a, G, x):
    """[a](x), by Horner's rule applied to the point: y <- [t]y + c_k x."""
    coeffs = _coeffs_of(a, G.field)
    if len(x) != G.d:
        raise ValueError("point dimension mismatch")
    if not coeffs:
        return [_zero_like(x[0], G.field) for _ in x]
    consts = [G.field.const(c) for c in coeffs]
    y = [xi * consts[-1] for xi in x]
    for c in reversed(consts[:-1]):
        y = G.apply_t(y)
        if not c.is_zero():
            y = [yi + xi * c for yi, xi in zip(y, x)]
    return y


def tau_action(a, G):
    """[a] = a([t]) as a TauMatPoly, by Horner's rule in the tau-ring."""
    coeffs = _coeffs_of(a, G.field)
    t = G.t_action()
    if not coeffs:
        return TauMatPoly(G.field, G.d, G.d, [])
    acc = TauMatPoly.scalar(G.field, G.d, G.field.const(coeffs[-1]))
    for c in reversed(coeffs[:-1]):
        acc = acc * t + TauMatPoly.scalar(G.field, G.d, G.field.const(c))
    return acc


def d_act(a, G):
    """d[a] = a(T*I + N)."""
    coeffs = _coeffs_of(a, G.field)
    base = G.d_t()
    acc = mat_zero(G.field, G.d, G.d)
    ident = mat_identity(G.field, G.d)
    for c in reversed(coeffs):
        acc = mat_add(mat_mul(acc, base), mat_scale(RatFunc(G.field, G.field.const(c)), ident))
    return acc


# ------------------------------------------------------------ log and exp

def _lcm(a, b):
    if a.is_one():
        return b
    if b.is_one():
        return a
    return (a * b).exact_div(a.gcd(b)).monic()


class _BlockLog:
    """Rows of one block of P_0, P_1, ...: numerators W_i over denominator D_i."""

    def __init__(self, G, ell):
        self.G = G
        self.ell = ell
        field = G.field
        rows = range(G.starts[ell], G.starts[ell] + G.blocks[ell])
        zero, one = field.zero_poly(), field.one_poly()
        w0 = [[one if b == a else zero for b in range(G.d)] for a in rows]
        self.W = [w0]
        self.D = [one]

    def extend_to(self, i):
        while len(self.W) <= i:
            self._step(len(self.W))

    def _step(self, i):
        G = self.G
        field = G.field
        ell = self.ell
        dl = G.blocks[ell]
        start = G.starts[ell]
        w_prev, d_prev = self.W[i - 1], self.D[i - 1]
        zero = field.zero_poly()
        c = carlitz_factor(field, i)
        # E^{(i-1)} entries over a common denominator
        twisted = {}
        den = field.one_poly()
        for m in range(ell, G.r):
            for lp in range(ell, m + 1):
                ev = G.e_values[(lp, m)]
                if ev.is_zero():
                    continue
                tv = ev.twist(i - 1)
                twisted[(lp, m)] = tv
                den = _lcm(den, tv.den)
        fnum = {key: tv.num * den.exact_div(tv.den) for key, tv in twisted.items()}
        # right-hand side R = P_{i-1} E^{(i-1)}: only first columns of blocks
        rhs = {}
        for m in range(ell, G.r):
            col = []
            for row in w_prev:
                acc = zero
                for lp in range(ell, m + 1):
                    f = fnum.get((lp, m))
                    if f is None:
                        continue
                    w = row[G.last_row(lp)]
                    if not w.is_zero():
                        acc = acc + w * f
                col.append(acc)
            rhs[m] = col
        big_k = 2 * dl - 1
        c_pow = c**big_k
        z = [[zero] * G.d for _ in range(dl)]
        for jr in range(dl - 1, -1, -1):
            for m in range(ell, G.r):
                first = G.first_col(m)
                for jb in range(G.blocks[m]):
                    b = first + jb
                    acc = rhs[m][jr] * c_pow if jb == 0 else zero
                    if jr + 1 < dl:
                        acc = acc - z[jr + 1][b]
                    if jb > 0:
                        acc = acc + z[jr][b - 1]
                    if not acc.is_zero():
                        z[jr][b] = acc.exact_div(c)
        # strip common powers of c
        k = big_k
        while k > 0:
            divided = []
            ok = True
            for row in z:
                new_row = []
                for w in row:
                    if w.is_zero():
                        new_row.append(w)
                        continue
                    quo, rem = divmod(w, c)
                    if not rem.is_zero():
                        ok = False
                        break
                    new_row.append(quo)
                if not ok:
                    break
                divided.append(new_row)
            if not ok:
                break
            z = divided
            k -= 1
        self.W.append(z)
        self.D.append(d_prev * den * c**k)
        del start


class LogCoeffs:
    """Lazily extended coefficients P_0, P_1, ... of log_G (exact over k)."""

    def __init__(self, G):
        self.G = G
        self._blocks = {}
        self._lock = threading.Lock()

    def block(self, ell, i):
        """(W, D): rows of block ell of P_i as numerators W over D."""
        with self._lock:
            if ell not in self._blocks:
                self._blocks[ell] = _BlockLog(self.G, ell)
            blk = self._blocks[ell]
            blk.extend_to(i)
            return blk.W[i], blk.D[i]

    def row_fraction(self, i, a):
        """Row a of P_i as (numerators, common denominator)."""
        ell = self.G.block_of[a]
        w, d = self.block(ell, i)
        return w[a - self.G.starts[ell]], d

    def row(self, i, a):
        nums, den = self.row_fraction(i, a)
        return [RatFunc(self.G.field, n, den) for n in nums]

    def entry(self, i, a, b):
        nums, den = self.row_fraction(i, a)
        return RatFunc(self.G.field, nums[b], den)

    def matrix(self, i):
        return [self.row(i, a) for a in range(self.G.d)]

    def extend_to(self, i):
        for ell in range(self.G.r):
            self.block(ell, i)
        return self


def log_coeffs(G, I):
    return G.log().extend_to(I)


def solve_shift_equation(G, c, rhs):
    """Solve c X + N X - X N = rhs for X (d x d over k) by back substitution."""
    d = G.d
    field = G.field
    x = mat_zero(field, d, d)
    c = RatFunc.coerce(field, c)
    cinv = c.inverse()
    for a in range(d - 1, -1, -1):
        below = a + 1 < d and G.block_of[a + 1] == G.block_of[a]
        for b in range(d):
            acc = rhs[a][b]
            if below:
                acc = acc - x[a + 1][b]
            if b > 0 and G.block_of[b - 1] == G.block_of[b]:
                acc = acc + x[a][b - 1]
            if not acc.is_zero():
                x[a][b] = acc * cinv
    return x


class ExpCoeffs:
    """Coefficients Q_i of exp_G from Q_i(T^{q^i} + N) = (T + N)Q_i + E Q_{i-1}^{(1)}."""

    def __init__(self, G):
        self.G = G
        self.Q = [mat_identity(G.field, G.d)]
        self._lock = threading.Lock()
        self._E = G.E_matrix()

    def matrix(self, i):
        with self._lock:
            while len(self.Q) <= i:
                n = len(self.Q)
                c = RatFunc(self.G.field, carlitz_factor(self.G.field, n))
                rhs = mat_scale(RatFunc(self.G.field, self.G.field.const(-1)),
                                mat_mul(self._E, mat_twist(self.Q[-1], 1)))
                self.Q.append(solve_shift_equation(self.G, c, rhs))
            return self.Q[i]

    def extend_to(self, i):
        self.matrix(i)
        return self


def exp_coeffs(G, I):
    return G.exp().extend_to(I)


# ------------------------------------------------------- closed-form rows

def _nondecreasing_tuples(length, bound):
    """All 0 <= i_1 <= ... <= i_length < bound."""
    if length == 0:
        yield ()
        return
    import itertools
    yield from itertools.combinations_with_replacement(range(bound), length)


def wt_row_oracle(G, i):
    """Closed form of the wt(s)-th row of P_i, entry by entry over k."""
    field = G.field
    q = field.q
    c = RatFunc(field, carlitz_factor(field, i))
    Li = RatFunc(field, L_factorial(field, i))
    row = []
    s = G.index
    for m, dm in enumerate(G.blocks):
        if m == 0:
            inner = _one(field)
        else:
            inner = _zero(field)
            for tup in _nondecreasing_tuples(m, i):
                term = _one(field)
                for k, ik in enumerate(tup):
                    term = term * G.u[k].twist(ik) / RatFunc(field, L_factorial(field, ik)) ** s[k]
                inner = inner + term
            if m % 2:
                inner = -inner
        for j in range(1, dm + 1):
            row.append(inner * c ** (dm - j) / Li**dm)
    del q
    return row


def wt_row_oracle_fraction(G, i):
    """The closed-form wt-row as polynomial numerators over L_i^{d_1}.

    Requires every u_k to be a polynomial.  Each term u^{...}/(L_{i_1}^{s_1}
    ... L_i^{d_m}) is rescaled by L_i^{d_1}, which leaves the polynomial
    c^{d_m-j} * prod_k u_k^{q^{i_k}} * prod_k (L_i/L_{i_k})^{s_k}.
    """
    field = G.field
    if not all(x.is_poly() for x in G.u):
        raise ValueError("fraction form needs polynomial u")
    c = carlitz_factor(field, i)
    Li = L_factorial(field, i)
    s = G.index
    nums = []
    for m, dm in enumerate(G.blocks):
        inner = field.zero_poly() if m else field.one_poly()
        for tup in (_nondecreasing_tuples(m, i) if m else ()):
            term = field.one_poly()
            for k, ik in enumerate(tup):
                ratio = Li.exact_div(L_factorial(field, ik))
                term = term * G.u[k].num.twist(ik) * ratio ** s[k]
            inner = inner + term
        if m % 2:
            inner = -inner
        for j in range(1, dm + 1):
            nums.append(inner * c ** (dm - j))
    return nums, Li ** G.blocks[0]


# --------------------------------------------------------- log evaluation

def _completion(completion):
    if completion in ("inf", "∞", None):
        return None
    return as_place(completion)


def _valuation_of(x, place):
    """Valuation of an exact or truncated scalar; None for zero.

    A truncated zero is returned as its precision + 1, a valid lower bound.
    """
    if isinstance(x, (InfSeries, VAdicSeries)):
        return x.valuation if x.valuation is not None else x.prec + 1
    if x.is_zero():
        return None
    if place is None:
        return inf_valuation(x)
    return v_valuation(x, place.v)[0]


def _phi_bounds(G, rows):
    """Lower bounds val_inf(P_i[a][b]) >= q^i * phi[a][b] - psi for all i >= 0.

    Obtained by unrolling the back substitution: each division by
    c_i = T - T^{q^i} adds q^i to the valuation, and E^{(i-1)} contributes
    q^{i-1} times the valuation of its entries.  phi solves (from below) the
    resulting min-plus fixed-point system with contraction factor 1/q.
    ``rows`` must be closed under moving down inside a block.
    Returns (phi, psi) with phi[a][b] a Fraction or None (entry identically 0).
    """
    key = tuple(sorted(rows))
    if key in G._phi_cache:
        return G._phi_cache[key]
    q = G.field.q
    vu = [None if x.is_zero() else inf_valuation(x) for x in G.u]

    def v_e(lp, m):
        total = 0
        for e in range(lp, m):
            if vu[e] is None:
                return None
            total += vu[e]
        return total

    finite = [v_e(lp, m) for lp in range(G.r) for m in range(lp, G.r)]
    finite = [x for x in finite if x is not None]
    low = min([0] + finite)
    start = Fraction(max(0, -q - low), q - 1) + 1
    # feedback columns are the last rows of each block (the only ones E reads)
    phi = {(a, G.last_row(lp)): -start for a in rows for lp in range(G.block_of[a], G.r)}

    def apply(phi, a, b):
        ell = G.block_of[a]
        m = G.block_of[b]
        if m < ell:
            return None
        jb = G.pos_in_block[b]
        best = None
        last = G.last_row(ell)
        for a2 in range(a, last + 1):
            for lp in range(ell, m + 1):
                ve = v_e(lp, m)
                f = phi.get((a2, G.last_row(lp)))
                if ve is None or f is None:
                    continue
                val = (a2 - a) + jb + (f + ve) / q
                if best is None or val < best:
                    best = val
        return best

    for _ in range(48):
        phi = {key2: apply(phi, *key2) for key2 in phi}
    full = {}
    for a in rows:
        for b in range(G.d):
            full[(a, b)] = apply(phi, a, b)
    psi = Fraction(0)
    for a in rows:
        for val in (full.get((a, a)), phi.get((a, a))):
            if val is not None and val > psi:
                psi = val
    G._phi_cache[key] = (full, psi)
    return full, psi


def _closed_form_pairs(G, a):
    """For a last row of block l: (alpha, beta) per column with
    val_inf(P_i[a][b]) >= q^i alpha - beta, from the closed form of that row."""
    q = G.field.q
    ell = G.block_of[a]
    pairs = {}
    for m in range(ell, G.r):
        usum = 0
        ok = True
        for k in range(ell, m):
            x = G.u[k]
            if x.is_zero():
                ok = False
                break
            vx = inf_valuation(x)
            # the bound needs |u_k| <= q^{s_k q/(q-1)}
            if (vx * (q - 1) + G.index[k] * q) < 0:
                ok = False
                break
            usum += vx
        if not ok:
            continue
        dm = G.blocks[m]
        for j in range(1, dm + 1):
            alpha = Fraction(dm * q, q - 1) - (dm - j)
            beta = Fraction(dm * q, q - 1) - usum
            pairs[G.first_col(m) + j - 1] = (alpha, beta)
    return pairs


def _first_index_above(alpha_eff, beta, target):
    """Least i >= 0 with q^i * alpha_eff - beta > target (alpha_eff > 0), as a function of q."""
    def run(q):
        i = 0
        while q**i * alpha_eff - beta <= target:
            i += 1
        return i
    return run


def _rows_needed(G, coords):
    rows = set()
    for a in coords:
        ell = G.block_of[a]
        rows.update(range(a, G.last_row(ell) + 1))
    return rows


def _check_point_domain(G, x, place):
    q = G.field.q
    if place is None:
        for k in range(G.r - 1):
            u = G.u[k]
            if u.is_zero():
                continue
            if not compare_magnitude(inf_valuation(u), "inf",
                                     MagnitudeBound(G.index[k] * q, q - 1), strict=False):
                raise DomainError(f"|u_{k + 1}|_inf exceeds q^({G.index[k]}q/(q-1))")
        for a in range(G.d):
            vx = _valuation_of(x[a], None)
            dm = G.blocks[G.block_of[a]]
            j = G.pos_in_block[a]
            bound = MagnitudeBound(dm * q - (dm - j) * (q - 1), q - 1)
            if not compare_magnitude(vx, "inf", bound, strict=True):
                raise DomainError(
                    f"|x_{a + 1}|_inf = q^{-vx} is not below q^({bound.exponent})")
    else:
        for k in range(G.r - 1):
            u = G.u[k]
            if u.is_zero():
                continue
            if not compare_magnitude(v_valuation(u, place.v)[0], "v", MagnitudeBound(0), strict=False,
                                     dv=place.dv):
                raise DomainError(f"|u_{k + 1}|_v > 1")
        for a in range(G.d):
            vx = _valuation_of(x[a], place)
            if not compare_magnitude(vx, "v", MagnitudeBound(0), strict=True, dv=place.dv):
                raise DomainError(f"|x_{a + 1}|_v >= 1")


def _inf_cutoff(G, coords, vals, prec):
    """Largest i whose terms may still matter at the infinite place."""
    q = G.field.q
    rows = _rows_needed(G, coords)
    phi, psi = None, None
    cutoff = -1
    for a in coords:
        closed = _closed_form_pairs(G, a) if a == G.last_row(G.block_of[a]) else {}
        for b in range(G.d):
            if vals[b] is None:
                continue
            candidates = []
            if b in closed:
                candidates.append(closed[b])
            if not candidates or a != G.last_row(G.block_of[a]):
                if phi is None:
                    phi, psi = _phi_bounds(G, rows)
                f = phi.get((a, b))
                if f is None:
                    if G.block_of[b] < G.block_of[a]:
                        continue
                    # identically zero entry (a zero u in E)
                    continue
                candidates.append((f, psi))
            best = None
            for alpha, beta in candidates:
                eff = alpha + vals[b]
                if eff <= 0:
                    continue
                i0 = _first_index_above(eff, beta, prec)(q)
                best = i0 if best is None else min(best, i0)
            if best is None:
                raise DomainError(
                    f"cannot certify convergence of coordinate {a + 1} against x_{b + 1}")
            cutoff = max(cutoff, best - 1)
    return cutoff


def _v_row_block_min(G, log, ell, i, place):
    w, den = log.block(ell, i)
    dval = v_valuation(RatFunc(G.field, den), place.v)[0]
    best = None
    for row in w:
        for x in row:
            if x.is_zero():
                continue
            n = v_valuation(RatFunc(G.field, x), place.v)[0] - dval
            best = n if best is None else min(best, n)
    return best


def _v_cutoff(G, coords, vals, prec, place):
    """Largest i whose terms may still matter at the place v.

    For i > I: every entry of the rows of block l satisfies
    val(P_i) >= B_I - (2 d_l - 1) * (i - I), because each of the at most
    2 d_l - 1 divisions by T - T^{q^i} costs at most one unit, and E has
    entries of valuation >= 0.  The last row of a block also satisfies
    val(P_i) >= -d_l * floor(i / deg v) from its closed form.  Both are
    beaten by the growth q^i * val(x) with val(x) >= 1.
    """
    q = G.field.q
    log = G.log()
    cutoff = -1
    for a in coords:
        ell = G.block_of[a]
        dl = G.blocks[ell]
        xs = [vals[b] for b in range(G.starts[ell], G.d) if vals[b] is not None]
        if not xs:
            continue
        vx = min(xs)
        tractable = a == G.last_row(ell)
        i_cut = 0
        while True:
            if tractable:
                nxt = i_cut + 1
                if q**nxt * (q - 1) * vx >= dl and q**nxt * vx - dl * (nxt // place.dv) > prec:
                    break
            b_min = _v_row_block_min(G, log, ell, i_cut, place)
            nxt = i_cut + 1
            if b_min is None:
                b_min = 0
            if q**nxt * (q - 1) * vx >= 2 * dl - 1 and b_min - (2 * dl - 1) + q**nxt * vx > prec:
                break
            i_cut += 1
        cutoff = max(cutoff, i_cut)
    return cutoff


def eval_log(G, x, completion="inf", prec=30, coords=None):
    """Evaluate log_G(x) in k_inf (completion="inf") or k_v (completion=v).

    ``x`` is a point with exact (RatFunc) or truncated entries.  Returns a
    list of length d whose requested coordinates (default: all) are series
    correct through the requested absolute precision; other entries are None.
    Raises DomainError outside the certified convergence region.
    """
    field = G.field
    place = _completion(completion)
    if len(x) != G.d:
        raise ValueError("point dimension mismatch")
    x = [RatFunc.coerce(field, c) if not isinstance(c, (InfSeries, VAdicSeries, RatFunc)) else c
         for c in x]
    coords = list(range(G.d)) if coords is None else sorted(set(coords))
    _check_point_domain(G, x, place)
    vals = [_valuation_of(c, place) for c in x]
    if all(v is None for v in vals):
        return [(_zero_series(field, place, prec) if a in coords else None) for a in range(G.d)]
    if place is None:
        cutoff = _inf_cutoff(G, coords, vals, prec)
    else:
        cutoff = _v_cutoff(G, coords, vals, prec, place)
    log = G.log()
    series_x = _embed_point(G, log, x, vals, place, prec, cutoff, coords)
    out = [None] * G.d
    for a in coords:
        acc = _zero_series(field, place, prec)
        for i in range(cutoff + 1):
            nums, den = log.row_fraction(i, a)
            for b in range(G.d):
                if vals[b] is None or nums[b].is_zero():
                    continue
                xt = series_x[b].twist(i) if i else series_x[b]
                if xt.is_zero():
                    need = prec - (xt.prec + 1)
                else:
                    need = prec - xt.valuation
                coeff = embed_fraction(nums[b], den, place, need)
                term = coeff * xt
                if term.prec < prec:
                    raise PrecisionError(
                        f"term {i} of coordinate {a + 1} only known to {term.prec} < {prec}")
                acc = acc + term
        out[a] = acc.truncate(prec)
    return out


def _zero_series(field, place, prec):
    if place is None:
        return InfSeries.zero(field, prec)
    return VAdicSeries.zero(place, prec)


def _embed_point(G, log, x, vals, place, prec, cutoff, coords):
    """Series for each x_b, precise enough that x_b^{(i)} covers all terms."""
    q = G.field.q
    out = []
    for b in range(G.d):
        if vals[b] is None:
            out.append(None)
            continue
        if isinstance(x[b], (InfSeries, VAdicSeries)):
            out.append(x[b])
            continue
        need = prec
        for i in range(1, cutoff + 1):
            worst = None
            for a in coords:
                nums, den = log.row_fraction(i, a)
                if nums[b].is_zero():
                    continue
                if place is None:
                    pv = den.degree() - nums[b].degree()
                else:
                    pv = (v_valuation(RatFunc(G.field, nums[b]), place.v)[0]
                          - v_valuation(RatFunc(G.field, den), place.v)[0])
                worst = pv if worst is None else min(worst, pv)
            if worst is None:
                continue
            # x^{(i)} known through q^i (N_b + 1) - 1 must reach prec - worst
            target = prec - worst
            nb = -(-(target + 1) // q**i) - 1
            need = max(need, nb)
        if place is None:
            out.append(embed_inf(x[b], need))
        else:
            out.append(embed_v(x[b], place, need))
    return out


# ------------------------------------------------------ structural checks

def leading_shape_check(field, s, m):
    """Check deg_tau [t^m]_s = ceil(m/s) and the 1/0 pattern of its leading matrix.

    With l = m mod s taken in 1..s, the (i, j) entry (1-based) must be 1 when
    i = j + s - l and 0 when i < j + s - l.  Returns (ok, report).
    """
    G = build_carlitz_tensor(field, s)
    t_m = field.monomial(m)
    action = tau_action(t_m, G)
    expected_deg = -(-m // s)
    if action.degree() != expected_deg:
        return False, f"deg_tau = {action.degree()}, expected {expected_deg}"
    ell = m % s or s
    lead = action.leading()
    for i in range(1, s + 1):
        for j in range(1, s + 1):
            entry = lead[i - 1][j - 1]
            if i == j + s - ell and not entry.is_one():
                return False, f"entry ({i},{j}) = {entry}, expected 1"
            if i < j + s - ell and not entry.is_zero():
                return False, f"entry ({i},{j}) = {entry}, expected 0"
    return True, f"deg_tau = {expected_deg}, l = {ell}"


def congruence_check(field, s, v):
    """[v(t)^s]_s: tau^{deg v} coefficient = I mod v, all others = 0 mod v."""
    G = build_carlitz_tensor(field, s)
    action = tau_action(v**s, G)
    dv = v.degree()
    for n, mat in enumerate(action.coeffs):
        for i in range(s):
            for j in range(s):
                entry = mat[i][j]
                if not entry.is_poly():
                    return False, f"tau^{n} entry ({i + 1},{j + 1}) not in A"
                target = entry.num - (1 if (n == dv and i == j) else 0)
                if not v.divides(target):
                    return False, f"tau^{n} entry ({i + 1},{j + 1}) = {entry} fails mod v"
    if action.degree() != dv:
        return False, f"deg_tau = {action.degree()}, expected {dv}"
    return True, f"deg_tau = {dv}"


def shrinkage_check(field, s, v, x, target=10, max_steps=None, work_prec=None):
    """Iterate x <- [v(t)^s] x on C^{(x)s} at the place v.

    Each step must obey val(y) >= min(q_v val(x), val(x) + 1), i.e.
    ||y|| <= max(||x||^{q_v}, ||x|| / q_v).  Succeeds when the valuation
    reaches ``target`` within ``max_steps`` (default 10 s deg v).
    Returns (ok, report, valuations).
    """
    place = as_place(v)
    G = build_carlitz_tensor(field, s)
    if max_steps is None:
        max_steps = 10 * s * place.dv
    if work_prec is None:
        work_prec = target + 10
    pt = [c if isinstance(c, VAdicSeries) else embed_v(RatFunc.coerce(field, c), place, work_prec)
          for c in x]
    a = place.v**s

    def norm_val(vec):
        vals = [c.valuation if c.valuation is not None else c.prec + 1 for c in vec]
        exact = all(c.valuation is not None for c in vec if c.valuation == min(vals))
        return min(vals), exact

    val, _ = norm_val(pt)
    if val < 1:
        raise DomainError("shrinkage needs ||x||_v < 1")
    history = [val]
    for _ in range(max_steps):
        if val >= target:
            return True, f"valuation {val} reached", history
        nxt = act(a, G, pt)
        new_val, _ = norm_val(nxt)
        bound = min(place.qv * val, val + 1)
        if new_val < bound:
            if all(c.valuation is not None for c in nxt):
                return False, f"valuation {new_val} below bound {bound}", history
            raise PrecisionError("precision exhausted before the bound could be checked")
        pt, val = nxt, new_val
        history.append(val)
    if val >= target:
        return True, f"valuation {val} reached", history
    return False, f"valuation {val} after {max_steps} steps", history
