"""Check batteries: the acceptance criteria, exact invariants and the worked example.

Every check returns a CheckResult; suites are lists of (id, callable) so the
command line and the test-suite drive exactly the same code.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass

from .completions import as_place
from .fqarith import FiniteField, Index, RatFunc, L_degree, inf_valuation, monic_enumerate
from .mzv import chen_product, power_sum, verify_relation_inf, zeta_partial, zeta_v
from .polylog import (
    chen_weight_coordinate,
    li_star_inf,
    li_star_v_conv,
    li_star_v_extended,
)
from .stufflealg import StuffleAlgebra, StuffleElement
from .tmodule import (
    build_G,
    congruence_check,
    d_act,
    eval_log,
    leading_shape_check,
    mat_add,
    mat_identity,
    mat_mul,
    mat_scale,
    mat_twist,
    shrinkage_check,
    special_point,
    tau_action,
    wt_row_oracle_fraction,
)

__all__ = [
    "CheckResult",
    "field_from_q",
    "compositions",
    "index_grid",
    "module_grid",
    "zeta_bruteforce",
    "acceptance_suite",
    "invariants_suite",
    "paper_example_suite",
    "run_suite",
]


@dataclass
class CheckResult:
    id: str
    ok: bool
    precision_claimed: object
    elapsed_ms: float
    detail: str = ""

    def as_dict(self):
        return {"id": self.id, "verdict": "PASS" if self.ok else "FAIL",
                "precision_claimed": self.precision_claimed,
                "elapsed_ms": round(self.elapsed_ms, 1), "detail": self.detail}


def field_from_q(q, modulus=None):
    """The field with q elements (q a prime power)."""
    for p in range(2, q + 1):
        if q % p == 0:
            e, rest = 0, q
            while rest % p == 0:
                rest //= p
                e += 1
            if rest != 1:
                raise ValueError(f"{q} is not a prime power")
            return FiniteField(p, e, modulus)
    raise ValueError(f"{q} is not a prime power")


def compositions(n, max_parts):
    """Ordered tuples of positive integers summing to n, with at most max_parts parts."""
    out = []

    def rec(rest, cur):
        if rest == 0:
            out.append(tuple(cur))
            return
        if len(cur) == max_parts:
            return
        for k in range(1, rest + 1):
            rec(rest - k, cur + [k])

    rec(n, [])
    return out


def index_grid(max_wt, max_dep):
    return [Index(c) for n in range(1, max_wt + 1) for c in compositions(n, max_dep)]


def module_grid(field, max_wt=5, max_dep=3):
    """All (s, u) with wt(s) <= max_wt, dep(s) <= max_dep, u_i in {1, T, T+1}."""
    T = field.theta()
    one = field.one_poly()
    values = [RatFunc(field, one), RatFunc(field, T), RatFunc(field, T + one)]
    return [(s, list(u)) for s in index_grid(max_wt, max_dep)
            for u in itertools.product(values, repeat=s.dep)]


def zeta_bruteforce(field, index, D):
    """Partial zeta sum by nested enumeration of monic tuples (a_1, ..., a_r)
    with D >= deg a_1 > ... > deg a_r."""
    index = Index(index)
    by_degree = {d: monic_enumerate(field, d) for d in range(D + 1)}
    total = RatFunc(field, field.zero_poly())
    for degrees in itertools.combinations(range(D, -1, -1), index.dep):
        for tup in itertools.product(*(by_degree[d] for d in degrees)):
            den = field.one_poly()
            for a, s in zip(tup, index):
                den = den * a**s
            total = total + RatFunc(field, field.one_poly(), den)
    return total


def _timed(check_id, fn, precision):
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failing check, with the reason
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(check_id, ok, precision, (time.perf_counter() - start) * 1000, detail)


def _random_poly(field, rng, max_deg, min_val=0):
    """Random polynomial with exact degree in [min_val, max_deg], divisible by T^min_val."""
    deg = rng.randint(min_val, max(min_val, max_deg))
    coeffs = [0] * min_val + [rng.randrange(field.q) for _ in range(deg - min_val)] + [1]
    return field.poly([field.from_code(c) for c in coeffs])


# ----------------------------------------------------------- acceptance

def criterion_1(M=25):
    """q=4, v=T: zeta(1)_v nonzero and zeta(1)_v^2 = zeta(2)_v."""
    field = FiniteField(2, 2)
    T = field.theta()
    z1 = zeta_v([1], T, M)
    z2 = zeta_v([2], T, M)
    nonzero = z1.valuation is not None and z1.valuation < M
    ok = nonzero and (z1 * z1).truncate(M).agrees(z2, M)
    return ok, f"zeta(1)_T = {z1.render()}; zeta(2)_T = {z2.render()}"


def criterion_2(M=30):
    """q=2, v=T: zeta(1)_v = zeta(2)_v = 0 through v^M."""
    field = FiniteField(2)
    T = field.theta()
    z1 = zeta_v([1], T, M)
    z2 = zeta_v([2], T, M)
    ok = z1.is_zero() and z2.is_zero() and z1.prec >= M and z2.prec >= M
    return ok, f"zeta(1)_T = {z1.render()}; zeta(2)_T = {z2.render()}"


def criterion_3(M=15):
    """q=3: zeta(2)_v = 0 through v^M for v = T and v = T^2 + 1."""
    field = FiniteField(3)
    T = field.theta()
    vals = [zeta_v([2], v, M) for v in (T, T**2 + field.one_poly())]
    ok = all(z.is_zero() and z.prec >= M for z in vals)
    return ok, "; ".join(z.render() for z in vals)


def criterion_4(pairs=200, n_max=4, primes=(2, 3), seed=4):
    """Exact truncated multiplicativity of the star product on sampled H^0 pairs."""
    checked = failed = 0
    for p in primes:
        field = FiniteField(p)
        T = field.theta()
        one = field.one_poly()
        alg = StuffleAlgebra(field, T)
        letters = [alg.letter(s, u) for s in (1, 2, 3)
                   for u in (RatFunc(field, one), RatFunc(field, T), RatFunc(field, T + one))]
        first = [l for l in letters if alg.in_X0(l)]
        rng = random.Random(seed * 1000 + p)

        def word():
            length = rng.randint(1, 3)
            return (rng.choice(first),) + tuple(rng.choice(letters) for _ in range(length - 1))

        for _ in range(pairs):
            x = StuffleElement.word(field, word())
            y = StuffleElement.word(field, word())
            if not alg.in_H0(alg.star(x, y)):
                failed += 1
            for n in range(n_max + 1):
                checked += 1
                if not alg.multiplicativity_check(x, y, "trunc", n).ok:
                    failed += 1
    return failed == 0, f"{checked} exact identities, {failed} failures"


def criterion_5(q=2, i_max=6):
    """Row wt(s) of P_i from the recursion equals the closed form, exactly."""
    field = field_from_q(q)
    checked = failed = 0
    for s, u in module_grid(field):
        G = build_G(s, u)
        for i in range(i_max + 1):
            nums, den = G.log().row_fraction(i, G.wt_coord)
            onums, oden = wt_row_oracle_fraction(G, i)
            checked += 1
            if any(a * oden != b * den for a, b in zip(nums, onums)):
                failed += 1
    return failed == 0, f"{checked} rows compared, {failed} mismatches"


def _sample_inf_point(G, rng):
    q = G.field.q
    x = []
    for a in range(G.d):
        dm = G.blocks[G.block_of[a]]
        j = G.pos_in_block[a]
        # need deg x < dm q/(q-1) - (dm - j); take the largest admissible degree bound
        bound = (dm * q - (dm - j) * (q - 1)) / (q - 1)
        max_deg = int(-(-bound // 1)) - 1
        x.append(RatFunc(G.field, _random_poly(G.field, rng, max_deg)))
    return x


def _sample_v_point(G, v, rng, max_mult_deg=3):
    field = G.field
    return [RatFunc(field, v * _random_poly(field, rng, max_mult_deg)) for _ in range(G.d)]


def criterion_6(q=2, N=30, M=20, seed=6):
    """Key identity for the wt coordinate, both completions, over the grid."""
    field = field_from_q(q)
    T = field.theta()
    rng = random.Random(seed)
    checked = failed = nonzero = 0
    notes = []
    for s, u in module_grid(field):
        G = build_G(s, u)
        for completion, prec, x in (("inf", N, _sample_inf_point(G, rng)),
                                    (T, M, _sample_v_point(G, T, rng))):
            res = chen_weight_coordinate(s, u, x, completion, prec)
            checked += 1
            nonzero += not res.logarithm.is_zero()
            if not res.match:
                failed += 1
                if len(notes) < 3:
                    notes.append(f"{list(s)}: differ at {res.first_difference}")
    return failed == 0, f"{checked} evaluations ({nonzero} nonzero), {failed} mismatches " + "; ".join(notes)


def criterion_7(q=2, N=30, M=20):
    """(-1)^{r-1} Li*_{reversed s}(reversed u) = wt coordinate of log_G(v_{s,u})."""
    field = field_from_q(q)
    T = field.theta()
    place = as_place(T)
    checked = failed = 0
    for s, u in module_grid(field):
        G = build_G(s, u)
        x = special_point(s, u)
        rs, ru = s.reversed(), list(reversed(u))
        wt = G.wt_coord
        sign = -1 if G.r % 2 == 0 else 1
        series = li_star_inf(rs, ru, N)
        via_log = eval_log(G, x, "inf", N, coords=[wt])[wt]
        checked += 1
        if not series.agrees(via_log * sign, N):
            failed += 1
        if u[-1].is_zero() or u[-1].num.degree() < 1 or not T.divides(u[-1].num):
            continue
        series = li_star_v_conv(rs, ru, place, M)
        via_log = eval_log(G, x, place, M, coords=[wt])[wt]
        checked += 1
        if not series.agrees(via_log * sign, M):
            failed += 1
    return failed == 0, f"{checked} comparisons, {failed} mismatches"


def criterion_8(q=2, M=20, points=20, seed=8):
    """Extended v-adic Li* does not depend on the auxiliary polynomial a(t)."""
    field = field_from_q(q)
    T = field.theta()
    one = field.one_poly()
    rng = random.Random(seed)
    grid = module_grid(field)
    sample = rng.sample(grid, points)
    failed = 0
    for s, u in sample:
        base = li_star_v_extended(s, u, T, M)
        G = build_G(s.reversed(), list(reversed(u)))
        other = li_star_v_extended(s, u, T, M, extra_factor=T ** G.blocks[0] - one)
        if not base.agrees(other, M):
            failed += 1
    return failed == 0, f"{points} points, {failed} mismatches"


def criterion_9():
    """Leading-matrix shape of [t^m]_s and the congruences for [v(t)^s]_s."""
    field = FiniteField(2)
    T = field.theta()
    one = field.one_poly()
    bad = []
    for s in range(1, 5):
        for m in range(1, 9):
            ok, report = leading_shape_check(field, s, m)
            if not ok:
                bad.append(f"shape s={s} m={m}: {report}")
    for s in range(1, 4):
        for v in (T, T + one, T**2 + T + one):
            ok, report = congruence_check(field, s, v)
            if not ok:
                bad.append(f"congruence s={s}: {report}")
    return not bad, "; ".join(bad) or "32 shapes and 9 congruences hold"


def criterion_10(points=50, seed=10):
    """Iterating [v(t)^s] on v-adically small points: max-bound per step, valuation >= 10."""
    field = FiniteField(2)
    T = field.theta()
    one = field.one_poly()
    places = [T, T + one, T**2 + T + one]
    rng = random.Random(seed)
    failed = []
    for k in range(points):
        s = rng.randint(1, 3)
        v = rng.choice(places)
        x = [RatFunc(field, v * _random_poly(field, rng, 3)) for _ in range(s)]
        ok, report, _ = shrinkage_check(field, s, v, x, target=10)
        if not ok:
            failed.append(f"point {k}: {report}")
    return not failed, "; ".join(failed[:3]) or f"{points} points reached valuation 10"


def criterion_11(N=40):
    """zeta DP = brute force (exact) and the product relations at infinity."""
    bad = []
    count = 0
    for p in (2, 3):
        field = FiniteField(p)
        for s in index_grid(4, 2):
            for D in range(4):
                count += 1
                if zeta_partial(field, s, D) != zeta_bruteforce(field, s, D):
                    bad.append(f"q={p} {list(s)} D={D}")
    rels = 0
    for q in (2, 3, 4):
        field = field_from_q(q)
        for r in range(1, 5):
            for s in range(1, 6 - r):
                rels += 1
                verdict = verify_relation_inf(chen_product(r, s, q), N, field)
                if not verdict.ok:
                    bad.append(f"q={q} r={r} s={s}: {verdict.describe()}")
    return not bad, "; ".join(bad[:5]) or f"{count} exact partial sums, {rels} relations"


def acceptance_suite(q=2):
    return [
        ("A01-paper-example-q4", lambda: criterion_1(), "v^25"),
        ("A02-trivial-zeros-q2", lambda: criterion_2(), "v^30"),
        ("A03-trivial-zeros-q3", lambda: criterion_3(), "v^15"),
        ("A04-stuffle-truncated", lambda: criterion_4(), "exact"),
        ("A05-log-row-closed-form", lambda: criterion_5(q), "exact"),
        ("A06-key-identity", lambda: criterion_6(q), "T^-30 / v^20"),
        ("A07-log-series", lambda: criterion_7(q), "T^-30 / v^20"),
        ("A08-a-independence", lambda: criterion_8(q), "v^20"),
        ("A09-shape-congruence", lambda: criterion_9(), "exact"),
        ("A10-shrinkage", lambda: criterion_10(), "v^10"),
        ("A11-zeta-oracle-relations", lambda: criterion_11(), "exact / T^-40"),
    ]


# ------------------------------------------------------------ invariants

def _ring_hom(field, rng, pairs=10):
    T = field.theta()
    one = field.one_poly()
    G = build_G([2, 1], [RatFunc(field, T), RatFunc(field, one)])
    for _ in range(pairs):
        a = _random_poly(field, rng, 3)
        b = _random_poly(field, rng, 3)
        if tau_action(a, G) * tau_action(b, G) != tau_action(a * b, G):
            return False, f"[a][b] != [ab] for a={a}, b={b}"
    return True, f"{pairs} pairs"


def _functional_equations(field, I=4):
    T = field.theta()
    one = field.one_poly()
    G = build_G([2, 1], [RatFunc(field, T), RatFunc(field, one)])
    dt = G.d_t()
    E = G.E_matrix()
    N = G.N_matrix()
    q = field.q
    P = [G.log().matrix(i) for i in range(I + 1)]
    Q = [G.exp().matrix(i) for i in range(I + 1)]
    for i in range(1, I + 1):
        shifted = mat_add(mat_scale(RatFunc(field, T**(q**i)), mat_identity(field, G.d)), N)
        lhs = mat_add(mat_mul(P[i], shifted), mat_mul(P[i - 1], mat_twist(E, i - 1)))
        if lhs != mat_mul(dt, P[i]):
            return False, f"log equation fails at i={i}"
        lhs = mat_mul(Q[i], shifted)
        rhs = mat_add(mat_mul(dt, Q[i]), mat_mul(E, mat_twist(Q[i - 1], 1)))
        if lhs != rhs:
            return False, f"exp equation fails at i={i}"
    # exp o log = identity modulo tau^{I+1}
    for n in range(1, I + 1):
        acc = None
        for a in range(n + 1):
            term = mat_mul(Q[a], mat_twist(P[n - a], a))
            acc = term if acc is None else mat_add(acc, term)
        if any(not x.is_zero() for row in acc for x in row):
            return False, f"composition has a tau^{n} term"
    return True, f"orders <= {I}"


def _tractability(field, rng, samples=20):
    G = build_G([2, 1, 1], [RatFunc(field, field.theta())] * 3)
    wt = G.wt_coord
    for _ in range(samples):
        a = _random_poly(field, rng, 4)
        row = d_act(a, G)[wt]
        for b, x in enumerate(row):
            target = RatFunc(field, a) if b == wt else RatFunc(field, field.zero_poly())
            if x != target:
                return False, f"d[a] wt row entry {b + 1} = {x}"
    return True, f"{samples} polynomials"


def _stuffle_laws(field, rng, triples=20):
    T = field.theta()
    one = field.one_poly()
    alg = StuffleAlgebra(field, T)
    letters = [alg.letter(s, u) for s in (1, 2, 3)
               for u in (RatFunc(field, one), RatFunc(field, T), RatFunc(field, T + one))]

    def word():
        return StuffleElement.word(field, tuple(rng.choice(letters) for _ in range(rng.randint(0, 3))))

    for _ in range(triples):
        x, y, z = word(), word(), word()
        if alg.star(x, y) != alg.star(y, x):
            return False, "star is not commutative"
        if alg.star(alg.star(x, y), z) != alg.star(x, alg.star(y, z)):
            return False, "star is not associative"
    return True, f"{triples} triples"


def _power_sum_valuations(field, d_max=3, s_max=6):
    for d in range(d_max + 1):
        for s in range(1, s_max + 1):
            val = inf_valuation(power_sum(field, d, s))
            if val < max(s * d, L_degree(field.q, d)):
                return False, f"val S_{d}({s}) = {val}"
    return True, f"d <= {d_max}, s <= {s_max}"


def invariants_suite(q=2):
    field = field_from_q(q)
    rng = random.Random(q)
    return [
        ("I01-ring-homomorphism", lambda: _ring_hom(field, rng), "exact"),
        ("I02-functional-equations", lambda: _functional_equations(field), "exact"),
        ("I03-tractable-coordinate", lambda: _tractability(field, rng), "exact"),
        ("I04-stuffle-laws", lambda: _stuffle_laws(field, rng), "exact"),
        ("I05-power-sum-valuation", lambda: _power_sum_valuations(field), "exact"),
        ("I06-shape", lambda: criterion_9(), "exact"),
    ]


def paper_example_suite(q=4, v=None, M=25):
    field = field_from_q(q)
    place = v if v is not None else field.theta()

    def run():
        z1 = zeta_v([1], place, M)
        z2 = zeta_v([2], place, M)
        ok = (z1 * z1).truncate(M).agrees(z2, M)
        kind = "0 = 0" if z1.is_zero() and z2.is_zero() else "both sides nonzero"
        return ok, f"zeta(1)_v^2 = zeta(2)_v ({kind}); zeta(1)_v = {z1.render()}"

    return [("P01-zeta1-squared", run, f"v^{M}")]


def _run_one(item):
    check_id, fn, precision = item
    return _timed(check_id, fn, precision)


def run_suite(checks, jobs=1):
    """Run (id, callable, precision) checks; results sorted by id."""
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, checks))
    else:
        results = [_run_one(c) for c in checks]
    return sorted(results, key=lambda r: r.id)
