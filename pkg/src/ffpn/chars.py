"""Multiplicative and additive characters, character sums, and audits.

Multiplicative characters are indexed by (order d, index j): the character
sends the canonical generator g to exp(2*pi*i*j/d), and 0 to 0 unless it is
the trivial character (which sends 0 to 1).  Additive characters are
psi_delta with psi_delta(alpha) = exp(2*pi*i*Tr(delta*alpha)/p); the
canonical psi_0 is delta = 1 (the prime-field character lifted through the
absolute trace).

Sums accumulate through math.fsum on the real and imaginary parts, so a sum
with up to 3^10 unit-modulus terms carries at most one ulp of rounding.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations
from math import gcd

import numpy as np

from . import fqpoly, gf
from .errors import SizeBudgetExceeded, ZeroElement
from .numtheory import divisors_of, factorize, moebius, multiplicative_stats

ENUM_BUDGET = 3**10

_roots_cache = {}


def _roots_of_unity(d):
    tab = _roots_cache.get(d)
    if tab is None:
        tab = np.exp(2j * np.pi * np.arange(d) / d)
        _roots_cache[d] = tab
    return tab


@dataclass(frozen=True)
class MultCharacter:
    """chi with chi(g^k) = zeta_d^(j*k); trivial iff j == 0 (then d == 1)."""

    tower: object
    d: int
    j: int

    def __post_init__(self):
        if self.tower.N % self.d != 0:
            raise ValueError("character order must divide q^m - 1")
        if self.j == 0:
            object.__setattr__(self, "d", 1)
        elif not (0 < self.j < self.d and gcd(self.j, self.d) == 1):
            raise ValueError("index must be 0 or in [1, d) and coprime to the order")

    @property
    def is_trivial(self):
        return self.j == 0

    def __call__(self, alpha):
        return mult_char_eval(self, alpha)


def trivial_mult(tower):
    return MultCharacter(tower, 1, 0)


def mult_product(c1: MultCharacter, c2: MultCharacter) -> MultCharacter:
    """Pointwise product character on the nonzero elements."""
    N = c1.tower.N
    e = (c1.j * (N // c1.d) + c2.j * (N // c2.d)) % N
    if e == 0:
        return trivial_mult(c1.tower)
    d = N // gcd(e, N)
    return MultCharacter(c1.tower, d, e // (N // d))


@dataclass(frozen=True)
class AddCharacter:
    """psi_delta; delta = 1 is the canonical character, delta = 0 trivial."""

    tower: object
    delta: int

    @property
    def is_trivial(self):
        return self.delta == 0

    def __call__(self, alpha):
        return add_char_eval(self, alpha)

    def fq_order(self):
        return add_char_order(self)


class _CharContext:
    """Cached per-tower tables for character evaluation."""

    def __init__(self, tower):
        if tower.Q > ENUM_BUDGET:
            raise SizeBudgetExceeded(
                f"character enumeration budget is 3^10 elements, got {tower.Q}"
            )
        if not tower.has_tables:
            raise SizeBudgetExceeded("character evaluation needs log tables")
        self.tower = tower
        self.tp = fqpoly.tower_poly(tower)
        Q, N, p = tower.Q, tower.N, tower.p
        # absolute trace of every code, via the p-power permutation
        frob_p = np.zeros(Q, dtype=np.int64)
        frob_p[tower.exp] = tower.exp[(np.arange(N) * p) % N]
        acc = np.arange(Q, dtype=np.int64)
        v = np.arange(Q, dtype=np.int64)
        for _ in range(tower.n - 1):
            v = frob_p[v]
            acc = tower.add_codes_vec(acc, v)
        assert acc.max() < p
        self.trace_abs = acc
        self.psi0_vals = _roots_of_unity(p)[acc]
        self.sq = np.zeros(Q, dtype=np.int64)
        self.sq[tower.exp] = tower.exp[(2 * np.arange(N)) % N]
        self._mult_tables = {}
        self._add_tables = {}
        self._delta_orders = None

    def mult_table(self, d, j):
        key = (d, j)
        tab = self._mult_tables.get(key)
        if tab is None:
            t = self.tower
            tab = np.zeros(t.Q, dtype=np.complex128)
            tab[t.exp] = _roots_of_unity(d)[(j * np.arange(t.N)) % d]
            tab[0] = 1.0 if j == 0 else 0.0
            self._mult_tables[key] = tab
        return tab

    def add_table(self, delta):
        tab = self._add_tables.get(delta)
        if tab is None:
            t = self.tower
            prod_codes = t.mul_codes_vec(np.arange(t.Q, dtype=np.int64), delta)
            tab = self.psi0_vals[prod_codes]
            self._add_tables[delta] = tab
        return tab

    def delta_orders(self):
        """Divisor index of the F_q-order of psi_delta, for every delta.

        psi_delta has order h iff delta is trace-orthogonal to the image of
        h o (dot); divisors are tested in increasing degree, so the first
        hit is the minimal one.
        """
        if self._delta_orders is None:
            t = self.tower
            orders = np.full(t.Q, -1, dtype=np.int64)
            for di, (poly, _exps) in enumerate(self.tp.divisors()):
                mat = t.linear_map_matrix(lambda c, g=poly: self.tp.apply_codes(g, c))
                ok = np.ones(t.Q, dtype=bool)
                for col in range(t.n):
                    vcode = int(t.encode_digit_matrix(mat[:, col].reshape(1, -1))[0])
                    if vcode == 0:
                        continue
                    tr = self.trace_abs[t.mul_codes_vec(np.arange(t.Q), vcode)]
                    ok &= tr == 0
                newly = ok & (orders < 0)
                orders[newly] = di
            assert orders.min() >= 0
            self._delta_orders = orders
        return self._delta_orders

    def delta_class(self, divisor_index):
        """All delta codes whose psi_delta has the given divisor as order."""
        return np.nonzero(self.delta_orders() == divisor_index)[0]


_ctx_cache = {}


def char_context(tower) -> _CharContext:
    key = (tower.p, tower.r, tower.m)
    ctx = _ctx_cache.get(key)
    if ctx is None:
        ctx = _CharContext(tower)
        _ctx_cache[key] = ctx
    return ctx


def _code_of(tower, alpha):
    return alpha.code if isinstance(alpha, gf.FieldElement) else tower.coerce(alpha)


def mult_char_eval(chi: MultCharacter, alpha) -> complex:
    t = chi.tower
    code = _code_of(t, alpha)
    if code == 0:
        return 1.0 + 0j if chi.is_trivial else 0j
    k = t.dlog_code(code)
    return cmath.exp(2j * cmath.pi * ((chi.j * k) % chi.d) / chi.d)


def add_char_eval(psi: AddCharacter, alpha) -> complex:
    t = psi.tower
    code = _code_of(t, alpha)
    tr = t.trace_abs_code(t.mul_codes(psi.delta, code))
    return cmath.exp(2j * cmath.pi * tr / t.p)


def add_char_order(psi: AddCharacter) -> fqpoly.FqPolynomial:
    """Minimal monic divisor h of x^m - 1 with psi(h o alpha) = 1 for all alpha."""
    ctx = char_context(psi.tower)
    di = int(ctx.delta_orders()[psi.delta])
    return ctx.tp.divisors()[di][0]


def _csum(terms) -> complex:
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _quad_codes(tower, f):
    if isinstance(f, tuple):
        a, b, c = f
        return tower.coerce(a), tower.coerce(b), tower.coerce(c)
    return f.a.code, f.b.code, f.c.code


def quad_values(tower, f):
    """f(alpha) codes for every alpha code, vectorized."""
    ctx = char_context(tower)
    a, b, c = _quad_codes(tower, f)
    codes = np.arange(tower.Q, dtype=np.int64)
    av = tower.mul_codes_vec(ctx.sq, a)
    bv = tower.mul_codes_vec(codes, b)
    return tower.add_codes_vec(tower.add_codes_vec(av, bv), c)


def char_sum(chi1: MultCharacter, chi2: MultCharacter, psi: AddCharacter, f) -> complex:
    """S = sum over all alpha of chi1(alpha) chi2(f(alpha)) psi(alpha).

    f is a coefficient triple (a, b, c) of codes/elements, or an object with
    .a/.b/.c FieldElement attributes.  The chi(0) extension rule applies.
    """
    t = chi1.tower
    ctx = char_context(t)
    fv = quad_values(t, f)
    terms = (
        ctx.mult_table(chi1.d, chi1.j)
        * ctx.mult_table(chi2.d, chi2.j)[fv]
        * ctx.add_table(psi.delta)
    )
    return _csum(terms)


def char_sum_c0_factored(chi1, chi2, psi, a, b) -> complex:
    """The x(ax+b) sum through the chi3 = chi1*chi2 regrouping.

    Sums chi3(alpha) chi2(a*alpha + b) psi(alpha) over nonzero alpha, plus
    the alpha = 0 term of the direct form (the regrouping identity holds
    pointwise only away from 0).
    """
    t = chi1.tower
    ctx = char_context(t)
    chi3 = mult_product(chi1, chi2)
    codes = np.arange(t.Q, dtype=np.int64)
    lin = t.add_codes_vec(t.mul_codes_vec(codes, t.coerce(a)), t.coerce(b))
    terms = (
        ctx.mult_table(chi3.d, chi3.j)
        * ctx.mult_table(chi2.d, chi2.j)[lin]
        * ctx.add_table(psi.delta)
    )
    s = _csum(terms[1:])
    if chi1.is_trivial and chi2.is_trivial:
        s += 1.0
    return s


# ---------------------------------------------------------------------------
# characteristic functions of freeness


def _phi_int(d):
    return multiplicative_stats(factorize(d)).phi


def freeness_indicator(kind, target, alpha) -> float:
    """rho_e (kind 'multiplicative'/'e') or kappa_g (kind 'additive'/'g').

    Moebius-weighted character averages; mathematically 1 on the free
    elements and 0 elsewhere, evaluated here in floating point.
    """
    if not isinstance(alpha, gf.FieldElement):
        raise TypeError("alpha must be a FieldElement")
    t = alpha.tower
    ctx = char_context(t)
    code = alpha.code

    if kind in ("multiplicative", "e"):
        e = int(target)
        if t.N % e != 0:
            raise ValueError("e must divide q^m - 1")
        if code == 0:
            raise ZeroElement("rho_e is defined on nonzero elements")
        k = t.dlog_code(code)
        theta = float(multiplicative_stats(factorize(e)).theta)
        total = 0.0 + 0j
        for d in divisors_of(e):
            mu = moebius(d)
            if mu == 0:
                continue
            roots = _roots_of_unity(d)
            inner = sum(roots[(j * k) % d] for j in range(d) if gcd(j, d) == 1)
            total += (mu / _phi_int(d)) * inner
        return theta * total.real

    if kind in ("additive", "g"):
        tp = ctx.tp
        if target == "all":
            exps = [tp.pf.multiplicity] * len(tp.pf.factors)
        elif isinstance(target, fqpoly.FqPolynomial):
            exps = _divisor_exponents(tp, target)
        else:
            raise TypeError("additive target must be an FqPolynomial or 'all'")
        q = t.q
        support = [i for i, ex in enumerate(exps) if ex > 0]
        Theta = float(
            fqpoly.poly_stats(q, [(tp.pf.factors[i].degree, exps[i]) for i in support]).Theta
        )
        div_index = {ex: i for i, (_poly, ex) in enumerate(tp.divisors())}
        nfac = len(tp.pf.factors)
        total = 0.0 + 0j
        for ssize in range(len(support) + 1):
            for subset in combinations(support, ssize):
                ex = tuple(1 if i in subset else 0 for i in range(nfac))
                di = div_index[ex]
                phi_f = fqpoly.poly_stats(
                    q, [(tp.pf.factors[i].degree, 1) for i in subset]
                ).Phi
                deltas = ctx.delta_class(di)
                vals = ctx.psi0_vals[t.mul_codes_vec(deltas, code)]
                total += ((-1) ** ssize / phi_f) * _csum(vals)
        return Theta * total.real

    raise ValueError(f"unknown indicator kind {kind!r}")


def _divisor_exponents(tp, g: fqpoly.FqPolynomial):
    """Exponent vector of a monic divisor of x^m - 1."""
    exps = []
    rem = g.monic()
    for f in tp.pf.factors:
        e = 0
        while e < tp.pf.multiplicity:
            quot, r = rem.divmod(f)
            if not r.is_zero():
                break
            rem = quot
            e += 1
        exps.append(e)
    assert rem.is_one(), "g must divide x^m - 1"
    return exps


# ---------------------------------------------------------------------------
# audits


def orthogonality_audit(tower) -> float:
    """Worst |sum| over the orthogonality relations (all are 0 exactly).

    Covers both directions for both character families: the sum of each
    nontrivial character over its group, and the sum over all characters at
    a fixed nontrivial element (the two multiplicative relations evaluate
    the same sums, as do the two additive ones, by the symmetry of j*k and
    Tr(delta*alpha)).
    """
    ctx = char_context(tower)
    t = tower
    worst = 0.0
    roots = _roots_of_unity(t.N)
    for j in range(1, t.N):
        s = _csum(roots[(j * np.arange(t.N)) % t.N])
        worst = max(worst, abs(s))
    for delta in range(1, t.Q):
        worst = max(worst, abs(_csum(ctx.add_table(delta))))
    return worst


def order_triples(tower):
    """(d1, d2, additive-divisor-index) triples for the Weil audit."""
    ctx = char_context(tower)
    ds = divisors_of(tower.N)
    return [
        (d1, d2, hi)
        for d1 in ds
        for d2 in ds
        for hi in range(len(ctx.tp.divisors()))
    ]


def representative_psi(tower, divisor_index) -> AddCharacter:
    """First delta (ascending code) whose character has the given order."""
    deltas = char_context(tower).delta_class(divisor_index)
    assert len(deltas) > 0
    return AddCharacter(tower, int(deltas[0]))


def random_admissible_quadratics(tower, count, rng):
    """(a, b, c) code triples with a != 0 and b^2 != a*c."""
    out = []
    while len(out) < count:
        a = rng.randrange(1, tower.Q)
        b = rng.randrange(tower.Q)
        c = rng.randrange(tower.Q)
        if tower.mul_codes(b, b) != tower.mul_codes(a, c):
            out.append((a, b, c))
    return out


def _weil_chunk(args):
    """Worker: audit one slice of order triples against a shared f list."""
    p, r, m, triples, fs, tol = args
    t = gf.build_extension(p, r, m)
    ctx = char_context(t)
    bound3 = 3 * math.sqrt(t.Q)
    bound2 = 2 * math.sqrt(t.Q)
    divs = ctx.tp.divisors()
    worst = None
    violations = []
    checked = 0
    for d1, d2, hi in triples:
        chi1 = MultCharacter(t, d1, 1 if d1 > 1 else 0)
        chi2 = MultCharacter(t, d2, 1 if d2 > 1 else 0)
        psi = representative_psi(t, hi)
        if chi1.is_trivial and chi2.is_trivial and psi.is_trivial:
            continue
        bound = bound2 if psi.is_trivial else bound3
        for f in fs:
            s = abs(char_sum(chi1, chi2, psi, f))
            margin = bound + tol - s
            checked += 1
            if worst is None or margin < worst["margin"]:
                worst = {
                    "d1": d1,
                    "d2": d2,
                    "h": divs[hi][0].render(),
                    "f": list(f),
                    "abs_S": s,
                    "bound": bound,
                    "margin": margin,
                }
            if margin < 0:
                violations.append((d1, d2, hi, f, s, bound))
    return worst, violations, checked


def weil_audit(tower, quadratics=100, seed=0, tol=1e-6, threads=1):
    """Check |S| <= 3 q^(m/2) (2 q^(m/2) for trivial psi) over random f.

    Returns {"worst": row, "violations": [...], "checked": count}; the fully
    trivial triple is excluded (its sum is q^m - #zeros, not bounded).
    Worker processes split the triple list; the merge is order-independent
    because each sum is evaluated identically in any partition.
    """
    import multiprocessing
    import random as _random

    t = tower
    char_context(t)  # build before forking
    rng = _random.Random(seed)
    fs = random_admissible_quadratics(t, quadratics, rng)
    triples = order_triples(t)
    threads = max(1, min(threads or 1, len(triples)))
    if threads == 1:
        chunks = [(t.p, t.r, t.m, triples, fs, tol)]
        results = [_weil_chunk(chunks[0])]
    else:
        size = (len(triples) + threads - 1) // threads
        chunks = [
            (t.p, t.r, t.m, triples[i : i + size], fs, tol)
            for i in range(0, len(triples), size)
        ]
        mp = multiprocessing.get_context("fork")
        with mp.Pool(threads) as pool:
            results = list(pool.imap(_weil_chunk, chunks))
    worst = None
    violations = []
    checked = 0
    for w, v, c in results:
        if w is not None and (worst is None or w["margin"] < worst["margin"]):
            worst = w
        violations.extend(v)
        checked += c
    return {"worst": worst, "violations": violations, "checked": checked}
