"""Arithmetic in F_p c F_q c F_{q^m} with one flat representation.

A tower is F_p[x]/(modulus) of degree n = r*m; the intermediate field F_q
(q = p^r) is the fixed set of the r-fold p-power Frobenius.  Elements are
integer codes in [0, p^n): the base-p digits of a code are the coefficients
of the residue polynomial, ascending.  The modulus and the multiplicative
generator are the lexicographically smallest valid choices (coefficient
vectors compared as base-p integers), so every run of every build picks the
same structures.

Log/antilog tables are built eagerly for fields up to 2^24 elements; above
that, discrete logs fall back to baby-step giant-step up to 2^40.
"""

from __future__ import annotations

from math import isqrt

import numpy as np

from .errors import NotPrime, SizeBudgetExceeded, ZeroElement
from .numtheory import factorize, is_prime

TABLE_LIMIT = 1 << 24
BSGS_LIMIT = 1 << 40


# ---------------------------------------------------------------------------
# dense polynomials over F_p: tuples of ints, ascending degree, no trailing 0

def _ptrim(a):
    i = len(a)
    while i > 0 and a[i - 1] == 0:
        i -= 1
    return tuple(a[:i])


def _pmul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _ptrim(out)


def _pmod(a, mod, p):
    a = list(a)
    dm = len(mod) - 1
    inv_lead = pow(mod[-1], p - 2, p)
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] * inv_lead % p
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * mod[j]) % p
    return _ptrim(a[:dm])


def _pgcd(a, b, p):
    a, b = _ptrim(a), _ptrim(b)
    while b:
        a, b = b, _pmod(a, b, p)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = tuple(c * inv % p for c in a)
    return a


def _ppowmod(a, k, mod, p):
    result = (1,)
    a = _pmod(a, mod, p)
    while k:
        if k & 1:
            result = _pmod(_pmul(result, a, p), mod, p)
        a = _pmod(_pmul(a, a, p), mod, p)
        k >>= 1
    return result


def _psub(a, b, p):
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % p
    return _ptrim(out)


def is_irreducible(poly, p):
    """Distinct-degree test: no factor of degree <= deg/2 survives."""
    poly = _ptrim(poly)
    n = len(poly) - 1
    if n <= 0:
        return False
    if n == 1:
        return True
    if poly[0] == 0:
        return False
    t = (0, 1)
    for _ in range(n // 2):
        t = _ppowmod(t, p, poly, p)
        if len(_pgcd(_psub(t, (0, 1), p), poly, p)) > 1:
            return False
    return True


_modulus_cache = {}


def lex_smallest_irreducible(p, n):
    """Monic irreducible of degree n over F_p with the smallest tail.

    Tails are compared as base-p integers (digit i = coefficient of x^i).
    Degree 1 returns x itself, giving F_p with the zero-residue convention.
    """
    key = (p, n)
    if key in _modulus_cache:
        return _modulus_cache[key]
    if n == 1:
        mod = (0, 1)
    else:
        mod = None
        for k in range(p**n):
            if k % p == 0:
                continue
            digits = []
            v = k
            for _ in range(n):
                digits.append(v % p)
                v //= p
            cand = tuple(digits) + (1,)
            if is_irreducible(cand, p):
                mod = cand
                break
        assert mod is not None
    _modulus_cache[key] = mod
    return mod


class FieldElement:
    """A value in a FieldTower; thin wrapper over an integer code."""

    __slots__ = ("tower", "code")

    def __init__(self, tower, code):
        self.tower = tower
        self.code = code

    @property
    def coeffs(self):
        return self.tower.decode(self.code)

    def is_zero(self):
        return self.code == 0

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and other.tower is self.tower
            and other.code == self.code
        )

    def __hash__(self):
        return hash((id(self.tower), self.code))

    def __add__(self, other):
        return FieldElement(self.tower, self.tower.add_codes(self.code, self.tower.coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.tower, self.tower.sub_codes(self.code, self.tower.coerce(other)))

    def __neg__(self):
        return FieldElement(self.tower, self.tower.neg_code(self.code))

    def __mul__(self, other):
        return FieldElement(self.tower, self.tower.mul_codes(self.code, self.tower.coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self.tower.coerce(other)
        return FieldElement(self.tower, self.tower.mul_codes(self.code, self.tower.inv_code(o)))

    def __pow__(self, k):
        return FieldElement(self.tower, self.tower.pow_code(self.code, k))

    def __repr__(self):
        return f"FieldElement({self.render()})"

    def render(self):
        s = ",".join(str(c) for c in self.coeffs)
        t = self.tower
        if t.has_tables and self.code != 0:
            return f"{s} (g^{t.dlog_code(self.code)})"
        return s


class FieldTower:
    """F_{q^m} over F_q over F_p, flat degree-n representation."""

    def __init__(self, p, r, m, build_tables):
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        self.p = p
        self.r = r
        self.m = m
        self.n = r * m
        self.q = p**r
        self.Q = p**self.n
        self.N = self.Q - 1
        self.modulus = lex_smallest_irreducible(p, self.n)
        # x^d mod modulus for d = n .. 2n-2, used by code multiplication
        self._red = []
        if self.n > 1:
            xp = _pmod((0,) * self.n + (1,), self.modulus, p)
            for _ in range(self.n - 1):
                self._red.append(xp + (0,) * (self.n - len(xp)))
                xp = _pmod((0,) + xp, self.modulus, p)
        self._pw = [p**i for i in range(self.n + 1)]
        self.has_tables = False
        self.exp = None
        self.log = None
        self.generator_code = None
        self._nfactors = None
        self._digits_all = None
        self._bsgs = None
        if build_tables:
            self._build_tables()

    # -- scalar code arithmetic ------------------------------------------

    def decode(self, code):
        out = []
        for _ in range(self.n):
            out.append(code % self.p)
            code //= self.p
        return tuple(out)

    def encode(self, coeffs):
        code = 0
        for i, c in enumerate(coeffs):
            code += (c % self.p) * self._pw[i]
        return code

    def coerce(self, other):
        """Accept FieldElement, int code, or coefficient iterable."""
        if isinstance(other, FieldElement):
            if other.tower is not self:
                raise ValueError("element from a different tower")
            return other.code
        if isinstance(other, int):
            return other % self.p if other < 0 else other
        return self.encode(other)

    def element(self, v):
        return FieldElement(self, self.coerce(v))

    def add_codes(self, u, v):
        out = 0
        for pw in self._pw[: self.n]:
            du = (u // pw) % self.p
            dv = (v // pw) % self.p
            out += ((du + dv) % self.p) * pw
        return out

    def sub_codes(self, u, v):
        out = 0
        for pw in self._pw[: self.n]:
            du = (u // pw) % self.p
            dv = (v // pw) % self.p
            out += ((du - dv) % self.p) * pw
        return out

    def neg_code(self, u):
        return self.sub_codes(0, u)

    def mul_codes(self, u, v):
        if u == 0 or v == 0:
            return 0
        if self.has_tables:
            return int(self.exp[(int(self.log[u]) + int(self.log[v])) % self.N])
        p = self.p
        a = self.decode(u)
        b = self.decode(v)
        out = [0] * (2 * self.n - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] = (out[i + j] + ai * bj) % p
        acc = list(out[: self.n])
        for d in range(self.n, 2 * self.n - 1):
            c = out[d]
            if c:
                red = self._red[d - self.n]
                for j in range(self.n):
                    acc[j] = (acc[j] + c * red[j]) % p
        return self.encode(acc)

    def pow_code(self, u, k):
        if k < 0:
            return self.pow_code(self.inv_code(u), -k)
        if u == 0:
            return 1 if k == 0 else 0
        if self.has_tables:
            return int(self.exp[int(self.log[u]) * (k % self.N) % self.N])
        k = k % self.N if k else 0
        result = 1
        base = u
        while k:
            if k & 1:
                result = self.mul_codes(result, base)
            base = self.mul_codes(base, base)
            k >>= 1
        return result

    def inv_code(self, u):
        if u == 0:
            raise ZeroElement("0 has no inverse")
        if self.has_tables:
            return int(self.exp[(-int(self.log[u])) % self.N])
        # extended Euclid in F_p[x]
        p = self.p
        a = _ptrim(self.decode(u))
        b = self.modulus
        s0, s1 = (1,), ()
        while b:
            dm = len(b) - 1
            inv_lead = pow(b[-1], p - 2, p)
            q_acc = [0] * (len(a) - dm + 1) if len(a) > dm else [0]
            aa = list(a)
            for i in range(len(aa) - 1, dm - 1, -1):
                c = aa[i] * inv_lead % p
                if c:
                    q_acc[i - dm] = c
                    for j in range(dm + 1):
                        aa[i - dm + j] = (aa[i - dm + j] - c * b[j]) % p
            rem = _ptrim(aa[:dm] if len(aa) > dm else aa)
            qpoly = _ptrim(q_acc)
            a, b = b, rem
            s0, s1 = s1, _psub(s0, _pmul(qpoly, s1, p), p)
        # a is now gcd (a unit); s0 the Bezout coefficient of the original u
        lead_inv = pow(a[0], p - 2, p)
        inv_poly = tuple(c * lead_inv % p for c in s0)
        return self.encode(_pmod(inv_poly, self.modulus, p))

    def frobenius_code(self, u, i=1):
        """u^(q^i)."""
        if u == 0:
            return 0
        return self.pow_code(u, pow(self.q, i, self.N))

    def trace_abs_code(self, u):
        """Absolute trace into F_p, returned as an int in [0, p)."""
        acc = u
        v = u
        for _ in range(self.n - 1):
            v = self.pow_code(v, self.p)
            acc = self.add_codes(acc, v)
        assert acc < self.p
        return acc

    def trace_fq_code(self, u):
        """Trace to the intermediate F_q (a subfield code)."""
        acc = u
        v = u
        for _ in range(self.m - 1):
            v = self.frobenius_code(v, 1)
            acc = self.add_codes(acc, v)
        return acc

    # -- canonical generator and tables ----------------------------------

    def n_factorization(self, cache=None):
        if self._nfactors is None:
            self._nfactors = factorize(self.N, cache=cache)
        return self._nfactors

    def find_generator_code(self, cache=None):
        if self.generator_code is not None:
            return self.generator_code
        primes = self.n_factorization(cache).primes()
        for code in range(1, self.Q):
            if all(self.pow_code(code, self.N // l) != 1 for l in primes):
                self.generator_code = code
                return code
        raise AssertionError("no generator found")

    def _build_tables(self):
        if self.Q > TABLE_LIMIT:
            raise SizeBudgetExceeded(f"log table for {self.Q} elements exceeds 2^24")
        g = self.find_generator_code()
        exp = np.zeros(self.N, dtype=np.int64)
        log = np.full(self.Q, -1, dtype=np.int64)
        cur = 1
        for k in range(self.N):
            exp[k] = cur
            log[cur] = k
            cur = self.mul_codes(cur, g)
        assert cur == 1
        self.exp = exp
        self.log = log
        self.has_tables = True

    def dlog_code(self, u):
        if u == 0:
            raise ZeroElement("discrete log of 0")
        if self.has_tables:
            return int(self.log[u])
        if self.Q > BSGS_LIMIT:
            raise SizeBudgetExceeded(f"field of {self.Q} elements exceeds the BSGS budget")
        return self._bsgs_log(u)

    def _bsgs_log(self, u):
        g = self.find_generator_code()
        if self._bsgs is None:
            ms = isqrt(self.N) + 1
            baby = {}
            cur = 1
            for j in range(ms):
                baby.setdefault(cur, j)
                cur = self.mul_codes(cur, g)
            self._bsgs = (ms, baby, self.inv_code(cur))  # g^(-ms)
        ms, baby, giant = self._bsgs
        y = u
        for i in range(ms + 1):
            j = baby.get(y)
            if j is not None:
                return (i * ms + j) % self.N
            y = self.mul_codes(y, giant)
        raise AssertionError("BSGS failed")

    # -- bulk helpers (numpy) --------------------------------------------

    def digits_all(self):
        """(Q, n) uint8 matrix of every code's coefficient vector."""
        if self._digits_all is None:
            codes = np.arange(self.Q, dtype=np.int64)
            cols = []
            for i in range(self.n):
                cols.append((codes // self._pw[i]) % self.p)
            self._digits_all = np.stack(cols, axis=1).astype(np.uint8)
        return self._digits_all

    def encode_digit_matrix(self, mat):
        pw = np.array(self._pw[: self.n], dtype=np.int64)
        return (mat.astype(np.int64) % self.p) @ pw

    def add_codes_vec(self, u, v):
        """Vectorized field addition of code arrays (or scalar + array)."""
        da = self.digits_all()
        mu = da[u] if np.ndim(u) else da[int(u)]
        mv = da[v] if np.ndim(v) else da[int(v)]
        return self.encode_digit_matrix((mu.astype(np.int16) + mv) % self.p)

    def mul_codes_vec(self, u_arr, v):
        """Vectorized multiply; v scalar code or array. Needs tables."""
        assert self.has_tables
        u_arr = np.asarray(u_arr, dtype=np.int64)
        out = np.zeros_like(u_arr)
        if np.ndim(v):
            v = np.asarray(v, dtype=np.int64)
            nz = (u_arr != 0) & (v != 0)
            out[nz] = self.exp[(self.log[u_arr[nz]] + self.log[v[nz]]) % self.N]
        elif v != 0:
            nz = u_arr != 0
            out[nz] = self.exp[(self.log[u_arr[nz]] + int(self.log[v])) % self.N]
        return out

    def linear_map_matrix(self, func):
        """n x n matrix over F_p of a linear map given on codes."""
        cols = []
        for j in range(self.n):
            cols.append(self.decode(func(self._pw[j])))
        return np.array(cols, dtype=np.int64).T % self.p

    def apply_linear_map_all(self, mat):
        """Apply an n x n F_p matrix to every code; returns code array."""
        da = self.digits_all().astype(np.int64)
        return self.encode_digit_matrix(da @ mat.T % self.p)

    def subfield_codes(self, degree=None):
        """Codes of the subfield of p^degree elements, ascending.

        degree defaults to r (the intermediate F_q); must divide n.
        Works without log tables (kernel of Frobenius^degree - id).
        """
        if degree is None:
            degree = self.r
        assert self.n % degree == 0
        pfrob = self.linear_map_matrix(lambda c: self.pow_code(c, self.p))
        mat = np.eye(self.n, dtype=np.int64)
        for _ in range(degree):
            mat = mat @ pfrob % self.p
        eye = np.eye(self.n, dtype=np.int64)
        kern = _kernel_mod_p((mat - eye) % self.p, self.p)
        assert len(kern) == degree
        codes = [0]
        for vec in kern:
            codes = [
                self.add_codes(c, self.encode(tuple((k * x) % self.p for x in vec)))
                for c in codes
                for k in range(self.p)
            ]
        return sorted(set(codes))


def _kernel_mod_p(mat, p):
    """Kernel basis of an integer matrix mod p (row-reduced, deterministic)."""
    m = [[int(x) % p for x in row] for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    rank = 0
    for c in range(cols):
        piv = None
        for rr in range(rank, rows):
            if m[rr][c] % p:
                piv = rr
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][c], p - 2, p)
        m[rank] = [(x * inv) % p for x in m[rank]]
        for rr in range(rows):
            if rr != rank and m[rr][c]:
                f = m[rr][c]
                m[rr] = [(a - f * b) % p for a, b in zip(m[rr], m[rank])]
        pivots.append(c)
        rank += 1
    basis = []
    free = [c for c in range(cols) if c not in pivots]
    for fc in free:
        vec = [0] * cols
        vec[fc] = 1
        for i, pc in enumerate(pivots):
            vec[pc] = (-m[i][fc]) % p
        basis.append(vec)
    return basis


_tower_cache = {}


def build_extension(p, r, m, tables="auto"):
    """Deterministic tower F_p c F_{p^r} c F_{p^(r*m)}.

    tables: 'auto' builds log tables when the field has at most 2^24
    elements, 'on' forces them (SizeBudgetExceeded above the limit),
    'off' skips them.
    """
    if r < 1 or m < 1:
        raise ValueError("r and m must be positive")
    Q = p ** (r * m)
    if tables == "on" and Q > TABLE_LIMIT:
        raise SizeBudgetExceeded(f"table prebuild for {Q} elements")
    effective = tables == "on" or (tables == "auto" and Q <= TABLE_LIMIT)
    key = (p, r, m, effective)
    tower = _tower_cache.get(key)
    if tower is None:
        tower = FieldTower(p, r, m, build_tables=effective)
        _tower_cache[key] = tower
    return tower


# ---------------------------------------------------------------------------
# spec-level operations on FieldElement


def fe_pow(alpha: FieldElement, k) -> FieldElement:
    """alpha^k with 0^0 = 1."""
    return FieldElement(alpha.tower, alpha.tower.pow_code(alpha.code, k))


def frobenius(alpha: FieldElement, i) -> FieldElement:
    """alpha^(q^i)."""
    return FieldElement(alpha.tower, alpha.tower.frobenius_code(alpha.code, i))


def trace(alpha: FieldElement, target="to_Fq") -> FieldElement:
    """Trace to F_q ('to_Fq') or to F_p ('absolute')."""
    t = alpha.tower
    if target == "absolute":
        return FieldElement(t, t.trace_abs_code(alpha.code))
    if target == "to_Fq":
        return FieldElement(t, t.trace_fq_code(alpha.code))
    raise ValueError(f"unknown trace target {target!r}")


def find_generator(tower: FieldTower, cache=None) -> FieldElement:
    """Lexicographically smallest primitive element."""
    return FieldElement(tower, tower.find_generator_code(cache))


def is_e_free(alpha: FieldElement, e) -> bool:
    """True iff alpha is not an l-th power for any prime l | e."""
    t = alpha.tower
    if alpha.code == 0:
        raise ZeroElement("0 is not e-free for any e")
    if t.N % e != 0:
        raise ValueError("e must divide q^m - 1")
    primes = factorize(e).primes()
    if t.has_tables:
        k = t.dlog_code(alpha.code)
        return all(k % l for l in primes)
    return all(t.pow_code(alpha.code, t.N // l) != 1 for l in primes)


def discrete_log(alpha: FieldElement) -> int:
    if alpha.code == 0:
        raise ZeroElement("discrete log of 0")
    return alpha.tower.dlog_code(alpha.code)
