"""Sufficient-condition engine: the basic bound, the prime/polynomial sieve,
closed forms, and reproduction of the published decision tables.

Every verdict is decided in exact arithmetic: comparisons of the shape
q^(m/2) > X square both sides, so no boundary case can flip under floating
point rounding.  Floats appear only in rendered report fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DivisibilityViolation
from .fqpoly import FqPolynomial, factor_xm1, xm1_factor_degrees
from .numtheory import factorize_qm_minus_1, multiplicative_stats

AUTO_SIEVE_BUDGET = 1 << 16

W_BOUND_COEFF = Fraction(45, 4)  # 11.25


def _exceeds_sqrt(q, m, x: Fraction) -> bool:
    """Exact q^(m/2) > x for x >= 0."""
    if x < 0:
        return True
    return Fraction(q) ** m > x * x


def _float_pow(base, exponent):
    try:
        return float(base) ** exponent
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class SieveConfig:
    q: int
    m: int
    d: int
    d_primes: tuple
    remaining_primes: tuple
    g_indices: tuple
    g_in_degrees: tuple
    remaining_degrees: tuple

    @property
    def n(self):
        return len(self.remaining_primes)

    @property
    def k(self):
        return len(self.remaining_degrees)


@dataclass(frozen=True)
class SieveReport:
    config: SieveConfig
    Delta: Fraction
    Lambda: Fraction | None
    W_d: int
    Omega_g: int
    rhs: Fraction | None
    verdict: str  # pass | fail | delta_nonpositive

    @property
    def lhs(self):
        return _float_pow(self.config.q, self.config.m / 2)

    def to_dict(self):
        c = self.config
        return {
            "q": c.q,
            "m": c.m,
            "d": str(c.d),
            "n": c.n,
            "remaining_primes": [str(p) for p in c.remaining_primes],
            "g_indices": list(c.g_indices),
            "k": c.k,
            "Delta": self.Delta,
            "Lambda": self.Lambda,
            "W_d": self.W_d,
            "Omega_g": self.Omega_g,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "verdict": self.verdict,
        }


def sieve_lambda(remaining_primes, remaining_degrees, q):
    """Delta and Lambda of a sieve configuration (Lambda None if Delta <= 0).

    Delta = 1 - 2 sum 1/p_i - sum 1/q^deg(g_i);
    Lambda = (2n + k - 1)/Delta + 2.
    """
    delta = (
        Fraction(1)
        - 2 * sum(Fraction(1, p) for p in remaining_primes)
        - sum(Fraction(1, q**d) for d in remaining_degrees)
    )
    if delta <= 0:
        return delta, None
    n = len(remaining_primes)
    k = len(remaining_degrees)
    return delta, Fraction(2 * n + k - 1) / delta + 2


def basic_condition(q, m, cache=None):
    """q^(m/2) > 3 W(q^m-1)^2 Omega(x^m-1), decided exactly."""
    stats = multiplicative_stats(factorize_qm_minus_1(q, m, cache=cache))
    _m0, _a, degs = xm1_factor_degrees(q, m)
    n_factors = sum(cnt for _deg, cnt in degs)
    rhs = 3 * stats.W**2 * (1 << n_factors)
    verdict = "pass" if _exceeds_sqrt(q, m, Fraction(rhs)) else "fail"
    return {
        "q": q,
        "m": m,
        "W": stats.W,
        "Omega": 1 << n_factors,
        "lhs": _float_pow(q, m / 2),
        "rhs": rhs,
        "verdict": verdict,
    }


def _normalize_g(pf, g):
    if g == "all":
        return tuple(range(len(pf.factors)))
    if g == 1 or g is None:
        return ()
    if isinstance(g, FqPolynomial):
        return pf.factor_subset_of(g)
    return tuple(sorted(set(int(i) for i in g)))


def _evaluate_config(q, m, nf, pf, d, g_indices):
    nprimes = nf.primes()
    d_primes = tuple(p for p in nprimes if d % p == 0)
    remaining = tuple(p for p in nprimes if d % p != 0)
    all_deg = [f.degree for f in pf.factors]
    g_in = tuple(all_deg[i] for i in g_indices)
    rem_deg = tuple(all_deg[i] for i in range(len(all_deg)) if i not in set(g_indices))
    config = SieveConfig(
        q=q,
        m=m,
        d=d,
        d_primes=d_primes,
        remaining_primes=remaining,
        g_indices=tuple(g_indices),
        g_in_degrees=g_in,
        remaining_degrees=rem_deg,
    )
    delta, lam = sieve_lambda(remaining, rem_deg, q)
    W_d = 1 << len(d_primes)
    omega_g = 1 << len(g_indices)
    if lam is None:
        return SieveReport(config, delta, None, W_d, omega_g, None, "delta_nonpositive")
    rhs = 3 * W_d**2 * omega_g * lam
    verdict = "pass" if _exceeds_sqrt(q, m, rhs) else "fail"
    return SieveReport(config, delta, lam, W_d, omega_g, rhs, verdict)


def sieve_report(q, m, d, g="all", cache=None) -> SieveReport:
    """Evaluate the sieve condition q^(m/2) > 3 W(d)^2 Omega(g) Lambda.

    d: divisor of q^m - 1 carrying the sieved-in primes; the remaining
    primes are those of q^m - 1 not dividing d.  g: 'all' (x^m - 1), 1,
    an FqPolynomial divisor, or an iterable of distinct-factor indices.
    """
    nf = factorize_qm_minus_1(q, m, cache=cache)
    if nf.n % d != 0:
        raise ValueError("d must divide q^m - 1")
    pf = factor_xm1(q, m)
    return _evaluate_config(q, m, nf, pf, d, _normalize_g(pf, g))


def lambda_caseA(q, m_prime) -> Fraction:
    """Closed-form Lambda for m' | q - 1: (q^2 - 3q + aq + 2)/(aq - q + 1)."""
    if m_prime < 1 or (q - 1) % m_prime != 0:
        raise DivisibilityViolation(f"{m_prime} does not divide q - 1 = {q - 1}")
    a = (q - 1) // m_prime
    return Fraction(q * q - 3 * q + a * q + 2, a * q - q + 1)


def w_bound_rhs(n) -> float:
    """11.25 * n^(1/5)."""
    return float(W_BOUND_COEFF) * n**0.2


def w_bound_audit(limit=10**6):
    """Exact check W(n) < 11.25 n^(1/5) for 1 <= n <= limit.

    Uses a sieve-built omega table and the integer equivalent
    1024 W^5 < 45^5 n.  Returns the list of violating n (expected empty).
    """
    import numpy as np

    from .numtheory import omega_table

    om = omega_table(limit).astype(np.int64)
    n = np.arange(limit + 1, dtype=np.int64)
    W5 = (np.int64(1) << (5 * om))
    bad = np.nonzero(1024 * W5 >= 45**5 * n)[0]
    return [int(x) for x in bad if x >= 1]


@dataclass(frozen=True)
class ThetaReport:
    q: int
    m: int
    m_prime: int
    u: int
    M: int
    theta: Fraction
    clause: str
    bound: Fraction
    holds: bool


def theta_ratio(q, m) -> ThetaReport:
    """theta(q, m) = M/m with M = #distinct factors of x^m - 1 of degree < u.

    u is the multiplicative order of q mod m' (1 when m' | q - 1).  Also
    reports which bound clause applies (1/2, 3/8, or 1/3) and whether the
    computed ratio satisfies it.
    """
    m0, _a, degs = xm1_factor_degrees(q, m)
    if m0 == 1:
        u = 1
    else:
        u = 1
        qq = q % m0
        v = qq
        while v != 1:
            v = v * qq % m0
            u += 1
    M = sum(cnt for deg, cnt in degs if deg < u)
    theta = Fraction(M, m)
    g1 = math.gcd(q - 1, m0)
    if m == 2 * g1:
        clause, bound = "m = 2 gcd(q-1, m')", Fraction(1, 2)
    elif m == 4 * g1:
        clause, bound = "m = 4 gcd(q-1, m')", Fraction(3, 8)
    else:
        clause, bound = "otherwise", Fraction(1, 3)
    return ThetaReport(q, m, m0, u, M, theta, clause, bound, theta <= bound)


def lemma55_check(q, m):
    """Empirical check of Lambda <= m' for the degree-< u sieve choice.

    Core g = product of the factors of x^m - 1 of degree < u; the remaining
    factors all have degree exactly u; d = q^m - 1 (no prime terms).
    """
    tr = theta_ratio(q, m)
    applicable = (q - 1) % tr.m_prime != 0
    rem = []
    _m0, _a, degs = xm1_factor_degrees(q, m)
    for deg, cnt in degs:
        if deg >= tr.u:
            rem.extend([deg] * cnt)
    delta, lam = sieve_lambda((), tuple(rem), q)
    return {
        "q": q,
        "m": m,
        "m_prime": tr.m_prime,
        "u": tr.u,
        "k": len(rem),
        "Delta": delta,
        "Lambda": lam,
        "applicable": applicable,
        "holds": (lam is not None and lam <= tr.m_prime),
    }


_THETA_BOUNDS = (Fraction(1, 3), Fraction(3, 8), Fraction(1, 2))


def asymptotic_condition(q, m, theta_bound):
    """q^(m/10) > 3 (11.25)^2 m 2^(m*theta), decided exactly.

    theta_bound must be one of 1/3, 3/8, 1/2 (the theta clause bounds).
    Both sides are raised to lcm(10, denominator) so all exponents are
    integers; the comparison is exact rational.
    """
    theta_bound = Fraction(theta_bound)
    if theta_bound not in _THETA_BOUNDS:
        raise ValueError("theta bound must be 1/3, 3/8 or 1/2")
    t = m * theta_bound
    L = 10 * t.denominator // math.gcd(10, t.denominator)
    coeff = 3 * W_BOUND_COEFF**2 * m
    lhs_L = Fraction(q) ** (m * L // 10)
    rhs_L = coeff**L * Fraction(2) ** int(t * L)
    verdict = "pass" if lhs_L > rhs_L else "fail"
    return {
        "q": q,
        "m": m,
        "theta_bound": theta_bound,
        "lhs": _float_pow(q, m / 10),
        "rhs": float(coeff) * _float_pow(2, float(t)),
        "verdict": verdict,
    }


def auto_sieve(q, m, budget=AUTO_SIEVE_BUDGET, cache=None) -> SieveReport:
    """Search (d, g) configurations and return the best report.

    Exhaustive over all prime-subset x factor-subset choices when that
    space fits in the budget; otherwise the deterministic prefix family
    that sieves out the largest primes and largest-degree factors first.
    Best = minimal exact rhs; ties broken by smaller n + k, then smaller d.
    """
    nf = factorize_qm_minus_1(q, m, cache=cache)
    pf = factor_xm1(q, m)
    primes = nf.primes()
    t = len(primes)
    s = len(pf.factors)
    configs = []
    if (1 << t) * (1 << s) <= budget:
        for dmask in range(1 << t):
            d = 1
            for i in range(t):
                if dmask >> i & 1:
                    d *= primes[i]
            for gmask in range(1 << s):
                gidx = tuple(i for i in range(s) if gmask >> i & 1)
                configs.append((d, gidx))
    else:
        by_deg_desc = sorted(
            range(s), key=lambda i: (-pf.factors[i].degree, pf.factors[i].coeffs)
        )
        for i in range(t + 1):
            d = 1
            for p in primes[: t - i]:
                d *= p
            for j in range(s + 1):
                gidx = tuple(sorted(by_deg_desc[j:]))
                configs.append((d, gidx))
    best = None
    best_key = None
    for d, gidx in configs:
        rep = _evaluate_config(q, m, nf, pf, d, gidx)
        if rep.rhs is None:
            key = (1, Fraction(0), rep.config.n + rep.config.k, d)
        else:
            key = (0, rep.rhs, rep.config.n + rep.config.k, d)
        if best_key is None or key < best_key:
            best, best_key = rep, key
    return best


# ---------------------------------------------------------------------------
# published decision tables

# (q, m, d, n, g printed name, g coefficient codes or None for x^m - 1,
#  k, Lambda, q^(m/2), rhs) as printed.
TABLE1 = (
    (3, 18, 14, 4, "x^18-1", None, 0, 12.231, 19683.0, 2348.65),
    (3, 27, 26, 4, "x^27-1", None, 0, 9.18577, 2.76145e6, 881.834),
    (9, 5, 2, 2, "x-1", (2, 1), 0, 7.0939, 243.0, 85.1275),
    (9, 7, 1094, 1, "x^7-1", None, 0, 3.01, 2187.0, 577.92),
    (9, 8, 10, 3, "x^2+1", (1, 0, 1), 4, 19.1006, 6561.0, 916.803),
    (9, 9, 14, 4, "x^9-1", None, 0, 12.231, 19683.0, 782.784),
    (27, 5, 22, 2, "x^5-1", None, 0, 5.54729, 3788.0, 1065.08),
    (27, 8, 10, 5, "x^8-1", None, 0, 20.5968, 531441.0, 31636.7),
)

TABLE2 = (
    (9, 5, 22, 1, "x+2", (2, 1), 1, 4.0682, 243.0, 195.274),
    (9, 7, 1094, 1, "x+2", (2, 1), 1, 4.00367, 2187.0, 192.176),
    (9, 15, 14, 6, "x+2", (2, 1), 1, 23.4645, 1.43487e7, 1126.3),
    (27, 5, 22, 2, "x+2", (2, 1), 1, 67.72974, 3788.0, 2167.35),
    (27, 6, 26, 4, "x+2", (2, 1), 1, 17.5253, 531441.0, 841.214),
    (27, 8, 10, 5, "x^8-1", None, 0, 20.5968, 531441.0, 31636.7),
    (27, 10, 14, 6, "(x+1)(x+2)", (2, 0, 1), 2, 25.2471, 14348907.0, 4847.44),
)

LAMBDA_PRINT_TOL = 5e-4
REL_PRINT_TOL = 1e-3


def reproduce_table(which, cache=None):
    """Recompute a published table row by row, flagging inconsistencies.

    Each row is re-evaluated from the stated (d, g) through the defining
    formulas; printed n, k, Lambda, q^(m/2), rhs values that disagree with
    the recomputation are flagged, with both values reported.
    """
    table = TABLE1 if int(which) == 1 else TABLE2
    rows = []
    for q, m, d, n_p, g_name, g_spec, k_p, lam_p, qm2_p, rhs_p in table:
        pf = factor_xm1(q, m)
        g = "all" if g_spec is None else FqPolynomial(pf.field, g_spec)
        rep = sieve_report(q, m, d, g, cache=cache)
        lam_f = float(rep.Lambda) if rep.Lambda is not None else None
        rhs_f = float(rep.rhs) if rep.rhs is not None else None
        rows.append(
            {
                "q": q,
                "m": m,
                "d": d,
                "g_printed": g_name,
                "n_printed": n_p,
                "n": rep.config.n,
                "n_matches": rep.config.n == n_p,
                "k_printed": k_p,
                "k": rep.config.k,
                "k_matches": rep.config.k == k_p,
                "Lambda_printed": lam_p,
                "Lambda": rep.Lambda,
                "lambda_matches": lam_f is not None and abs(lam_f - lam_p) < LAMBDA_PRINT_TOL,
                "qm2_printed": qm2_p,
                "qm2_matches": abs(rep.lhs - qm2_p) <= REL_PRINT_TOL * qm2_p,
                "rhs_printed": rhs_p,
                "rhs": rep.rhs,
                "rhs_matches": rhs_f is not None and abs(rhs_f - rhs_p) <= REL_PRINT_TOL * rhs_p,
                "lhs": rep.lhs,
                "verdict": rep.verdict,
            }
        )
    return rows
