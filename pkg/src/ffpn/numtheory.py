"""Integer factorization and multiplicative statistics.

Everything downstream (sieve conditions, primitivity tests, character
orders) consumes factorizations produced here.  The strategy is fixed and
deterministic: trial division by all primes up to 10**6, then Brent-cycle
Pollard rho with a fixed parameter schedule.  Targets of the form q^m - 1
are split into cyclotomic-polynomial values first, so every hard cofactor
stays small.
"""

from __future__ import annotations

import json
import os
import random
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod

from .errors import NotPrime, UnfactoredCofactor

TRIAL_LIMIT = 10**6
_RHO_ATTEMPTS = 24
_RHO_MAX_ITER = 1 << 21

# Smallest composite that fools this witness set is > 3.3e24 (Sorenson-Webster).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_DETERMINISTIC_BELOW = 3_317_044_064_679_887_385_961_981
_MR_PROBABLE_ROUNDS = 64

_small_primes_cache = None
_small_primes_lock = threading.Lock()


def small_primes():
    """All primes up to TRIAL_LIMIT, as a list (built once, cached)."""
    global _small_primes_cache
    if _small_primes_cache is None:
        with _small_primes_lock:
            if _small_primes_cache is None:
                sieve = bytearray([1]) * (TRIAL_LIMIT + 1)
                sieve[0] = sieve[1] = 0
                for i in range(2, int(TRIAL_LIMIT**0.5) + 1):
                    if sieve[i]:
                        sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
                _small_primes_cache = [i for i in range(TRIAL_LIMIT + 1) if sieve[i]]
    return _small_primes_cache


def _miller_rabin_round(n, a, d, s):
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def primality(n):
    """Return (is_prime, certified).

    Deterministic Miller-Rabin below 3.3e24; above that, 64 rounds with
    bases drawn from a PRNG seeded by n itself, reported as uncertified.
    """
    if n < 2:
        return False, True
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p, True
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < _MR_DETERMINISTIC_BELOW:
        for a in _MR_WITNESSES:
            if not _miller_rabin_round(n, a, d, s):
                return False, True
        return True, True
    rng = random.Random(n)
    for _ in range(_MR_PROBABLE_ROUNDS):
        a = rng.randrange(2, n - 1)
        if not _miller_rabin_round(n, a, d, s):
            return False, True
    return True, False


def is_prime(n):
    return primality(n)[0]


def moebius(n):
    """Moebius function by factorization (n is expected to be small here)."""
    if n == 1:
        return 1
    result = 1
    for p, e in factorize(n).factors:
        if e > 1:
            return 0
        result = -result
    return result


def divisors_of(n):
    """Sorted divisors of n (via full factorization)."""
    divs = [1]
    for p, e in factorize(n).factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def cyclotomic_value(d, x):
    """Phi_d(x) for integer x >= 2, via prod (x^{d/e} - 1)^{mu(e)}."""
    num = 1
    den = 1
    for e in divisors_of(d):
        mu = moebius(e)
        if mu == 1:
            num *= x ** (d // e) - 1
        elif mu == -1:
            den *= x ** (d // e) - 1
    value, rem = divmod(num, den)
    assert rem == 0
    return value


def _brent_rho(n, c, max_iter=_RHO_MAX_ITER):
    """Brent-cycle rho with fixed start x0=2; returns a factor or None."""
    if n % 2 == 0:
        return 2
    y, r, q_acc = 2, 1, 1
    g, x, ys = 1, 2, 2
    it = 0
    m = 128
    while g == 1 and it < max_iter:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q_acc = q_acc * abs(x - y) % n
            g = gcd(q_acc, n)
            k += m
            it += m
        r *= 2
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
            it += 1
            if it >= max_iter:
                return None
    return g if 1 < g < n else None


@dataclass(frozen=True)
class IntFactorization:
    """Complete factorization of a positive integer.

    factors is ((prime, exponent), ...) with strictly increasing primes;
    probable lists any primes that only passed the probabilistic test.
    """

    n: int
    factors: tuple = ()
    probable: tuple = ()

    def __post_init__(self):
        assert self.n >= 1
        assert prod(p**e for p, e in self.factors) == self.n
        ps = [p for p, _ in self.factors]
        assert ps == sorted(ps) and len(ps) == len(set(ps))

    def primes(self):
        return [p for p, _ in self.factors]

    def prime_list(self):
        """All prime factors with multiplicity, increasing (cache format)."""
        out = []
        for p, e in self.factors:
            out.extend([p] * e)
        return out

    def radical(self):
        return prod(self.primes()) if self.factors else 1


class FactorCache:
    """JSON-backed factor cache: {"<decimal n>": ["<prime>", ...]}.

    Primes are listed with multiplicity in increasing order.  Lookups may
    happen concurrently; writes are serialized and atomic.
    """

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()
        self._data = None

    def _load(self):
        if self._data is None:
            try:
                with open(self.path, "r", encoding="utf-8") as fh:
                    self._data = json.load(fh)
            except (FileNotFoundError, json.JSONDecodeError):
                self._data = {}
        return self._data

    def lookup(self, n):
        entry = self._load().get(str(n))
        if entry is None:
            return None
        return [int(s) for s in entry]

    def store(self, n, prime_list):
        with self._lock:
            data = self._load()
            data[str(n)] = [str(p) for p in prime_list]
            tmp = self.path + ".tmp"
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(data, fh, sort_keys=True, indent=0)
            os.replace(tmp, self.path)


def _assemble(n, primes_with_mult, probable):
    counts = {}
    for p in primes_with_mult:
        counts[p] = counts.get(p, 0) + 1
    factors = tuple(sorted(counts.items()))
    return IntFactorization(n=n, factors=factors, probable=tuple(sorted(set(probable))))


def factorize(n, hints=None, cache=None):
    """Factor n completely.

    hints: optional iterable of known prime factors (verified, then peeled).
    cache: optional FactorCache consulted first and updated on success.
    Raises UnfactoredCofactor if a composite survives the rho budget.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return IntFactorization(n=1)

    if cache is not None:
        cached = cache.lookup(n)
        if cached is not None and prod(cached) == n:
            probable = [p for p in set(cached) if not primality(p)[1]]
            return _assemble(n, cached, probable)

    found = []
    probable = []
    rem = n
    if hints:
        for h in sorted(set(int(h) for h in hints)):
            ok, certified = primality(h)
            if not ok:
                raise ValueError(f"hint {h} is not prime")
            while rem % h == 0:
                found.append(h)
                rem //= h
            if not certified and h in found:
                probable.append(h)

    for p in small_primes():
        if p * p > rem:
            break
        while rem % p == 0:
            found.append(p)
            rem //= p

    stack = [rem] if rem > 1 else []
    while stack:
        c = stack.pop()
        if c == 1:
            continue
        ok, certified = primality(c)
        if ok:
            found.append(c)
            if not certified:
                probable.append(c)
            continue
        d = None
        for attempt in range(1, _RHO_ATTEMPTS + 1):
            d = _brent_rho(c, attempt, _RHO_MAX_ITER)
            if d is not None:
                break
        if d is None:
            raise UnfactoredCofactor(c)
        stack.append(d)
        stack.append(c // d)

    result = _assemble(n, sorted(found), probable)
    if cache is not None:
        cache.store(n, result.prime_list())
    return result


def prime_power_split(q):
    """Write q = p^r with p prime; raises NotPrime otherwise."""
    if q < 2:
        raise NotPrime(f"{q} is not a prime power")
    for p in small_primes():
        if p * p > q:
            break
        if q % p == 0:
            r = 0
            v = q
            while v % p == 0:
                v //= p
                r += 1
            if v != 1:
                raise NotPrime(f"{q} is not a prime power")
            return p, r
    if not is_prime(q):
        raise NotPrime(f"{q} is not a prime power")
    return q, 1


def factorize_qm_minus_1(q, m, hints=None, cache=None):
    """Factor q^m - 1 by splitting into cyclotomic values Phi_d(p), d | rm."""
    p, r = prime_power_split(q)
    n = q**m - 1
    if cache is not None:
        cached = cache.lookup(n)
        if cached is not None and prod(cached) == n:
            probable = [pp for pp in set(cached) if not primality(pp)[1]]
            return _assemble(n, cached, probable)
    primes_with_mult = []
    probable = []
    for d in divisors_of(r * m):
        part = factorize(cyclotomic_value(d, p), hints=hints, cache=cache)
        primes_with_mult.extend(part.prime_list())
        probable.extend(part.probable)
    result = _assemble(n, sorted(primes_with_mult), probable)
    assert result.n == n
    if cache is not None:
        cache.store(n, result.prime_list())
    return result


@dataclass(frozen=True)
class MultStats:
    omega: int
    W: int
    phi: int
    theta: Fraction
    radical: int


def multiplicative_stats(f: IntFactorization) -> MultStats:
    """omega, W = 2^omega, Euler phi, theta = phi/n exact, radical."""
    omega = len(f.factors)
    phi = prod((p - 1) * p ** (e - 1) for p, e in f.factors) if f.factors else 1
    return MultStats(
        omega=omega,
        W=1 << omega,
        phi=phi,
        theta=Fraction(phi, f.n),
        radical=f.radical(),
    )


def omega_table(limit):
    """numpy uint8 array t with t[n] = omega(n) for 0 <= n <= limit."""
    import numpy as np

    t = np.zeros(limit + 1, dtype=np.uint8)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, limit + 1):
        if sieve[i]:
            sieve[2 * i :: i] = False
            t[i::i] += 1
    return t
