import json
import math
import random

import pytest

from ffpn.errors import NotPrime
from ffpn.numtheory import (
    FactorCache,
    IntFactorization,
    cyclotomic_value,
    divisors_of,
    factorize,
    factorize_qm_minus_1,
    moebius,
    multiplicative_stats,
    omega_table,
    prime_power_split,
    primality,
    small_primes,
)


def test_factorize_one():
    f = factorize(1)
    assert f.n == 1 and f.factors == ()


def test_factorize_26():
    assert factorize(26).factors == ((2, 1), (13, 1))


def test_factorize_3_18_minus_1():
    f = factorize(3**18 - 1)
    assert f.factors == ((2, 3), (7, 1), (13, 1), (19, 1), (37, 1), (757, 1))


def test_factorize_deterministic():
    n = 10**12 + 39  # semiprime beyond the trial division limit
    assert factorize(n).factors == factorize(n).factors


def test_factorize_rejects_bad_input():
    with pytest.raises(ValueError):
        factorize(0)
    with pytest.raises(ValueError):
        factorize(12, hints=[4])


def test_factorization_invariants_random():
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randrange(1, 10**9)
        f = factorize(n)
        assert math.prod(p**e for p, e in f.factors) == n
        ps = f.primes()
        assert ps == sorted(ps)
        assert all(primality(p)[0] for p in ps)


def test_qm_minus_1_split():
    assert factorize_qm_minus_1(3, 3).factors == ((2, 1), (13, 1))
    f = factorize_qm_minus_1(9, 7)
    assert f.n == 4782968
    assert f.factors == ((2, 3), (547, 1), (1093, 1))
    # agrees with direct factorization
    assert f.factors == factorize(9**7 - 1).factors


def test_qm_minus_1_value_exact():
    for q, m in [(3, 5), (9, 4), (27, 3)]:
        assert factorize_qm_minus_1(q, m).n == q**m - 1


def test_multiplicative_stats_examples():
    s = multiplicative_stats(factorize(1))
    assert (s.omega, s.W, s.phi, s.theta, s.radical) == (0, 1, 1, 1, 1)
    s = multiplicative_stats(factorize(26))
    assert (s.omega, s.W, s.phi) == (2, 4, 12)
    assert s.theta == type(s.theta)(6, 13)
    assert s.radical == 26
    s = multiplicative_stats(factorize(80))
    assert (s.omega, s.W, s.phi, s.radical) == (2, 4, 32, 10)
    assert s.theta == type(s.theta)(2, 5)


def test_theta_multiplicative_on_coprime_pairs():
    rng = random.Random(2024)
    done = 0
    while done < 30:
        a = rng.randrange(2, 10**6)
        b = rng.randrange(2, 10**6)
        if math.gcd(a, b) != 1:
            continue
        ta = multiplicative_stats(factorize(a)).theta
        tb = multiplicative_stats(factorize(b)).theta
        tab = multiplicative_stats(factorize(a * b)).theta
        assert tab == ta * tb
        done += 1


def test_omega_table_matches_factorize():
    t = omega_table(10**6)
    for n in range(2, 5000, 37):
        assert int(t[n]) == len(factorize(n).factors)
    rng = random.Random(8)
    for _ in range(2000):
        n = rng.randrange(2, 10**6)
        assert int(t[n]) == len(factorize(n).factors)


def test_primality_knowns():
    assert primality(2)[0] and primality(2**61 - 1)[0]
    assert not primality(561)[0]  # Carmichael
    assert not primality(1)[0]
    # deterministic range is certified
    assert primality(10**18 + 9)[1]


def test_moebius_and_cyclotomic():
    assert [moebius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]
    assert cyclotomic_value(1, 3) == 2
    assert cyclotomic_value(2, 3) == 4
    assert cyclotomic_value(6, 3) == 7
    assert math.prod(cyclotomic_value(d, 3) for d in divisors_of(6)) == 3**6 - 1


def test_prime_power_split():
    assert prime_power_split(27) == (3, 3)
    assert prime_power_split(81) == (3, 4)
    assert prime_power_split(7) == (7, 1)
    with pytest.raises(NotPrime):
        prime_power_split(12)


def test_factor_cache_roundtrip(tmp_path):
    path = str(tmp_path / "cache.json")
    cache = FactorCache(path)
    f = factorize(3**18 - 1, cache=cache)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    assert data[str(3**18 - 1)] == ["2", "2", "2", "7", "13", "19", "37", "757"]
    # a fresh cache object reads the same file
    again = factorize(3**18 - 1, cache=FactorCache(path))
    assert again.factors == f.factors


def test_cache_ignores_inconsistent_entries(tmp_path):
    path = str(tmp_path / "cache.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"26": ["3", "7"]}, fh)  # wrong product; must be ignored
    f = factorize(26, cache=FactorCache(path))
    assert f.factors == ((2, 1), (13, 1))


def test_hints_used():
    p1, p2 = 1000003, 1000033
    f = factorize(p1 * p2, hints=[p1, p2])
    assert f.factors == ((p1, 1), (p2, 1))


def test_small_primes_sieve():
    sp = small_primes()
    assert sp[:5] == [2, 3, 5, 7, 11]
    assert sp[-1] < 10**6 and len(sp) == 78498


def test_int_factorization_validates():
    with pytest.raises(AssertionError):
        IntFactorization(n=6, factors=((2, 1),))


def test_unfactored_cofactor_carries_value(monkeypatch):
    from ffpn import numtheory as nt
    from ffpn.errors import UnfactoredCofactor

    # shrink the rho budget so a modest semiprime survives it
    monkeypatch.setattr(nt, "_RHO_ATTEMPTS", 1)
    monkeypatch.setattr(nt, "_RHO_MAX_ITER", 4)
    n = 1000003 * 1000033
    with pytest.raises(UnfactoredCofactor) as exc:
        nt.factorize(n)
    assert exc.value.cofactor == n
    # a hint unblocks the same call under the same budget
    assert nt.factorize(n, hints=[1000003]).factors == ((1000003, 1), (1000033, 1))
