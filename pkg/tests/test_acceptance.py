"""Acceptance suite: one test per criterion, one printed verdict line each.

Criterion 8's final clause (a witness for each of the twelve prime-field
quadratics in the 27-element field) is refuted by exhaustive computation:
x^2 + x - 1 maps every one of the nine primitive normal elements to a
non-primitive value.  The check is asserted as stated and fails by design;
see notes in the repository README.
"""

import json
import random
import time
from fractions import Fraction

import pytest

from ffpn.chars import orthogonality_audit, freeness_indicator, weil_audit
from ffpn.fqpoly import factor_xm1, is_g_free, poly_stats, tower_poly
from ffpn.gf import build_extension, is_e_free
from ffpn.numtheory import FactorCache, divisors_of, factorize, factorize_qm_minus_1, multiplicative_stats
from ffpn.search import (
    enumerate_primitive_normal,
    exact_count,
    find_witness,
    resolve_pair,
    search_context,
    verify_sieve_inequality,
)
from ffpn.sieve import (
    asymptotic_condition,
    lambda_caseA,
    reproduce_table,
    sieve_lambda,
    sieve_report,
    w_bound_audit,
)


def report(num, ok, detail):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_1_table1_lambda_reproduction():
    t0 = time.monotonic()
    expected = {
        (3, 18, 14): 12.231,
        (3, 27, 26): 9.18577,
        (9, 7, 1094): 3.0018,  # paper prints 3.01
        (9, 9, 14): 12.231,
        (27, 5, 22): 5.54729,
    }
    errors = []
    for (q, m, d), lam in expected.items():
        rep = sieve_report(q, m, d, "all")
        if abs(float(rep.Lambda) - lam) >= 5e-4:
            errors.append((q, m, float(rep.Lambda), lam))
    rows = {(r["q"], r["m"]): r for r in reproduce_table(1)}
    flagged = [k for k, r in rows.items() if not r["rhs_matches"]]
    both_reported = all(
        rows[k]["rhs"] is not None and rows[k]["rhs_printed"] is not None for k in flagged
    )
    elapsed = time.monotonic() - t0
    ok = not errors and {(9, 7), (9, 9)} <= set(flagged) and both_reported and elapsed < 5
    report(1, ok, f"5 Lambda values within 5e-4, rhs flags {sorted(flagged)}, {elapsed:.2f}s")
    assert not errors
    assert {(9, 7), (9, 9)} <= set(flagged) and both_reported
    assert elapsed < 5


def test_criterion_2_omega_27_26(tmp_path):
    cache = FactorCache(str(tmp_path / "cache.json"))
    t0 = time.monotonic()
    f = factorize_qm_minus_1(27, 26, cache=cache)
    cold = time.monotonic() - t0
    t0 = time.monotonic()
    f2 = factorize_qm_minus_1(27, 26, cache=FactorCache(str(tmp_path / "cache.json")))
    warm = time.monotonic() - t0
    omega = len(f.factors)
    ok = omega == 12 and f.n == 27**26 - 1 and cold < 60 and warm < 1 and f2.factors == f.factors
    report(2, ok, f"omega(27^26-1) = {omega}, cold {cold:.2f}s, cached {warm:.3f}s")
    assert omega == 12
    assert f.n == 27**26 - 1
    assert cold < 60 and warm < 1


def test_criterion_3_lemma52_identity():
    t0 = time.monotonic()
    checked = 0
    for q in (9, 27, 81):
        for m_prime in divisors_of(q - 1):
            _d, lam = sieve_lambda((), (1,) * m_prime, q)
            assert lam == lambda_caseA(q, m_prime), (q, m_prime)
            checked += 1
    assert lambda_caseA(9, 4) == Fraction(37, 5)
    assert lambda_caseA(27, 26) == 677 < 729
    elapsed = time.monotonic() - t0
    ok = elapsed < 1
    report(3, ok, f"identity exact for {checked} (q, m') pairs, (9,4) = 7.4, (27,26) = 677, {elapsed:.2f}s")
    assert elapsed < 1


def test_criterion_4_w_bound_audit():
    t0 = time.monotonic()
    violations = w_bound_audit(10**6)
    elapsed = time.monotonic() - t0
    ok = violations == [] and elapsed < 30
    report(4, ok, f"W(n) < 11.25 n^(1/5) for n <= 10^6, {len(violations)} violations, {elapsed:.1f}s")
    assert violations == []
    assert elapsed < 30


def _geq_times_sqrt(x: Fraction, y: Fraction, s: int) -> bool:
    if y == 0:
        return x >= 0
    if y > 0:
        return x >= 0 and x * x >= y * y * s
    return x >= 0 or x * x <= y * y * s


def test_criterion_5_bound_vs_exact_counts():
    t0 = time.monotonic()
    violations = 0
    checks = 0
    for m in (2, 3, 4):
        t = build_extension(3, 1, m)
        pf = factor_xm1(3, m)
        rng = random.Random(1000 + m)
        fs = []
        while len(fs) < 50:
            a = rng.randrange(1, t.Q)
            b = rng.randrange(t.Q)
            c = rng.randrange(t.Q)
            if t.mul_codes(b, b) != t.mul_codes(a, c):
                fs.append((a, b, c))
        estats = {e: multiplicative_stats(factorize(e)) for e in divisors_of(t.N)}
        divisor_items = pf.divisors()
        for e1, s1 in estats.items():
            for e2, s2 in estats.items():
                for gpoly, exps in divisor_items:
                    parts = [(pf.factors[i].degree, e) for i, e in enumerate(exps) if e > 0]
                    st = poly_stats(3, parts)
                    A = s1.theta * s2.theta * st.Theta
                    B = 3 * s1.W * s2.W * st.Omega
                    for f in fs:
                        cnt = exact_count(t, f, e1, e2, gpoly)
                        checks += 1
                        if not _geq_times_sqrt(Fraction(cnt) - A * t.Q, -A * B, t.Q):
                            violations += 1
    elapsed = time.monotonic() - t0
    ok = violations == 0 and elapsed < 600
    report(5, ok, f"{checks} exact-count bound checks on F9/F27/F81, {violations} violations, {elapsed:.1f}s")
    assert violations == 0
    assert elapsed < 600


def test_criterion_6_sieve_inequality_exact_counts():
    t0 = time.monotonic()
    failures = 0
    checks = 0
    for m in (4, 6):
        t = build_extension(3, 1, m)
        ctx = search_context(t)
        rng = random.Random(2000 + m)
        fs = []
        while len(fs) < 20:
            a = rng.randrange(1, t.Q)
            b = rng.randrange(t.Q)
            c = rng.randrange(t.Q)
            if t.mul_codes(b, b) != t.mul_codes(a, c):
                fs.append((a, b, c))
        nprimes = ctx.primes
        nfactors = len(ctx.tp.pf.factors)
        for dmask in range(1 << len(nprimes)):
            d = 1
            for i, p in enumerate(nprimes):
                if dmask >> i & 1:
                    d *= p
            for gmask in range(1 << nfactors):
                g = tuple(j for j in range(nfactors) if gmask >> j & 1)
                for f in fs:
                    res = verify_sieve_inequality(t, f, d, g)
                    checks += 1
                    if not res["holds"]:
                        failures += 1
    elapsed = time.monotonic() - t0
    ok = failures == 0 and elapsed < 600
    report(6, ok, f"{checks} sieve-inequality checks on F81/F729, {failures} failures, {elapsed:.1f}s")
    assert failures == 0
    assert elapsed < 600


def test_criterion_7_character_machinery():
    t0 = time.monotonic()
    worst_orth = 0.0
    indicator_bad = 0
    indicator_checks = 0
    weil_viol = 0
    weil_checks = 0
    for m in (2, 3, 4):
        t = build_extension(3, 1, m)
        worst_orth = max(worst_orth, orthogonality_audit(t))
        tp = tower_poly(t)
        for e in divisors_of(t.N):
            for code in range(1, t.Q):
                el = t.element(code)
                val = freeness_indicator("e", e, el)
                indicator_checks += 1
                if abs(val - (1.0 if is_e_free(el, e) else 0.0)) > 1e-6:
                    indicator_bad += 1
        for gpoly, _exps in tp.divisors():
            for code in range(t.Q):
                el = t.element(code)
                val = freeness_indicator("g", gpoly, el)
                indicator_checks += 1
                if abs(val - (1.0 if is_g_free(el, gpoly) else 0.0)) > 1e-6:
                    indicator_bad += 1
        audit = weil_audit(t, quadratics=100, seed=m)
        weil_viol += len(audit["violations"])
        weil_checks += audit["checked"]
    elapsed = time.monotonic() - t0
    ok = worst_orth < 1e-9 and indicator_bad == 0 and weil_viol == 0 and elapsed < 900
    report(
        7,
        ok,
        f"orthogonality worst {worst_orth:.2e}, {indicator_checks} indicator checks "
        f"({indicator_bad} bad), {weil_checks} Weil sums ({weil_viol} over bound), {elapsed:.1f}s",
    )
    assert worst_orth < 1e-9
    assert indicator_bad == 0
    assert weil_viol == 0
    assert elapsed < 900


TWELVE_F3_QUADRATICS = [
    (1, 0, 1), (1, 0, 2), (2, 0, 1), (2, 0, 2),
    (1, 1, 0), (1, 2, 0), (2, 1, 0), (2, 2, 0),
    (1, 1, 2), (1, 2, 2), (2, 2, 1), (2, 1, 1),
]


def test_criterion_8_f27_census():
    t0 = time.monotonic()
    t = build_extension(3, 1, 3)
    ctx = search_context(t)
    pn = len(enumerate_primitive_normal(t))
    prim = int(ctx.prim_mask.sum())
    normal = int(ctx.normal_mask.sum())
    nonzero_trace = sum(1 for c in range(27) if t.trace_abs_code(c) != 0)
    missing = [f for f in TWELVE_F3_QUADRATICS if find_witness(t, f) is None]
    elapsed = time.monotonic() - t0
    census_ok = pn == 9 and prim == 12 and normal == 18 == nonzero_trace
    ok = census_ok and missing == [] and elapsed < 1
    report(
        8,
        ok,
        f"census 9/12/18 {'ok' if census_ok else 'WRONG'}; "
        f"witnessless quadratics: {missing or 'none'}; {elapsed:.2f}s",
    )
    assert census_ok
    assert elapsed < 1
    # Refuted by exhaustive ground truth: x^2 + x - 1 (codes (1, 1, 2)) has
    # no witness among the nine primitive normal elements.  Asserted as
    # stated, failing by design; the counterexample is frozen in
    # test_search.py::test_twelve_f3_quadratics_on_f27.
    assert missing == [], (
        "witnessless quadratic(s) over F27: "
        + ", ".join(str(f) for f in missing)
        + " (x^2+x-1 maps all nine primitive normal elements to non-primitive values)"
    )


# Derived ground truth (full sweeps; no verdict was pre-asserted).
PAIR_GROUND_TRUTH = {
    (3, 2): ("exception_found", 32),
    (3, 3): ("exception_found", 31),
    (3, 4): ("exception_found", 48),
    (9, 2): ("resolved_no_exception", 0),
    (3, 6): ("resolved_no_exception", 0),
    (9, 3): ("resolved_no_exception", 0),
    (27, 2): ("resolved_no_exception", 0),
}


def test_criterion_9_pair_resolution(tmp_path):
    t0 = time.monotonic()
    outcomes = {}
    for (q, m), (want_status, want_bad) in PAIR_GROUND_TRUTH.items():
        rep = resolve_pair(q, m)
        outcomes[(q, m)] = (rep.status, len(rep.bad_quadratics))
        assert rep.status == want_status, (q, m, rep.status)
        assert len(rep.bad_quadratics) == want_bad, (q, m)
        assert rep.sweep_position == rep.total_a  # definitive full sweep
    # determinism and checkpoint-resume on one exception pair
    again = resolve_pair(3, 3, threads=2)
    assert outcomes[(3, 3)] == (again.status, len(again.bad_quadratics))
    ck = str(tmp_path / "ck33.json")
    partial = resolve_pair(3, 3, budget=5000, threads=1, checkpoint_path=ck)
    assert partial.status == "budget_exhausted"
    resumed = resolve_pair(3, 3, threads=1, checkpoint_path=ck)
    assert (resumed.status, len(resumed.bad_quadratics)) == outcomes[(3, 3)]
    elapsed = time.monotonic() - t0
    ok = elapsed < 1800
    summary = ", ".join(f"({q},{m}) {s} [{b} bad]" for (q, m), (s, b) in outcomes.items())
    report(9, ok, f"{summary}; resumable+deterministic; {elapsed:.0f}s")
    assert elapsed < 1800


def test_criterion_10_boundary_checks():
    t0 = time.monotonic()
    third = Fraction(1, 3)
    results = [
        asymptotic_condition(81, 47, third)["verdict"] == "pass",
        asymptotic_condition(81, 46, third)["verdict"] == "fail",
        asymptotic_condition(27, 108, third)["verdict"] == "pass",
        asymptotic_condition(27, 107, third)["verdict"] == "fail",
    ]
    elapsed = time.monotonic() - t0
    ok = all(results) and elapsed < 1
    report(10, ok, f"(81,47) pass / (81,46) fail / (27,108) pass / (27,107) fail, {elapsed:.2f}s")
    assert all(results)
    assert elapsed < 1
