"""Numbered acceptance criteria, each run at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary. Run on
its own with ``pytest tests/test_acceptance.py -v``.
"""

import itertools
import math
import time
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from relcommit.adversary import coin_guess_bruteforce, relaxed_norms, simulate_multiphoton_attack
from relcommit.cli import run_experiment
from relcommit.config import parse_config
from relcommit.protocol import Reason, run_protocol
from relcommit.security import (
    ProtocolParams,
    asymptotic_rhs,
    chernoff_tails,
    coin_guess_max,
    eps_exact,
    eps_finite,
    feasible_region,
)
from relcommit.spacetime import (
    SiteLayout,
    check_open_window,
    chord_distance,
    commitment_duration,
)
from relcommit.states import bb84_family, lambda1_of

GENEVA = (46.20, 6.15)
SINGAPORE = (1.30, 103.80)
LAMBDA1 = 0.1464466


def reference_params(**kw):
    base = dict(n=2_200_000, mu=0.05, eta=0.06, q=0.034, delta=0.05, gamma=0.002)
    base.update(kw)
    return ProtocolParams(**base)


@pytest.mark.criterion(1, "lambda1 of BB84 = 0.1464466 +- 1e-6")
def test_c01_lambda1(report):
    lam1 = lambda1_of(bb84_family())
    report(f"lambda1={lam1:.9f}")
    assert abs(lam1 - 0.1464466) <= 1e-6


@pytest.mark.criterion(2, "duration(9354 km) = 15.6 ms +- 0.1 ms; Geneva-Singapore chord = 9354 km +- 20 km")
def test_c02_geometry(report):
    dur = commitment_duration(9.354e6)
    chord = chord_distance(GENEVA, SINGAPORE)
    report(f"duration={dur * 1e3:.4f} ms, chord={chord / 1e3:.1f} km")
    assert abs(dur - 15.6e-3) <= 0.1e-3
    assert abs(chord - 9.354e6) <= 20e3


@pytest.mark.criterion(3, "asymptotic rhs(mu=0.05, qber=0.034) in [0.0015, 0.0017]")
def test_c03_asymptotic_rhs(report):
    rhs = asymptotic_rhs(0.05, 0.034, LAMBDA1)
    rhs_delta = asymptotic_rhs(0.05, 0.05, LAMBDA1)
    report(f"rhs(qber=0.034)={rhs:.6f}, rhs(delta=0.05)={rhs_delta:.6f}")
    assert 0.0015 <= rhs <= 0.0017
    assert rhs_delta == pytest.approx(0.0018, abs=1e-4)


@pytest.mark.criterion(4, "eps_finite at the reference parameters in [1.8e-8, 1.65e-7]")
def test_c04_eps_finite(report):
    t0 = time.perf_counter()
    eps = eps_finite(reference_params())
    elapsed = time.perf_counter() - t0
    report(f"eps_finite={eps:.4g}, {elapsed:.2f} s")
    assert elapsed < 10
    assert 1.8e-8 <= eps <= 1.65e-7


def closed_form(n, k, lam1):
    return 1.0 if k >= n else eps_exact(n, k / n, lam1)


@pytest.mark.criterion(5, "explicit cross-game norm = closed form, n<=6, all (y,z), all delta, 1e-9")
def test_c05_cross_game_oracle(report):
    fam = bb84_family()
    lam1 = lambda1_of(fam)
    worst, count = 0.0, 0
    t0 = time.perf_counter()
    for n in range(1, 7):
        want = np.array([closed_form(n, k, lam1) for k in range(n + 1)])
        for y in itertools.product((0, 1), repeat=n):
            for z in itertools.product((0, 1), repeat=n):
                got = relaxed_norms(fam, y, z)
                worst = max(worst, float(np.abs(got - want).max()))
                count += n + 1
    report(f"{count} cases, max |diff|={worst:.2e}, {time.perf_counter() - t0:.1f} s")
    assert worst <= 1e-9


COIN_TABLES = [
    [[Fraction(3, 4), Fraction(2, 5)], [Fraction(1, 4), Fraction(3, 5)]],
    [[Fraction(1, 2), Fraction(1, 10)], [Fraction(1, 2), Fraction(9, 10)]],
    [[Fraction(853, 1000), Fraction(147, 1000)], [Fraction(147, 1000), Fraction(853, 1000)]],
    [[Fraction(1), Fraction(1, 3)], [Fraction(0), Fraction(2, 3)]],
]


@pytest.mark.criterion(6, "coin_guess_max = exhaustive brute force, n<=6, exact rationals")
def test_c06_coin_game_oracle(report):
    checked = 0
    for table in COIN_TABLES:
        for n in range(1, 7):
            brute = coin_guess_bruteforce(table, n)
            for k in range(n + 1):
                got = coin_guess_max(table, n, Fraction(k, n))
                assert isinstance(got, Fraction)
                assert got == brute[k], (table, n, k)
                checked += 1
    report(f"{checked} exact comparisons")


@pytest.mark.criterion(7, "Chernoff tails dominate exact binomial (n<=60) and Poisson (mean<=50) tails")
def test_c07_chernoff_dominance(report):
    checked = 0
    ps = np.round(np.arange(0.05, 0.951, 0.05), 2)
    for n in range(1, 61):
        for p in ps:
            mean = n * p
            for s in np.arange(0, n + 1, 0.25):
                lo, hi = chernoff_tails(mean, s)
                if s < mean:
                    assert stats.binom.cdf(math.floor(s), n, p) <= lo * (1 + 1e-12), (n, p, s)
                if s > mean:
                    assert stats.binom.sf(math.ceil(s) - 1, n, p) <= hi * (1 + 1e-12), (n, p, s)
                checked += 1
    for mean in np.arange(0.25, 50.01, 0.25):
        for s in np.arange(0, 4 * mean + 20, 0.25):
            lo, hi = chernoff_tails(mean, s)
            if s < mean:
                assert stats.poisson.cdf(math.floor(s), mean) <= lo * (1 + 1e-12), (mean, s)
            if s > mean:
                assert stats.poisson.sf(math.ceil(s) - 1, mean) <= hi * (1 + 1e-12), (mean, s)
            checked += 1
    report(f"{checked} (mean, s) points")


DESK_CONFIG = """
[params]
n = 200000
mu = 0.05
eta = 0.06
q = 0.034
delta = 0.05
gamma = 0.002

[sites]
A1 = 46.20, 6.15
B1 = 46.20, 6.15
A2 = 1.30, 103.80
B2 = 1.30, 103.80

[run]
seeds = 0
n_commitments = 100
"""


@pytest.mark.criterion(8, "desk-scale honest runs: acceptance >= 95% of 100, mean QBER in [0.028, 0.043], < 2 min")
def test_c08_honest_completeness(report):
    cfg = parse_config(DESK_CONFIG)
    t0 = time.perf_counter()
    summary = run_experiment(cfg, write=False)
    elapsed = time.perf_counter() - t0
    agg = summary.aggregates
    reasons = {}
    for r in summary.rows:
        reasons[r["reason"]] = reasons.get(r["reason"], 0) + 1
    report(
        f"acceptance={agg['acceptance_rate']:.2f}, mean_qber={agg['mean_qber']:.4f}, "
        f"reasons={reasons}, {elapsed:.1f} s"
    )
    assert elapsed < 120
    assert 0.028 <= agg["mean_qber"] <= 0.043
    assert agg["acceptance_rate"] >= 0.95


@pytest.mark.criterion(9, "reference point feasible (LHS ~ 1.00011); gamma=0.004 makes secure_ok false")
def test_c09_feasible_region(report):
    rep = feasible_region(reference_params())
    flipped = feasible_region(reference_params(gamma=0.004))
    report(
        f"LHS={rep.security_lhs:.6f} robust={rep.robust_ok} secure={rep.secure_ok}; "
        f"gamma=0.004: LHS={flipped.security_lhs:.6f} robust={flipped.robust_ok} "
        f"secure={flipped.secure_ok} feasible={flipped.feasible_ok}"
    )
    assert rep.robust_ok and rep.secure_ok and rep.feasible_ok
    assert rep.security_lhs == pytest.approx(1.00011, abs=5e-6)
    assert rep.security_lhs > 1
    assert flipped.secure_ok is False


@pytest.mark.criterion(10, "multi-photon attack fails 1000/1000 at reference point; succeeds >= 99% at mu=1, n=1e5")
def test_c10_multiphoton_attack(report):
    t0 = time.perf_counter()
    ref = simulate_multiphoton_attack(reference_params(), np.random.default_rng(np.random.SeedSequence(0)), 1000)
    bright = simulate_multiphoton_attack(
        reference_params(mu=1.0, n=100_000), np.random.default_rng(np.random.SeedSequence(1)), 1000
    )
    elapsed = time.perf_counter() - t0
    report(f"reference successes={int(ref.sum())}/1000, mu=1 success rate={bright.mean():.3f}, {elapsed:.1f} s")
    assert elapsed < 300
    assert bright.mean() >= 0.99
    assert int(ref.sum()) == 0


@pytest.mark.criterion(11, "open at t_c + d/2c - 1 us accepted, + 1 us rejected, 20 random layouts")
def test_c11_lightcone(report):
    rng = np.random.default_rng(2014)
    params = ProtocolParams(n=4000, mu=0.5, eta=1.0, q=0.0, delta=0.05, gamma=0.05)
    done = 0
    while done < 20:
        # uniform on the sphere
        p1 = (math.degrees(math.asin(rng.uniform(-1, 1))), rng.uniform(-180, 180))
        p2 = (math.degrees(math.asin(rng.uniform(-1, 1))), rng.uniform(-180, 180))
        layout = SiteLayout({"A1": p1, "B1": p1, "A2": p2, "B2": p2})
        half = layout.commitment_duration_ns
        if half < 10_000:
            continue
        t_c = int(rng.integers(0, 10**9))
        commits = (layout.event("B1", t_c), layout.event("B2", t_c))
        for tol in (0.0, 1e-6):
            early = (layout.event("B1", t_c + half - 1000), layout.event("B2", t_c + half - 1000))
            late = (layout.event("B1", t_c + half + 1000), layout.event("B2", t_c + half + 1000))
            assert check_open_window(layout, commits, early, tol).ok
            assert not check_open_window(layout, commits, late, tol).ok

        run_rng = np.random.default_rng(done)
        ok = run_protocol(params, layout, run_rng, t_c_ns=t_c, open_delay_ns=half - 1000)
        late_run = run_protocol(params, layout, np.random.default_rng(done), t_c_ns=t_c, open_delay_ns=half + 1000)
        assert ok.verdict.accepted, ok.verdict
        assert late_run.verdict.reason is Reason.LIGHTCONE_VIOLATION
        done += 1
    report(f"{done} layouts")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
