"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Tolerances and ranges are pinned here on purpose; loosening them is a
regression, not a fix.
"""
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.special import gammaln

from mixpredict.capacity import blahut_arimoto, build_rho_capacity, minimax_oracle
from mixpredict.cover import check_extension_bound, dominant_set, greedy_cover
from mixpredict.divergence import dn_block, dn_stepwise
from mixpredict.measures import (
    LN2,
    QUADRATIC,
    QUAD_COEFF,
    Bernoulli,
    Deterministic,
    Markov,
    mix,
)
from mixpredict.nml import (
    FullBernoulliClass,
    build_nml_predictor,
    negative_divergence_demo,
    normalizer_series,
    redundancy_bound,
)
from mixpredict.scenarios import (
    _sparse_zero_positions,
    run_bernoulli_mixture,
    run_weights_matter,
)

LOG2_PI2_6 = math.log2(math.pi ** 2 / 6.0)


def _report(num, name, ok):
    print(f"ACCEPTANCE {num:02d} {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"acceptance criterion {num} ({name}) failed"


def _random_markov1(rng):
    table = rng.uniform(0.05, 0.95, size=2)
    initial = rng.uniform(0.05, 0.95)
    return Markov(1, [[table[0], 1 - table[0]], [table[1], 1 - table[1]]],
                  [initial, 1 - initial])


def test_01_kl_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        mu, rho = _random_markov1(rng), _random_markov1(rng)
        for n in range(1, 11):
            a = dn_stepwise(mu, rho, n).bits
            b = dn_block(mu, rho, n).bits
            worst = max(worst, abs(a - b))
    elapsed = time.perf_counter() - start
    _report(1, "kl-identity", worst < 1e-9 and elapsed < 30.0)


def test_02_nml_negative_divergence():
    demo = negative_divergence_demo()
    ok = abs(demo.divergence_bits - math.log2(0.75)) < 1e-12
    ok &= abs(demo.level1["0"] - 0.5) < 1e-12
    ok &= abs(demo.level1["1"] - 0.5) < 1e-12
    for key in ("00", "01", "11"):
        ok &= abs(demo.level2[key] - 1.0 / 3.0) < 1e-12
    ok &= abs(demo.conditional_after_0["0"] - 2.0 / 3.0) < 1e-12
    ok &= abs(demo.conditional_after_0["1"] - 2.0 / 3.0) < 1e-12
    _report(2, "nml-negative-divergence", bool(ok))


def _closed_form_log_cn(n):
    # sum over zero counts of C(n,k) (k/n)^k ((n-k)/n)^(n-k)
    total = 0.0
    for k in range(n + 1):
        binom = math.exp(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
        ml = (k / n) ** k * ((n - k) / n) ** (n - k) if n else 1.0
        total += binom * ml
    return math.log2(total)


def test_03_bernoulli_normalizers():
    start = time.perf_counter()
    series = normalizer_series(FullBernoulliClass(), 16)
    ok = abs(2.0 ** series[0][1] - 2.0) < 1e-12
    ok &= abs(2.0 ** series[1][1] - 2.5) < 1e-12
    for n, log_cn in series:
        ok &= abs(log_cn - _closed_form_log_cn(n)) < 1e-12
        ok &= 2.0 ** log_cn <= n + 1 + 1e-12
    elapsed = time.perf_counter() - start
    _report(3, "bernoulli-normalizers", bool(ok) and elapsed < 10.0)


def test_04_nml_redundancy_bound():
    start = time.perf_counter()
    cls = FullBernoulliClass()
    rho = build_nml_predictor(cls, 14)
    norms = dict(normalizer_series(cls, 14))
    ok = True
    for n in range(2, 15):
        bound = redundancy_bound(norms[n], n)
        for p in np.arange(0.0, 1.0001, 0.05):
            avg = dn_block(Bernoulli(p), rho, n).average
            ok &= avg <= bound + 1e-9
    elapsed = time.perf_counter() - start
    _report(4, "nml-redundancy-bound", bool(ok) and elapsed < 120.0)


def test_05_weights_matter():
    from mixpredict.measures import GEOMETRIC, ZeroRunMixture
    quad = ZeroRunMixture(QUADRATIC)
    geo = ZeroRunMixture(GEOMETRIC)
    ok = True
    for n in range(2, 31):
        zeros = (0,) * n
        ok &= abs(-geo.log_prob(zeros) - (n - 1)) < 1e-9
        ok &= -quad.log_prob(zeros) <= 2 * math.log2(n) + 2
    result = run_weights_matter(max_n=1 << 14)
    ok &= result.ok
    for row in result.rows:
        n, dq, dg = row[0], row[1], row[2]
        if n >= 2:
            ok &= abs(dg - (n - 1)) < 1e-9 and dq <= 2 * math.log2(n) + 2
    _report(5, "weights-matter", bool(ok))


def test_06_capacity_equalities():
    rng = np.random.default_rng(606)
    ok = True
    for _ in range(20):
        m = int(rng.integers(2, 5))
        atoms = int(rng.integers(2, 9))
        members = rng.dirichlet(np.ones(atoms), size=m)
        ba = blahut_arimoto(members, tol=1e-10)
        mm = minimax_oracle(members)
        ok &= abs(ba.capacity - mm.value) < 1e-5
    for n in (1, 2, 3):
        members = np.eye(2 ** n)
        res = blahut_arimoto(members, tol=1e-9)
        ok &= abs(res.capacity - n) < 1e-6
    _report(6, "capacity-equalities", bool(ok))


def test_07_capacity_sandwich():
    grid = np.linspace(0.0, 1.0, 21)
    norms = dict(normalizer_series(FullBernoulliClass(), 12))
    members = [Bernoulli(p) for p in grid]
    ok = True
    prev = math.inf
    for n in (2, 4, 8, 12):
        tables = np.stack([m.prob_table(n) for m in members])
        cap = blahut_arimoto(tables, tol=1e-8).capacity
        ok &= cap <= norms[n] + 1e-6
        ok &= cap / n < prev
        prev = cap / n
    _report(7, "capacity-sandwich", bool(ok))


def test_08_capacity_predictor_bound():
    grid = np.linspace(0.0, 1.0, 21)
    members = [Bernoulli(p) for p in grid]
    rho, results = build_rho_capacity(members, 10, tol=1e-8)
    ok = True
    for n, res in enumerate(results, start=1):
        bound = (res.capacity + 1.0 + 2.0 * math.log2(n) + LOG2_PI2_6) / n
        for m in members:
            ok &= dn_block(m, rho, n).average <= bound + 1e-9
    _report(8, "capacity-predictor-bound", bool(ok))


def test_09_cover_construction():
    rng = np.random.default_rng(909)
    ok = True
    for trial in range(5):
        members = [_random_markov1(rng) for _ in range(10)]
        rho = mix(members, np.full(10, 0.1))
        for n in range(1, 9):
            for mu in members:
                mask = dominant_set(mu, rho, n)
                ok &= mu.prob_table(n)[~mask].sum() <= 1.0 / n + 1e-12
            cover = greedy_cover(members, rho, n)
            ok &= all(a >= b - 1e-12 for a, b in
                      zip(cover.gains, cover.gains[1:]))
            ok &= check_extension_bound(cover) >= -1e-15
    _report(9, "cover-construction", bool(ok))


def test_10_bernoulli_mixture_bound():
    result = run_bernoulli_mixture(grid=16, max_n=16, p_list=(1.0 / 3.0,))
    ok = result.ok
    for row in result.rows:
        ok &= row[2] <= row[3] + 1e-9
    _report(10, "bernoulli-mixture-bound", bool(ok))


def test_11_sparse_deterministic():
    rng = np.random.default_rng(20240811)
    members = [_sparse_zero_positions(1 << 14, rng) for _ in range(50)]
    ok = True
    for zp in members:
        n = 4
        while n <= 1 << 14:
            z = zp[zp <= n].astype(float)
            dn = math.log2(n + 1) + float(np.log2(z).sum())
            ok &= dn <= 2.0 * math.sqrt(n) * math.log2(n + 1)
            n *= 2

    def as_measure(zp):
        positions = set(int(t) for t in zp)
        return Deterministic(lambda t, pos=positions: 0 if t in pos else 1)

    # distinct members: divergence is infinite from the first disagreement
    for a, b in [(0, 1), (10, 20), (48, 49)]:
        mu_a, mu_b = as_measure(members[a]), as_measure(members[b])
        diff = np.setxor1d(members[a], members[b])
        first = int(diff.min())
        path = mu_a.path(first)
        ok &= mu_b.log_prob(path) == float("-inf")
        ok &= mu_b.log_prob(path[:-1]) == 0.0
    _report(11, "sparse-deterministic", bool(ok))


def test_12_end_to_end(tmp_path):
    start = time.perf_counter()
    run1, run2 = tmp_path / "run1", tmp_path / "run2"
    codes = []
    for out in (run1, run2):
        proc = subprocess.run(
            [sys.executable, "-m", "mixpredict.cli", "--out", str(out)],
            capture_output=True, text=True)
        codes.append(proc.returncode)
    identical = True
    for csv in sorted(run1.glob("*.csv")):
        identical &= csv.read_bytes() == (run2 / csv.name).read_bytes()
    elapsed = time.perf_counter() - start
    ok = codes == [0, 0] and identical and elapsed < 900.0
    _report(12, "end-to-end", ok)
