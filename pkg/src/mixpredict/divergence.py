"""Divergence machinery: expected cumulative KL over n steps (two independent
routes plus Monte Carlo), horizon-truncated total variation, the binary
divergence h(p,q), and conditional entropy profiles.

All quantities are in bits.  Conventions: 0*log(0/q) = 0 and p*log(p/0) = +inf;
infinite divergences are reported as values with a witnessing sequence, never
raised as errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    LOG_ZERO,
    Markov,
    ProcessMeasure,
    check_budget,
    index_to_seq,
)


@dataclass(frozen=True)
class DivergenceReport:
    """Result of one cumulative-KL evaluation."""

    n: int
    bits: float
    method: str
    samples: int | None = None
    stderr: float | None = None
    witness: tuple[int, ...] | None = None

    @property
    def average(self) -> float:
        return self.bits / self.n

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.bits)

    def csv_row(self, scenario: str = "") -> tuple:
        return (scenario, self.n, self.method, self.bits, self.average,
                self.stderr if self.stderr is not None else "")


def _clamp(bits: float) -> float:
    # Gibbs guarantees d_n >= 0; absorb float noise only
    return 0.0 if -1e-9 < bits < 0.0 else bits


def dn_block(mu: ProcessMeasure, rho: ProcessMeasure, n: int) -> DivergenceReport:
    """Cumulative KL as the block divergence between the two n-prefix
    restrictions."""
    check_budget(mu.alphabet_size, n)
    pm = mu.prob_table(n)
    pr = rho.prob_table(n)
    sup = pm > 0
    bad = sup & (pr <= 0)
    if bad.any():
        witness = index_to_seq(int(np.argmax(bad)), mu.alphabet_size, n)
        return DivergenceReport(n, math.inf, "exact-enumeration", witness=witness)
    bits = float(np.sum(pm[sup] * (np.log2(pm[sup]) - np.log2(pr[sup]))))
    return DivergenceReport(n, _clamp(bits), "exact-enumeration")


def dn_stepwise(mu: ProcessMeasure, rho: ProcessMeasure, n: int) -> DivergenceReport:
    """Cumulative KL as the expected sum of per-step conditional divergences,
    accumulated level by level."""
    check_budget(mu.alphabet_size, n)
    size = mu.alphabet_size
    bits = 0.0
    prev_m = mu.prob_table(0)
    prev_r = rho.prob_table(0)
    for t in range(1, n + 1):
        cm = mu.prob_table(t)
        cr = rho.prob_table(t)
        parent_m = np.repeat(prev_m, size)
        parent_r = np.repeat(prev_r, size)
        sup = cm > 0
        bad = sup & (cr <= 0)
        if bad.any():
            witness = index_to_seq(int(np.argmax(bad)), size, t)
            return DivergenceReport(n, math.inf, "exact-enumeration", witness=witness)
        cond_m = np.log2(cm[sup]) - np.log2(parent_m[sup])
        cond_r = np.log2(cr[sup]) - np.log2(parent_r[sup])
        bits += float(np.sum(cm[sup] * (cond_m - cond_r)))
        prev_m, prev_r = cm, cr
    return DivergenceReport(n, _clamp(bits), "exact-enumeration")


def dn_monte_carlo(mu: ProcessMeasure, rho: ProcessMeasure, n: int,
                   samples: int, seed: int) -> DivergenceReport:
    """Unbiased path-sampling estimate of the block divergence."""
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    vals = np.empty(samples)
    for i in range(samples):
        path = mu.sample_with(n, rng)
        lr = rho.log_prob(path)
        if lr == LOG_ZERO:
            return DivergenceReport(n, math.inf, "monte-carlo", samples=samples,
                                    witness=path)
        vals[i] = mu.log_prob(path) - lr
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return DivergenceReport(n, float(vals.mean()), "monte-carlo",
                            samples=samples, stderr=stderr)


def tv_horizon(mu: ProcessMeasure, rho: ProcessMeasure, m: int) -> float:
    """Total variation distance between the two measures restricted to the
    first m symbols."""
    check_budget(mu.alphabet_size, m)
    return float(0.5 * np.abs(mu.prob_table(m) - rho.prob_table(m)).sum())


def binary_h(p: float, q: float) -> float:
    """p*log2(p/q) + (1-p)*log2((1-p)/(1-q)) with the usual zero conventions."""
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("arguments must lie in [0,1]")

    def term(a, b):
        if a == 0.0:
            return 0.0
        if b == 0.0:
            return math.inf
        return a * math.log2(a / b)

    return term(p, q) + term(1.0 - p, 1.0 - q)


@dataclass(frozen=True)
class EntropyProfile:
    """Signed conditional entropies E log2 P(x_{k+1} | x_{1..k}) for k = 0..K.

    Values are the expectations of the conditional log-likelihood (the
    negative of the standard conditional entropy), so the sequence is
    non-decreasing for stationary chains and its last element is a certified
    lower bound on the limit value.
    """

    values: tuple[float, ...]

    @property
    def limit_lower_bound(self) -> float:
        return self.values[-1]

    @property
    def limit_estimate(self) -> float:
        v = self.values
        if len(v) >= 3:
            d1, d2 = v[-2] - v[-3], v[-1] - v[-2]
            if d1 > d2 > 0:
                return min(v[-1] + d2 * d2 / (d1 - d2), 0.0)
        return v[-1]


def entropy_profile(mu: Markov, max_order: int) -> EntropyProfile:
    if not isinstance(mu, Markov):
        raise ValueError("entropy profiles are computed for Markov constructions")
    if not mu.has_stationary_initial():
        raise ValueError("entropy profile requires a stationary initial distribution")
    check_budget(mu.alphabet_size, max_order + 1)
    size = mu.alphabet_size
    values = []
    prev = mu.prob_table(0)
    for k in range(max_order + 1):
        cur = mu.prob_table(k + 1)
        parent = np.repeat(prev, size)
        sup = cur > 0
        values.append(float(np.sum(cur[sup] * (np.log2(cur[sup]) - np.log2(parent[sup])))))
        prev = cur
    return EntropyProfile(values=tuple(values))


@dataclass(frozen=True)
class PartialKLCheck:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - 1e-12


def partial_kl_lower_bound(mu: ProcessMeasure, rho: ProcessMeasure, n: int,
                           event) -> PartialKLCheck:
    """Check that the KL sum restricted to an event A of X^n dominates the
    grouped term -mu(A) log2(rho(A)/mu(A))."""
    check_budget(mu.alphabet_size, n)
    mask = np.zeros(mu.alphabet_size ** n, dtype=bool)
    mask[np.asarray(event)] = True
    pm = mu.prob_table(n)
    pr = rho.prob_table(n)
    sel = mask & (pm > 0)
    if np.any(sel & (pr <= 0)):
        lhs = math.inf
    else:
        lhs = float(-np.sum(pm[sel] * (np.log2(pr[sel]) - np.log2(pm[sel]))))
    mu_a = float(pm[mask].sum())
    rho_a = float(pr[mask].sum())
    if mu_a == 0.0:
        rhs = 0.0
    elif rho_a == 0.0:
        rhs = math.inf
    else:
        rhs = -mu_a * math.log2(rho_a / mu_a)
    return PartialKLCheck(lhs=lhs, rhs=rhs)
