"""Normalized maximum likelihood machinery.

Per-sequence likelihood suprema, horizon normalizers, the normalized table
itself, and the mixture predictor built from per-horizon tables extended by
zero padding.  The per-horizon tables are *not* consistent across horizons;
``negative_divergence_demo`` reproduces the two-step construction showing
their conditionals can even have negative one-step divergence.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    LOG_ZERO,
    QUAD_COEFF,
    QUADRATIC,
    Bernoulli,
    Deterministic,
    ExplicitHorizonMeasure,
    Markov,
    Mixture,
    ProcessMeasure,
    check_budget,
    index_to_seq,
    log2_safe,
    logsumexp2,
    seq_to_index,
)

LOG2_WEIGHT_NORM = -math.log2(QUAD_COEFF)  # log2(pi^2/6)


class ParametricClass:
    """A class of measures exposed through per-sequence supremum and argmax
    oracles."""

    alphabet_size: int = 2

    def sup_log_prob(self, seq) -> float:
        raise NotImplementedError

    def argmax_measure(self, seq) -> ProcessMeasure:
        raise NotImplementedError(
            "this class has no argmax oracle; use a uniform regularizer instead"
        )

    def sup_log_table(self, n: int) -> np.ndarray:
        check_budget(self.alphabet_size, n)
        out = np.empty(self.alphabet_size ** n)
        for i, seq in enumerate(itertools.product(range(self.alphabet_size), repeat=n)):
            out[i] = self.sup_log_prob(seq)
        return out


class FiniteClass(ParametricClass):
    def __init__(self, members):
        members = list(members)
        if not members:
            raise ValueError("class needs at least one member")
        self.members = members
        self.alphabet_size = members[0].alphabet_size
        if any(m.alphabet_size != self.alphabet_size for m in members):
            raise ValueError("all members must share one alphabet")

    def sup_log_prob(self, seq):
        return max(m.log_prob(seq) for m in self.members)

    def argmax_measure(self, seq):
        logs = [m.log_prob(seq) for m in self.members]
        return self.members[int(np.argmax(logs))]

    def sup_log_table(self, n):
        check_budget(self.alphabet_size, n)
        tables = np.stack([log2_safe(m.prob_table(n)) for m in self.members])
        return tables.max(axis=0)


class FullBernoulliClass(ParametricClass):
    """All binary i.i.d. sources; closed-form maximum likelihood with the
    0^0 = 1 convention at the endpoints."""

    alphabet_size = 2

    @staticmethod
    def _ml_log(zeros: int, n: int) -> float:
        if n == 0:
            return 0.0
        total = 0.0
        if zeros:
            total += zeros * math.log2(zeros / n)
        if n - zeros:
            total += (n - zeros) * math.log2((n - zeros) / n)
        return total

    def sup_log_prob(self, seq):
        n = len(seq)
        zeros = sum(1 for s in seq if s == 0)
        return self._ml_log(zeros, n)

    def argmax_measure(self, seq):
        n = len(seq)
        if n == 0:
            return Bernoulli(0.5)
        return Bernoulli(sum(1 for s in seq if s == 0) / n)

    def sup_log_table(self, n):
        check_budget(2, n)
        idx = np.arange(1 << n, dtype=np.uint64)
        zeros = n - np.bitwise_count(idx).astype(np.int64)
        per_count = np.array([self._ml_log(k, n) for k in range(n + 1)])
        return per_count[zeros]


class FullMarkovClass(ParametricClass):
    """All Markov sources of a fixed order; the supremum is the empirical
    conditional product with the initial block likelihood maximized at 1."""

    def __init__(self, order: int, alphabet_size: int = 2):
        if order < 0:
            raise ValueError("order must be nonnegative")
        self.order = order
        self.alphabet_size = alphabet_size

    def sup_log_prob(self, seq):
        seq = tuple(seq)
        n, k, size = len(seq), self.order, self.alphabet_size
        if n <= k:
            return 0.0
        counts: dict[tuple, np.ndarray] = {}
        for t in range(k, n):
            ctx = seq[t - k:t]
            row = counts.setdefault(ctx, np.zeros(size))
            row[seq[t]] += 1
        total = 0.0
        for row in counts.values():
            tot = row.sum()
            for c in row:
                if c:
                    total += c * math.log2(c / tot)
        return total

    def argmax_measure(self, seq):
        seq = tuple(seq)
        k, size = self.order, self.alphabet_size
        contexts = size ** k
        table = np.full((contexts, size), 1.0 / size)
        counts = np.zeros((contexts, size))
        for t in range(k, len(seq)):
            counts[seq_to_index(seq[t - k:t], size), seq[t]] += 1
        seen = counts.sum(axis=1) > 0
        table[seen] = counts[seen] / counts[seen].sum(axis=1, keepdims=True)
        initial = np.zeros(contexts)
        block = seq[:k] if len(seq) >= k else seq + (0,) * (k - len(seq))
        initial[seq_to_index(block, size)] = 1.0
        return Markov(k, table, initial, alphabet_size=size)

    def sup_log_table(self, n):
        check_budget(self.alphabet_size, n)
        if self.alphabet_size == 2:
            return self._binary_sup_table(n)
        out = np.empty(self.alphabet_size ** n)
        for i, seq in enumerate(itertools.product(range(self.alphabet_size), repeat=n)):
            out[i] = self.sup_log_prob(seq)
        return out

    def _binary_sup_table(self, n):
        k = self.order
        if n <= k:
            return np.zeros(1 << n)
        idx = np.arange(1 << n, dtype=np.uint64)
        bits = ((idx[:, None] >> np.arange(n - 1, -1, -1, dtype=np.uint64)) & 1).astype(np.int64)
        pows = (2 ** np.arange(k - 1, -1, -1, dtype=np.int64)) if k else np.zeros(0, dtype=np.int64)
        total = np.zeros(1 << n)
        # per row: sum over contexts of the empirical-conditional log product
        ctx = np.zeros((1 << n, n - k), dtype=np.int64)
        for j in range(k):
            ctx += bits[:, j:j + n - k] * pows[j]
        nxt = bits[:, k:]
        for c in range(1 << k):
            in_ctx = ctx == c
            n1 = (in_ctx & (nxt == 1)).sum(axis=1)
            nc = in_ctx.sum(axis=1)
            n0 = nc - n1
            with np.errstate(divide="ignore", invalid="ignore"):
                t0 = np.where(n0 > 0, n0 * (np.log2(n0) - np.log2(nc)), 0.0)
                t1 = np.where(n1 > 0, n1 * (np.log2(n1) - np.log2(nc)), 0.0)
            total += t0 + t1
        return total


def bernoulli_grid(points) -> FiniteClass:
    return FiniteClass([Bernoulli(p) for p in points])


@dataclass(frozen=True)
class NmlTable:
    """Per-horizon normalized maximum likelihood table."""

    n: int
    log_sup: np.ndarray       # log2 of per-sequence suprema, lexicographic
    log_normalizer: float     # log2 of their sum
    probs: np.ndarray         # normalized distribution over X^n
    alphabet_size: int

    def prob(self, seq) -> float:
        return float(self.probs[seq_to_index(seq, self.alphabet_size)])

    def conditional_ratio(self, prefix, nxt) -> float:
        """Table-quotient conditional: P(prefix.nxt)/P(prefix) where the prefix
        mass is read from the same table by marginalization."""
        size = self.alphabet_size
        m = len(prefix)
        block = self.probs.reshape(size ** m, -1).sum(axis=1)
        parent = block[seq_to_index(prefix, size)]
        child = self.probs.reshape(size ** (m + 1), -1).sum(axis=1)
        return float(child[seq_to_index(tuple(prefix) + (nxt,), size)] / parent)

    def rows(self, scenario: str = ""):
        for i, (ls, p) in enumerate(zip(self.log_sup, self.probs)):
            seq = "".join(map(str, index_to_seq(i, self.alphabet_size, self.n)))
            yield (scenario, seq, 0.0 if ls == LOG_ZERO else 2.0 ** ls, p)


def build_nml_table(cls: ParametricClass, n: int) -> NmlTable:
    check_budget(cls.alphabet_size, n)
    log_sup = cls.sup_log_table(n)
    log_cn = logsumexp2(log_sup)
    if log_cn == LOG_ZERO:
        raise ValueError("class assigns zero mass to every sequence")
    probs = np.exp2(log_sup - log_cn, where=log_sup > LOG_ZERO,
                    out=np.zeros_like(log_sup))
    return NmlTable(n=n, log_sup=log_sup, log_normalizer=float(log_cn),
                    probs=probs, alphabet_size=cls.alphabet_size)


def normalizer_series(cls: ParametricClass, max_n: int) -> list[tuple[int, float]]:
    """Exact log2 normalizers for n = 1..max_n."""
    return [(n, build_nml_table(cls, n).log_normalizer) for n in range(1, max_n + 1)]


def redundancy_bound(log2_normalizer: float, n: int) -> float:
    """Per-symbol redundancy bound of the padded-table mixture predictor:
    (log2 c_n + 2 log2 n + log2(pi^2/6)) / n."""
    return (log2_normalizer + 2.0 * math.log2(n) + LOG2_WEIGHT_NORM) / n


def build_nml_predictor(cls: ParametricClass, max_horizon: int) -> Mixture:
    """Quadratically weighted mixture of zero-padded per-horizon tables.

    The analytic weight tail beyond the last horizon is assigned to the
    all-zeros deterministic measure, matching the padding convention, so the
    result is a full probability measure.
    """
    comps: list[ProcessMeasure] = []
    weights = []
    for k in range(1, max_horizon + 1):
        table = build_nml_table(cls, k)
        comps.append(ExplicitHorizonMeasure(table.probs, cls.alphabet_size, pad_symbol=0))
        weights.append(QUADRATIC.weight(k))
    comps.append(Deterministic.constant(0, cls.alphabet_size))
    weights.append(QUADRATIC.tail_mass(max_horizon + 1))
    return Mixture(comps, np.array(weights))


@dataclass(frozen=True)
class NegativeDivergenceReport:
    """Two-step construction showing the per-horizon tables are not prefix
    consistent and their quotient conditionals can have negative one-step
    divergence."""

    level1: dict[str, float]
    level2: dict[str, float]
    conditional_after_0: dict[str, float]
    conditional_sum: float
    divergence_bits: float


def negative_divergence_demo() -> NegativeDivergenceReport:
    members = [
        Deterministic.constant(0),                                   # mass on 00
        Deterministic.zero_run(1),                                   # mass on 01
        Markov(1, [[0.5, 0.5], [0.5, 0.5]], [1.0, 0.0]),             # 00 and 01 at 1/2
        Deterministic.constant(1),                                   # mass on 11
    ]
    cls = FiniteClass(members)
    t1 = build_nml_table(cls, 1)
    t2 = build_nml_table(cls, 2)
    lam_1 = {"0": t1.prob((0,)), "1": t1.prob((1,))}
    lam_2 = {"00": t2.prob((0, 0)), "01": t2.prob((0, 1)),
             "10": t2.prob((1, 0)), "11": t2.prob((1, 1))}
    cond = {"0": lam_2["00"] / lam_1["0"], "1": lam_2["01"] / lam_1["0"]}
    third = members[2]
    mu_cond = third.conditional((0,))
    bits = sum(
        mu_cond[a] * math.log2(mu_cond[a] / cond[str(a)])
        for a in (0, 1) if mu_cond[a] > 0
    )
    return NegativeDivergenceReport(
        level1=lam_1,
        level2=lam_2,
        conditional_after_0=cond,
        conditional_sum=cond["0"] + cond["1"],
        divergence_bits=float(bits),
    )
