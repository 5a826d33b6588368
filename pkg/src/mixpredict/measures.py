"""Finite-alphabet process measures with exact log-domain prefix probabilities.

All probabilities live in log base 2; probability zero is encoded as -inf.
Measures are immutable after construction and expose the same small surface:
``log_prob`` over finite prefixes, per-step ``conditional`` distributions,
vectorized ``prob_table`` restrictions to X^n, and seeded sampling.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, polygamma

LOG_ZERO = float("-inf")
LN2 = math.log(2.0)
ENUM_BUDGET = 1 << 20
QUAD_COEFF = 6.0 / math.pi ** 2
CONSISTENCY_TOL = 1e-9


class BudgetError(RuntimeError):
    """An exhaustive enumeration would exceed the atom budget."""


class ConditioningError(ValueError):
    """Conditioning on a prefix of probability zero."""


def check_budget(alphabet_size: int, n: int) -> None:
    if alphabet_size ** n > ENUM_BUDGET:
        raise BudgetError(
            f"enumerating {alphabet_size}^{n} sequences exceeds the "
            f"budget of {ENUM_BUDGET} atoms"
        )


def seq_to_index(seq: Sequence[int], base: int) -> int:
    idx = 0
    for s in seq:
        idx = idx * base + s
    return idx


def index_to_seq(idx: int, base: int, n: int) -> tuple[int, ...]:
    out = [0] * n
    for t in range(n - 1, -1, -1):
        idx, out[t] = divmod(idx, base)
    return tuple(out)


def log2_safe(values: np.ndarray) -> np.ndarray:
    """Elementwise log2 mapping 0 to -inf without warnings."""
    with np.errstate(divide="ignore"):
        return np.log2(values)


def logsumexp2(log_values, weights=None) -> float:
    """log2 of a (weighted) sum of 2**log_values, stable for large spreads."""
    lv = np.asarray(log_values, dtype=float)
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        lv = lv + log2_safe(w)
    m = np.max(lv, initial=LOG_ZERO)
    if m == LOG_ZERO:
        return LOG_ZERO
    return float(m + np.log2(np.sum(np.exp2(lv - m))))


@dataclass(frozen=True)
class WeightScheme:
    """Positive weights w_1, w_2, ... summing to one, with analytic tails.

    ``quadratic`` uses w_k = (6/pi^2) k^-2, ``geometric`` uses w_k = 2^-k;
    both have closed-form tail sums so countable mixtures can be evaluated
    without truncation heuristics.
    """

    kind: str
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("quadratic", "geometric", "explicit"):
            raise ValueError(f"unknown weight scheme kind {self.kind!r}")
        if self.kind == "explicit":
            if not self.values or any(v <= 0 for v in self.values):
                raise ValueError("explicit weights must be positive")
            if abs(sum(self.values) - 1.0) > CONSISTENCY_TOL:
                raise ValueError("explicit weights must sum to 1")

    def weight(self, k: int) -> float:
        if k < 1:
            raise ValueError("weight index starts at 1")
        if self.kind == "quadratic":
            return QUAD_COEFF / (k * k)
        if self.kind == "geometric":
            return 2.0 ** (-k)
        return self.values[k - 1] if k <= len(self.values) else 0.0

    def log2_weight(self, k: int) -> float:
        if self.kind == "geometric":
            return -float(k)
        w = self.weight(k)
        return math.log2(w) if w > 0 else LOG_ZERO

    def tail_mass(self, k: int) -> float:
        """Sum of w_j over j >= k (analytic for quadratic/geometric)."""
        if k < 1:
            raise ValueError("tail index starts at 1")
        if self.kind == "quadratic":
            return QUAD_COEFF * float(polygamma(1, k))
        if self.kind == "geometric":
            return 2.0 ** (1 - k)
        return float(sum(self.values[k - 1:]))

    def log2_tail_mass(self, k: int) -> float:
        # geometric tails underflow past ~1e3 in linear domain; keep them exact
        if self.kind == "geometric":
            return float(1 - k)
        if self.kind == "quadratic":
            return math.log2(QUAD_COEFF) + math.log2(float(polygamma(1, k)))
        t = self.tail_mass(k)
        return math.log2(t) if t > 0 else LOG_ZERO

    def weights_upto(self, count: int) -> np.ndarray:
        return np.array([self.weight(k) for k in range(1, count + 1)])


QUADRATIC = WeightScheme("quadratic")
GEOMETRIC = WeightScheme("geometric")


def explicit_weights(values) -> WeightScheme:
    return WeightScheme("explicit", tuple(float(v) for v in values))


class ProcessMeasure:
    """A stochastic process on infinite sequences, exposed through its
    finite-prefix probabilities."""

    alphabet_size: int = 2

    def log_prob(self, seq: Sequence[int]) -> float:
        raise NotImplementedError

    def prob(self, seq: Sequence[int]) -> float:
        lp = self.log_prob(seq)
        return 0.0 if lp == LOG_ZERO else 2.0 ** lp

    def conditional(self, prefix: Sequence[int]) -> np.ndarray:
        """Next-symbol distribution given a positive-probability prefix."""
        prefix = tuple(prefix)
        base = self.log_prob(prefix)
        if base == LOG_ZERO:
            raise ConditioningError(f"prefix {prefix} has probability zero")
        out = np.zeros(self.alphabet_size)
        for a in range(self.alphabet_size):
            lp = self.log_prob(prefix + (a,))
            if lp != LOG_ZERO:
                out[a] = 2.0 ** (lp - base)
        return out

    def prob_table(self, n: int) -> np.ndarray:
        """Probabilities of all sequences in X^n, lexicographic order."""
        check_budget(self.alphabet_size, n)
        out = np.empty(self.alphabet_size ** n)
        for i, seq in enumerate(itertools.product(range(self.alphabet_size), repeat=n)):
            out[i] = self.prob(seq)
        return out

    def sample(self, n: int, seed: int) -> tuple[int, ...]:
        if n < 1:
            raise ValueError("horizon must be at least 1")
        return self.sample_with(n, np.random.default_rng(seed))

    def sample_with(self, n: int, rng: np.random.Generator) -> tuple[int, ...]:
        prefix: list[int] = []
        for _ in range(n):
            dist = self.conditional(tuple(prefix))
            dist = np.clip(dist, 0.0, None)
            dist /= dist.sum()
            prefix.append(int(rng.choice(self.alphabet_size, p=dist)))
        return tuple(prefix)


class Bernoulli(ProcessMeasure):
    """i.i.d. binary source; the parameter is the probability of symbol 0."""

    def __init__(self, p: float):
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"Bernoulli parameter must lie in [0,1], got {p}")
        self.p = p
        self.alphabet_size = 2
        self._log_p0 = math.log2(p) if p > 0 else LOG_ZERO
        self._log_p1 = math.log2(1 - p) if p < 1 else LOG_ZERO

    def log_prob(self, seq):
        n = len(seq)
        zeros = n - int(np.count_nonzero(np.asarray(seq, dtype=np.int64))) if n else 0
        ones = n - zeros
        total = 0.0
        if zeros:
            if self._log_p0 == LOG_ZERO:
                return LOG_ZERO
            total += zeros * self._log_p0
        if ones:
            if self._log_p1 == LOG_ZERO:
                return LOG_ZERO
            total += ones * self._log_p1
        return total

    def conditional(self, prefix):
        if self.log_prob(prefix) == LOG_ZERO:
            raise ConditioningError("prefix has probability zero")
        return np.array([self.p, 1.0 - self.p])

    def prob_table(self, n):
        check_budget(2, n)
        idx = np.arange(1 << n, dtype=np.uint64)
        ones = np.bitwise_count(idx).astype(float)
        zeros = n - ones
        return self.p ** zeros * (1.0 - self.p) ** ones


class Markov(ProcessMeasure):
    """Order-k Markov chain with an explicit conditional table and an initial
    distribution over the first k symbols.  Order 0 is an i.i.d. source."""

    def __init__(self, order: int, table, initial, alphabet_size: int | None = None):
        table = np.atleast_2d(np.asarray(table, dtype=float))
        size = table.shape[1] if alphabet_size is None else alphabet_size
        if size < 2:
            raise ValueError("alphabet size must be at least 2")
        contexts = size ** order
        if table.shape != (contexts, size):
            raise ValueError(f"conditional table must have shape ({contexts}, {size})")
        if np.any(table < -1e-15):
            raise ValueError("conditional table entries must be nonnegative")
        rowsums = table.sum(axis=1)
        if np.any(np.abs(rowsums - 1.0) > CONSISTENCY_TOL):
            raise ValueError("every conditional row must sum to 1")
        initial = np.asarray(initial, dtype=float).ravel()
        if initial.shape != (contexts,):
            raise ValueError(f"initial distribution must have {contexts} entries")
        if np.any(initial < -1e-15) or abs(initial.sum() - 1.0) > CONSISTENCY_TOL:
            raise ValueError("initial distribution must be a probability vector")
        self.order = order
        self.table = np.clip(table, 0.0, None)
        self.initial = np.clip(initial, 0.0, None)
        self.alphabet_size = size
        self._ctx_mod = contexts
        self._marginals: dict[int, np.ndarray] = {order: self.initial}

    @classmethod
    def stationary(cls, order: int, table, alphabet_size: int | None = None) -> "Markov":
        """Construct the chain with its stationary initial distribution."""
        table = np.atleast_2d(np.asarray(table, dtype=float))
        size = table.shape[1] if alphabet_size is None else alphabet_size
        contexts = size ** order
        trans = np.zeros((contexts, contexts))
        for c in range(contexts):
            for a in range(size):
                trans[c, (c * size + a) % contexts] += table[c, a]
        lhs = np.vstack([trans.T - np.eye(contexts), np.ones(contexts)])
        rhs = np.zeros(contexts + 1)
        rhs[-1] = 1.0
        pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        if np.max(np.abs(pi @ trans - pi)) > 1e-8:
            raise ValueError("could not find a stationary initial distribution")
        return cls(order, table, pi, alphabet_size=size)

    def has_stationary_initial(self, tol: float = 1e-8) -> bool:
        size, contexts = self.alphabet_size, self._ctx_mod
        nxt = np.zeros(contexts)
        for c in range(contexts):
            for a in range(size):
                nxt[(c * size + a) % contexts] += self.initial[c] * self.table[c, a]
        return bool(np.max(np.abs(nxt - self.initial)) <= tol)

    def _marginal(self, m: int) -> np.ndarray:
        # distribution of the first m symbols, m <= order
        if m not in self._marginals:
            self._marginals[m] = self.initial.reshape(self.alphabet_size ** m, -1).sum(axis=1)
        return self._marginals[m]

    def log_prob(self, seq):
        seq = tuple(seq)
        n, k, size = len(seq), self.order, self.alphabet_size
        if n == 0:
            return 0.0
        if n <= k:
            p = self._marginal(n)[seq_to_index(seq, size)]
            return math.log2(p) if p > 0 else LOG_ZERO
        p0 = self.initial[seq_to_index(seq[:k], size)] if k else 1.0
        if p0 <= 0:
            return LOG_ZERO
        total = math.log2(p0)
        ctx = seq_to_index(seq[:k], size)
        for t in range(k, n):
            p = self.table[ctx, seq[t]]
            if p <= 0:
                return LOG_ZERO
            total += math.log2(p)
            ctx = (ctx * size + seq[t]) % self._ctx_mod
        return total

    def conditional(self, prefix):
        prefix = tuple(prefix)
        t, k, size = len(prefix), self.order, self.alphabet_size
        if self.log_prob(prefix) == LOG_ZERO:
            raise ConditioningError("prefix has probability zero")
        if t >= k:
            ctx = seq_to_index(prefix[-k:] if k else (), size) % self._ctx_mod
            return self.table[ctx].copy()
        parent = self._marginal(t)[seq_to_index(prefix, size)]
        child = self._marginal(t + 1)
        base = seq_to_index(prefix, size) * size
        return child[base:base + size] / parent

    def prob_table(self, n):
        check_budget(self.alphabet_size, n)
        size, k = self.alphabet_size, self.order
        if n <= k:
            return self._marginal(n).copy()
        cur = self.initial.copy()
        for m in range(k, n):
            ctx = np.arange(size ** m, dtype=np.int64) % self._ctx_mod
            cur = (cur[:, None] * self.table[ctx]).ravel()
        return cur


class Deterministic(ProcessMeasure):
    """A measure concentrated on a single infinite sequence."""

    def __init__(self, generator: Callable[[int], int], alphabet_size: int = 2,
                 tag: str | None = None):
        self._gen = generator
        self._cache: list[int] = []
        self.alphabet_size = alphabet_size
        self.tag = tag

    @classmethod
    def constant(cls, symbol: int, alphabet_size: int = 2) -> "Deterministic":
        return cls(lambda t: symbol, alphabet_size, tag=f"constant:{symbol}")

    @classmethod
    def zero_run(cls, k: int, alphabet_size: int = 2) -> "Deterministic":
        """k zeros followed by all ones."""
        return cls(lambda t: 0 if t <= k else 1, alphabet_size, tag=f"zero-run:{k}")

    def symbol_at(self, t: int) -> int:
        # t is 1-based
        while len(self._cache) < t:
            self._cache.append(int(self._gen(len(self._cache) + 1)))
        return self._cache[t - 1]

    def path(self, n: int) -> tuple[int, ...]:
        return tuple(self.symbol_at(t) for t in range(1, n + 1))

    def log_prob(self, seq):
        for t, s in enumerate(seq, start=1):
            if s != self.symbol_at(t):
                return LOG_ZERO
        return 0.0

    def conditional(self, prefix):
        if self.log_prob(prefix) == LOG_ZERO:
            raise ConditioningError("prefix has probability zero")
        out = np.zeros(self.alphabet_size)
        out[self.symbol_at(len(prefix) + 1)] = 1.0
        return out

    def prob_table(self, n):
        check_budget(self.alphabet_size, n)
        out = np.zeros(self.alphabet_size ** n)
        out[seq_to_index(self.path(n), self.alphabet_size)] = 1.0
        return out

    def sample_with(self, n, rng):
        return self.path(n)


class UniformIID(ProcessMeasure):
    """Equal conditional probability for every symbol at every step."""

    def __init__(self, alphabet_size: int = 2):
        if alphabet_size < 2:
            raise ValueError("alphabet size must be at least 2")
        self.alphabet_size = alphabet_size
        self._log_step = -math.log2(alphabet_size)

    def log_prob(self, seq):
        return len(seq) * self._log_step

    def conditional(self, prefix):
        return np.full(self.alphabet_size, 1.0 / self.alphabet_size)

    def prob_table(self, n):
        check_budget(self.alphabet_size, n)
        return np.full(self.alphabet_size ** n, float(self.alphabet_size) ** -n)


class IndependentBinary(ProcessMeasure):
    """Independent binary symbols with a position-dependent zero probability."""

    def __init__(self, zero_prob: Callable[[int], float]):
        self._zero_prob = zero_prob  # 1-based position
        self.alphabet_size = 2

    def log_prob(self, seq):
        total = 0.0
        for t, s in enumerate(seq, start=1):
            q = self._zero_prob(t)
            p = q if s == 0 else 1.0 - q
            if p <= 0:
                return LOG_ZERO
            total += math.log2(p)
        return total

    def conditional(self, prefix):
        q = self._zero_prob(len(prefix) + 1)
        return np.array([q, 1.0 - q])


class LaplaceMeasure(ProcessMeasure):
    """Add-one sequential estimator: P(next=a | prefix) = (count_a + 1)/(n + |X|)."""

    def __init__(self, alphabet_size: int = 2):
        if alphabet_size < 2:
            raise ValueError("alphabet size must be at least 2")
        self.alphabet_size = alphabet_size

    def log_prob(self, seq):
        n, size = len(seq), self.alphabet_size
        if n == 0:
            return 0.0
        counts = np.bincount(np.asarray(seq, dtype=np.int64), minlength=size)
        ln = gammaln(counts + 1.0).sum() + gammaln(size) - gammaln(n + size)
        return float(ln / LN2)

    def conditional(self, prefix):
        n, size = len(prefix), self.alphabet_size
        counts = np.bincount(np.asarray(prefix, dtype=np.int64), minlength=size) if n else np.zeros(size)
        return (counts + 1.0) / (n + size)


class ExplicitHorizonMeasure(ProcessMeasure):
    """A distribution over X^h extended to a process by emitting a fixed
    padding symbol with probability one after step h.

    The table may be a sub-probability; consistency of prefix sums still
    holds, which is all downstream mixtures rely on.
    """

    def __init__(self, table, alphabet_size: int, pad_symbol: int = 0):
        table = np.asarray(table, dtype=float).ravel()
        horizon = round(math.log(table.size, alphabet_size))
        if alphabet_size ** horizon != table.size:
            raise ValueError("table size must be a power of the alphabet size")
        if np.any(table < -1e-15):
            raise ValueError("table entries must be nonnegative")
        if table.sum() > 1.0 + CONSISTENCY_TOL:
            raise ValueError("table mass exceeds 1")
        self.table = np.clip(table, 0.0, None)
        self.horizon = horizon
        self.alphabet_size = alphabet_size
        self.pad_symbol = pad_symbol
        self._levels: dict[int, np.ndarray] = {horizon: self.table}

    def level(self, m: int) -> np.ndarray:
        if m not in self._levels:
            self._levels[m] = self.table.reshape(self.alphabet_size ** m, -1).sum(axis=1)
        return self._levels[m]

    def log_prob(self, seq):
        seq = tuple(seq)
        n, h, size = len(seq), self.horizon, self.alphabet_size
        if n <= h:
            p = self.level(n)[seq_to_index(seq, size)]
        elif any(s != self.pad_symbol for s in seq[h:]):
            p = 0.0
        else:
            p = self.table[seq_to_index(seq[:h], size)]
        return math.log2(p) if p > 0 else LOG_ZERO

    def prob_table(self, n):
        check_budget(self.alphabet_size, n)
        size, h = self.alphabet_size, self.horizon
        if n <= h:
            return self.level(n).copy()
        out = np.zeros(size ** n)
        pad_idx = seq_to_index((self.pad_symbol,) * (n - h), size)
        out[np.arange(size ** h) * size ** (n - h) + pad_idx] = self.table
        return out


class Mixture(ProcessMeasure):
    """Finite weighted mixture of process measures.

    Weights must be positive and sum to at most 1; a strict sub-probability
    is allowed (the deficit is deliberate in several constructions) and
    preserves prefix-sum consistency.
    """

    def __init__(self, components: Sequence[ProcessMeasure], weights):
        components = list(components)
        if not components:
            raise ValueError("mixture needs at least one component")
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.shape != (len(components),):
            raise ValueError("one weight per component required")
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        if weights.sum() > 1.0 + CONSISTENCY_TOL:
            raise ValueError("weights must sum to at most 1")
        size = components[0].alphabet_size
        if any(c.alphabet_size != size for c in components):
            raise ValueError("all components must share one alphabet")
        self.components = components
        self.weights = weights
        self.alphabet_size = size
        self._log_weights = np.log2(weights)

    def log_prob(self, seq):
        seq = tuple(seq)
        logs = np.array([c.log_prob(seq) for c in self.components])
        return logsumexp2(logs + self._log_weights)

    def prob_table(self, n):
        check_budget(self.alphabet_size, n)
        out = np.zeros(self.alphabet_size ** n)
        for w, c in zip(self.weights, self.components):
            out += w * c.prob_table(n)
        return out


def mix(components: Sequence[ProcessMeasure], weights) -> Mixture:
    """Build a mixture predictor from components and a weight scheme or
    explicit weight sequence."""
    components = list(components)
    if not components:
        raise ValueError("mixture needs at least one component")
    if isinstance(weights, WeightScheme):
        weights = weights.weights_upto(len(components))
    return Mixture(components, weights)


class ZeroRunMixture(ProcessMeasure):
    """Countable mixture of the deterministic sequences "k zeros then all
    ones" for k >= 1, evaluated through closed-form weight tails."""

    def __init__(self, scheme: WeightScheme):
        if scheme.kind == "explicit":
            raise ValueError("zero-run mixtures need an analytic tail scheme")
        self.scheme = scheme
        self.alphabet_size = 2

    def log_prob(self, seq):
        seq = tuple(seq)
        n = len(seq)
        if n == 0:
            return 0.0
        j = 0
        while j < n and seq[j] == 0:
            j += 1
        if j == n:
            return self.scheme.log2_tail_mass(n)
        if j >= 1 and all(s == 1 for s in seq[j:]):
            return self.scheme.log2_weight(j)
        return LOG_ZERO

    def prob_table(self, n):
        check_budget(2, n)
        if n == 0:
            return np.ones(1)
        out = np.zeros(1 << n)
        out[0] = self.scheme.tail_mass(n)
        for j in range(1, n):
            out[(1 << (n - j)) - 1] = self.scheme.weight(j)
        return out


@dataclass(frozen=True)
class ConsistencyReport:
    horizon: int
    max_violation: float
    ok: bool


def check_consistency(measure: ProcessMeasure, horizon: int,
                      tol: float = CONSISTENCY_TOL) -> ConsistencyReport:
    """Exhaustively verify sum_a P(x.a) = P(x) for all prefixes up to the
    horizon; relative where the parent mass is positive."""
    check_budget(measure.alphabet_size, horizon)
    size = measure.alphabet_size
    worst = 0.0
    prev = measure.prob_table(0)
    for m in range(horizon):
        cur = measure.prob_table(m + 1)
        sums = cur.reshape(-1, size).sum(axis=1)
        denom = np.where(prev > 0, prev, 1.0)
        worst = max(worst, float(np.max(np.abs(sums - prev) / denom)))
        prev = cur
    return ConsistencyReport(horizon=horizon, max_violation=worst, ok=worst <= tol)
