"""Greedy likelihood-ratio covers and the predictor assembled from them.

At each horizon n, every class member has a set of sequences where its mass
dominates the reference mass up to a factor 1/n; the greedy pass picks the
member adding the most uncovered reference mass until no positive gain is
left.  The per-horizon weighted sums of the chosen members are zero-padded
and combined with a uniform i.i.d. regularizer (or an argmax-based
replacement built from the class itself).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    LOG_ZERO,
    QUADRATIC,
    ExplicitHorizonMeasure,
    Mixture,
    ProcessMeasure,
    UniformIID,
    check_budget,
    index_to_seq,
    log2_safe,
)
from .nml import ParametricClass


def dominant_set(mu: ProcessMeasure, rho: ProcessMeasure, n: int) -> np.ndarray:
    """Boolean mask over X^n of sequences with mu(x) >= rho(x)/n, compared in
    log domain with ties included."""
    check_budget(mu.alphabet_size, n)
    lm = log2_safe(mu.prob_table(n))
    lr = log2_safe(rho.prob_table(n))
    return lm >= lr - math.log2(n)


@dataclass(frozen=True)
class CoverState:
    """Greedy cover at one horizon: chosen members, their dominance sets,
    nested cumulative sets and strictly positive, non-increasing gains."""

    n: int
    member_ids: tuple[int, ...]
    gains: tuple[float, ...]
    member_sets: tuple[np.ndarray, ...]       # dominance set of each chosen member
    cumulative: tuple[np.ndarray, ...]        # nested unions
    member_tables: tuple[np.ndarray, ...]     # chosen members restricted to X^n
    reference_table: np.ndarray

    @property
    def count(self) -> int:
        return len(self.member_ids)

    def rows(self, scenario: str = ""):
        for k, (mid, gain, cum) in enumerate(
                zip(self.member_ids, self.gains, self.cumulative), start=1):
            yield (scenario, k, mid, gain, int(cum.sum()))


def greedy_cover(members: list[ProcessMeasure], reference: ProcessMeasure,
                 n: int) -> CoverState:
    if not members:
        raise ValueError("need at least one class member")
    check_budget(reference.alphabet_size, n)
    ref = reference.prob_table(n)
    log_ref = log2_safe(ref)
    shift = math.log2(n)
    tables = [m.prob_table(n) for m in members]
    masks = [log2_safe(t) >= log_ref - shift for t in tables]
    covered = np.zeros(ref.size, dtype=bool)
    ids: list[int] = []
    gains: list[float] = []
    chosen_sets = []
    cumulative = []
    chosen_tables = []
    while True:
        step_gains = np.array([ref[mask & ~covered].sum() for mask in masks])
        best = int(np.argmax(step_gains))  # ties break at the lowest index
        if step_gains[best] <= 0.0:
            break
        ids.append(best)
        gains.append(float(step_gains[best]))
        covered = covered | masks[best]
        chosen_sets.append(masks[best].copy())
        cumulative.append(covered.copy())
        chosen_tables.append(tables[best])
    return CoverState(
        n=n,
        member_ids=tuple(ids),
        gains=tuple(gains),
        member_sets=tuple(chosen_sets),
        cumulative=tuple(cumulative),
        member_tables=tuple(chosen_tables),
        reference_table=ref,
    )


def cover_distribution(cover: CoverState) -> np.ndarray:
    """Quadratically weighted sum of the chosen members over X^n; a
    sub-probability by construction (never renormalized, since the
    per-set lower bound needs the raw weights)."""
    out = np.zeros_like(cover.reference_table)
    for k, table in enumerate(cover.member_tables, start=1):
        out += QUADRATIC.weight(k) * table
    return out


def check_extension_bound(cover: CoverState) -> float:
    """Worst slack of the bound dist(x) >= w_k * ref(x)/n over all k and all
    x in the k-th cumulative set (nonnegative means the bound holds)."""
    dist = cover_distribution(cover)
    worst = math.inf
    for k, cum in enumerate(cover.cumulative, start=1):
        lhs = dist[cum]
        rhs = QUADRATIC.weight(k) * cover.reference_table[cum] / cover.n
        if lhs.size:
            worst = min(worst, float(np.min(lhs - rhs)))
    return 0.0 if math.isinf(worst) else worst


def assemble_predictor(members: list[ProcessMeasure], reference: ProcessMeasure,
                       max_horizon: int,
                       regularizer: ProcessMeasure | None = None
                       ) -> tuple[Mixture, list[CoverState]]:
    """Half regularizer, half sub-exponentially weighted zero-padded
    per-horizon cover distributions."""
    size = reference.alphabet_size
    if regularizer is None:
        regularizer = UniformIID(size)
    comps: list[ProcessMeasure] = [regularizer]
    weights = [0.5]
    covers = []
    for n in range(1, max_horizon + 1):
        cover = greedy_cover(members, reference, n)
        covers.append(cover)
        comps.append(ExplicitHorizonMeasure(cover_distribution(cover), size, pad_symbol=0))
        weights.append(0.5 * QUADRATIC.weight(n))
    return Mixture(comps, np.array(weights)), covers


def argmax_regularizer(cls: ParametricClass, max_horizon: int) -> Mixture:
    """Replacement regularizer built from the class itself: at each horizon,
    average the argmax members over all sequences the class supports, then
    zero-pad and mix."""
    size = cls.alphabet_size
    comps: list[ProcessMeasure] = []
    weights = []
    for k in range(1, max_horizon + 1):
        check_budget(size, k)
        sup = cls.sup_log_table(k)
        supported = np.flatnonzero(sup > LOG_ZERO)
        if supported.size == 0:
            raise ValueError("class supports no sequence at this horizon")
        table = np.zeros(size ** k)
        for idx in supported:
            seq = index_to_seq(int(idx), size, k)
            table += cls.argmax_measure(seq).prob_table(k)
        table /= supported.size
        comps.append(ExplicitHorizonMeasure(table, size, pad_symbol=0))
        weights.append(QUADRATIC.weight(k))
    return Mixture(comps, np.array(weights))
