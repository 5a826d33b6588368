"""Channel capacity of finite sets of distributions over X^n.

``blahut_arimoto`` is the alternating-maximization solver with a certified
upper/lower bracket; ``minimax_oracle`` solves the equivalent minimax problem
directly as a convex program and shares no code with the iteration.  The
capacity-based predictor pads per-horizon barycenters with zeros and mixes
them with quadratic weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    CONSISTENCY_TOL,
    QUADRATIC,
    Bernoulli,
    BudgetError,
    Deterministic,
    ExplicitHorizonMeasure,
    Mixture,
    ProcessMeasure,
    check_budget,
)
from .nml import FiniteClass, ParametricClass

MINIMAX_MAX_ATOMS = 16
MINIMAX_MAX_MEMBERS = 6


def _validate_members(members) -> np.ndarray:
    members = np.atleast_2d(np.asarray(members, dtype=float))
    if members.size == 0:
        raise ValueError("member list must be nonempty")
    if np.any(members < -1e-15):
        raise ValueError("member distributions must be nonnegative")
    if np.any(np.abs(members.sum(axis=1) - 1.0) > CONSISTENCY_TOL):
        raise ValueError("every member must sum to 1")
    return np.clip(members, 0.0, None)


def kl_bits(p: np.ndarray, q: np.ndarray) -> float:
    sup = p > 0
    if np.any(sup & (q <= 0)):
        return math.inf
    return float(np.sum(p[sup] * (np.log2(p[sup]) - np.log2(q[sup]))))


@dataclass(frozen=True)
class CapacityResult:
    capacity: float            # bracket midpoint, bits
    prior: np.ndarray          # optimal input distribution over the members
    barycenter: np.ndarray     # prior-weighted mixture over the atoms
    iterations: int
    gap: float                 # certified upper - lower bracket at termination
    converged: bool


def blahut_arimoto(members, tol: float = 1e-9, max_iter: int = 100000) -> CapacityResult:
    """Alternating maximization of the mean divergence to the barycenter.

    Terminates when max_i d(mu_i, rho_P) - sum_i P_i d(mu_i, rho_P) < tol,
    which brackets the capacity from both sides.
    """
    members = _validate_members(members)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    m = members.shape[0]
    prior = np.full(m, 1.0 / m)
    sup = members > 0
    log_members = np.where(sup, np.log2(members, where=sup), 0.0)
    gap = math.inf
    upper = lower = 0.0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        bary = prior @ members
        with np.errstate(divide="ignore"):
            log_bary = np.log2(bary)
        div = np.sum(np.where(sup, members * (log_members - log_bary), 0.0), axis=1)
        upper = float(div.max())
        lower = float(prior @ div)
        gap = upper - lower
        if gap < tol:
            break
        prior = prior * np.exp2(div - upper)
        prior /= prior.sum()
    return CapacityResult(
        capacity=0.5 * (upper + lower),
        prior=prior,
        barycenter=prior @ members,
        iterations=iterations,
        gap=gap,
        converged=gap < tol,
    )


@dataclass(frozen=True)
class MinimaxResult:
    value: float               # min over rho of max member divergence, bits
    witness: np.ndarray        # the minimizing distribution
    divergences: np.ndarray    # per-member divergence at the witness


def minimax_oracle(members, tol: float = 1e-8) -> MinimaxResult:
    """Direct minimization of the worst-case divergence over the simplex,
    solved as a convex program.  Intended for tiny instances only."""
    import cvxpy as cp

    members = _validate_members(members)
    m, atoms = members.shape
    if atoms > MINIMAX_MAX_ATOMS or m > MINIMAX_MAX_MEMBERS:
        raise BudgetError(
            f"minimax oracle limited to {MINIMAX_MAX_MEMBERS} members and "
            f"{MINIMAX_MAX_ATOMS} atoms"
        )
    support = members.sum(axis=0) > 0
    sub = members[:, support]
    rho = cp.Variable(int(support.sum()), nonneg=True)
    t = cp.Variable()
    ln2 = math.log(2.0)
    constraints = [cp.sum(rho) == 1]
    for i in range(m):
        p = sub[i]
        self_term = float(np.sum(p[p > 0] * np.log2(p[p > 0])))
        constraints.append(self_term - (p @ cp.log(rho)) / ln2 <= t)
    problem = cp.Problem(cp.Minimize(t), constraints)
    problem.solve()
    if rho.value is None:
        raise RuntimeError(f"minimax solve failed with status {problem.status}")
    witness = np.zeros(atoms)
    witness[support] = np.clip(rho.value, 0.0, None)
    witness /= witness.sum()
    divergences = np.array([kl_bits(members[i], witness) for i in range(m)])
    return MinimaxResult(value=float(divergences.max()), witness=witness,
                         divergences=divergences)


def truncate_class(source, n: int, grid=None) -> np.ndarray:
    """Materialize class members as explicit distributions over X^n."""
    if grid is not None:
        members = [Bernoulli(p) for p in grid]
    elif isinstance(source, FiniteClass):
        members = source.members
    elif isinstance(source, ParametricClass):
        raise ValueError("parametric classes need an explicit grid specification")
    else:
        members = list(source)
    if not members:
        raise ValueError("no members to truncate")
    check_budget(members[0].alphabet_size, n)
    return np.stack([m.prob_table(n) for m in members])


def build_rho_capacity(members: list[ProcessMeasure], max_horizon: int,
                       tol: float = 1e-6) -> tuple[Mixture, list[CapacityResult]]:
    """Mixture of zero-padded per-horizon capacity barycenters with quadratic
    weights; the analytic weight tail goes to the all-zeros measure."""
    if not members:
        raise ValueError("need at least one member")
    size = members[0].alphabet_size
    comps: list[ProcessMeasure] = []
    weights = []
    results = []
    for n in range(1, max_horizon + 1):
        res = blahut_arimoto(truncate_class(members, n), tol=tol)
        results.append(res)
        comps.append(ExplicitHorizonMeasure(res.barycenter, size, pad_symbol=0))
        weights.append(QUADRATIC.weight(n))
    comps.append(Deterministic.constant(0, size))
    weights.append(QUADRATIC.tail_mass(max_horizon + 1))
    return Mixture(comps, np.array(weights)), results


def capacity_growth_series(members: list[ProcessMeasure], horizons,
                           tol: float = 1e-6) -> list[tuple[int, CapacityResult]]:
    return [(n, blahut_arimoto(truncate_class(members, n), tol=tol))
            for n in horizons]
