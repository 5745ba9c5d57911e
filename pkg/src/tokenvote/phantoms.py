"""Moving-phantom mechanisms: Independent Markets and Majoritarian Phantoms.

Both insert n+1 artificial votes, all driven by one scalar t, and take
per-project medians; t is tuned by binary search until the medians sum
to exactly the budget.  The objective is continuous and non-decreasing
in t (0 at t=0, at least 1 at t=1), so the search always brackets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as k
from .core import Allocation, IndexOutOfRange, NoConvergence, Profile

FAMILIES = {
    "independent_markets": k.INDEPENDENT_MARKETS,
    "majoritarian": k.MAJORITARIAN,
    "majoritarian_phantoms": k.MAJORITARIAN,
}


def phantom_value(family: str, n: int, index: int, t: float) -> float:
    """Value of phantom ``index`` at scale ``t`` for an n-voter election.

    Independent Markets: clamp(t * (n - index)) to [0, 1].
    Majoritarian: clamp(t * (n + 1) - index) to [0, 1] (the three-piece
    ramp: 0 until index/(n+1), linear up, then 1).
    """
    if not 0 <= index <= n:
        raise IndexOutOfRange(f"phantom index {index} outside 0..{n}")
    if not 0.0 <= t <= 1.0:
        raise IndexOutOfRange(f"phantom scale t={t} outside [0, 1]")
    fam = _family_code(family)
    if fam == k.INDEPENDENT_MARKETS:
        raw = t * (n - index)
    else:
        raw = t * (n + 1) - index
    return min(1.0, max(0.0, raw))


def _family_code(family: str) -> int:
    try:
        return FAMILIES[family]
    except KeyError:
        raise IndexOutOfRange(f"unknown phantom family {family!r}") from None


@dataclass(frozen=True)
class PhantomSystem:
    """A phantom family bound to a voter count.

    ``evaluator(index, t)`` is non-decreasing and continuous in t and
    non-increasing in the phantom index.
    """

    family: str
    n: int
    evaluator: Callable[[int, float], float]

    @classmethod
    def create(cls, family: str, n: int) -> "PhantomSystem":
        _family_code(family)
        return cls(family, n, lambda index, t: phantom_value(family, n, index, t))

    def values(self, t: float) -> np.ndarray:
        return np.array([self.evaluator(index, t) for index in range(self.n + 1)])


@dataclass(frozen=True)
class PhantomSolution:
    t_star: float
    allocation: Allocation
    iterations: int


def solve_phantoms(profile: Profile, family: str,
                   tol: float = k.PHANTOM_TOL,
                   max_iter: int = k.PHANTOM_MAX_ITER) -> PhantomSolution:
    """Find the phantom scale whose per-project medians exhaust the budget."""
    fam = _family_code(family)
    alloc, t_star, iters, converged = k.phantom_solve(profile.votes, fam, tol, max_iter)
    if not converged:
        raise NoConvergence(
            f"phantom normalization missed tolerance {tol} after {iters} iterations")
    return PhantomSolution(t_star, Allocation(alloc), iters)


def independent_markets_rule(profile: Profile) -> Allocation:
    return solve_phantoms(profile, "independent_markets").allocation


def majoritarian_phantoms_rule(profile: Profile) -> Allocation:
    return solve_phantoms(profile, "majoritarian").allocation
