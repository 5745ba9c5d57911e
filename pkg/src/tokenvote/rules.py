"""The non-phantom voting rules, as pure functions Profile -> Allocation.

Every rule is anonymous (voter order does not matter) and is safe to
call concurrently on shared profiles.  Median conventions: the median
of an empty multiset is 0 and even cardinalities average the two middle
order statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .core import Allocation, DegenerateProfile, Profile, RuleSpec

RULE_CODES = {
    "mean": k.MEAN,
    "quadratic": k.QUADRATIC,
    "normalized_median": k.NORMALIZED_MEDIAN,
    "quorum_median": k.QUORUM_MEDIAN,
    "capped_median": k.CAPPED_MEDIAN,
    "midpoint": k.MIDPOINT,
    "independent_markets": k.INDEPENDENT_MARKETS,
    "majoritarian_phantoms": k.MAJORITARIAN,
}


@dataclass(frozen=True)
class MedianSummary:
    """Per-project medians before normalization plus supporter counts."""

    raw_medians: np.ndarray
    supporter_counts: np.ndarray


def rule_code(spec: RuleSpec) -> tuple[int, np.ndarray]:
    """Kernel dispatch pair (rule id, parameter vector) for a rule spec."""
    params = np.array([spec.q1, float(spec.q2), spec.k1, spec.k2], dtype=np.float64)
    return RULE_CODES[spec.rule], params


def shares_for(votes: np.ndarray, code: int, params: np.ndarray) -> np.ndarray:
    """Evaluate a rule on a raw ballot matrix; raise on degenerate elections."""
    shares = k.rule_shares(votes, code, params)
    if np.isnan(shares).any():
        raise DegenerateProfile("no project survives the rule's filters")
    return shares


def apply_rule(profile: Profile, spec: RuleSpec) -> Allocation:
    """Run the rule named by ``spec`` on a validated profile."""
    code, params = rule_code(spec)
    return Allocation(shares_for(profile.votes, code, params))


def median_summary(profile: Profile, positive_only: bool) -> MedianSummary:
    """Column medians over all votes, or over strictly positive votes only."""
    meds, counts = k.column_medians(profile.votes, positive_only)
    return MedianSummary(meds, counts)


def mean_rule(profile: Profile) -> Allocation:
    """Shares proportional to the total tokens each project receives."""
    params = np.zeros(4)
    return Allocation(shares_for(profile.votes, k.MEAN, params))


def quadratic_rule(profile: Profile) -> Allocation:
    """Shares proportional to per-project sums of square-rooted votes."""
    params = np.zeros(4)
    return Allocation(shares_for(profile.votes, k.QUADRATIC, params))


def normalized_median_rule(profile: Profile) -> Allocation:
    """All-votes medians, normalized to exhaust the budget."""
    params = np.zeros(4)
    return Allocation(shares_for(profile.votes, k.NORMALIZED_MEDIAN, params))


def quorum_median_rule(profile: Profile, q1: float, q2: int) -> Allocation:
    """Positive-supporter medians with a two-part quorum filter.

    A project keeps its median only if that median is at least ``q1``
    (per-voter token fraction) and at least ``q2`` voters gave it a
    strictly positive amount; survivors are renormalized.
    """
    params = np.array([q1, float(q2), 0.0, 0.0])
    return Allocation(shares_for(profile.votes, k.QUORUM_MEDIAN, params))


def capped_median_rule(profile: Profile, k1: float, k2: float) -> Allocation:
    """Normalized all-votes medians with a share cap and elimination floor.

    Shares above ``k1`` are capped and the excess is redistributed
    proportionally in a single pass; projects left below ``k2`` are
    eliminated and their mass spread over the survivors.
    """
    if k2 >= k1:
        raise DegenerateProfile("elimination floor k2 must be below the cap k1")
    params = np.array([0.0, 0.0, k1, k2])
    return Allocation(shares_for(profile.votes, k.CAPPED_MEDIAN, params))


def midpoint_rule(profile: Profile) -> Allocation:
    """The ballot minimizing the total l1 distance to all ballots.

    Ties go to the lowest voter index.
    """
    params = np.zeros(4)
    return Allocation(shares_for(profile.votes, k.MIDPOINT, params))
