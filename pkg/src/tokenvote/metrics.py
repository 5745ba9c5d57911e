"""Outcome-quality and fairness measurements.

The welfare figures are l1 distances, so LOWER is better; reports label
them welfare-cost to prevent sign errors downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Allocation, DegenerateProfile, Profile, ShapeMismatch, l1_distance


@dataclass(frozen=True)
class WelfareReport:
    """Mean and max per-voter l1 distance to the outcome (lower is better)."""

    utilitarian: float
    egalitarian: float


def _distances(profile: Profile, outcome: Allocation) -> np.ndarray:
    if outcome.shares.shape[0] != profile.m:
        raise ShapeMismatch("outcome length differs from project count")
    return np.abs(profile.votes - outcome.shares[None, :]).sum(axis=1)


def utilitarian_welfare(profile: Profile, outcome: Allocation) -> float:
    """Mean voter l1 distance to the outcome (welfare-cost, lower is better)."""
    return float(_distances(profile, outcome).mean())


def egalitarian_welfare(profile: Profile, outcome: Allocation) -> float:
    """Max voter l1 distance to the outcome (welfare-cost, lower is better)."""
    return float(_distances(profile, outcome).max())


def welfare_report(profile: Profile, outcome: Allocation) -> WelfareReport:
    d = _distances(profile, outcome)
    return WelfareReport(utilitarian=float(d.mean()), egalitarian=float(d.max()))


def gini_index(outcome: Allocation) -> float:
    """Mean absolute share difference over twice the mean share.

    Computed in O(m log m) from sorted prefix weights; equals the
    O(m^2) double-sum definition to machine precision.
    """
    a = np.sort(outcome.shares)
    m = a.shape[0]
    total = float(a.sum())
    if total <= 0.0:
        raise DegenerateProfile("gini undefined for an all-zero allocation")
    ranks = np.arange(1, m + 1, dtype=np.float64)
    weighted = float(((2.0 * ranks - m - 1.0) * a).sum())
    return weighted / (m * total)


def proportionality_check(profile: Profile, outcome: Allocation, k: int):
    """Check the coalition guarantee for single-minded voter blocks.

    If at least ceil(n/k) voters put their entire ballot on one project,
    that project must get at least 1/k of the budget.  Returns
    ``(ok, witness)`` where the witness names the violating coalition
    and project.
    """
    if k < 1:
        raise ShapeMismatch("k must be a positive integer")
    if outcome.shares.shape[0] != profile.m:
        raise ShapeMismatch("outcome length differs from project count")
    threshold = math.ceil(profile.n / k)
    single_minded = profile.votes >= 1.0 - 1e-12
    for p in range(profile.m):
        backers = np.flatnonzero(single_minded[:, p])
        if backers.shape[0] >= threshold and outcome.shares[p] < 1.0 / k - 1e-9:
            return False, (tuple(int(i) for i in backers), p)
    return True, None


def ground_truth_alignment(outcome: Allocation, truth) -> float:
    """l1 distance between the outcome and the designated benchmark vector."""
    return l1_distance(outcome, truth)
