"""Manipulation-cost experiments: bribery, control, robustness, VEV.

Bribery and control report greedy upper bounds, not certified minima;
exact minimization for the median-family rules is combinatorial.  All
searches are deterministic given (profile, seed).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import _kernels as k
from .core import (Allocation, DegenerateProfile, IndexOutOfRange, Profile,
                   RuleSpec, TargetUnreachable, l1_distance)
from .rules import rule_code, shares_for
from .votegen import derive_stream, dirichlet_sample

GOAL_TOL = 1e-9


@dataclass(frozen=True)
class AttackResult:
    """Outcome of one bribery/control run (costs are upper bounds)."""

    target_project: int
    desired_increase: float
    cost: float
    achieved: bool
    modified_profile_digest: str
    baseline_share: float
    final_share: float
    method: str


@dataclass(frozen=True)
class VEVResult:
    """Largest outcome shift a single concentrating voter can cause."""

    value: float
    voter: int
    project: int
    concentration: float
    baseline: Allocation
    shifted: Allocation


@dataclass(frozen=True)
class RobustnessSummary:
    mean: float
    max: float
    samples: tuple[float, ...]
    failures: int


def _digest(votes: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(str(votes.shape).encode())
    h.update(np.ascontiguousarray(votes).tobytes())
    return h.hexdigest()[:16]


def _check_target(profile: Profile, target: int) -> None:
    if not 0 <= target < profile.m:
        raise IndexOutOfRange(f"project {target} outside 0..{profile.m - 1}")


def _target_share(votes, i, q, delta, target, code, params) -> float:
    buf = votes.copy()
    buf[i, q] -= delta
    buf[i, target] += delta
    shares = k.rule_shares(buf, code, params)
    val = shares[target]
    return float(val) if np.isfinite(val) else float("nan")


def bribery_cost(profile: Profile, spec: RuleSpec, target: int, increase: float,
                 step: float = 0.25, step_min: float = 1e-4) -> AttackResult:
    """Greedy token reallocation raising the target project's share.

    Repeatedly moves mass toward the target from the (voter, project)
    donor pair with the best effect on the rule output, re-evaluating
    the rule each round; the final move is bisected so the goal is hit
    without overshoot.  Cost is the l1 ballot change: twice the mass
    moved.  The step policy never looks at the goal, so cost curves are
    non-decreasing in the requested increase.
    """
    _check_target(profile, target)
    if increase < 0:
        raise TargetUnreachable("increase must be non-negative")
    code, params = rule_code(spec)
    votes = np.array(profile.votes)
    baseline = float(shares_for(votes, code, params)[target])
    goal = baseline + increase
    if increase == 0:
        return AttackResult(target, increase, 0.0, True, _digest(votes),
                            baseline, baseline, "greedy-upper-bound")
    all_in = np.zeros_like(votes)
    all_in[:, target] = 1.0
    best_possible = float(shares_for(all_in, code, params)[target])
    if best_possible < goal - GOAL_TOL:
        raise TargetUnreachable(
            f"share {goal:.6f} exceeds the rule's maximum {best_possible:.6f} for this profile")

    if step < step_min:
        step = step_min
    moved = 0.0
    cur = baseline
    max_rounds = 100000
    for _ in range(max_rounds):
        if cur >= goal - GOAL_TOL:
            break
        gains = k.move_mass_scan(votes, target, step, code, params)
        if np.all(np.isnan(gains)):
            raise TargetUnreachable("no admissible token move remains")
        flat = np.nan_to_num(gains, nan=-np.inf).ravel()
        best = int(np.argmax(flat))
        i, q = divmod(best, profile.m)
        delta_full = min(step, float(votes[i, q]))
        best_share = float(gains[i, q])
        if best_share >= goal - GOAL_TOL:
            lo, hi = 0.0, delta_full
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                val = _target_share(votes, i, q, mid, target, code, params)
                if np.isnan(val) or val < goal - GOAL_TOL:
                    lo = mid
                else:
                    hi = mid
            votes[i, q] -= hi
            votes[i, target] += hi
            moved += hi
            cur = _target_share(votes, i, q, 0.0, target, code, params)
            if np.isnan(cur):
                cur = -np.inf
            continue
        if best_share > cur + 1e-15:
            votes[i, q] -= delta_full
            votes[i, target] += delta_full
            moved += delta_full
            cur = best_share
            continue
        # Plateau: widen the probe; once maximal, force the move with the
        # most donor mass so the median eventually crosses.
        if step < 1.0:
            step = min(1.0, 2.0 * step)
            continue
        masses = np.array(votes)
        masses[:, target] = -1.0
        masses[np.isnan(gains)] = -1.0
        i, q = divmod(int(np.argmax(masses.ravel())), profile.m)
        if votes[i, q] <= 0.0:
            raise TargetUnreachable("no admissible token move remains")
        delta_full = float(votes[i, q])
        votes[i, q] = 0.0
        votes[i, target] += delta_full
        moved += delta_full
        new_cur = _target_share(votes, i, q, 0.0, target, code, params)
        cur = new_cur if not np.isnan(new_cur) else -np.inf
    achieved = cur >= goal - GOAL_TOL
    return AttackResult(target, increase, 2.0 * moved, achieved, _digest(votes),
                        baseline, float(cur), "greedy-upper-bound")


def control_cost(profile: Profile, spec: RuleSpec, target: int, increase: float,
                 mode: str, max_added: int = 1000) -> AttackResult:
    """Voters added (unit ballots on the target) or greedily deleted.

    Add mode appends single-minded voters one at a time; delete mode
    removes, each round, the voter whose removal lifts the target most.
    Costs are counts and are upper bounds.
    """
    _check_target(profile, target)
    if mode not in ("add", "delete"):
        raise TargetUnreachable(f"unknown control mode {mode!r}")
    if increase < 0:
        raise TargetUnreachable("increase must be non-negative")
    code, params = rule_code(spec)
    votes = np.array(profile.votes)
    baseline = float(shares_for(votes, code, params)[target])
    goal = baseline + increase
    if increase == 0:
        return AttackResult(target, increase, 0.0, True, _digest(votes),
                            baseline, baseline, f"greedy-{mode}")
    if mode == "add":
        unit = np.zeros((1, profile.m))
        unit[0, target] = 1.0
        cur = baseline
        for count in range(1, max_added + 1):
            votes = np.concatenate([votes, unit], axis=0)
            shares = k.rule_shares(votes, code, params)
            cur = float(shares[target]) if np.isfinite(shares[target]) else -np.inf
            if cur >= goal - GOAL_TOL:
                return AttackResult(target, increase, float(count), True,
                                    _digest(votes), baseline, cur, "greedy-add")
        raise TargetUnreachable(
            f"target not reached after adding {max_added} single-minded voters")
    # delete mode
    if profile.n < 2:
        raise TargetUnreachable("delete mode needs at least two voters")
    cur = baseline
    count = 0
    while votes.shape[0] > 1:
        scans = k.delete_row_scan(votes, code, params)
        col = scans[:, target]
        if np.all(np.isnan(col)):
            raise TargetUnreachable("every single deletion degenerates the election")
        best = int(np.nanargmax(col))
        votes = np.delete(votes, best, axis=0)
        count += 1
        cur = float(col[best])
        if cur >= goal - GOAL_TOL:
            return AttackResult(target, increase, float(count), True,
                                _digest(votes), baseline, cur, "greedy-delete")
    raise TargetUnreachable("target unreachable even after deleting down to one voter")


def robustness_probe(profile: Profile, spec: RuleSpec, trials: int, seed: int) -> RobustnessSummary:
    """Outcome shift when one uniformly chosen ballot is resampled.

    Each trial draws its own (seed, trial) stream: one voter's ballot is
    replaced by a fresh Dirichlet(1^m) sample and the l1 distance
    between the original and perturbed outcomes is recorded.
    """
    if trials < 1:
        raise TargetUnreachable("trials must be at least 1")
    code, params = rule_code(spec)
    base = shares_for(profile.votes, code, params)
    samples = []
    failures = 0
    for trial in range(trials):
        stream = derive_stream(seed, trial)
        voter = int(stream.integers(profile.n))
        ballot = dirichlet_sample(profile.m, 1.0, stream)
        buf = np.array(profile.votes)
        buf[voter] = ballot
        shares = k.rule_shares(buf, code, params)
        if np.isnan(shares).any():
            failures += 1
            continue
        samples.append(float(np.abs(shares - base).sum()))
    if not samples:
        raise DegenerateProfile("every perturbation degenerated the election")
    arr = np.array(samples)
    return RobustnessSummary(float(arr.mean()), float(arr.max()), tuple(samples), failures)


def concentrated_ballot(ballot: np.ndarray, project: int, concentration: float) -> np.ndarray:
    """Put ``concentration`` on one project, spreading the rest
    proportionally to the voter's other original weights (uniformly if
    they had none)."""
    m = ballot.shape[0]
    if m == 1:
        return np.ones(1)
    out = np.zeros(m)
    out[project] = concentration
    rest = np.array(ballot)
    rest[project] = 0.0
    total = float(rest.sum())
    if total > 0.0:
        out += (1.0 - concentration) * rest / total
    else:
        others = np.ones(m)
        others[project] = 0.0
        out += (1.0 - concentration) * others / (m - 1)
    return out


def voter_extractable_value(profile: Profile, spec: RuleSpec,
                            concentration: float) -> VEVResult:
    """Max l1 outcome shift over all (voter, project) concentrations."""
    if not 0.0 < concentration <= 1.0:
        raise TargetUnreachable("concentration must lie in (0, 1]")
    code, params = rule_code(spec)
    base = shares_for(profile.votes, code, params)
    best = (-1.0, 0, 0, base)
    for voter in range(profile.n):
        cands = np.stack([
            concentrated_ballot(profile.votes[voter], p, concentration)
            for p in range(profile.m)
        ])
        allocs = k.replace_row_scan(profile.votes, voter, cands, code, params)
        dists = np.abs(allocs - base[None, :]).sum(axis=1)
        dists = np.where(np.isnan(dists), -1.0, dists)
        p = int(np.argmax(dists))
        if float(dists[p]) > best[0]:
            best = (float(dists[p]), voter, p, allocs[p])
    value, voter, project, shifted = best
    if value < 0.0:
        raise DegenerateProfile("every concentration degenerated the election")
    return VEVResult(value, voter, project, concentration,
                     Allocation(base), Allocation(shifted))
