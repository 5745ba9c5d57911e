"""Domain types, validation, budget normalization and ballot-file I/O.

The internal budget is normalized to 1: every ballot is rescaled to sum
to 1 and allocations are fractions of the budget.  Token amounts appear
only at the I/O edges via ``Profile.budget_tokens``.  All types are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SUM_TOL = 1e-9
EQ_TOL = 1e-12

RULE_NAMES = (
    "quadratic",
    "mean",
    "quorum_median",
    "capped_median",
    "normalized_median",
    "midpoint",
    "independent_markets",
    "majoritarian_phantoms",
)


class TokenVoteError(Exception):
    """Base error; ``code`` is the stable machine-readable identifier."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class NegativeWeight(TokenVoteError):
    code = "NegativeWeight"


class EmptyBallot(TokenVoteError):
    code = "EmptyBallot"


class ShapeMismatch(TokenVoteError):
    code = "ShapeMismatch"


class ParseError(TokenVoteError):
    code = "ParseError"


class DegenerateProfile(TokenVoteError):
    code = "DegenerateProfile"


class TargetUnreachable(TokenVoteError):
    code = "TargetUnreachable"


class NoConvergence(TokenVoteError):
    code = "NoConvergence"


class IndexOutOfRange(TokenVoteError):
    code = "IndexOutOfRange"


class PreconditionUnmet(TokenVoteError):
    code = "PreconditionUnmet"


class RegressionFailure(TokenVoteError):
    code = "RegressionFailure"


class ConfigError(TokenVoteError):
    code = "ConfigError"


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != ndim:
        raise ShapeMismatch(f"expected a {ndim}-D array, got {arr.ndim}-D")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Ballot:
    """One voter's distribution of their tokens over the projects.

    Entries are non-negative and sum to 1 (the per-voter token count is
    normalized out).
    """

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen_array(self.weights, 1))

    def __len__(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class Profile:
    """A full election: n ballots over m projects plus the token scale.

    ``votes`` is the (n, m) ballot matrix; ``budget_tokens`` is used
    only to scale shares back to token amounts at the output edge.
    """

    votes: np.ndarray
    budget_tokens: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "votes", _frozen_array(self.votes, 2))
        if self.votes.shape[0] < 1 or self.votes.shape[1] < 1:
            raise ShapeMismatch("profile needs at least one voter and one project")
        if not self.budget_tokens > 0:
            raise ConfigError("budget_tokens must be positive")

    @property
    def n(self) -> int:
        return self.votes.shape[0]

    @property
    def m(self) -> int:
        return self.votes.shape[1]

    @property
    def ballots(self) -> list[Ballot]:
        return [Ballot(row) for row in self.votes]

    def replace_votes(self, votes: np.ndarray) -> "Profile":
        return Profile(votes, self.budget_tokens)


@dataclass(frozen=True)
class Allocation:
    """A budget division: non-negative shares summing to 1."""

    shares: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "shares", _frozen_array(self.shares, 1))
        if np.any(self.shares < 0):
            raise NegativeWeight("allocation shares must be non-negative")
        if float(self.shares.sum()) > 1.0 + SUM_TOL:
            raise ShapeMismatch("allocation shares exceed the budget")

    def tokens(self, budget_tokens: float) -> np.ndarray:
        return self.shares * budget_tokens

    def __len__(self) -> int:
        return self.shares.shape[0]


@dataclass(frozen=True)
class RuleSpec:
    """A rule identifier plus its parameters.

    q1 is the minimum positive-supporter median (in per-voter token
    fractions) a project needs under the quorum rule; q2 the minimum
    supporter count.  k1 caps a project's share with excess
    redistribution and k2 is the elimination floor, both fractions of
    the normalized budget.
    """

    rule: str
    q1: float = 0.0017
    q2: int = 2
    k1: float = 0.125
    k2: float = 0.0017

    def __post_init__(self):
        if self.rule not in RULE_NAMES:
            raise ConfigError(f"unknown rule {self.rule!r}")
        if not 0.0 <= self.q1 <= 1.0:
            raise ConfigError("q1 must lie in [0, 1]")
        if self.q2 < 0:
            raise ConfigError("q2 must be non-negative")
        if not 0.0 < self.k1 <= 1.0:
            raise ConfigError("k1 must lie in (0, 1]")
        if not 0.0 <= self.k2 < 1.0:
            raise ConfigError("k2 must lie in [0, 1)")
        if self.k2 >= self.k1:
            raise ConfigError("k2 must be smaller than k1")

    def label(self) -> str:
        return self.rule


def validate_profile(profile: Profile) -> Profile:
    """Rescale each ballot to sum to 1; reject invalid ballots.

    Rows already within ``SUM_TOL`` of 1 are passed through untouched,
    which makes validation exactly idempotent.
    """
    votes = np.array(profile.votes, dtype=np.float64)
    if not np.isfinite(votes).all():
        raise ParseError("ballot entries must be finite")
    if np.any(votes < 0):
        bad = int(np.argwhere(votes < 0)[0][0])
        raise NegativeWeight(f"voter {bad} has a negative entry")
    sums = votes.sum(axis=1)
    if np.any(sums == 0):
        bad = int(np.argmin(sums))
        raise EmptyBallot(f"voter {bad} assigned no tokens")
    needs = np.abs(sums - 1.0) > SUM_TOL
    if needs.any():
        votes[needs] = votes[needs] / sums[needs, None]
    return Profile(votes, profile.budget_tokens)


def profile_from_rows(rows: Iterable[Sequence[float]], budget_tokens: float = 1.0) -> Profile:
    """Build and validate a profile from per-voter weight rows."""
    matrix = [list(map(float, row)) for row in rows]
    if not matrix:
        raise ShapeMismatch("no ballots given")
    width = len(matrix[0])
    for i, row in enumerate(matrix):
        if len(row) != width:
            raise ShapeMismatch(f"ballot {i} has length {len(row)}, expected {width}")
    return validate_profile(Profile(np.array(matrix, dtype=np.float64), budget_tokens))


def l1_distance(a, b) -> float:
    """Sum of absolute coordinate differences between two equal-length vectors."""
    av = np.asarray(a.shares if isinstance(a, Allocation) else getattr(a, "weights", a), dtype=np.float64)
    bv = np.asarray(b.shares if isinstance(b, Allocation) else getattr(b, "weights", b), dtype=np.float64)
    if av.shape != bv.shape:
        raise ShapeMismatch(f"length mismatch: {av.shape} vs {bv.shape}")
    return float(np.abs(av - bv).sum())


def load_ballots_csv(path, budget_tokens: float) -> Profile:
    """Load a ballot file: header of project ids, one row of token amounts per voter."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        m = len(header)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != m:
                raise ShapeMismatch(f"{path}:{lineno}: expected {m} columns, got {len(row)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ParseError(f"{path}: no ballot rows")
    return validate_profile(Profile(np.array(rows, dtype=np.float64), budget_tokens))


def save_ballots_csv(path, votes: np.ndarray, project_ids: Sequence[str] | None = None) -> None:
    """Write a ballot matrix in the CSV ballot format (floats round-trip exactly)."""
    votes = np.asarray(votes, dtype=np.float64)
    if votes.ndim != 2:
        raise ShapeMismatch("votes must be 2-D")
    if project_ids is None:
        project_ids = [f"p{j + 1}" for j in range(votes.shape[1])]
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(project_ids)
        for row in votes:
            writer.writerow([repr(float(x)) for x in row])
