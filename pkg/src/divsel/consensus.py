"""Consensus algorithms combining member predictions into a team prediction.

Four methods: soft voting (probability averaging), majority voting
(more than half the votes, else abstain), plurality voting (most votes,
never abstains) and boosting voting (weighted soft voting with weights
learned by penalizing training errors).  All tie-breaks pick the lowest
class index; abstention is encoded as ABSTAIN (-1) and always counts as
an incorrect prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, DivselError
from .pool import PredictionPool
from .teaming import EnsembleTeam

ABSTAIN = -1
DEFAULT_GAMMA = -0.01
METHODS = ("soft", "majority", "plurality", "boosting")


@dataclass(frozen=True)
class ConsensusMethod:
    """A consensus algorithm choice plus its parameters."""

    kind: str
    gamma: float = DEFAULT_GAMMA
    train_indices: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in METHODS:
            raise ValueError(f"unknown consensus method {self.kind!r}")
        if self.kind == "boosting" and self.gamma >= 0:
            raise DivselError(f"boosting penalty must be negative, got {self.gamma}")

    @property
    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class EnsemblePrediction:
    """Per-sample team predictions; ABSTAIN (-1) marks no decision.

    ``probs`` is present for probability-based methods and its rows are
    normalized to sum to 1.
    """

    labels: np.ndarray
    probs: np.ndarray | None = None


@dataclass(frozen=True)
class MemberWeights:
    """Non-negative member weights summing to 1."""

    weights: np.ndarray

    def __post_init__(self):
        if abs(float(self.weights.sum()) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {self.weights.sum()!r}")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")


def _member_probs(team: EnsembleTeam, pool: PredictionPool, what: str):
    missing = [i for i in team.members if not pool.models[i].has_probs]
    if missing:
        raise CapabilityError(
            f"{what} needs prediction probabilities, but model(s) "
            f"{missing} carry labels only"
        )
    return [pool.models[i].probs for i in team.members]


def soft_vote(team: EnsembleTeam, pool: PredictionPool) -> EnsemblePrediction:
    """Average member probability rows and take the argmax."""
    probs = _member_probs(team, pool, "soft voting")
    combined = np.zeros_like(probs[0])
    for p in probs:
        combined += p
    combined /= team.size
    preds = combined.argmax(axis=1)
    combined /= combined.sum(axis=1, keepdims=True)
    return EnsemblePrediction(labels=preds.astype(np.int64), probs=combined)


def _vote_counts(team: EnsembleTeam, pool: PredictionPool) -> np.ndarray:
    counts = np.zeros((pool.num_samples, pool.num_classes), dtype=np.int64)
    rows = np.arange(pool.num_samples)
    for i in team.members:
        counts[rows, pool.models[i].pred_labels] += 1
    return counts


def majority_vote(team: EnsembleTeam, pool: PredictionPool) -> EnsemblePrediction:
    """Pick the class with more than half the votes; abstain otherwise."""
    counts = _vote_counts(team, pool)
    top = counts.argmax(axis=1)
    top_count = counts.max(axis=1)
    preds = np.where(top_count * 2 > team.size, top, ABSTAIN)
    return EnsemblePrediction(labels=preds.astype(np.int64))


def plurality_vote(team: EnsembleTeam, pool: PredictionPool) -> EnsemblePrediction:
    """Pick the most-voted class (lowest index on ties); never abstains."""
    counts = _vote_counts(team, pool)
    return EnsemblePrediction(labels=counts.argmax(axis=1).astype(np.int64))


def boosting_weights(team: EnsembleTeam, pool: PredictionPool,
                     train_indices=None, gamma: float = DEFAULT_GAMMA) -> MemberWeights:
    """Learn member weights by multiplicative error penalties.

    Weights start uniform; walking the training samples in index order,
    every member that mispredicts a sample has its weight multiplied by
    e^gamma, after which the weights are renormalized to sum to 1.
    """
    if gamma >= 0:
        raise DivselError(f"boosting penalty must be negative, got {gamma}")
    _member_probs(team, pool, "boosting voting")
    if train_indices is None:
        train_indices = np.arange(pool.num_samples)
    else:
        train_indices = np.asarray(train_indices, dtype=np.int64)
        if train_indices.size == 0:
            raise DivselError("boosting needs a non-empty training index set")
        if np.any((train_indices < 0) | (train_indices >= pool.num_samples)):
            raise DivselError("training index out of range")
        # the walk is defined in sample-index order, whatever the file order
        train_indices = np.sort(train_indices)
    # argmax of each prob row equals the stored predicted label (pool invariant)
    wrong = np.stack([
        pool.models[i].pred_labels != pool.labels for i in team.members
    ])
    penalty = np.exp(gamma)
    weights = np.full(team.size, 1.0 / team.size)
    for k in train_indices:
        wrong_k = wrong[:, k]
        if wrong_k.any():
            weights[wrong_k] *= penalty
            weights /= weights.sum()
    return MemberWeights(weights=weights)


def boosting_vote(team: EnsembleTeam, pool: PredictionPool,
                  weights: MemberWeights) -> EnsemblePrediction:
    """Weighted soft voting using learned member weights."""
    probs = _member_probs(team, pool, "boosting voting")
    if weights.weights.shape[0] != team.size:
        raise DivselError(
            f"got {weights.weights.shape[0]} weights for a team of {team.size}"
        )
    combined = np.zeros_like(probs[0])
    for w, p in zip(weights.weights, probs):
        combined += w * p
    combined /= team.size
    preds = combined.argmax(axis=1)
    # rescale rows to sum to 1; a positive scale never moves the argmax
    row_sums = combined.sum(axis=1, keepdims=True)
    np.divide(combined, row_sums, out=combined, where=row_sums > 0)
    return EnsemblePrediction(labels=preds.astype(np.int64), probs=combined)


def ensemble_accuracy(pred: EnsemblePrediction, labels: np.ndarray) -> float:
    """Fraction of samples predicted correctly; abstentions count as wrong."""
    return float(np.mean(pred.labels == labels))


def predict(team: EnsembleTeam, pool: PredictionPool,
            method: ConsensusMethod) -> EnsemblePrediction:
    """Run the chosen consensus method on a team."""
    if method.kind == "soft":
        return soft_vote(team, pool)
    if method.kind == "majority":
        return majority_vote(team, pool)
    if method.kind == "plurality":
        return plurality_vote(team, pool)
    weights = boosting_weights(team, pool, method.train_indices, method.gamma)
    return boosting_vote(team, pool, weights)
