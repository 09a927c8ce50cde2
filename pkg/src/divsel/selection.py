"""Ensemble selection: mean-threshold, focal-model rules, and fusion.

Three selection families operate on a candidate set:

* ``q_select`` scores every candidate on one shared negative-sample set
  and keeps teams strictly below the mean score.
* ``learn_fq_rules`` + ``fq_select`` score each team per member focal
  model on that focal's own negatives, learn one cutoff per
  (focal, team size) cell with a two-cluster 1-D split, and keep teams
  whose per-focal scores clear the cutoffs (all / any / majority of the
  member focals, "all" by default).
* ``eq_fuse`` intersects several selected sets into an elite set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diversity import MetricId, normalize, raw_score
from .errors import DivselError, EmptyNegativesError, RuleCoverageError
from .pool import CorrectnessMatrix
from .sampling import NegativeSampleSet
from .teaming import CandidateSet, EnsembleTeam

FQ_MODES = ("all", "any", "majority")
DEFAULT_EQ_METRICS = (MetricId.BD, MetricId.KW, MetricId.GD)


@dataclass(frozen=True)
class SelectionRule:
    """A learned diversity cutoff (keep team when score < cutoff).

    ``focal``/``size`` are None for a global (mean-threshold) rule.
    ``keep_all`` marks a degenerate cell (fewer than two distinct scores)
    whose rule keeps everything regardless of the stored cutoff.
    """

    metric: MetricId
    cutoff: float
    focal: int | None = None
    size: int | None = None
    keep_all: bool = False

    def __post_init__(self):
        if not np.isfinite(self.cutoff):
            raise ValueError(f"rule cutoff must be finite, got {self.cutoff}")

    def keeps(self, score: float) -> bool:
        return True if self.keep_all else score < self.cutoff


@dataclass(frozen=True)
class SelectedSet:
    """Teams surviving a selection method, with their recorded scores."""

    method: str
    teams: tuple[EnsembleTeam, ...]
    scores: tuple[float, ...]
    pool_size: int
    candidate_count: int

    def __post_init__(self):
        if len(self.teams) != len(self.scores):
            raise ValueError("teams and scores must align")
        keys = [t.key for t in self.teams]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate teams in selected set")

    def __len__(self) -> int:
        return len(self.teams)

    def team_keys(self) -> set[str]:
        return {t.key for t in self.teams}


def mean_threshold(scores) -> tuple[float, np.ndarray]:
    """Arithmetic-mean threshold and the strict below-mean keep mask."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise DivselError("no scores to threshold")
    # the mean of identical values is that value; don't let float summation
    # nudge the threshold above it and select everything
    if scores.min() == scores.max():
        threshold = float(scores[0])
    else:
        threshold = float(scores.mean())
    return threshold, scores < threshold


def q_select(metric: MetricId, cands: CandidateSet, corr: CorrectnessMatrix,
             neg: NegativeSampleSet) -> tuple[SelectedSet, SelectionRule]:
    """Mean-threshold selection over one shared negative-sample set.

    Every candidate is scored (normalized orientation), the threshold is
    the arithmetic mean of all scores, and exactly the teams scoring
    strictly below it are kept.
    """
    if len(cands) == 0:
        raise DivselError("empty candidate set")
    if len(neg) == 0:
        raise EmptyNegativesError("cannot select on an empty negative set")
    omega_neg = corr.omega[:, neg.indices]
    scores = np.array([
        normalize(metric, raw_score(metric, omega_neg[np.asarray(t.members)]))
        for t in cands
    ])
    threshold, keep = mean_threshold(scores)
    selected = SelectedSet(
        method=f"q-{metric.value}",
        teams=tuple(t for t, k in zip(cands.teams, keep) if k),
        scores=tuple(float(s) for s, k in zip(scores, keep) if k),
        pool_size=cands.pool_size,
        candidate_count=len(cands),
    )
    rule = SelectionRule(metric=metric, cutoff=threshold)
    return selected, rule


@dataclass(frozen=True)
class TwoMeansSplit:
    """Binary partition of 1-D values: low cluster / high cluster."""

    cutoff: float
    low_mask: np.ndarray
    iterations: int


def two_means_split(values) -> TwoMeansSplit:
    """Split 1-D values into two clusters by Lloyd iteration.

    Centroids start at the minimum and maximum value, assignment ties go
    to the low cluster, and iteration stops once assignments stabilize
    (guaranteed within len(values) rounds).  The cutoff is the midpoint
    between the largest low-cluster value and the smallest high-cluster
    value.
    """
    xs = np.asarray(values, dtype=np.float64)
    if xs.size < 2 or np.unique(xs).size < 2:
        raise ValueError("two_means_split needs at least 2 distinct values")
    mid = (xs.min() + xs.max()) / 2.0
    low = xs <= mid
    iterations = 0
    for _ in range(xs.size):
        iterations += 1
        mid = (xs[low].mean() + xs[~low].mean()) / 2.0
        new_low = xs <= mid
        if np.array_equal(new_low, low):
            break
        low = new_low
    else:
        raise RuntimeError("1-D 2-means failed to stabilize")
    cutoff = (float(xs[low].max()) + float(xs[~low].min())) / 2.0
    return TwoMeansSplit(cutoff=cutoff, low_mask=low, iterations=iterations)


class FocalScoreTable:
    """Lazily computed normalized scores of teams on per-focal negatives.

    Looks up (and caches) the diversity of a team measured on the negative
    samples of one of its member models.  Focal models absent from
    ``neg_sets`` (models that never err) yield no scores; their rule cells
    are degenerate.
    """

    def __init__(self, metric: MetricId, corr: CorrectnessMatrix,
                 neg_sets: dict[int, NegativeSampleSet]):
        self.metric = metric
        self.neg_sets = neg_sets
        self._omega_by_focal = {
            focal: corr.omega[:, ns.indices] for focal, ns in neg_sets.items()
        }
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def has_focal(self, focal: int) -> bool:
        return focal in self._omega_by_focal

    def score(self, focal: int, team: EnsembleTeam) -> float:
        key = (focal, team.members)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        omega = self._omega_by_focal[focal]
        value = normalize(self.metric,
                          raw_score(self.metric, omega[np.asarray(team.members)]))
        self._cache[key] = value
        return value


def learn_fq_rules(metric: MetricId, cands: CandidateSet,
                   scores: FocalScoreTable) -> list[SelectionRule]:
    """Learn one keep/prune cutoff per (focal model, team size) cell.

    Within a cell, the scores of all size-S candidates containing the
    focal model are split into a low (keep) and high (prune) cluster;
    the cutoff is the midpoint of the cluster gap.  Cells with fewer than
    two distinct scores (including focals that never err) become
    degenerate keep-all rules.
    """
    by_cell: dict[tuple[int, int], list[float]] = {}
    for t in cands:
        for focal in t.members:
            cell = by_cell.setdefault((focal, t.size), [])
            if scores.has_focal(focal):
                cell.append(scores.score(focal, t))
    rules = []
    for (focal, size), cell_scores in sorted(by_cell.items()):
        distinct = set(cell_scores)
        if len(distinct) < 2:
            anchor = cell_scores[0] if cell_scores else 0.0
            rules.append(SelectionRule(metric=metric, cutoff=float(anchor),
                                       focal=focal, size=size, keep_all=True))
            continue
        split = two_means_split(cell_scores)
        rules.append(SelectionRule(metric=metric, cutoff=split.cutoff,
                                   focal=focal, size=size))
    return rules


def _rule_map(rules) -> dict[tuple[int, int], SelectionRule]:
    return {(r.focal, r.size): r for r in rules if r.focal is not None}


def fq_select(metric: MetricId, cands: CandidateSet, rules,
              scores: FocalScoreTable, mode: str = "all") -> SelectedSet:
    """Apply per-focal rules to the candidates.

    A team is kept when its per-focal scores pass the cutoff for all of
    its member focals ("all", default), at least one ("any"), or strictly
    more than half ("majority").  A focal with a degenerate rule always
    votes keep.  The recorded team score is the mean over member focals.
    """
    if mode not in FQ_MODES:
        raise ValueError(f"unknown fq mode {mode!r} (expected one of {FQ_MODES})")
    rmap = _rule_map(rules)
    kept_teams: list[EnsembleTeam] = []
    kept_scores: list[float] = []
    for t in cands:
        votes = 0
        focal_scores = []
        for focal in t.members:
            rule = rmap.get((focal, t.size))
            if rule is None:
                raise RuleCoverageError(
                    f"no rule for focal {focal}, team size {t.size}"
                )
            if scores.has_focal(focal):
                s = scores.score(focal, t)
                focal_scores.append(s)
                votes += rule.keeps(s)
            else:
                votes += 1
        if mode == "all":
            keep = votes == t.size
        elif mode == "any":
            keep = votes >= 1
        else:
            keep = votes * 2 > t.size
        if keep:
            kept_teams.append(t)
            kept_scores.append(float(np.mean(focal_scores)) if focal_scores else 0.0)
    return SelectedSet(
        method=f"fq-{metric.value}-{mode}",
        teams=tuple(kept_teams),
        scores=tuple(kept_scores),
        pool_size=cands.pool_size,
        candidate_count=len(cands),
    )


def eq_fuse(selected: list[SelectedSet]) -> SelectedSet:
    """Intersect selected sets into an elite set (scores averaged)."""
    if len(selected) < 2:
        raise DivselError("fusion needs at least 2 selected sets")
    first = selected[0]
    for other in selected[1:]:
        if (other.pool_size != first.pool_size
                or other.candidate_count != first.candidate_count):
            raise DivselError("fused sets must come from the same candidate set")
    score_maps = [dict(zip((t.key for t in s.teams), s.scores)) for s in selected]
    common = set(score_maps[0])
    for m in score_maps[1:]:
        common &= set(m)
    teams = tuple(t for t in first.teams if t.key in common)
    scores = tuple(
        float(np.mean([m[t.key] for m in score_maps])) for t in teams
    )
    label = "+".join(s.method for s in selected)
    return SelectedSet(
        method=f"eq({label})",
        teams=teams,
        scores=scores,
        pool_size=first.pool_size,
        candidate_count=first.candidate_count,
    )


def rules_to_json(rules) -> str:
    """Serialize rules as a JSON array of {metric, focal, size, cutoff} records."""
    records = [
        {
            "metric": r.metric.value,
            "focal": r.focal,
            "size": r.size,
            "cutoff": r.cutoff,
            "keep_all": r.keep_all,
        }
        for r in rules
    ]
    return json.dumps(records, indent=2) + "\n"


def rules_from_json(text: str) -> list[SelectionRule]:
    try:
        records = json.loads(text)
        return [
            SelectionRule(
                metric=MetricId.parse(rec["metric"]),
                cutoff=float(rec["cutoff"]),
                focal=rec.get("focal"),
                size=rec.get("size"),
                keep_all=bool(rec.get("keep_all", False)),
            )
            for rec in records
        ]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DivselError(f"malformed rules JSON: {exc}") from exc


def save_rules(rules, path: str | Path) -> None:
    Path(path).write_text(rules_to_json(rules))


def load_rules(path: str | Path) -> list[SelectionRule]:
    return rules_from_json(Path(path).read_text())
