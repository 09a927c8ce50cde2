"""Command-line interface.

Subcommands cover the full workflow: ``synth`` writes a synthetic pool,
``enumerate`` counts/lists candidate teams, ``diversity`` scores them,
``select`` applies a selection method, ``consensus`` runs one voting
method on one team, ``report`` aggregates a selected set, ``recommend``
runs the whole pipeline, and ``query`` explains one team and its
sub-teams.  Exit codes: 0 on success, 1 on data errors, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import sys
from itertools import combinations
from pathlib import Path

import numpy as np

from . import report as rpt
from .consensus import ABSTAIN, ConsensusMethod, ensemble_accuracy, predict
from .diversity import MetricId, diversity_score
from .errors import DivselError, EmptyNegativesError
from .evaluation import evaluate_set, evaluate_teams, summarize
from .pool import CorrectnessMatrix, PredictionPool, correctness, load_pool, write_pool
from .sampling import (DEFAULT_SAMPLE_SIZE, build_negative_set,
                       focal_negative_sets, negatives_any, sample_subset)
from .selection import (DEFAULT_EQ_METRICS, FocalScoreTable, eq_fuse, fq_select,
                        learn_fq_rules, load_rules, q_select, save_rules)
from .synth import generate_pool, load_config
from .teaming import CandidateSet, EnsembleTeam, enumerate_teams, parse_team


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _resolve_format(args) -> str:
    """Explicit --format wins; otherwise infer from the --out extension."""
    if args.format:
        return args.format
    if args.out:
        suffix = Path(args.out).suffix.lower()
        if suffix == ".csv":
            return "csv"
        if suffix in (".txt", ".tbl"):
            return "table"
    return "json"


def _load(args) -> tuple[PredictionPool, CorrectnessMatrix]:
    pool = load_pool(args.pool)
    return pool, correctness(pool)


def _check_team(team, pool) -> None:
    if team.members[-1] >= pool.num_models:
        raise DivselError(
            f"team {team.key} references model {team.members[-1]}, but the "
            f"pool has only {pool.num_models} models"
        )


def _consensus_method(args) -> ConsensusMethod:
    train = None
    if getattr(args, "train_indices", None):
        try:
            train = np.loadtxt(args.train_indices, dtype=np.int64, ndmin=1)
        except ValueError as exc:
            raise DivselError(f"bad train-indices file {args.train_indices}: {exc}")
    return ConsensusMethod(kind=args.consensus, gamma=getattr(args, "gamma", -0.01),
                           train_indices=train)


def _fq_pipeline(metric: MetricId, cands: CandidateSet, corr: CorrectnessMatrix,
                 sample_size: int, seed: int, mode: str, rules=None):
    neg_sets = focal_negative_sets(corr, sample_size, seed)
    table = FocalScoreTable(metric, corr, neg_sets)
    if rules is None:
        rules = learn_fq_rules(metric, cands, table)
    selected = fq_select(metric, cands, rules, table, mode=mode)
    return rules, selected


def _select(args, cands: CandidateSet, corr: CorrectnessMatrix):
    """Run the selection method chosen on the command line."""
    if args.method == "q":
        metric = MetricId.parse(args.metric)
        neg = build_negative_set(corr, args.sampling, args.sample_size, args.seed,
                                 focal=args.focal)
        selected, rule = q_select(metric, cands, corr, neg)
        return selected, [rule]
    if args.method == "fq":
        metric = MetricId.parse(args.metric)
        rules_in = load_rules(args.rules_in) if getattr(args, "rules_in", None) else None
        rules, selected = _fq_pipeline(metric, cands, corr, args.sample_size,
                                       args.seed, args.fq_mode, rules=rules_in)
        return selected, rules
    # eq: fuse the per-metric focal selections
    try:
        metrics = [MetricId.parse(m) for m in args.eq_metrics.split(",")]
    except ValueError as exc:
        raise DivselError(str(exc))
    if len(metrics) < 2:
        raise DivselError("--eq-metrics needs at least two metrics")
    all_rules = []
    parts = []
    for metric in metrics:
        rules, selected = _fq_pipeline(metric, cands, corr, args.sample_size,
                                       args.seed, args.fq_mode)
        all_rules.extend(rules)
        parts.append(selected)
    return eq_fuse(parts), all_rules


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    pool = generate_pool(cfg)
    manifest = write_pool(pool, args.out_dir)
    print(manifest)
    return 0


def cmd_enumerate(args) -> int:
    cands = enumerate_teams(args.pool_size, args.team_size)
    print(len(cands))
    if args.list:
        for t in cands:
            print(t.key)
    return 0


def cmd_diversity(args) -> int:
    pool, corr = _load(args)
    fmt = _resolve_format(args)
    metric = MetricId.parse(args.metric)
    neg = build_negative_set(corr, args.sampling, args.sample_size, args.seed,
                             focal=args.focal)
    if args.team:
        teams = [parse_team(args.team)]
        _check_team(teams[0], pool)
    else:
        teams = list(enumerate_teams(pool.num_models, args.team_size))
    scores = [diversity_score(metric, t, corr, neg) for t in teams]
    rows = [
        {"team": s.team.key, "size": s.team.size, "raw": s.raw,
         "normalized": s.normalized}
        for s in scores
    ]
    if fmt == "json":
        _emit(rpt.dumps({"metric": metric.value, "context": neg.descriptor,
                         "scores": rows}), args.out)
    elif fmt == "csv":
        lines = ["team,size,raw,normalized"]
        lines += [f"{r['team']},{r['size']},{r['raw']:.6f},{r['normalized']:.6f}"
                  for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        lines = [f"metric={metric.value} context={neg.descriptor}"]
        lines += [f"{r['team']:>12}  raw={r['raw']:+.4f}  "
                  f"score={r['normalized']:.4f}" for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_select(args) -> int:
    pool, corr = _load(args)
    cands = enumerate_teams(pool.num_models, args.team_size)
    selected, rules = _select(args, cands, corr)
    if args.rules_out:
        save_rules(rules, args.rules_out)
    _emit(rpt.dumps(rpt.selected_set_to_dict(selected)), args.out)
    return 0


def cmd_consensus(args) -> int:
    pool, _ = _load(args)
    team = parse_team(args.team)
    _check_team(team, pool)
    method = _consensus_method(args)
    pred = predict(team, pool, method)
    acc = ensemble_accuracy(pred, pool.labels)
    abstained = int(np.sum(pred.labels == ABSTAIN))
    payload = {"team": team.key, "method": method.kind, "accuracy": acc,
               "abstained": abstained}
    if _resolve_format(args) == "json":
        _emit(rpt.dumps(payload), args.out)
    else:
        _emit(f"team {team.key}: {method.kind} accuracy "
              f"{100.0 * acc:.2f}% ({abstained} abstained)\n", args.out)
    return 0


def cmd_report(args) -> int:
    pool, corr = _load(args)
    selected = rpt.load_selected_set(getattr(args, "in"))
    method = _consensus_method(args)
    cache: dict = {}
    cands = enumerate_teams(pool.num_models)
    baseline = evaluate_set(cands.teams, pool, corr, method, "baseline",
                            candidate_count=len(cands), threads=args.threads,
                            cache=cache)
    chosen = evaluate_set(selected.teams, pool, corr, method, selected.method,
                          candidate_count=selected.candidate_count,
                          threads=args.threads, cache=cache)
    reports = [baseline, chosen]
    _emit_reports(reports, args)
    return 0


def _emit_reports(reports, args, extra: dict | None = None) -> None:
    fmt = _resolve_format(args)
    if fmt == "csv":
        _emit(rpt.set_reports_to_csv(reports), args.out)
    elif fmt == "table":
        _emit(rpt.set_reports_to_table(reports), args.out)
    else:
        payload = dict(extra or {})
        payload["reports"] = [rpt.set_report_to_dict(r) for r in reports]
        _emit(rpt.dumps(payload), args.out)


def cmd_recommend(args) -> int:
    pool, corr = _load(args)
    cands = enumerate_teams(pool.num_models, args.team_size)
    selected, _rules = _select(args, cands, corr)
    method = _consensus_method(args)
    cache: dict = {}
    baseline = evaluate_set(cands.teams, pool, corr, method, "baseline",
                            candidate_count=len(cands), threads=args.threads,
                            cache=cache)
    chosen = evaluate_set(selected.teams, pool, corr, method, selected.method,
                          candidate_count=len(cands), threads=args.threads,
                          cache=cache)
    extra = {
        "dataset": pool.dataset_name,
        "pool_size": pool.num_models,
        "seed": args.seed,
        "consensus": method.kind,
        "selection": rpt.selected_set_to_dict(selected),
    }
    _emit_reports([baseline, chosen], args, extra=extra)
    return 0


def cmd_query(args) -> int:
    pool, corr = _load(args)
    team = parse_team(args.team)
    _check_team(team, pool)
    method = _consensus_method(args)
    # sub-teams of the query team, smallest first, full team last
    subteams = [
        EnsembleTeam(tuple(combo))
        for size in range(2, team.size + 1)
        for combo in combinations(team.members, size)
    ]
    evals = evaluate_teams(subteams, pool, corr, method, threads=args.threads)
    # diversity of each sub-team on the negatives of the querying members
    member_corr = CorrectnessMatrix(
        omega=corr.omega[np.asarray(team.members)],
        accuracies=corr.accuracies[np.asarray(team.members)],
    )
    try:
        neg = sample_subset(negatives_any(member_corr), args.sample_size, args.seed)
    except EmptyNegativesError:
        neg = None
    rows = rpt.team_evaluations_to_dicts(evals)
    for row, sub in zip(rows, subteams):
        if neg is None:
            row["diversity"] = None
            continue
        row["diversity"] = {
            m.value: diversity_score(m, sub, corr, neg).normalized
            for m in MetricId
        }
    summary = summarize(f"query-{team.key}", evals, len(subteams),
                        float(corr.accuracies.max()))
    if _resolve_format(args) == "table":
        lines = [f"query {team.key} ({len(subteams)} teams, consensus={method.kind})"]
        for row in rows:
            div = row["diversity"]
            div_txt = ("  ".join(f"{k}={v:.3f}" for k, v in div.items())
                       if div else "no negatives")
            flag = "+" if row["beats_members"] else " "
            lines.append(
                f"{flag} {row['team']:>12} acc={100 * row['ensemble_accuracy']:.2f}% "
                f"m_max={100 * row['member_max_accuracy']:.2f}% {div_txt}"
            )
        lines.append(rpt.set_reports_to_table([summary]))
        _emit("\n".join(lines), args.out)
    else:
        _emit(rpt.dumps({
            "query_team": team.key,
            "consensus": method.kind,
            "teams": rows,
            "summary": rpt.set_report_to_dict(summary),
        }), args.out)
    return 0


# ---------------------------------------------------------------- parser

def _add_pool_arg(p):
    p.add_argument("--pool", required=True, help="path to a pool manifest JSON")


def _add_sampling_args(p):
    p.add_argument("--sampling", choices=["any", "all", "focal"], default="any",
                   help="negative-sample scheme (default any)")
    p.add_argument("--focal", type=int, default=None,
                   help="focal model id (for --sampling focal)")
    p.add_argument("--sample-size", type=int, default=DEFAULT_SAMPLE_SIZE,
                   help=f"negative subset size (default {DEFAULT_SAMPLE_SIZE})")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")


def _add_consensus_args(p):
    p.add_argument("--consensus", choices=["soft", "majority", "plurality",
                                           "boosting"], default="soft",
                   help="consensus method for accuracy (default soft)")
    p.add_argument("--gamma", type=float, default=-0.01,
                   help="boosting penalty exponent (default -0.01)")
    p.add_argument("--train-indices", default=None,
                   help="file of sample indices for boosting weight training")


def _add_output_args(p, formats=("json", "csv", "table")):
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=list(formats), default=None,
                   help="output format (default: by --out extension, else json)")


def _add_select_args(p):
    p.add_argument("--method", choices=["q", "fq", "eq"], required=True)
    p.add_argument("--metric", type=str.lower, default="gd",
                   choices=[m.value for m in MetricId],
                   help="diversity metric (default gd)")
    p.add_argument("--fq-mode", choices=["all", "any", "majority"], default="all",
                   help="how member-focal keep votes combine (default all)")
    p.add_argument("--eq-metrics",
                   default=",".join(m.value for m in DEFAULT_EQ_METRICS),
                   help="comma-separated metrics fused by eq (default bd,kw,gd)")
    p.add_argument("--team-size", type=int, default=None,
                   help="restrict candidates to one team size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divsel",
        description="Evaluate, select and recommend high-diversity model ensembles "
                    "from recorded predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic prediction pool")
    p.add_argument("--config", required=True, help="synth config JSON")
    p.add_argument("--out-dir", required=True, help="directory for pool files")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("enumerate", help="count/list candidate teams")
    p.add_argument("--pool-size", type=int, required=True)
    p.add_argument("--team-size", type=int, default=None)
    p.add_argument("--list", action="store_true", help="also print each team")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("diversity", help="score candidate teams on one metric")
    _add_pool_arg(p)
    p.add_argument("--metric", type=str.lower, default="gd",
                   choices=[m.value for m in MetricId])
    p.add_argument("--team", default=None, help="score a single team, e.g. 0123")
    p.add_argument("--team-size", type=int, default=None)
    _add_sampling_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("select", help="select high-diversity teams")
    _add_pool_arg(p)
    _add_select_args(p)
    _add_sampling_args(p)
    p.add_argument("--rules-out", default=None, help="write learned rules JSON")
    p.add_argument("--rules-in", default=None, help="reuse stored rules JSON (fq)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("consensus", help="run one consensus method on one team")
    _add_pool_arg(p)
    p.add_argument("--team", required=True)
    p.add_argument("--method", dest="consensus", required=True,
                   choices=["soft", "majority", "plurality", "boosting"])
    p.add_argument("--gamma", type=float, default=-0.01)
    p.add_argument("--train-indices", default=None)
    _add_output_args(p, formats=("json", "table"))
    p.set_defaults(func=cmd_consensus)

    p = sub.add_parser("report", help="aggregate report for a selected set")
    _add_pool_arg(p)
    p.add_argument("--in", required=True, help="selected-set JSON from `select`")
    _add_consensus_args(p)
    p.add_argument("--threads", type=int, default=1)
    _add_output_args(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("recommend", help="full pipeline: select + evaluate + report")
    _add_pool_arg(p)
    _add_select_args(p)
    _add_sampling_args(p)
    _add_consensus_args(p)
    p.add_argument("--threads", type=int, default=1)
    _add_output_args(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("query", help="explain one team and its sub-teams")
    _add_pool_arg(p)
    p.add_argument("--team", required=True)
    p.add_argument("--sample-size", type=int, default=DEFAULT_SAMPLE_SIZE)
    p.add_argument("--seed", type=int, default=0)
    _add_consensus_args(p)
    p.add_argument("--threads", type=int, default=1)
    _add_output_args(p, formats=("json", "table"))
    p.set_defaults(func=cmd_query)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivselError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
