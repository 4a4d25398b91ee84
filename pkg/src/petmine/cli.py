"""Command-line pipeline driver.

Each analysis stage is a subcommand that reads and writes files under a
single output directory, so stages compose through snapshots rather than
in-memory state.  All randomness flows from one top-level seed: stage
seeds are derived as ``derive_seed(seed, "stage:<name>")``, which keeps
partial reruns reproducible.  Every output file starts with a metadata
header carrying the tool version, the configuration digest, and the
seed.
"""

import argparse
import csv
import dataclasses
import datetime
import json
import logging
import math
import os
import sys

import numpy as np

from . import __version__, corpus, geo, issues, lda, powerlaw, temporal, textprep
from .errors import ConfigError, PetmineError
from .util import config_digest, derive_seed, write_csv, write_text

log = logging.getLogger(__name__)

_LDA_DEFAULTS = {
    "k": 10,
    "alpha": 0.1,
    "beta": 0.1,
    "iterations": 1000,
    "burn_in": 200,
    "sample_every": 10,
    "seed": None,      # None = derive from the top-level seed
}

NETWORK_KEEP_FRACTION = 0.2
SILHOUETTE_K_RANGE = range(2, 11)

# --k and friends override the lda section; --seed stays top-level
_LDA_OVERRIDE_KEYS = {"k", "alpha", "beta", "iterations", "burn_in",
                      "sample_every"}


@dataclasses.dataclass
class PipelineConfig:
    archive: str | None = None
    constituencies: str | None = None
    stopwords: str | None = None
    output_dir: str = "out"
    topic_names: list[str] | None = None
    window: list[str] | None = None          # [start, end] ISO dates
    lda: dict = dataclasses.field(default_factory=lambda: dict(_LDA_DEFAULTS))
    min_doc_fraction: float = 0.001
    entropy_window_days: int = 7
    smoothing_windows: list[int] = dataclasses.field(
        default_factory=lambda: [7, 30, 90])
    pam_k: int = 6
    pam_metric: str = "euclidean"
    powerlaw_x_min: int = 10
    thresholds: list[int] = dataclasses.field(
        default_factory=lambda: [10_000, 100_000])
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def lda_config(self) -> "lda.LdaConfig":
        fields = dict(_LDA_DEFAULTS)
        fields.update(self.lda)
        if fields["seed"] is None:
            fields["seed"] = derive_seed(self.seed, "stage:lda")
        return lda.LdaConfig(**fields)

    def stage_seed(self, stage: str) -> int:
        return derive_seed(self.seed, f"stage:{stage}")

    def meta(self) -> dict:
        return {
            "tool": f"petmine {__version__}",
            "config": config_digest(self.to_dict()),
            "seed": self.seed,
        }

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)


def load_config(config_path: str | None, overrides: dict) -> PipelineConfig:
    """Merge file values and flag overrides over the defaults.

    Flag names mirror config keys; an unknown key in the file is a
    configuration error rather than a silent no-op.
    """
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    values: dict = {}
    if config_path is not None:
        if not os.path.exists(config_path):
            raise ConfigError(f"config file not found: {config_path}")
        with open(config_path, encoding="utf-8") as fh:
            try:
                values = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        bad_lda = set(values.get("lda", {})) - set(_LDA_DEFAULTS)
        if bad_lda:
            raise ConfigError(f"unknown lda config keys: {sorted(bad_lda)}")
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "lda_seed":
            values["lda"] = dict(values.get("lda", {}), seed=value)
        elif key in _LDA_OVERRIDE_KEYS:
            values["lda"] = dict(values.get("lda", {}), **{key: value})
        else:
            values[key] = value
    try:
        cfg = PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc))
    cfg.lda_config()    # surface bad sampler settings now, not mid-run
    return cfg


def _require_input(path: str | None, what: str) -> str:
    # missing *configured* inputs are usage errors (exit 2)
    if path is None:
        raise ConfigError(f"no {what} path configured")
    if not os.path.exists(path):
        raise ConfigError(f"{what} not found: {path}")
    return path


def _require_snapshot(path: str, what: str) -> str:
    # missing *pipeline* artifacts are runtime errors (exit 1)
    if not os.path.exists(path):
        raise PetmineError(
            f"{what} not found: {path} (run the earlier stages first)")
    return path


def _sanitize(obj):
    """Make a payload JSON-safe: numpy scalars to Python, non-finite to None."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    return obj


def _write_json(cfg: PipelineConfig, name: str, payload: dict) -> None:
    obj = {"_meta": cfg.meta()}
    obj.update(payload)
    text = json.dumps(_sanitize(obj), indent=2, allow_nan=False)
    write_text(cfg.path(name), text + "\n")


def _topic_names(cfg: PipelineConfig, k: int) -> list[str]:
    if cfg.topic_names is None:
        return [f"topic_{t}" for t in range(k)]
    if len(cfg.topic_names) != k:
        raise ConfigError(
            f"{len(cfg.topic_names)} topic names for {k} topics")
    return list(cfg.topic_names)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(cfg: PipelineConfig, args) -> int:
    archive = _require_input(cfg.archive, "archive")
    constituencies: tuple = ()
    if cfg.constituencies is not None:
        constituencies = corpus.load_constituencies(
            _require_input(cfg.constituencies, "constituency CSV"))
    window = None
    if cfg.window is not None:
        window = tuple(datetime.date.fromisoformat(d) for d in cfg.window)
        if len(window) != 2 or window[0] > window[1]:
            raise ConfigError(f"bad window {cfg.window}")
    ingest_cfg = corpus.IngestConfig(window=window, constituencies=constituencies)
    c = corpus.load_archive(archive, ingest_cfg)
    corpus.save_corpus(c, cfg.path("corpus.jsonl"))
    corpus.write_rejects_report(c.ingest_report, cfg.path("rejects.csv"), cfg.meta())
    log.info("ingest: %d accepted, %d rejected, %d UK signatures",
             len(c.petitions), len(c.ingest_report.rejects),
             corpus.uk_signature_total(c))
    return 0


def cmd_fit(cfg: PipelineConfig, args) -> int:
    _require_snapshot(cfg.path("corpus.jsonl"), "corpus snapshot")
    c = corpus.load_corpus(cfg.path("corpus.jsonl"))
    stopwords = textprep.load_stopwords(cfg.stopwords)
    dtm = textprep.build_dtm(c, stopwords, cfg.min_doc_fraction)
    textprep.save_dtm(dtm, cfg.path("dtm.bin"))
    model = lda.fit(dtm, cfg.lda_config(), n_partitions=args.threads)
    lda.save_model(model, cfg.path("model.bin"))

    names = _topic_names(cfg, model.k)
    write_csv(cfg.path("topic_names.csv"), cfg.meta(),
              ["topic_index", "name"], list(enumerate(names)))
    write_csv(cfg.path("top_words.csv"), cfg.meta(),
              ["topic", "name"] + [f"word{i}" for i in range(1, 7)],
              [[t, names[t]] + lda.top_words(model, t, 6)
               for t in range(model.k)])
    instances = lda.make_intrusion_instances(model, cfg.stage_seed("intrusion"))
    write_csv(cfg.path("intrusion_instances.csv"), cfg.meta(),
              ["topic"] + [f"word{i}" for i in range(1, 7)],
              [[inst.topic_index, *inst.shown_words] for inst in instances])
    log.info("fit: k=%d, vocabulary=%d, %d retained samples",
             model.k, len(model.terms), len(model.config.retained_sweeps()))
    return 0


def _report_prevalence(cfg, model, c, names):
    prev = issues.prevalence(model, c)
    columns = ["topic", "name", "mass_by_petitions", "rank_p",
               "mass_by_signatures", "rank_s"]
    success = {}
    for t in cfg.thresholds:
        success[t] = (issues.success_probability(model, c, t),
                      issues.success_probability(model, c, t, smoothed=True))
        columns += [f"success_{t}", f"success_smoothed_{t}"]
    rows = []
    for k in range(model.k):
        row = [k, names[k],
               prev.by_petitions[k], prev.rank_by_petitions[k],
               prev.by_signatures[k], prev.rank_by_signatures[k]]
        for t in cfg.thresholds:
            row += [success[t][0][k], success[t][1][k]]
        rows.append(row)
    write_csv(cfg.path("prevalence.csv"), cfg.meta(), columns, rows)
    return prev, success


def _report_networks(cfg, model, prev, names):
    write_csv(cfg.path("network_nodes.csv"), cfg.meta(),
              ["topic", "name", "signatures"],
              [[k, names[k], prev.by_signatures[k]] for k in range(model.k)])
    nets = {
        "network_cooccurrence": issues.co_occurrence_network(
            model, prev.by_signatures),
        "network_worddist": issues.word_distribution_network(
            model, prev.by_signatures),
    }
    strongest = {}
    for stem, net in nets.items():
        write_csv(cfg.path(f"{stem}_edges.csv"), cfg.meta(),
                  ["source", "target", "weight"], issues.edge_list(net))
        pruned = issues.prune_network(net, NETWORK_KEEP_FRACTION)
        write_csv(cfg.path(f"{stem}_edges_pruned.csv"), cfg.meta(),
                  ["source", "target", "weight"], issues.edge_list(pruned))
        edges = issues.edge_list(net)
        if edges:
            i, j, _ = max(edges, key=lambda e: (e[2], -e[0], -e[1]))
            strongest[stem] = [int(i), int(j)]
        else:
            strongest[stem] = None
    return strongest


def _report_temporal(cfg, model, c):
    series = temporal.build_series(model, c)
    headers = ["date"] + [f"issue_{k}" for k in range(model.k)]
    write_csv(cfg.path("series_raw.csv"), cfg.meta(), headers,
              [[d.isoformat(), *row] for d, row in
               zip(series.dates, series.values)])
    for w in cfg.smoothing_windows:
        smoothed = temporal.smooth(series, w)
        write_csv(cfg.path(f"series_smooth_{w}.csv"), cfg.meta(), headers,
                  [[d.isoformat(), *row] for d, row in
                   zip(smoothed.dates, smoothed.values)])
    es = temporal.entropy_series(series, cfg.entropy_window_days)
    try:
        flags = temporal.detect_volatility(es)
    except PetmineError as exc:
        log.warning("volatility detection skipped: %s", exc)
        flags = {}
    write_csv(cfg.path("entropy.csv"), cfg.meta(),
              ["date", "entropy", "pct_change", "flagged", "direction"],
              [[d.isoformat(), es.h[i], es.pct_change[i],
                int(d in flags), flags.get(d, "")]
               for i, d in enumerate(es.dates)])
    mean, std, n = temporal.pct_change_stats(es)
    finite = es.h[np.isfinite(es.h)]
    stats = {
        "mean": float(np.mean(finite)) if finite.size else None,
        "min": float(np.min(finite)) if finite.size else None,
        "max": float(np.max(finite)) if finite.size else None,
        "pct_change_mean": mean,
        "pct_change_std": std,
        "pct_change_n": n,
        "flagged_dates": {d.isoformat(): flags[d] for d in sorted(flags)},
    }
    return stats


def _report_geo(cfg, model, c):
    profiles = geo.profile_constituencies(model, c, c.constituencies)
    k_issues = model.k
    n_with = sum(1 for p in profiles if p.total_signatures > 0)
    scaling = {}
    for mode in ("raw", "binned"):
        fit = geo.scaling_fit(profiles, mode, n_bins=min(10, n_with))
        scaling[mode] = dataclasses.asdict(fit)
        _write_json(cfg, f"scaling_{mode}.json", scaling[mode])

    result = geo.pam_cluster(profiles, cfg.pam_k, seed=cfg.stage_seed("pam"),
                             metric=cfg.pam_metric)
    write_csv(cfg.path("clusters.csv"), cfg.meta(), ["code", "cluster"],
              sorted(result.assignments.items()))
    shares = geo.cluster_issue_profile(result, profiles)
    write_csv(cfg.path("cluster_issue_shares.csv"), cfg.meta(),
              ["cluster"] + [f"share_{k}" for k in range(k_issues)],
              [[i, *row] for i, row in enumerate(shares)])

    n_included = sum(1 for p in profiles
                     if np.all(np.isfinite(p.z_scores)))
    ks = [k for k in SILHOUETTE_K_RANGE if k < n_included]
    sweep = geo.silhouette_sweep(profiles, ks, cfg.pam_metric) if ks else {}
    write_csv(cfg.path("silhouette.csv"), cfg.meta(), ["k", "score"],
              sorted(sweep.items()))

    write_csv(cfg.path("constituency_profiles.csv"), cfg.meta(),
              ["code", "name", "electorate", "total_signatures", "per_elector"]
              + [f"share_{k}" for k in range(k_issues)]
              + [f"z_{k}" for k in range(k_issues)] + ["cluster"],
              [[p.meta.code, p.meta.name, p.meta.electorate,
                p.total_signatures, p.per_elector,
                *p.issue_share, *p.z_scores,
                "" if p.cluster is None else p.cluster]
               for p in profiles])

    sizes = [0] * result.k
    for cluster_id in result.assignments.values():
        sizes[cluster_id] += 1
    totals = [p.total_signatures for p in profiles]
    stats = {
        "scaling": scaling,
        "mean_signatures_per_constituency":
            float(np.mean(totals)) if totals else None,
        "mean_per_elector":
            float(np.mean([p.per_elector for p in profiles])) if profiles
            else None,
        "clusters": {
            "k": result.k,
            "sizes": sizes,
            "total_cost": result.total_cost,
            "medoid_codes": [profiles[i].meta.code
                             for i in result.medoid_indices],
        },
        "silhouette": {str(k): v for k, v in sorted(sweep.items())},
    }
    return stats


def _report_powerlaw(cfg, c):
    counts = np.array([p.uk_signatures() for p in c.petitions], dtype=np.int64)
    cc = powerlaw.ccdf(counts)
    write_csv(cfg.path("ccdf.csv"), cfg.meta(), ["x", "p"],
              zip(cc.x, cc.p))
    # fit below the first threshold: behavior changes once a petition
    # crosses it, so the power law is only claimed for the region before
    truncated = counts[counts <= cfg.thresholds[0]] if cfg.thresholds else counts
    fit = powerlaw.fit_powerlaw(truncated, cfg.powerlaw_x_min)
    divergences = powerlaw.threshold_divergence(counts, fit, cfg.thresholds)
    payload = dict(dataclasses.asdict(fit),
                   divergences={str(t): v for t, v in divergences.items()})
    _write_json(cfg, "powerlaw.json", payload)
    return payload


def cmd_report(cfg: PipelineConfig, args) -> int:
    _require_snapshot(cfg.path("corpus.jsonl"), "corpus snapshot")
    _require_snapshot(cfg.path("model.bin"), "model snapshot")
    c = corpus.load_corpus(cfg.path("corpus.jsonl"))
    model = lda.load_model(cfg.path("model.bin"))
    names = _topic_names(cfg, model.k)

    summary: dict = {
        "corpus": {
            "accepted": len(c.petitions),
            "uk_signature_total": corpus.uk_signature_total(c),
            "window": [c.window[0].isoformat(), c.window[1].isoformat()],
        },
        "lda": {
            "k": model.k,
            "mean_max_theta": float(np.mean(model.theta.max(axis=1))),
        },
    }
    stages = [
        ("issues", _report_issues_stage),
        ("temporal", _report_temporal_stage),
        ("geo", _report_geo_stage),
        ("powerlaw", _report_powerlaw_stage),
    ]
    for module_name, stage in stages:
        try:
            stage(cfg, model, c, names, summary)
        except PetmineError as exc:
            raise PetmineError(f"{module_name}: {exc}")
    _write_json(cfg, "summary.json", summary)
    log.info("report: wrote %s", cfg.path("summary.json"))
    return 0


def _report_issues_stage(cfg, model, c, names, summary):
    prev, success = _report_prevalence(cfg, model, c, names)
    strongest = _report_networks(cfg, model, prev, names)
    summary["prevalence"] = {
        "rank_by_petitions": prev.rank_by_petitions.tolist(),
        "rank_by_signatures": prev.rank_by_signatures.tolist(),
        "success": {str(t): success[t][0].tolist() for t in cfg.thresholds},
        "success_smoothed": {str(t): success[t][1].tolist()
                             for t in cfg.thresholds},
    }
    summary["networks"] = {
        "strongest_co_occurrence_edge": strongest["network_cooccurrence"],
        "strongest_word_distribution_edge": strongest["network_worddist"],
    }


def _report_temporal_stage(cfg, model, c, names, summary):
    summary["entropy"] = _report_temporal(cfg, model, c)


def _report_geo_stage(cfg, model, c, names, summary):
    summary["geo"] = _report_geo(cfg, model, c)


def _report_powerlaw_stage(cfg, model, c, names, summary):
    summary["powerlaw"] = _report_powerlaw(cfg, c)


def cmd_intrusion_score(cfg: PipelineConfig, args) -> int:
    _require_snapshot(cfg.path("model.bin"), "model snapshot")
    answers_path = _require_input(args.answers, "answers CSV")
    model = lda.load_model(cfg.path("model.bin"))
    instances = lda.make_intrusion_instances(model, cfg.stage_seed("intrusion"))
    by_topic = {inst.topic_index: inst for inst in instances}

    picked, answers = [], []
    with open(answers_path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh)
                if r and not r[0].startswith("#")]
    if not rows or [c.strip() for c in rows[0]] != ["topic", "subject", "position"]:
        raise ConfigError(
            f"answers CSV must have header topic,subject,position: {answers_path}")
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ConfigError(f"answers row {line_no} has {len(row)} fields")
        try:
            topic, position = int(row[0]), int(row[2])
        except ValueError:
            raise ConfigError(f"answers row {line_no} is not numeric")
        if topic not in by_topic:
            raise ConfigError(f"answers reference unknown topic {topic}")
        picked.append(by_topic[topic])
        answers.append(position)
    score = lda.score_intrusion(picked, answers)

    n_by_topic: dict[int, int] = {}
    for inst in picked:
        n_by_topic[inst.topic_index] = n_by_topic.get(inst.topic_index, 0) + 1
    rows_out = [[t, n_by_topic[t], score.per_topic[t],
                 int(t in score.flagged)]
                for t in sorted(score.per_topic)]
    rows_out.append(["overall", len(answers), score.overall, ""])
    write_csv(cfg.path("intrusion_score.csv"), cfg.meta(),
              ["topic", "n_answers", "accuracy", "flagged"], rows_out)
    log.info("intrusion-score: overall accuracy %.3f, %d topics flagged",
             score.overall, len(score.flagged))
    return 0


def cmd_grid(cfg: PipelineConfig, args) -> int:
    _require_snapshot(cfg.path("dtm.bin"), "document-term matrix snapshot")
    dtm = textprep.load_dtm(cfg.path("dtm.bin"))
    if not 0.0 < args.holdout < 1.0:
        raise ConfigError("--holdout must be in (0, 1)")
    n_hold = int(math.ceil(args.holdout * dtm.n_docs))
    if n_hold >= dtm.n_docs:
        raise ConfigError("holdout fraction leaves no training documents")
    rng = np.random.Generator(np.random.PCG64(cfg.stage_seed("grid")))
    order = rng.permutation(dtm.n_docs)
    hold, train = np.sort(order[:n_hold]), np.sort(order[n_hold:])
    train_dtm = textprep.DocumentTermMatrix(
        n_docs=len(train), vocabulary=dtm.vocabulary,
        counts=dtm.counts[train], doc_ids=tuple(dtm.doc_ids[i] for i in train),
        prune_report=dtm.prune_report)
    hold_counts = dtm.counts[hold]

    base = cfg.lda_config()
    rows = []
    for k in args.k_values:
        for alpha in args.alpha_values:
            for beta in args.beta_values:
                run_cfg = dataclasses.replace(base, k=k, alpha=alpha, beta=beta)
                model = lda.fit(train_dtm, run_cfg, n_partitions=args.threads)
                total, per_token = lda.held_out_log_likelihood(
                    model, hold_counts)
                rows.append([k, alpha, beta, model.log_likelihood_trace[-1],
                             total, per_token])
                log.info("grid: k=%d alpha=%g beta=%g per-token %.4f",
                         k, alpha, beta, per_token)
    write_csv(cfg.path("grid.csv"), cfg.meta(),
              ["k", "alpha", "beta", "train_log_likelihood",
               "holdout_log_likelihood", "holdout_per_token"], rows)
    return 0


def cmd_xmin_scan(cfg: PipelineConfig, args) -> int:
    _require_snapshot(cfg.path("corpus.jsonl"), "corpus snapshot")
    c = corpus.load_corpus(cfg.path("corpus.jsonl"))
    counts = np.array([p.uk_signatures() for p in c.petitions], dtype=np.int64)
    if args.x_mins is not None:
        candidates = args.x_mins
    else:
        # every observed value that keeps at least 10 tail points
        unique = np.unique(counts)
        candidates = [int(v) for v in unique
                      if v >= 1 and (counts >= v).sum() >= 10]
        if len(candidates) > 200:
            idx = np.linspace(0, len(candidates) - 1, 200).round().astype(int)
            candidates = [candidates[i] for i in np.unique(idx)]
    feasible = [v for v in candidates if v >= 1 and (counts >= v).sum() >= 2]
    dropped = sorted(set(candidates) - set(feasible))
    if dropped:
        log.warning("xmin-scan: dropped infeasible candidates %s", dropped)
    if not feasible:
        raise PetmineError("no feasible x_min candidate")
    fits = powerlaw.scan_xmin(counts, feasible)
    best = powerlaw.best_by_ks(fits)
    write_csv(cfg.path("xmin_scan.csv"), cfg.meta(),
              ["x_min", "exponent", "n_tail", "ks_distance", "best"],
              [[f.x_min, f.exponent, f.n_tail, f.ks_distance,
                int(f.x_min == best.x_min)] for f in fits])
    log.info("xmin-scan: KS-minimizing x_min=%d (alpha=%.4f)",
             best.x_min, best.exponent)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _str_list(text: str) -> list[str]:
    return [v for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--archive", help="petition archive (JSON lines)")
    common.add_argument("--constituencies", help="constituency metadata CSV")
    common.add_argument("--stopwords", help="stopword list, one word per line")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--topic-names", dest="topic_names", type=_str_list,
                        help="comma-separated issue names, one per topic")
    common.add_argument("--window", type=_str_list,
                        help="analysis window as START,END (ISO dates)")
    common.add_argument("--seed", type=int, help="top-level seed")
    common.add_argument("--k", type=int, help="number of topics")
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--iterations", type=int)
    common.add_argument("--burn-in", dest="burn_in", type=int)
    common.add_argument("--sample-every", dest="sample_every", type=int)
    common.add_argument("--lda-seed", dest="lda_seed", type=int,
                        help="override the derived sampler seed")
    common.add_argument("--min-doc-fraction", dest="min_doc_fraction",
                        type=float)
    common.add_argument("--entropy-window-days", dest="entropy_window_days",
                        type=int)
    common.add_argument("--smoothing-windows", dest="smoothing_windows",
                        type=_int_list)
    common.add_argument("--pam-k", dest="pam_k", type=int)
    common.add_argument("--pam-metric", dest="pam_metric",
                        choices=sorted(geo._METRICS))
    common.add_argument("--powerlaw-x-min", dest="powerlaw_x_min", type=int)
    common.add_argument("--thresholds", type=_int_list)
    common.add_argument("--threads", type=int, default=1,
                        help="sampler partitions (default 1)")

    parser = argparse.ArgumentParser(
        prog="petmine",
        description="Petition archive opinion-mining pipeline.")
    parser.add_argument("--version", action="version",
                        version=f"petmine {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", parents=[common],
                   help="parse the archive into a corpus snapshot"
                   ).set_defaults(func=cmd_ingest)
    sub.add_parser("fit", parents=[common],
                   help="fit the topic model and export top words"
                   ).set_defaults(func=cmd_fit)
    sub.add_parser("report", parents=[common],
                   help="run all analytics and write the summary"
                   ).set_defaults(func=cmd_report)
    p = sub.add_parser("intrusion-score", parents=[common],
                       help="score annotator answers against the hidden intruders")
    p.add_argument("--answers", required=True,
                   help="CSV of topic,subject,position")
    p.set_defaults(func=cmd_intrusion_score)
    p = sub.add_parser("grid", parents=[common],
                       help="sweep sampler settings against held-out likelihood")
    p.add_argument("--k-values", dest="k_values", type=_int_list,
                   default=[5, 10, 15])
    p.add_argument("--alpha-values", dest="alpha_values", type=_float_list,
                   default=[0.1])
    p.add_argument("--beta-values", dest="beta_values", type=_float_list,
                   default=[0.1])
    p.add_argument("--holdout", type=float, default=0.1,
                   help="held-out document fraction")
    p.set_defaults(func=cmd_grid)
    p = sub.add_parser("xmin-scan", parents=[common],
                       help="fit the signature tail at every cutoff candidate")
    p.add_argument("--x-mins", dest="x_mins", type=_int_list,
                   help="comma-separated cutoff candidates")
    p.set_defaults(func=cmd_xmin_scan)
    return parser


_CONFIG_KEYS = [
    "archive", "constituencies", "stopwords", "output_dir", "topic_names",
    "window", "seed", "min_doc_fraction", "entropy_window_days",
    "smoothing_windows", "pam_k", "pam_metric", "powerlaw_x_min", "thresholds",
    "k", "alpha", "beta", "iterations", "burn_in", "sample_every", "lda_seed",
]


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    try:
        cfg = load_config(args.config, overrides)
        os.makedirs(cfg.output_dir, exist_ok=True)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"petmine: config error: {exc}", file=sys.stderr)
        return 2
    except PetmineError as exc:
        print(f"petmine: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
