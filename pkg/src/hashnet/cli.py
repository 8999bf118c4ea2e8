"""Command line: one subcommand per pipeline stage, file based handoff.

    hashnet synth --out work
    hashnet ingest-summary --config work/config.yaml
    hashnet build-graphs   --config work/config.yaml
    hashnet metrics | topics | similarity | entropy | compare | report  --config ...

Every stage records what it read and wrote (sha256) in ``manifest.json`` in
the results directory.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, compare, graph, ingest, metrics, plotting, synth, topics
from . import config as config_mod
from . import pipeline as P
from .attention import day_date, pair_key
from .entropy import hashtag_entropy_series, topic_entropy_series
from .tables import read_csv, write_csv

POLICIES = ["rolling", "aggregated", "static"]


class StageError(RuntimeError):
    pass


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Run:
    """Resolved configuration and results directory for one invocation."""

    def __init__(self, args):
        self.args = args
        self.cfg = config_mod.load_config(args.config)
        analysis = dict(self.cfg.get("analysis") or {})
        if args.seed is not None:
            analysis["seed"] = args.seed
        self.cfg["analysis"] = analysis
        data = self.cfg["data"]
        if args.date_from or args.date_to:
            win = dict(data.get("window") or {})
            if args.date_from:
                win["start"] = args.date_from
            if args.date_to:
                win["end"] = args.date_to
            data["window"] = win
        self.settings = P.Settings.from_dict(analysis)
        self.out = config_mod.resolve(self.cfg, self.cfg["output"])
        self.hash = config_mod.config_hash(self.cfg)
        self.threads = max(1, args.threads or 1)
        self.policies = [args.policy] if args.policy else list(POLICIES)

    # -- manifest ---------------------------------------------------------
    @property
    def manifest_path(self) -> Path:
        return self.out / "manifest.json"

    def manifest(self) -> dict:
        if self.manifest_path.exists():
            return json.loads(self.manifest_path.read_text(encoding="utf-8"))
        return {"config_hash": self.hash, "stages": {}}

    def check_hash(self):
        man = self.manifest()
        old = man.get("config_hash")
        if old and old != self.hash and not self.args.force:
            print(f"warning: {self.manifest_path} was written with config {old[:12]}, "
                  f"now {self.hash[:12]}; earlier outputs may be stale (--force silences this)",
                  file=sys.stderr)

    def record(self, stage: str, inputs: dict, outputs: list, extra: dict | None = None):
        man = self.manifest()
        man["config_hash"] = self.hash
        man["version"] = __version__
        entry = man["stages"].get(stage, {})
        prev_out = entry.get("outputs", {})
        prev_out.update({self.rel(p): sha256_file(p) for p in outputs})
        entry = {
            "seed": self.settings.seed,
            "inputs": dict(sorted({**entry.get("inputs", {}), **inputs}.items())),
            "outputs": dict(sorted(prev_out.items())),
        }
        entry.update(extra or {})
        man["stages"][stage] = entry
        man["stages"] = dict(sorted(man["stages"].items()))
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest_path.write_text(json.dumps(man, indent=1, sort_keys=True) + "\n",
                                      encoding="utf-8")

    def rel(self, path) -> str:
        return Path(path).resolve().relative_to(self.out.resolve()).as_posix()

    def upstream(self, path, stage: str) -> Path:
        path = Path(path)
        if not path.exists():
            raise StageError(f"{path} not found; run `hashnet {stage}` first")
        return path

    def digest_inputs(self, paths: list) -> dict:
        return {self.rel(p): sha256_file(p) for p in paths}

    # -- data ---------------------------------------------------------------
    def data_paths(self) -> dict:
        data = self.cfg["data"]
        out = {}
        for key in ("events", "anchors", "locations"):
            p = config_mod.resolve(self.cfg, data.get(key))
            if p is not None and p.exists():
                out[key] = p
            elif key == "events":
                raise StageError(f"event file {p} not found; run `hashnet synth` or fix data.events")
            elif key == "anchors":
                raise StageError(f"anchor file {p} not found")
        return out

    def window(self):
        win = self.cfg["data"].get("window")
        if not win:
            return None
        return P.to_timestamp(win["start"]), P.to_timestamp(win["end"])

    def corpus(self) -> P.Corpus:
        paths = self.data_paths()
        schema = ingest.Schema.from_mapping(self.cfg["data"].get("schema"))
        return P.load_corpus(paths["events"], paths["anchors"], paths.get("locations"),
                             self.window(), schema)

    def data_digests(self) -> dict:
        return {f"data:{k}": sha256_file(p) for k, p in sorted(self.data_paths().items())}

    def short(self, policy: str) -> str:
        return graph.SHORT_NAMES[graph.policy_kind(policy)]

    def pmap(self, fn, items):
        if self.threads == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# stages


def cmd_synth(args) -> int:
    if args.config:
        cfg = config_mod.load_config(args.config)
        sec = cfg["synth"]
        name = args.scenario or sec.get("scenario", "default")
        seed = args.seed if args.seed is not None else sec.get("seed")
        out = config_mod.resolve(cfg, sec.get("out", "corpus"))
        overrides = sec.get("overrides") or {}
        write_config = None
    else:
        name = args.scenario or "default"
        seed = args.seed
        base = Path(args.out or ".")
        out = base / "corpus"
        overrides = {}
        write_config = base / "config.yaml"
    scfg = synth.scenario(name, seed)
    for key, value in overrides.items():
        if not hasattr(scfg, key):
            raise synth.SynthConfigError(f"unknown synth override {key!r}")
        setattr(scfg, key, value)
    corpus = synth.generate(scfg)
    paths = synth.write_corpus(corpus, out)
    if write_config is not None:
        start, end = scfg.window
        cfg = {
            "data": {"events": "corpus/events.jsonl", "anchors": "corpus/anchors.jsonl",
                     "locations": "corpus/locations.txt",
                     "window": {"start": day_date(start, 0), "end": day_date(end, 0)}},
            "analysis": {"null_size": scfg.null_model_size},
            "output": "results",
            "synth": {"scenario": name, "seed": scfg.seed, "out": "corpus"},
        }
        config_mod.dump_config(cfg, write_config)
    print(f"wrote {len(corpus.records)} events to {paths['events']}")
    return 0


def cmd_ingest_summary(run: Run) -> int:
    corpus = run.corpus()
    s = run.settings
    assignment = ingest.assign_groups(corpus.events, corpus.anchors, s.threshold, ingest.STATIC)
    groups = P.analysis_groups(corpus, s)
    summary = ingest.dataset_summary(corpus.events, assignment, corpus.profiles)
    out = run.out
    files = [
        write_csv(out / "summary.csv", ["key", "value"],
                  list(summary.rows()) + [("n_lines", corpus.n_lines),
                                          ("rejected_lines", len(corpus.rejects)),
                                          ("events_in_window", len(corpus.events))]),
        write_csv(out / "hashtag_histogram.csv", ["n_hashtags", "n_events"],
                  sorted(ingest.hashtags_per_tweet_histogram(corpus.scoped).items())),
        write_csv(out / "rejects.csv", ["line", "reason"], corpus.rejects),
        write_csv(out / "groups.csv", ["user", "label"],
                  [(u, label) for label, members in groups.items() for u in members]),
    ]
    weekly = ingest.assign_groups(corpus.events, corpus.anchors, s.threshold, ingest.WEEKLY,
                                  start=corpus.window[0], n_weeks=corpus.n_weeks)
    files.append(write_csv(out / "group_sizes_weekly.csv", ["week", "label", "size"],
                           [(w, label, n) for w in weekly.weeks
                            for label, n in weekly.group_sizes(w).items()]))
    flows = ingest.weekly_group_flows(weekly)
    files.append(write_csv(out / "flows.csv", ["week", "from_label", "to_label", "count"],
                           [(f.week, f.from_label, f.to_label, f.count) for f in flows]))
    run.record("ingest-summary", run.data_digests(), files, {"threshold": s.threshold})
    print(f"{len(corpus.events)} events, {len(corpus.rejects)} rejected, "
          f"{summary.in_scope_users} in-scope users")
    return 0


def _snapshot_dir(run: Run, policy: str) -> Path:
    return run.out / "graphs" / run.short(policy)


def _snapshot_files(run: Run, policy: str) -> list:
    d = run.upstream(_snapshot_dir(run, policy), "build-graphs")
    files = sorted(d.glob("snapshot_*.tsv"))
    if not files:
        raise StageError(f"no snapshots in {d}; run `hashnet build-graphs` first")
    return files


def cmd_build_graphs(run: Run) -> int:
    corpus = run.corpus()
    out_files = []
    for policy in run.policies:
        series = P.build_graphs(corpus, run.settings, policy)
        d = _snapshot_dir(run, policy)
        if d.exists():
            for old in d.glob("snapshot_*.tsv"):
                old.unlink()
        for snap in series:
            out_files.append(graph.export_snapshot(snap, d / f"snapshot_{snap.week_index:03d}.tsv"))
        print(f"{policy}: {len(series)} snapshots")
    run.record("build-graphs", run.data_digests(), out_files, {"support": run.settings.support})
    return 0


def cmd_metrics(run: Run) -> int:
    out_files, inputs = [], []
    for policy in run.policies:
        files = _snapshot_files(run, policy)
        inputs += files
        snaps = [graph.import_snapshot(f) for f in files]
        rows = run.pmap(metrics.compute_metrics, snaps)
        short = run.short(policy)
        out_files.append(write_csv(
            run.out / f"metrics_{short}.csv",
            ["policy", "week_index", "start", "end"] + metrics.SnapshotMetrics.columns(),
            [[snap.policy.kind, snap.week_index, snap.time_range[0], snap.time_range[1]] + m.row()
             for snap, m in zip(snaps, rows)]))
        if len(snaps) >= 2:
            rates = metrics.compute_persistence(snaps)
            out_files.append(write_csv(
                run.out / f"persistence_{short}.csv",
                ["policy", "week_index", "node_retention", "edge_retention", "node_renewal",
                 "edge_renewal"],
                [[snaps[0].policy.kind, *r] for r in rates.rows()]))
    run.record("metrics", run.digest_inputs(inputs), out_files)
    return 0


def _partition_files(run: Run, policy: str) -> list:
    d = run.upstream(run.out / "topics" / run.short(policy), "topics")
    files = sorted(d.glob("partition_*.tsv"))
    if not files:
        raise StageError(f"no partitions in {d}; run `hashnet topics` first")
    return files


def cmd_topics(run: Run) -> int:
    out_files, inputs, tags = [], [], set()
    det = run.settings.detector()
    seed, min_size = run.settings.seed, run.settings.min_topic_size
    for policy in run.policies:
        files = _snapshot_files(run, policy)
        inputs += files
        snaps = [graph.import_snapshot(f) for f in files]
        parts = run.pmap(lambda s: topics.detect_topics(s, det, seed, min_size), snaps)
        d = run.out / "topics" / run.short(policy)
        if d.exists():
            for old in d.glob("partition_*.tsv"):
                old.unlink()
        for p in parts:
            out_files.append(topics.write_partition(p, d / f"partition_{p.week_index:03d}.tsv"))
            tags.add(p.detector_tag)
        out_files.append(write_csv(
            run.out / f"topic_counts_{run.short(policy)}.csv",
            ["policy", "week_index", "n_topics", "n_noise"],
            [(p.policy, p.week_index, p.n_topics, len(p.noise)) for p in parts]))
    run.record("topics", run.digest_inputs(inputs), out_files, {"detectors": sorted(tags)})
    return 0


def _groups(run: Run) -> tuple[dict, Path]:
    path = run.upstream(run.out / "groups.csv", "ingest-summary")
    groups: dict = {}
    for r in read_csv(path):
        groups.setdefault(r["label"], []).append(r["user"])
    return groups, path


def _group_order(groups: dict) -> list:
    labels = sorted(g for g in groups if g != P.NULL_GROUP)
    return labels + ([P.NULL_GROUP] if P.NULL_GROUP in groups else [])


def cmd_similarity(run: Run) -> int:
    groups, gpath = _groups(run)
    labels = _group_order(groups)
    pairs = P.group_pairs(labels)
    corpus = run.corpus()
    index = P.day_index(corpus)
    out_files, inputs = [], [gpath]
    for policy in run.policies:
        files = _partition_files(run, policy)
        inputs += files
        parts = [topics.read_partition(f) for f in files]
        prun = P.PolicyRun(graph.policy_kind(policy), [], parts)
        series = P.similarity(corpus, run.settings, prun, groups, pairs, index)
        rows = []
        for (a, b) in pairs:
            for day, s, na, nb in series[(a, b)].points:
                rows.append((pair_key(a, b), a, b, day, day_date(corpus.window[0], day), s, na, nb))
        out_files.append(write_csv(
            run.out / f"similarity_{run.short(policy)}.csv",
            ["pair", "group_a", "group_b", "day", "date", "similarity", "active_a", "active_b"],
            rows))
    run.record("similarity", {**run.data_digests(), **run.digest_inputs(inputs)}, out_files,
               {"normalization": run.settings.normalization})
    return 0


def cmd_entropy(run: Run) -> int:
    groups, gpath = _groups(run)
    corpus = run.corpus()
    index = P.day_index(corpus)
    s = run.settings
    targets = [("all", None)] + [(g, groups[g]) for g in _group_order(groups)]
    rows = []
    for label, members in targets:
        for day, pt in hashtag_entropy_series(index, None, members, s.entropy_base):
            rows.append((label, day, day_date(corpus.window[0], day), pt.value, pt.n_items,
                         pt.n_users))
    out_files = [write_csv(run.out / "entropy_hashtag.csv",
                           ["group", "day", "date", "entropy", "n_items", "n_users"], rows)]
    inputs = [gpath]
    step_days = s.step_days
    for policy in run.policies:
        files = _partition_files(run, policy)
        inputs += files
        parts = [topics.read_partition(f) for f in files]
        rows = []
        for label, members in targets:
            for week, pt in topic_entropy_series(index, parts, policy, members, s.entropy_base,
                                                 s.step):
                last = (week + 1) * step_days - 1
                rows.append((label, week, day_date(corpus.window[0], last), pt.value,
                             pt.n_items, pt.n_users))
        out_files.append(write_csv(
            run.out / f"entropy_topic_{run.short(policy)}.csv",
            ["group", "week_index", "date", "entropy", "n_items", "n_users"], rows))
    run.record("entropy", {**run.data_digests(), **run.digest_inputs(inputs)}, out_files)
    return 0


def _similarity_table(run: Run, policy: str) -> tuple[dict, Path]:
    path = run.upstream(run.out / f"similarity_{run.short(policy)}.csv", "similarity")
    out: dict = {}
    for r in read_csv(path):
        out.setdefault((r["group_a"], r["group_b"]), {})[r["date"]] = float(r["similarity"])
    return out, path


def cmd_compare(run: Run) -> int:
    tables, inputs = {}, []
    for p in POLICIES:  # every policy with a similarity table
        if (run.out / f"similarity_{p}.csv").exists():
            tables[p], path = _similarity_table(run, p)
            inputs.append(path)
    if len(tables) < 2:
        raise StageError("compare needs similarity tables for two policies; "
                         "run `hashnet similarity` first")
    low = float(run.cfg.get("compare", {}).get("low_threshold", compare.LOW_R))
    names = sorted(tables, key=POLICIES.index)
    out_files = []
    for i, pa in enumerate(names):
        for pb in names[i + 1:]:
            series = {}
            for pair in sorted(set(tables[pa]) | set(tables[pb])):
                series[pair] = {k: v for k, v in ((pa, tables[pa].get(pair)),
                                                  (pb, tables[pb].get(pair))) if v is not None}
            labels = _group_order({g: None for pair in series for g in pair})
            mat = compare.correlation_matrix(series, (pa, pb), labels, low)
            grid = mat.grid()
            out_files.append(write_csv(run.out / f"compare_{pa}_{pb}.csv", ["group"] + labels,
                                       [[a] + row for a, row in zip(labels, grid)]))
            cells = []
            for pair in sorted(series):
                by = series[pair]
                n = len(set(by.get(pa, {})) & set(by.get(pb, {})))
                r = mat.get(*pair)
                cells.append((pair[0], pair[1], r, n, r is not None and r < low))
            out_files.append(write_csv(run.out / f"compare_{pa}_{pb}_cells.csv",
                                       ["group_a", "group_b", "pearson_r", "n_points", "low"],
                                       cells))
            flagged = mat.low_cells()
            print(f"{pa} vs {pb}: {len(flagged)} cells below {low}: "
                  + ", ".join(f"{a}|{b}" for a, b in flagged))
    run.record("compare", run.digest_inputs(inputs), out_files, {"low_threshold": low})
    return 0


def cmd_report(run: Run) -> int:
    out = run.out
    if not out.exists() or not any(out.glob("*.csv")):
        raise StageError(f"no stage outputs in {out}; run `hashnet ingest-summary` and the "
                         "later stages first")
    fig = out / "figures"
    made, inputs = [], []

    def load(name):
        p = out / name
        if p.exists():
            inputs.append(p)
            return read_csv(p)
        return None

    def per_policy(prefix):
        got = {}
        for p in POLICIES:
            rows = load(f"{prefix}_{p}.csv")
            if rows:
                got[rows[0]["policy"] if "policy" in rows[0] else p] = rows
        return got

    if (rows := load("hashtag_histogram.csv")):
        made.append(plotting.hashtag_histogram(rows, fig / "hashtags_per_post.svg"))
    if (rows := load("group_sizes_weekly.csv")):
        made.append(plotting.group_sizes(rows, fig / "weekly_group_sizes.svg"))
    if (m := per_policy("metrics")):
        made.append(plotting.metrics_panels(m, fig / "graph_metrics.svg"))
    if (m := per_policy("persistence")):
        made.append(plotting.persistence_panels(m, fig / "persistence.svg"))
    counts = [r for p in POLICIES for r in (load(f"topic_counts_{p}.csv") or [])]
    if counts:
        made.append(plotting.topic_counts(counts, fig / "topic_counts.svg"))
    if (rows := load("entropy_hashtag.csv")):
        made.append(plotting.hashtag_entropy(rows, fig / "hashtag_entropy.svg"))
    ent = {p: rows for p in POLICIES if (rows := load(f"entropy_topic_{p}.csv"))}
    if ent:
        made.append(plotting.topic_entropy(ent, fig / "topic_entropy.svg"))
    sims = {p: rows for p in POLICIES if (rows := load(f"similarity_{p}.csv"))}
    if sims:
        made.append(plotting.similarity_lines(sims, fig / "similarity_cross.svg"))
        made.append(plotting.similarity_lines(sims, fig / "similarity_self.svg", self_pairs=True))
        names = [p for p in POLICIES if p in sims]
        for i, pa in enumerate(names):
            for pb in names[i + 1:]:
                made.append(plotting.policy_scatter(sims[pa], sims[pb], (pa, pb),
                                                    fig / f"scatter_{pa}_{pb}.svg"))
    low = float(run.cfg.get("compare", {}).get("low_threshold", compare.LOW_R))
    for i, pa in enumerate(POLICIES):
        for pb in POLICIES[i + 1:]:
            if (rows := load(f"compare_{pa}_{pb}.csv")):
                made.append(plotting.correlation_heatmap(rows, fig / f"pearson_{pa}_{pb}.svg",
                                                         f"{pa} vs {pb}", low))
    if not made:
        raise StageError(f"nothing to plot in {out}")
    run.record("report", run.digest_inputs(inputs), made)
    print(f"{len(made)} figures in {fig}")
    return 0


STAGES = {
    "ingest-summary": cmd_ingest_summary,
    "build-graphs": cmd_build_graphs,
    "metrics": cmd_metrics,
    "topics": cmd_topics,
    "similarity": cmd_similarity,
    "entropy": cmd_entropy,
    "compare": cmd_compare,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON run configuration")
    common.add_argument("--policy", choices=POLICIES, help="restrict to one memory policy")
    common.add_argument("--from", dest="date_from", help="capture window start (ISO date)")
    common.add_argument("--to", dest="date_to", help="capture window end, exclusive (ISO date)")
    common.add_argument("--seed", type=int, help="detector / generator seed")
    common.add_argument("--threads", type=int, default=1, help="worker cap within a stage")
    common.add_argument("--force", action="store_true",
                        help="do not warn when the config differs from the manifest")
    parser = argparse.ArgumentParser(prog="hashnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("synth", parents=[common], help="generate a planted corpus")
    sp.add_argument("--scenario", choices=sorted(synth.SCENARIOS))
    sp.add_argument("--out", help="directory for corpus/ and config.yaml (without --config)")
    for name in STAGES:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            return cmd_synth(args)
        run = Run(args)
        run.check_hash()
        return STAGES[args.command](run)
    except (StageError, config_mod.ConfigError, synth.SynthConfigError, ingest.IngestError,
            graph.SnapshotFormatError, topics.DetectorError, ValueError) as exc:
        print(f"hashnet {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
