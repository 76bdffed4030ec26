"""Command-line entry point.

Subcommands cover the whole pipeline: synthetic corpus generation,
validation, dictionary build, sessionization, counting, funnels, roll-ups,
summary stats, language models, collocations and the event catalog.
Composition across stages is the shell's job; every stage is idempotent on
unchanged inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date
from pathlib import Path
from typing import Sequence

from . import catalog as catalog_mod
from . import modeling, queries, synth
from .dictionary import build_dictionary, load_dictionary, save_dictionary
from .errors import SessionSeqError
from .events import compile_pattern
from .logio import LogWindow, scan_log_window, write_log_window
from .sessions import (
    DEFAULT_GAP_SECONDS,
    SessionizeStats,
    read_session_file,
    sessionize,
    write_session_file,
)

DEFAULT_CATEGORY = "client_events"

CONFIG_KEYS = ("root", "log_root", "sequences_root", "dictionary_path",
               "category", "date", "mode", "gap_seconds", "smoothing_k",
               "sample_size", "seed")


def _iso_date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from exc


def _user_id_list(text: str) -> frozenset[int]:
    try:
        return frozenset(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated user ids, got {text!r}") from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--root", default=".",
                        help="base directory for all relative paths")
    parser.add_argument("--log-root", dest="log_root", default=None,
                        help="event log root (default: ROOT/logs)")
    parser.add_argument("--sequences-root", dest="sequences_root", default=None,
                        help="session sequences root (default: ROOT/sequences)")
    parser.add_argument("--dictionary-path", dest="dictionary_path", default=None,
                        help="dictionary file (default: ROOT/dictionary-DATE.json)")
    parser.add_argument("--category", default=DEFAULT_CATEGORY)
    parser.add_argument("--date", type=_iso_date, default=None,
                        help="day to process, YYYY-MM-DD (UTC); required "
                             "unless supplied by --config")


class Paths:
    """Resolved locations for one invocation, all relative to --root."""

    def __init__(self, args: argparse.Namespace):
        if args.date is None:
            raise SessionSeqError("a date is required (use --date or a config file)")
        root = Path(args.root)
        self.root = root
        self.log_root = Path(args.log_root) if args.log_root else root / "logs"
        self.sequences_root = (Path(args.sequences_root)
                               if args.sequences_root else root / "sequences")
        if args.dictionary_path:
            self.dictionary_path = Path(args.dictionary_path)
        else:
            self.dictionary_path = root / f"dictionary-{args.date.isoformat()}.json"
        self.category = args.category
        self.day: date = args.date

    def window(self) -> LogWindow:
        return LogWindow.for_day(self.log_root, self.category, self.day)


def _cmd_gen(args: argparse.Namespace) -> int:
    paths = Paths(args)
    config = synth.GenConfig(
        day=paths.day,
        event_types=args.events,
        zipf_exponent=args.zipf,
        sessions=args.sessions,
        mean_session_length=args.mean_length,
        seed=args.seed,
    )
    count = 0

    def counted():
        nonlocal count
        for event in synth.generate_corpus(config):
            count += 1
            yield event

    files = write_log_window(counted(), paths.window(), compress=args.compress)
    print(f"events={count} sessions={config.sessions} files={len(files)}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    paths = Paths(args)
    stream, stats = scan_log_window(paths.window(), args.mode)
    for _ in stream:
        pass
    print(f"files_read={stats.files_read}")
    print(f"records_ok={stats.records_ok}")
    print(f"records_rejected={stats.records_rejected}")
    print(f"warnings={stats.warnings}")
    for path, line_no, reason in stats.rejected_samples:
        print(f"rejected: {path}:{line_no}: {reason}")
    return 0 if stats.records_rejected == 0 else 1


def _cmd_build_dict(args: argparse.Namespace) -> int:
    paths = Paths(args)
    stream, stats = scan_log_window(paths.window(), args.mode)
    dictionary = build_dictionary(
        stream,
        sample_size=args.sample_size,
        built_for=paths.day,
        seed=args.seed,
    )
    save_dictionary(dictionary, paths.dictionary_path)
    print(f"entries={len(dictionary)} records_ok={stats.records_ok} "
          f"records_rejected={stats.records_rejected} "
          f"path={paths.dictionary_path}")
    return 0


def _sessionize_records(args: argparse.Namespace, paths: Paths, dictionary):
    """Sessionize the day's scan, optionally sharded by session key.

    Results are independent of the worker count; shards only bound how
    much of the input one pass holds.
    """
    workers = max(1, args.workers)
    stream, scan_stats = scan_log_window(paths.window(), args.mode)
    if workers == 1:
        record_stream, stats = sessionize(stream, dictionary, args.gap_seconds)
        records = list(record_stream)
    else:
        shards: list[list] = [[] for _ in range(workers)]
        for event in stream:
            shard = hash((event.user_id, event.session_id)) % workers
            shards[shard].append(event)
        records = []
        stats = SessionizeStats()
        for shard in shards:
            shard_stream, shard_stats = sessionize(
                iter(shard), dictionary, args.gap_seconds)
            records.extend(shard_stream)
            stats.merge(shard_stats)
        records.sort(key=lambda r: (
            -1 if r.user_id is None else r.user_id,
            r.session_id, r.start_ts))
    return records, stats, scan_stats


def _cmd_sessionize(args: argparse.Namespace) -> int:
    paths = Paths(args)
    dictionary = load_dictionary(paths.dictionary_path)
    records, stats, scan_stats = _sessionize_records(args, paths, dictionary)
    out_path = write_session_file(
        records, paths.sequences_root, paths.day, dictionary,
        dictionary_path=paths.dictionary_path,
    )
    print(f"sessions={stats.sessions_out} events_in={stats.events_in} "
          f"events_unknown={stats.events_unknown} "
          f"records_rejected={scan_stats.records_rejected} path={out_path}")
    return 0


def _load_day(paths: Paths):
    dictionary = load_dictionary(paths.dictionary_path)
    sequence_set = read_session_file(paths.sequences_root, paths.day)
    return dictionary, sequence_set


def _cmd_count(args: argparse.Namespace) -> int:
    paths = Paths(args)
    dictionary, sequence_set = _load_day(paths)
    symbol_class = queries.expand_pattern(
        dictionary, compile_pattern(args.pattern, args.pattern_mode))
    total = queries.count_events(
        sequence_set.records, symbol_class, mode=args.count_mode,
        sessions_key=sequence_set.dictionary_key,
        user_allowlist=args.users)
    print(total)
    return 0


def _cmd_funnel(args: argparse.Namespace) -> int:
    paths = Paths(args)
    dictionary, sequence_set = _load_day(paths)
    stages = [
        queries.expand_pattern(dictionary, compile_pattern(text, args.pattern_mode))
        for text in args.stage
    ]
    run = queries.funnel_unique_users if args.unique_users else queries.funnel
    result = run(sequence_set.records, stages,
                 sessions_key=sequence_set.dictionary_key,
                 contiguous=args.contiguous,
                 user_allowlist=args.users)
    for index, count in enumerate(result.stage_counts):
        print(f"({index}, {count})")
    return 0


def _cmd_rollup(args: argparse.Namespace) -> int:
    paths = Paths(args)
    stream, _stats = scan_log_window(paths.window(), args.mode)
    tables = queries.rollup(stream)
    print("level,client,page,section,component,element,action,"
          "total,logged_in,logged_out")
    for table in tables:
        for key in sorted(table.rows):
            cell = table.rows[key]
            if table.level == 5:
                columns = (key[0], queries.WILDCARD, queries.WILDCARD,
                           queries.WILDCARD, queries.WILDCARD, key[1])
            else:
                columns = key
            print(f"{table.level}," + ",".join(columns)
                  + f",{cell.total},{cell.logged_in},{cell.logged_out}")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    paths = Paths(args)
    dictionary, sequence_set = _load_day(paths)
    stats = queries.summary_stats(sequence_set.records, dictionary)
    print("metric,key,value")
    print(f"date,,{stats.date.isoformat()}")
    print(f"sessions_total,,{stats.sessions_total}")
    for client in sorted(stats.sessions_by_client):
        print(f"sessions_by_client,{client},{stats.sessions_by_client[client]}")
    for bucket in queries.DURATION_BUCKETS:
        print(f"duration_histogram,{bucket},{stats.duration_histogram[bucket]}")
    return 0


def _cmd_lm_train(args: argparse.Namespace) -> int:
    paths = Paths(args)
    _dictionary, sequence_set = _load_day(paths)
    model = modeling.train_ngram(
        sequence_set.records, n=args.order, k=args.smoothing_k,
        dictionary_key=sequence_set.dictionary_key)
    model_path = Path(args.model) if args.model else paths.root / "model.json"
    modeling.save_model(model, model_path)
    print(f"order={model.n} k={model.k} vocab={len(model.vocab)} "
          f"contexts={len(model.counts)} path={model_path}")
    return 0


def _cmd_lm_eval(args: argparse.Namespace) -> int:
    paths = Paths(args)
    _dictionary, sequence_set = _load_day(paths)
    model = modeling.load_model(args.model)
    bits = modeling.cross_entropy(model, sequence_set.records,
                                  sequences_key=sequence_set.dictionary_key)
    print(f"cross_entropy_bits={bits:.6f}")
    print(f"perplexity={2.0 ** bits:.6f}")
    return 0


def _cmd_collocations(args: argparse.Namespace) -> int:
    paths = Paths(args)
    dictionary, sequence_set = _load_day(paths)
    if sequence_set.dictionary_key != dictionary.key:
        raise SessionSeqError(
            f"sequences were encoded with {sequence_set.dictionary_key!r}, "
            f"dictionary is {dictionary.key!r}")
    stats = modeling.extract_collocations(
        sequence_set.records, min_count=args.min_count, measure=args.measure,
        window=args.window)
    if args.limit:
        stats = stats[:args.limit]
    print("x_name,y_name,count,pmi,g2")
    for line in modeling.format_collocation_report(stats, dictionary):
        print(line)
    return 0


def _cmd_catalog(args: argparse.Namespace) -> int:
    paths = Paths(args)
    dictionary = load_dictionary(paths.dictionary_path)
    descriptions = (catalog_mod.load_descriptions(args.descriptions)
                    if args.descriptions else {})
    out_dir = Path(args.out) if args.out else paths.root / "catalog"
    report = catalog_mod.generate_catalog(dictionary, descriptions, out_dir)
    print(f"events={report.total} documented={report.documented} "
          f"stale={len(report.stale_descriptions)} out={out_dir}")
    for name in report.stale_descriptions:
        print(f"stale: {name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sessionseq",
        description="Event log toolkit: dictionary-coded session sequences "
                    "and session-oriented analytics.",
        epilog="Patterns: glob mode treats '*' as matching any run of "
               "characters (colons included) and everything else as literal; "
               "regex mode must match the entire event name.",
    )
    parser.add_argument("--config", default=None,
                        help="JSON config file; flags override its keys")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: list[argparse.ArgumentParser] = []
    parser.subcommand_parsers = subparsers  # type: ignore[attr-defined]

    def add_parser(*args, **kwargs):
        p = sub.add_parser(*args, **kwargs)
        subparsers.append(p)
        return p

    p = add_parser("gen", help="generate a synthetic one-day corpus")
    _add_common(p)
    p.add_argument("--events", type=int, default=500,
                   help="number of distinct event types")
    p.add_argument("--zipf", type=float, default=1.2,
                   help="Zipf exponent of the event type distribution")
    p.add_argument("--sessions", type=int, default=1000)
    p.add_argument("--mean-length", dest="mean_length", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compress", action="store_true",
                   help="write .log.gz partitions")
    p.set_defaults(func=_cmd_gen)

    p = add_parser("validate", help="scan a day and report ingest stats")
    _add_common(p)
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.set_defaults(func=_cmd_validate)

    p = add_parser("build-dict", help="build the day's encoding dictionary")
    _add_common(p)
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--sample-size", dest="sample_size", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_build_dict)

    p = add_parser("sessionize", help="materialize encoded session records")
    _add_common(p)
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--gap-seconds", dest="gap_seconds", type=int,
                   default=DEFAULT_GAP_SECONDS)
    p.add_argument("--workers", type=int, default=1,
                   help="shard count for the group-by (results are identical "
                        "for any value)")
    p.set_defaults(func=_cmd_sessionize)

    p = add_parser("count", help="count events matching a pattern")
    _add_common(p)
    p.add_argument("--pattern", required=True)
    p.add_argument("--pattern-mode", dest="pattern_mode",
                   choices=("glob", "regex"), default="glob")
    p.add_argument("--count-mode", dest="count_mode",
                   choices=("total", "sessions"), default="total")
    p.add_argument("--users", type=_user_id_list, default=None,
                   help="comma-separated user-id allowlist")
    p.set_defaults(func=_cmd_count)

    p = add_parser("funnel", help="stage completion counts over sessions")
    _add_common(p)
    p.add_argument("--stage", action="append", required=True,
                   help="pattern for one funnel stage; repeat in order")
    p.add_argument("--pattern-mode", dest="pattern_mode",
                   choices=("glob", "regex"), default="glob")
    p.add_argument("--unique-users", dest="unique_users", action="store_true",
                   help="count distinct users instead of sessions")
    p.add_argument("--contiguous", action="store_true",
                   help="stages must be adjacent in the sequence")
    p.add_argument("--users", type=_user_id_list, default=None,
                   help="comma-separated user-id allowlist")
    p.set_defaults(func=_cmd_funnel)

    p = add_parser("rollup", help="six-level aggregate counts from raw logs")
    _add_common(p)
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.set_defaults(func=_cmd_rollup)

    p = add_parser("stats", help="daily session summary statistics")
    _add_common(p)
    p.set_defaults(func=_cmd_stats)

    p = add_parser("lm-train", help="train an n-gram model on sequences")
    _add_common(p)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--smoothing-k", dest="smoothing_k", type=float,
                   default=modeling.DEFAULT_SMOOTHING_K)
    p.add_argument("--model", default=None, help="output model path")
    p.set_defaults(func=_cmd_lm_train)

    p = add_parser("lm-eval", help="cross entropy of sequences under a model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.set_defaults(func=_cmd_lm_eval)

    p = add_parser("collocations", help="event-bigram association scores")
    _add_common(p)
    p.add_argument("--min-count", dest="min_count", type=int, default=5)
    p.add_argument("--measure", choices=("pmi", "g2"), default="pmi")
    p.add_argument("--window", type=int, default=2,
                   help="co-occurrence window; 2 = adjacent pairs only")
    p.add_argument("--limit", type=int, default=0,
                   help="emit only the top N rows (0 = all)")
    p.set_defaults(func=_cmd_collocations)

    p = add_parser("catalog", help="generate the event catalog pages")
    _add_common(p)
    p.add_argument("--descriptions", default=None,
                   help="tab-separated event descriptions file")
    p.add_argument("--out", default=None,
                   help="output directory (default: ROOT/catalog)")
    p.set_defaults(func=_cmd_catalog)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser,
                       argv: Sequence[str]) -> Sequence[str]:
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _rest = probe.parse_known_args(argv)
    if known.config:
        with open(known.config, "r", encoding="utf-8") as handle:
            config = json.load(handle)
        unknown = set(config) - set(CONFIG_KEYS)
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        if "date" in config:
            config["date"] = date.fromisoformat(config["date"])
        for sub_parser in parser.subcommand_parsers:  # type: ignore[attr-defined]
            applicable = {
                key: value for key, value in config.items()
                if any(action.dest == key for action in sub_parser._actions)
            }
            sub_parser.set_defaults(**applicable)
    return argv


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    argv = _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream consumer (e.g. head) closed the pipe; exit quietly
        try:
            sys.stdout.close()
        except OSError:
            pass
        return 0
    except SessionSeqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
