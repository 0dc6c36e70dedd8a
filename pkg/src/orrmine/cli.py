"""Command line interface.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 64 usage error.
Diagnostics go to stderr; data goes to stdout unless --out is given. The same
invocation on the same inputs produces byte-identical output regardless of
--jobs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import brat, integrate, scoring, selector, structure, tagger
from .config import ENV_CONFIG, PipelineConfig, parse_ratios
from .model import Document, SchemaError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 64, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pmap(fn, items, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _emit_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_bytes(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()


def _pick(flag_value, cfg_value):
    return cfg_value if flag_value is None else flag_value


def _load_pairs(corpus: str, jobs: int):
    paths = sorted(Path(corpus).glob("*.txt"))
    if not paths:
        raise ValueError(f"no .txt documents under {corpus!r}")
    return _pmap(brat.read_pair, paths, jobs)


def _split_config(args, cfg: PipelineConfig) -> integrate.SplitConfig:
    ratios = cfg.ratios
    if getattr(args, "ratios", None):
        ratios = parse_ratios(args.ratios)
    return integrate.SplitConfig(
        max_tokens=_pick(getattr(args, "max_tokens", None), cfg.max_tokens),
        ratios=ratios,
        seed=_pick(getattr(args, "seed", None), cfg.seed),
    )


# ---------------------------------------------------------------- subcommands


def _cmd_rank(args, cfg: PipelineConfig) -> int:
    docs = selector.load_section_docs(args.docs)
    query = selector.SelectorQuery(
        expression=_pick(args.query, cfg.query),
        ranking_phrases=tuple(args.ranking_phrase) if args.ranking_phrase else cfg.ranking_phrases,
        sections=tuple(args.section) if args.section else cfg.sections,
        top_n=_pick(args.top_n, cfg.top_n),
    )
    rows = selector.rank_articles(docs, query)
    print(f"{len(rows)} of {len(docs)} articles selected", file=sys.stderr)
    _emit_text(selector.render_ranking(rows), args.out)
    return EXIT_OK


def _cmd_tag(args, cfg: PipelineConfig) -> int:
    specs = tagger.load_specs(args.specs) if args.specs else tagger.default_specs()
    matchers = tuple(tagger.compile_spec(s) for s in specs)
    gaz = tagger.Gazetteer.from_file(args.gazetteer) if args.gazetteer else tagger.Gazetteer.default()
    paths = sorted(Path(args.corpus).glob("*.txt"))
    if not paths:
        raise ValueError(f"no .txt documents under {args.corpus!r}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def run(path: Path) -> tuple[str, str]:
        doc = Document.from_text(path.stem, path.read_text(encoding="utf-8"))
        tagged = tagger.tag_document(doc, matchers, gaz)
        return path.stem, brat.write_ann(tagged, doc)

    jobs = _pick(args.jobs, cfg.jobs)
    results = _pmap(run, paths, jobs)
    for stem, ann_text in results:
        (out_dir / f"{stem}.ann").write_text(ann_text, encoding="utf-8")
    print(f"tagged {len(results)} documents into {out_dir}", file=sys.stderr)
    return EXIT_OK


def _cmd_convert(args, cfg: PipelineConfig) -> int:
    jobs = _pick(args.jobs, cfg.jobs)
    pairs = _load_pairs(args.corpus, jobs)
    split_cfg = _split_config(args, cfg)
    strict = args.strict or cfg.strict_alignment
    dataset = _pick(args.dataset, cfg.dataset)

    def run(pair):
        doc, aset = pair
        kept, dropped = integrate.filter_relations(aset, doc)
        mdoc = integrate.to_model_doc(doc, kept, dataset=dataset, strict=strict)
        return integrate.split_document(mdoc, split_cfg), len(dropped)

    results = _pmap(run, pairs, jobs)
    segments = [seg for segs, _ in results for seg in segs]
    dropped = sum(d for _, d in results)
    print(
        f"{len(pairs)} articles -> {len(segments)} model documents; "
        f"{dropped} cross-sentence relations dropped",
        file=sys.stderr,
    )
    _emit_text(integrate.dumps_jsonl(segments), args.out)
    return EXIT_OK


def _cmd_split_data(args, cfg: PipelineConfig) -> int:
    mdocs = integrate.loads_jsonl(Path(args.data).read_text(encoding="utf-8"))
    split_cfg = _split_config(args, cfg)
    parts = integrate.structure_dataset(mdocs, split_cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in ("train", "dev", "test"):
        (out_dir / f"{name}.jsonl").write_text(integrate.dumps_jsonl(parts[name]), encoding="utf-8")
    counts = {name: len(parts[name]) for name in ("train", "dev", "test")}
    arts = {
        name: len({integrate.article_key(m.doc_key) for m in parts[name]}) for name in ("train", "dev", "test")
    }
    print(
        f"articles train/dev/test: {arts['train']}/{arts['dev']}/{arts['test']}; "
        f"model docs: {counts['train']}/{counts['dev']}/{counts['test']}",
        file=sys.stderr,
    )
    return EXIT_OK


def _gold_pairs(gold: str):
    path = Path(gold)
    if path.is_dir():
        return [(doc, aset) for doc, aset in brat.walk_pairs(path)]
    if path.suffix == ".ann":
        doc, aset = brat.read_pair(path.with_suffix(".txt"), path)
        return [(doc, aset)]
    doc, aset = brat.read_pair(path)
    return [(doc, aset)]


def _pred_set_for(doc, pred: str, source: str | None):
    path = Path(pred)
    if path.suffix == ".jsonl":
        return integrate.ingest_predictions(path.read_text(encoding="utf-8"), doc, source=source or "model")
    if path.is_dir():
        ann = path / f"{doc.doc_id}.ann"
        if not ann.exists():
            return None
        return brat.parse_ann(ann.read_text(encoding="utf-8"), doc, source=source or path.name)
    return brat.parse_ann(path.read_text(encoding="utf-8"), doc, source=source or "pred")


def _cmd_score(args, cfg: PipelineConfig) -> int:
    mode = _pick(args.mode, cfg.mode)
    pairs = _gold_pairs(args.gold)
    ner_counts = []
    re_counts = []
    for doc, gold_set in pairs:
        pred_set = _pred_set_for(doc, args.pred, args.source)
        if pred_set is None:
            raise ValueError(f"no predictions found for {doc.doc_id}")
        ner_counts.append(scoring.match_ner(pred_set, gold_set))
        re_counts.append(scoring.match_re(pred_set, gold_set, mode=mode, ordered=not args.unordered))
    ner_report = scoring.aggregate(ner_counts, mode=mode, task="ner")
    re_report = scoring.aggregate(re_counts, mode=mode, task="re")
    if args.text:
        out = scoring.render_report(ner_report, "NER") + "\n" + scoring.render_report(re_report, "RE")
    else:
        out = json.dumps({"ner": ner_report.to_obj(), "re": re_report.to_obj()}, ensure_ascii=False, indent=2) + "\n"
    _emit_text(out, args.out)
    return EXIT_OK


def _cmd_compare(args, cfg: PipelineConfig) -> int:
    mode = _pick(args.mode, cfg.mode)
    pairs = _gold_pairs(args.gold)
    rows = []
    for pred in args.pred:
        source = Path(pred).stem if Path(pred).suffix == ".jsonl" else Path(pred).name
        ner_counts = []
        re_counts = []
        for doc, gold_set in pairs:
            pred_set = _pred_set_for(doc, pred, source)
            if pred_set is None:
                continue
            ner_counts.append(scoring.match_ner(pred_set, gold_set))
            re_counts.append(scoring.match_re(pred_set, gold_set, mode=mode))
        for task, counts in (("ner", ner_counts), ("re", re_counts)):
            report = scoring.aggregate(counts, mode=mode, task=task)
            p, r, f1 = report.overall
            rows.append(scoring.ComparisonRow(source, task, p, r, f1))

    rows.sort(key=lambda row: (row.task, -row.f1, row.source))
    if args.json:
        _emit_text(json.dumps([r.to_obj() for r in rows], ensure_ascii=False, indent=2) + "\n", args.out)
        return EXIT_OK
    lines = [f"{'source':<24} {'task':<5} {'P':>8} {'R':>8} {'F1':>8}"]
    lines.append("-" * len(lines[0]))
    for row in rows:
        lines.append(f"{row.source:<24} {row.task:<5} {row.precision:>8.4f} {row.recall:>8.4f} {row.f1:>8.4f}")
    _emit_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_structure(args, cfg: PipelineConfig) -> int:
    pairs = _load_pairs(args.corpus, _pick(args.jobs, cfg.jobs))
    all_rows = []
    line = 1
    for doc, aset in pairs:
        if args.pred:
            aset = integrate.ingest_predictions(Path(args.pred).read_text(encoding="utf-8"), doc, source="model")
        rows = structure.build_rows(aset, doc, start_line=line)
        line += len(rows)
        all_rows.extend(rows)
    _emit_bytes(structure.write_csv(all_rows), args.out)
    return EXIT_OK


def _cmd_graph(args, cfg: PipelineConfig) -> int:
    txt = Path(args.txt)
    doc, aset = brat.read_pair(txt, args.ann)
    if args.pred:
        aset = integrate.ingest_predictions(Path(args.pred).read_text(encoding="utf-8"), doc, source="model")
    _emit_text(structure.export_graph(aset, doc), args.out)
    return EXIT_OK


def _cmd_stats(args, cfg: PipelineConfig) -> int:
    pairs = _load_pairs(args.corpus, _pick(args.jobs, cfg.jobs))
    stats = integrate.corpus_stats(pairs, integrate.SplitConfig(max_tokens=_pick(args.max_tokens, cfg.max_tokens)))
    if args.json:
        _emit_text(json.dumps(stats.to_obj(), ensure_ascii=False, indent=2) + "\n", args.out)
        return EXIT_OK
    labels = [
        ("Articles", stats.n_articles),
        ("Model documents", stats.n_model_docs),
        ("Sentences", stats.n_sentences),
        ("Avg sentences per article", f"{stats.avg_sentences_per_article:.2f}"),
        ("Entity mentions", stats.n_entities),
        ("Relation mentions", stats.n_relations),
        ("Dropped cross-sentence relations", stats.n_dropped_relations),
    ]
    width = max(len(name) for name, _ in labels)
    out = "".join(f"{name:<{width}}  {value}\n" for name, value in labels)
    _emit_text(out, args.out)
    return EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="orrmine", description=__doc__)
    parser.add_argument("--config", help=f"key=value config file (default: ${ENV_CONFIG})")
    parser.add_argument("--log-level", help="logging level for diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("rank", help="filter and rank sectioned articles by phrase query")
    p.add_argument("docs", help="directory of {doc_id, sections} JSON files")
    p.add_argument("--query", help="boolean phrase expression")
    p.add_argument("--ranking-phrase", action="append", help="phrase counted for ranking (repeatable)")
    p.add_argument("--section", action="append", help="section name to search (repeatable)")
    p.add_argument("--top-n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("tag", help="write default rule-tagged .ann files for a corpus")
    p.add_argument("corpus", help="directory of .txt documents")
    p.add_argument("--specs", help="parser spec JSON file or directory")
    p.add_argument("--gazetteer", help="gazetteer JSON file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("convert", help="convert a standoff corpus to exchange JSONL")
    p.add_argument("corpus", help="directory of .txt/.ann pairs")
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--dataset")
    p.add_argument("--strict", action="store_true", help="error on non-token-aligned spans instead of snapping")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("split-data", help="split exchange JSONL into train/dev/test by article")
    p.add_argument("data", help="exchange JSONL file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--ratios", help="train,dev,test ratios, e.g. 0.8,0.1,0.1")
    p.set_defaults(func=_cmd_split_data)

    p = sub.add_parser("score", help="score predictions against gold standoff")
    p.add_argument("--gold", required=True, help=".ann file, .txt file, or corpus directory")
    p.add_argument("--pred", required=True, help=".ann file, directory, or prediction .jsonl")
    p.add_argument("--mode", choices=list(scoring.RE_MODES))
    p.add_argument("--unordered", action="store_true", help="ignore relation argument order")
    p.add_argument("--source", help="source name for the prediction side")
    p.add_argument("--text", action="store_true", help="human-readable tables instead of JSON")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("compare", help="rank several annotation sources against one gold")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", action="append", required=True, help="source to compare (repeatable)")
    p.add_argument("--mode", choices=list(scoring.RE_MODES))
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("structure", help="emit the structured CSV for a corpus")
    p.add_argument("corpus", help="directory of .txt/.ann pairs")
    p.add_argument("--pred", help="prediction JSONL to structure instead of the .ann layer")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_structure)

    p = sub.add_parser("graph", help="export one document's annotations as a DOT digraph")
    p.add_argument("txt", help="document .txt path")
    p.add_argument("--ann", help="standoff path (default: paired .ann)")
    p.add_argument("--pred", help="prediction JSONL to draw instead")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("stats", help="corpus summary counts")
    p.add_argument("corpus", help="directory of .txt/.ann pairs")
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--json", action="store_true")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=_cmd_stats)
    p.add_argument("--out")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        cfg_path = args.config or os.environ.get(ENV_CONFIG)
        cfg = PipelineConfig.from_file(cfg_path) if cfg_path else PipelineConfig()
    except OSError as exc:
        print(f"orrmine: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"orrmine: bad config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    level = (args.log_level or cfg.log_level).upper()
    if not isinstance(logging.getLevelName(level), int):
        print(f"orrmine: unknown log level {level!r}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(stream=sys.stderr, level=level)

    try:
        return args.func(args, cfg)
    except (SchemaError, brat.BratParseError, integrate.AlignmentError, ValueError) as exc:
        print(f"orrmine: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"orrmine: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())
