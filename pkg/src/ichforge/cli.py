"""The forge command line: corpus, annotate, eval, instruct, bench, review."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ichforge import annotation, bench, corpus, instruct, metrics
from ichforge.client import EndpointConfig


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, annotation.MarkupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    corpus_cmd = sub.add_parser("corpus", help="ingest, clean, and summarize corpora")
    corpus_sub = corpus_cmd.add_subparsers(dest="subcommand")

    ingest = corpus_sub.add_parser("ingest", help="read raw files into a cleaned corpus")
    ingest.add_argument("--root", required=True)
    ingest.add_argument("--category", required=True)
    ingest.add_argument("--format", required=True, choices=["plain", "jsonl"])
    ingest.add_argument("--out", required=True)
    ingest.set_defaults(func=cmd_corpus_ingest)

    stats = corpus_sub.add_parser("stats", help="per-category corpus statistics")
    stats.add_argument("corpus")
    stats.add_argument("--format", default="table", choices=["table", "csv", "json"])
    stats.set_defaults(func=cmd_corpus_stats)

    dedup = corpus_sub.add_parser("dedup", help="drop exact-duplicate texts")
    dedup.add_argument("corpus")
    dedup.add_argument("--out", required=True)
    dedup.add_argument("--report")
    dedup.set_defaults(func=cmd_corpus_dedup)

    annotate_cmd = sub.add_parser("annotate", help="entity-markup utilities")
    annotate_sub = annotate_cmd.add_subparsers(dest="subcommand")

    ann_parse = annotate_sub.add_parser("parse", help="markup lines to annotated JSONL")
    ann_parse.add_argument("--in", dest="input", required=True)
    ann_parse.add_argument("--out", required=True)
    ann_parse.set_defaults(func=cmd_annotate_parse)

    ann_validate = annotate_sub.add_parser("validate", help="check annotated JSONL")
    ann_validate.add_argument("annotated")
    ann_validate.set_defaults(func=cmd_annotate_validate)

    ann_entities = annotate_sub.add_parser("entities", help="list annotated entities")
    ann_entities.add_argument("annotated")
    ann_entities.add_argument("--label")
    ann_entities.set_defaults(func=cmd_annotate_entities)

    eval_cmd = sub.add_parser("eval", help="score candidate text against references")
    eval_sub = eval_cmd.add_subparsers(dest="subcommand")

    eval_pair = eval_sub.add_parser("pair", help="score one candidate/reference pair")
    eval_pair.add_argument("--cand", required=True)
    eval_pair.add_argument("--ref", required=True)
    eval_pair.add_argument("--mode", default="char", choices=list(metrics.MODES))
    eval_pair.set_defaults(func=cmd_eval_pair)

    eval_corpus = eval_sub.add_parser("corpus", help="score a JSONL of pairs")
    eval_corpus.add_argument("--pairs", required=True)
    eval_corpus.add_argument("--mode", default="char", choices=list(metrics.MODES))
    eval_corpus.set_defaults(func=cmd_eval_corpus)

    instruct_cmd = sub.add_parser("instruct", help="instruction-dataset tooling")
    instruct_sub = instruct_cmd.add_subparsers(dest="subcommand")

    synth = instruct_sub.add_parser("synth", help="synthesize QA pairs via the endpoint")
    synth.add_argument("--corpus", required=True, help="annotated corpus JSONL")
    synth.add_argument("--template", required=True, help="prompt template file")
    synth.add_argument("--max-pairs", type=int, default=5)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_instruct_synth)

    export = instruct_sub.add_parser("export", help="export reviewed samples")
    export.add_argument("--in", dest="input", required=True)
    export.add_argument("--states", required=True, help="comma-separated review states")
    export.add_argument("--out", required=True)
    export.add_argument("--decisions", help="decision log to replay before filtering")
    export.set_defaults(func=cmd_instruct_export)

    split = instruct_sub.add_parser("split", help="deterministic eval split")
    split.add_argument("--in", dest="input", required=True)
    split.add_argument("--task", required=True)
    split.add_argument("--size", type=int, required=True)
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--out", required=True)
    split.set_defaults(func=cmd_instruct_split)

    bench_cmd = sub.add_parser("bench", help="model benchmarking")
    bench_sub = bench_cmd.add_subparsers(dest="subcommand")

    bench_run = bench_sub.add_parser("run", help="run the benchmark protocol")
    bench_run.add_argument("--config", required=True)
    bench_run.add_argument("--out", required=True)
    bench_run.set_defaults(func=cmd_bench_run)

    bench_render = bench_sub.add_parser("render", help="render a saved run")
    bench_render.add_argument("result")
    bench_render.add_argument("--format", default="markdown", choices=list(bench.REPORT_FORMATS))
    bench_render.set_defaults(func=cmd_bench_render)

    train_cfg = bench_sub.add_parser("train-config", help="emit fine-tuning config files")
    train_cfg.add_argument("--out", default=".")
    train_cfg.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a default hyperparameter",
    )
    train_cfg.set_defaults(func=cmd_bench_train_config)

    review_cmd = sub.add_parser("review", help="human review service")
    review_sub = review_cmd.add_subparsers(dest="subcommand")

    serve = review_sub.add_parser("serve", help="serve the review API (and UI)")
    serve.add_argument("--store", required=True)
    serve.add_argument("--log", required=True)
    serve.add_argument("--port", type=int, default=8787)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--corpus", help="corpus JSONL for source snippets")
    serve.add_argument("--ui-dir", help="directory of built UI assets")
    serve.set_defaults(func=cmd_review_serve)

    return parser


def cmd_corpus_ingest(args) -> int:
    category = corpus.SourceCategory.from_name(args.category)
    result = corpus.ingest_documents(args.root, category, args.format)
    documents = corpus.finalize_documents(result.documents)
    count = corpus.write_corpus(documents, args.out)
    dropped = result.report.ingested - count
    print(f"ingested {result.report.ingested} records -> {count} documents ({args.out})")
    if dropped:
        print(f"dropped {dropped} documents that cleaned to empty text")
    if result.report.skipped:
        print(f"skipped {result.report.skipped} malformed records:", file=sys.stderr)
        for diagnostic in result.report.diagnostics:
            print(f"  {diagnostic}", file=sys.stderr)
    return 0


def cmd_corpus_stats(args) -> int:
    stats = corpus.compute_stats(corpus.read_corpus(args.corpus))
    rows = [
        {
            "category": category.value,
            "num_tokens": s.num_tokens,
            "num_texts": s.num_texts,
            "avg_length": round(s.avg_length, 2),
            "max_length": s.max_length,
            "min_length": s.min_length,
        }
        for category, s in stats.items()
    ]
    if args.format == "json":
        print(json.dumps(rows, ensure_ascii=False, indent=2))
    elif args.format == "csv":
        print("category,num_tokens,num_texts,avg_length,max_length,min_length")
        for row in rows:
            print(
                f"{row['category']},{row['num_tokens']},{row['num_texts']},"
                f"{row['avg_length']:.2f},{row['max_length']},{row['min_length']}"
            )
    else:
        header = f"{'category':<22}{'tokens':>12}{'texts':>10}{'avg':>10}{'max':>7}{'min':>7}"
        print(header)
        print("-" * len(header))
        for row in rows:
            print(
                f"{row['category']:<22}{row['num_tokens']:>12}{row['num_texts']:>10}"
                f"{row['avg_length']:>10.2f}{row['max_length']:>7}{row['min_length']:>7}"
            )
    return 0


def cmd_corpus_dedup(args) -> int:
    documents = list(corpus.read_corpus(args.corpus))
    survivors, removals = corpus.deduplicate(documents)
    corpus.write_corpus(survivors, args.out)
    if args.report:
        with Path(args.report).open("w", encoding="utf-8") as handle:
            for kept, dropped in removals:
                handle.write(json.dumps({"kept_id": kept, "dropped_id": dropped}))
                handle.write("\n")
    print(f"kept {len(survivors)} of {len(documents)} documents ({len(removals)} duplicates)")
    return 0


def cmd_annotate_parse(args) -> int:
    stem = Path(args.input).stem
    docs = []
    with Path(args.input).open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            docs.append(annotation.parse_annotated_text(line, doc_id=f"{stem}-{lineno:05d}"))
    annotation.write_annotated(docs, args.out)
    print(f"parsed {len(docs)} documents -> {args.out}")
    return 0


def cmd_annotate_validate(args) -> int:
    violations_total = 0
    for doc in annotation.read_annotated(args.annotated):
        for violation in annotation.validate_annotations(doc):
            violations_total += 1
            print(f"{doc.doc_id}: [{violation.kind}] {violation.message}")
    if violations_total:
        print(f"{violations_total} violation(s)", file=sys.stderr)
        return 1
    print("ok")
    return 0


def cmd_annotate_entities(args) -> int:
    label = annotation.EntityLabel.from_name(args.label) if args.label else None
    for doc in annotation.read_annotated(args.annotated):
        for surface, entity_label in annotation.extract_entities(doc, label):
            print(f"{doc.doc_id}\t{entity_label.value}\t{surface}")
    return 0


def cmd_eval_pair(args) -> int:
    candidate = Path(args.cand).read_text(encoding="utf-8")
    reference = Path(args.ref).read_text(encoding="utf-8")
    report = metrics.evaluate_corpus([(candidate, reference)], mode=args.mode)
    payload = dict(report.scores(), sample_count=report.sample_count)
    print(json.dumps(payload, indent=2))
    return 0


def cmd_eval_corpus(args) -> int:
    pairs = []
    with Path(args.pairs).open(encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                record = json.loads(line)
                pairs.append((record["candidate"], record["reference"]))
    report = metrics.evaluate_corpus(pairs, mode=args.mode)
    payload = dict(report.scores(), sample_count=report.sample_count)
    print(json.dumps(payload, indent=2))
    return 0


def cmd_instruct_synth(args) -> int:
    template = instruct.PromptTemplate(
        name=Path(args.template).stem,
        body=Path(args.template).read_text(encoding="utf-8"),
    )
    config = EndpointConfig.from_env()
    samples: list[instruct.InstructionSample] = []
    diagnostics: list[str] = []
    for doc in annotation.read_annotated(args.corpus):
        result = instruct.synthesize_qa_pairs(
            doc.text, template, config, args.max_pairs, source_doc_id=doc.doc_id
        )
        samples.extend(result.samples)
        diagnostics.extend(result.diagnostics)
    instruct.export_dataset(samples, {instruct.ReviewState.PENDING}, args.out)
    print(f"synthesized {len(samples)} pending samples -> {args.out}")
    for diagnostic in diagnostics:
        print(f"  {diagnostic}", file=sys.stderr)
    return 0


def _parse_states(raw: str) -> set[instruct.ReviewState]:
    states = set()
    for name in raw.split(","):
        name = name.strip().lower()
        if name:
            states.add(instruct.ReviewState(name.capitalize()))
    return states


def cmd_instruct_export(args) -> int:
    if args.decisions:
        from ichforge.review.store import ReviewStore

        samples = ReviewStore.from_files(args.input, args.decisions).all_samples()
    else:
        samples = instruct.load_samples(args.input)
    count = instruct.export_dataset(samples, _parse_states(args.states), args.out)
    print(f"exported {count} samples -> {args.out}")
    return 0


def cmd_instruct_split(args) -> int:
    samples = instruct.load_samples(args.input)
    split = instruct.make_eval_split(
        samples, instruct.TaskKind.from_name(args.task), args.size, args.seed
    )
    with Path(args.out).open("w", encoding="utf-8") as handle:
        for sample in split:
            handle.write(json.dumps(instruct.sample_to_record(sample), ensure_ascii=False))
            handle.write("\n")
    print(f"wrote {len(split)} samples -> {args.out}")
    return 0


def cmd_bench_run(args) -> int:
    config = bench.load_benchmark_config(args.config)
    result = bench.run_benchmark(config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run.json").write_text(result.to_json() + "\n", encoding="utf-8")
    (out_dir / "report.md").write_text(
        bench.render_report(result, "markdown"), encoding="utf-8"
    )
    print(f"benchmark complete -> {out_dir / 'run.json'}")
    if result.skipped_endpoints:
        print(f"skipped endpoints: {', '.join(result.skipped_endpoints)}", file=sys.stderr)
    return 0


def cmd_bench_render(args) -> int:
    result = bench.result_from_json(Path(args.result).read_text(encoding="utf-8"))
    print(bench.render_report(result, args.format))
    return 0


def cmd_bench_train_config(args) -> int:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        if key in ("max_epochs", "batch_size", "max_sequence_length"):
            overrides[key] = int(value)
        elif key == "learning_rate":
            overrides[key] = float(value)
        else:
            overrides[key] = value
    config = bench.emit_training_config(overrides, args.out)
    print(f"wrote train.cfg and train.json to {args.out}")
    print(
        f"  learning_rate={config.learning_rate} max_epochs={config.max_epochs} "
        f"finetuning_type={config.finetuning_type} batch_size={config.batch_size} "
        f"max_sequence_length={config.max_sequence_length}"
    )
    return 0


def cmd_review_serve(args) -> int:
    from ichforge.review.service import serve

    serve(
        store_path=args.store,
        log_path=args.log,
        port=args.port,
        host=args.host,
        corpus_path=args.corpus,
        ui_dir=args.ui_dir,
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
