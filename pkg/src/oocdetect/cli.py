"""Operator entry point: ingest, build-index, detect, evaluate, ablate,
rank-report and serve subcommands.

Usage errors exit 2 (argparse's convention); runtime failures exit 1
after printing one machine-parseable ``error: <type>: <message>`` line
to stderr. Everything a subcommand writes is reproducible byte for
byte given fixed seeds, mock providers and a warm cache.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import database
from .agents import EngineSettings, IndexBundle, PipelineConfig, ablation_rows, run_pipeline
from .config import apply_overrides, load_config
from .corpus import NewsItem, ValidationMode, load_corpus, validate_item
from .errors import OocdetectError
from .evaluation import (
    CATEGORY_DISPLAY,
    EvalReport,
    PredictionRecord,
    RankMatrix,
    accuracy_report,
    average_ranks,
    error_distribution,
)
from .llm_gateway import GatewayConfig, LlmGateway
from .vector_index import Granularity, build_index


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="INI config file")
    parser.add_argument("--tau", type=float, default=None, help="alignment gate threshold override")
    parser.add_argument("--k", type=int, default=None, help="retrieval depth override")
    parser.add_argument("--provider", default=None, help="gateway provider override (rule_mock, scripted:<path>, remote)")
    parser.add_argument("--cache-dir", default=None, help="gateway response cache directory")


def _load(args: argparse.Namespace) -> tuple[EngineSettings, GatewayConfig]:
    settings, gateway = load_config(args.config)
    return apply_overrides(
        settings,
        gateway,
        tau=getattr(args, "tau", None),
        k=getattr(args, "k", None),
        provider=getattr(args, "provider", None),
        cache_dir=getattr(args, "cache_dir", None),
    )


def _format_accuracy(value: float | None) -> str:
    return "-" if value is None else f"{value:.1f}"


def _report_lines(report: EvalReport) -> list[str]:
    rounded = report.rounded()
    return [
        f"{'split':<12} {'accuracy':>8} {'correct':>8} {'total':>8}",
        f"{'all':<12} {_format_accuracy(rounded['all']):>8} {report.correct:>8} {report.total:>8}",
        f"{'falsified':<12} {_format_accuracy(rounded['falsified']):>8} {report.falsified_correct:>8} {report.n_falsified:>8}",
        f"{'pristine':<12} {_format_accuracy(rounded['pristine']):>8} {report.pristine_correct:>8} {report.n_pristine:>8}",
    ]


def cmd_ingest(args: argparse.Namespace) -> int:
    manifest, items = load_corpus(args.corpus)
    labeled = sum(1 for item in items if item.label is not None)
    violations = sum(bool(validate_item(item, ValidationMode.EVAL)) for item in items)
    print(f"split: {manifest.split_name}")
    print(f"items: {manifest.items}")
    print(f"labeled: {labeled}")
    print(f"missing-label: {violations}")
    for category, count in sorted(manifest.categories.items()):
        print(f"category {category}: {count}")
    return 0


def cmd_build_index(args: argparse.Namespace) -> int:
    settings, _ = _load(args)
    _, items = load_corpus(args.corpus)
    bundle, report = database.build_database(items, settings)
    database.save_bundle(bundle, args.out)
    report_path = Path(args.out) / "build_report.json"
    report_path.write_text(json.dumps(report.to_record(), indent=2, sort_keys=True), encoding="utf-8")
    print(f"items: {report.items}")
    print(f"entity records: {report.entity_records} (visual {report.visual_records}, textual {report.textual_records})")
    print(f"event records: {report.event_records}")
    print(f"indices written to {args.out}")
    return 0


def _find_item(args: argparse.Namespace) -> NewsItem:
    if args.caption is not None:
        return NewsItem(
            id=args.item_id or "adhoc",
            image_ref=args.image or "",
            caption=args.caption,
        )
    if args.corpus is None or args.item_id is None:
        raise OocdetectError("detect needs either --caption or --corpus with --item-id")
    for item in load_corpus(args.corpus)[1]:
        if item.id == args.item_id:
            return item
    raise OocdetectError(f"item {args.item_id!r} not found in {args.corpus}")


def cmd_detect(args: argparse.Namespace) -> int:
    settings, gateway_cfg = _load(args)
    item = _find_item(args)
    bundle = database.load_bundle(args.indices)
    gateway = LlmGateway(gateway_cfg)
    verdict = run_pipeline(item, bundle, settings, gateway)
    print(verdict.explanation)
    print(f"VERDICT: {'OOC' if verdict.c_ooc else 'PRISTINE'}")
    if args.out:
        Path(args.out).write_text(verdict.to_json() + "\n", encoding="utf-8")
    return 0


def _predict_items(
    items: list[NewsItem],
    bundle: IndexBundle,
    settings: EngineSettings,
    gateway: LlmGateway,
    jobs: int,
    config: PipelineConfig | None = None,
) -> list[PredictionRecord]:
    if config is not None:
        settings = replace(settings, pipeline=config)

    def predict(item: NewsItem) -> PredictionRecord:
        verdict = run_pipeline(item, bundle, settings, gateway)
        return PredictionRecord(
            item_id=item.id,
            truth=item.label,  # validated upstream
            c_ooc=verdict.c_ooc,
            category=item.category,
            config_used=settings.pipeline,
        )

    if jobs <= 1:
        return [predict(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(predict, items))


def _eval_items(path: Path) -> list[NewsItem]:
    _, items = load_corpus(path)
    unlabeled = [item.id for item in items if validate_item(item, ValidationMode.EVAL)]
    if unlabeled:
        raise OocdetectError(f"{len(unlabeled)} items lack labels (first: {unlabeled[0]!r})")
    return items


def _write_eval_outputs(
    out_dir: Path,
    name: str,
    payload: dict[str, object],
    text_lines: list[str],
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{name}.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out_dir / f"{name}.txt").write_text("\n".join(text_lines) + "\n", encoding="utf-8")


def cmd_evaluate(args: argparse.Namespace) -> int:
    settings, gateway_cfg = _load(args)
    items = _eval_items(args.corpus)
    bundle = database.load_bundle(args.indices) if args.indices else _empty_bundle(settings)
    gateway = LlmGateway(gateway_cfg)
    preds = _predict_items(items, bundle, settings, gateway, args.jobs)
    report = accuracy_report(preds)

    payload: dict[str, object] = {"accuracy_report": report.to_record()}
    lines = _report_lines(report)
    try:
        distribution = error_distribution(preds)
    except OocdetectError:
        lines.append("error distribution unavailable: some error records lack a category")
    else:
        payload["error_distribution"] = distribution.to_record()
        lines.append("")
        lines.append(f"{'category':<16} {'errors':>8} {'rate %':>8}")
        rates = distribution.rates()
        for category, count in distribution.counts:
            lines.append(f"{CATEGORY_DISPLAY[category]:<16} {count:>8} {rates[category]:>8.2f}")
        lines.append(f"{'Total':<16} {distribution.total_errors:>8} {'100.00' if distribution.total_errors else '0.00':>8}")
    for line in lines:
        print(line)
    if args.out:
        _write_eval_outputs(Path(args.out), "eval_report", payload, lines)
    return 0


def _empty_bundle(settings: EngineSettings) -> IndexBundle:
    return IndexBundle(
        visual=build_index(Granularity.VISUAL, [], dim=settings.visual_profile.dim),
        textual=build_index(Granularity.TEXTUAL, [], dim=settings.textual_profile.dim),
        event=build_index(Granularity.EVENT, [], dim=settings.textual_profile.dim),
    )


def cmd_ablate(args: argparse.Namespace) -> int:
    settings, gateway_cfg = _load(args)
    items = _eval_items(args.corpus)
    bundle = database.load_bundle(args.indices) if args.indices else _empty_bundle(settings)
    gateway = LlmGateway(gateway_cfg)
    results = []
    lines = [f"{'R-agent':>7} {'D-agent':>7} {'event':>6} {'entity':>6} | {'all':>6} {'fals.':>6} {'prist.':>6}"]
    for config in ablation_rows():
        preds = _predict_items(items, bundle, settings, gateway, args.jobs, config=config)
        report = accuracy_report(preds)
        results.append({"config": config.to_record(), "report": report.to_record()})
        rounded = report.rounded()
        lines.append(
            f"{str(config.use_retrieval_agent):>7} {str(config.use_detective_agent):>7} "
            f"{str(config.use_event_evidence):>6} {str(config.use_entity_evidence):>6} | "
            f"{_format_accuracy(rounded['all']):>6} {_format_accuracy(rounded['falsified']):>6} "
            f"{_format_accuracy(rounded['pristine']):>6}"
        )
    for line in lines:
        print(line)
    if args.out:
        _write_eval_outputs(Path(args.out), "ablation", {"rows": results}, lines)
    return 0


def cmd_rank_report(args: argparse.Namespace) -> int:
    raw = json.loads(Path(args.matrix).read_text(encoding="utf-8"))
    matrix = RankMatrix(methods=tuple(raw["methods"]))
    for row in raw.get("rankings", []):
        matrix.add(str(row["judge"]), str(row["sample"]), {str(m): int(r) for m, r in row["ranks"].items()})
    means = average_ranks(matrix)
    lines = [f"{'method':<24} {'mean rank':>10}", *(f"{m:<24} {float(means[m]):>10.2f}" for m in matrix.methods)]
    total: Fraction = sum(means.values(), Fraction(0))
    lines.append(f"{'(sum)':<24} {float(total):>10.2f}")
    for line in lines:
        print(line)
    if args.out:
        payload = {"means": {m: float(v) for m, v in means.items()}, "rows": len(matrix.rows)}
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    settings, gateway_cfg = _load(args)
    bundle = database.load_bundle(args.indices) if args.indices else _empty_bundle(settings)
    state = ServiceState(
        settings=settings,
        gateway=LlmGateway(gateway_cfg),
        indices=bundle,
        data_dir=Path(args.data_dir),
        study_path=Path(args.study) if args.study else None,
    )
    host, _, port = args.bind.partition(":")
    uvicorn.run(create_app(state), host=host or "127.0.0.1", port=int(port or 8000))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oocdetect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus and print its manifest")
    p.add_argument("corpus", type=Path)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-index", help="build the three evidence indices from a corpus")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", required=True, type=Path)
    _add_config_flags(p)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("detect", help="run the detection pipeline on one item")
    p.add_argument("--corpus", type=Path, default=None)
    p.add_argument("--item-id", default=None)
    p.add_argument("--caption", default=None)
    p.add_argument("--image", default=None)
    p.add_argument("--indices", required=True, type=Path)
    p.add_argument("--out", default=None)
    _add_config_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score a labeled corpus")
    p.add_argument("corpus", type=Path)
    p.add_argument("--indices", type=Path, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="run the six-row stage/evidence sweep")
    p.add_argument("corpus", type=Path)
    p.add_argument("--indices", type=Path, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("rank-report", help="aggregate a rank matrix file into mean ranks")
    p.add_argument("matrix", type=Path)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rank_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.add_argument("--indices", type=Path, default=None)
    p.add_argument("--data-dir", default="./service-data")
    p.add_argument("--study", default=None, help="rank-study definition file")
    _add_config_flags(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OocdetectError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: FileNotFoundError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
