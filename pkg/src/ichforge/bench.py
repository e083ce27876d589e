"""Benchmark runner and report rendering.

Queries each configured endpoint over each task's eval set, scores
candidates against the samples' outputs, and renders the per-task metric
tables. Also emits the training configuration files consumed by external
fine-tuning frameworks.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

from ichforge.client import (
    ChatMessage,
    ClientError,
    EndpointConfig,
    chat_complete,
)
from ichforge.instruct import (
    InstructionSample,
    TaskKind,
    assemble_user_message,
    load_samples,
)
from ichforge.metrics import (
    METRIC_NAMES,
    REPORT_COLUMNS,
    MetricReport,
    evaluate_corpus,
)

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("markdown", "csv", "json")


@dataclass(frozen=True, slots=True)
class NamedEndpoint:
    name: str
    config: EndpointConfig


@dataclass(slots=True)
class BenchmarkConfig:
    endpoints: list[NamedEndpoint]
    eval_sets: dict[TaskKind, Path]
    tokenization_mode: str = "char"
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.endpoints:
            raise ValueError("benchmark config needs at least one endpoint")
        if not self.eval_sets:
            raise ValueError("benchmark config needs at least one eval set")

    def config_hash(self) -> str:
        canonical = json.dumps(
            {
                "endpoints": [
                    {"name": e.name, "base_url": e.config.base_url, "model": e.config.model_name}
                    for e in self.endpoints
                ],
                "eval_sets": {task.value: str(path) for task, path in self.eval_sets.items()},
                "mode": self.tokenization_mode,
                "seed": self.seed,
            },
            sort_keys=True,
        )
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def load_benchmark_config(path: str | Path) -> BenchmarkConfig:
    """Read the bench.json schema: endpoints + eval_sets + mode + seed."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    endpoints = [
        NamedEndpoint(
            name=entry["name"],
            config=EndpointConfig(
                base_url=entry["base_url"],
                model_name=entry["model"],
                api_key=entry.get("api_key"),
            ),
        )
        for entry in raw["endpoints"]
    ]
    eval_sets = {
        TaskKind.from_name(task): Path(p) for task, p in raw["eval_sets"].items()
    }
    for task, p in eval_sets.items():
        if not p.exists():
            raise FileNotFoundError(f"eval set for {task.value} not found: {p}")
    return BenchmarkConfig(
        endpoints=endpoints,
        eval_sets=eval_sets,
        tokenization_mode=raw.get("mode", "char"),
        seed=raw.get("seed", 0),
    )


@dataclass(slots=True)
class SampleResponse:
    sample_id: str
    candidate: str
    reference: str
    failed: bool = False


@dataclass(slots=True)
class TaskResult:
    report: MetricReport
    responses: list[SampleResponse]
    failure_count: int


@dataclass(slots=True)
class BenchmarkResult:
    results: dict[str, dict[TaskKind, TaskResult]]
    skipped_endpoints: list[str]
    config_hash: str
    seed: int
    timestamp: str

    def to_json(self) -> str:
        """Canonical JSON for the whole run. The wall-clock timestamp is
        deliberately left out so identical runs serialize identically."""
        payload = {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "skipped_endpoints": self.skipped_endpoints,
            "results": {
                model: {
                    task.value: {
                        "scores": task_result.report.scores(),
                        "sample_count": task_result.report.sample_count,
                        "failure_count": task_result.failure_count,
                        "responses": [
                            {
                                "sample_id": r.sample_id,
                                "candidate": r.candidate,
                                "reference": r.reference,
                                "failed": r.failed,
                            }
                            for r in task_result.responses
                        ],
                    }
                    for task, task_result in by_task.items()
                }
                for model, by_task in self.results.items()
            },
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2)


def result_from_json(text: str) -> BenchmarkResult:
    payload = json.loads(text)
    results: dict[str, dict[TaskKind, TaskResult]] = {}
    for model, by_task in payload["results"].items():
        results[model] = {}
        for task_name, entry in by_task.items():
            responses = [
                SampleResponse(r["sample_id"], r["candidate"], r["reference"], r["failed"])
                for r in entry["responses"]
            ]
            report = MetricReport(sample_count=entry["sample_count"], **entry["scores"])
            results[model][TaskKind.from_name(task_name)] = TaskResult(
                report=report,
                responses=responses,
                failure_count=entry["failure_count"],
            )
    return BenchmarkResult(
        results=results,
        skipped_endpoints=payload.get("skipped_endpoints", []),
        config_hash=payload["config_hash"],
        seed=payload.get("seed", 0),
        timestamp="",
    )


def _preflight(endpoint: NamedEndpoint, transport) -> bool:
    try:
        chat_complete(
            endpoint.config,
            [ChatMessage("user", "ping")],
            transport=transport,
            sleep=lambda _d: None,
        )
        return True
    except ClientError as exc:
        logger.warning("endpoint %s failed preflight: %s", endpoint.name, exc)
        return False


def run_benchmark(config: BenchmarkConfig, transport=None) -> BenchmarkResult:
    """Execute the full protocol: preflight each endpoint, query every
    sample of every task, score, and aggregate.

    A request that still fails after retries becomes an empty candidate
    (scores 0) and increments the failure tally. Endpoints that fail
    preflight are skipped; if all fail, the run aborts.
    """
    eval_samples: dict[TaskKind, list[InstructionSample]] = {
        task: load_samples(path) for task, path in config.eval_sets.items()
    }
    for task, samples in eval_samples.items():
        if not samples:
            raise ValueError(f"eval set for {task.value} is empty")

    live = [e for e in config.endpoints if _preflight(e, transport)]
    skipped = [e.name for e in config.endpoints if e not in live]
    if not live:
        raise RuntimeError("all endpoints failed preflight")

    results: dict[str, dict[TaskKind, TaskResult]] = {}
    for endpoint in live:
        results[endpoint.name] = {}
        for task, samples in eval_samples.items():
            responses: list[SampleResponse] = []
            failures = 0
            for sample in samples:
                message = assemble_user_message(sample)
                try:
                    exchange = chat_complete(
                        endpoint.config,
                        [ChatMessage("user", message)],
                        transport=transport,
                    )
                    candidate = exchange.response_text
                    failed = False
                except ClientError:
                    candidate = ""
                    failed = True
                    failures += 1
                responses.append(
                    SampleResponse(
                        sample_id=sample.id,
                        candidate=candidate,
                        reference=sample.effective_output(),
                        failed=failed,
                    )
                )
            responses.sort(key=lambda r: r.sample_id)
            report = evaluate_corpus(
                [(r.candidate, r.reference) for r in responses],
                mode=config.tokenization_mode,
            )
            results[endpoint.name][task] = TaskResult(
                report=report, responses=responses, failure_count=failures
            )
    return BenchmarkResult(
        results=results,
        skipped_endpoints=skipped,
        config_hash=config.config_hash(),
        seed=config.seed,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    )


def _task_order(result: BenchmarkResult) -> list[TaskKind]:
    seen: list[TaskKind] = []
    for by_task in result.results.values():
        for task in by_task:
            if task not in seen:
                seen.append(task)
    return sorted(seen, key=lambda t: list(TaskKind).index(t))


def render_report(result: BenchmarkResult, format: str = "markdown") -> str:
    """One table per task; rows are models in config order, columns the
    eight metrics, values scaled to 0-100 at two decimals. Markdown bolds
    each column's best value."""
    if format not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {format!r}")
    if not result.results:
        raise ValueError("benchmark result is empty")
    if format == "json":
        return result.to_json()
    if format == "csv":
        return _render_csv(result)
    return _render_markdown(result)


def _render_markdown(result: BenchmarkResult) -> str:
    lines: list[str] = []
    for task in _task_order(result):
        rows = [
            (model, by_task[task].report)
            for model, by_task in result.results.items()
            if task in by_task
        ]
        best = {
            name: max(report.scores()[name] for _, report in rows)
            for name in METRIC_NAMES
        }
        lines.append(f"## {task.value}")
        lines.append("")
        lines.append("| Model | " + " | ".join(REPORT_COLUMNS) + " |")
        lines.append("|" + " --- |" * (len(REPORT_COLUMNS) + 1))
        for model, report in rows:
            cells = []
            for name in METRIC_NAMES:
                value = report.scores()[name]
                cell = f"{value * 100:.2f}"
                if value == best[name]:
                    cell = f"**{cell}**"
                cells.append(cell)
            lines.append(f"| {model} | " + " | ".join(cells) + " |")
        lines.append("")
    return "\n".join(lines)


def _render_csv(result: BenchmarkResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["task", "model", *REPORT_COLUMNS])
    for task in _task_order(result):
        for model, by_task in result.results.items():
            if task not in by_task:
                continue
            report = by_task[task].report
            writer.writerow(
                [task.value, model]
                + [f"{report.scores()[name] * 100:.2f}" for name in METRIC_NAMES]
            )
    return buffer.getvalue()


TRAINING_DEFAULTS = {
    "learning_rate": 2e-4,
    "max_epochs": 5,
    "finetuning_type": "lora",
    "batch_size": 4,
    "max_sequence_length": 1024,
}


@dataclass(frozen=True, slots=True)
class TrainingConfig:
    learning_rate: float = 2e-4
    max_epochs: int = 5
    finetuning_type: str = "lora"
    batch_size: int = 4
    max_sequence_length: int = 1024

    def __post_init__(self) -> None:
        for name in ("learning_rate", "max_epochs", "batch_size", "max_sequence_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.finetuning_type:
            raise ValueError("finetuning_type must be non-empty")


def _format_number(value) -> str:
    """Small floats render in compact scientific form, so 0.0002 prints as
    the conventional 2e-4."""
    if isinstance(value, float) and value != 0 and abs(value) < 1e-3:
        mantissa, exponent = f"{value:e}".split("e")
        mantissa = mantissa.rstrip("0").rstrip(".")
        return f"{mantissa}e{int(exponent)}"
    return str(value)


def emit_training_config(overrides: dict | None, out_dir: str | Path) -> TrainingConfig:
    """Write train.cfg (key=value) and train.json with the fine-tuning
    hyperparameters, overrides applied field-wise."""
    values = dict(TRAINING_DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in values:
            raise ValueError(f"unknown training parameter {key!r}")
        values[key] = value
    config = TrainingConfig(**values)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_lines = [
        f"learning_rate={_format_number(config.learning_rate)}",
        f"max_epochs={config.max_epochs}",
        f"finetuning_type={config.finetuning_type}",
        f"batch_size={config.batch_size}",
        f"max_sequence_length={config.max_sequence_length}",
    ]
    (out / "train.cfg").write_text("\n".join(cfg_lines) + "\n", encoding="utf-8")
    (out / "train.json").write_text(
        json.dumps(
            {
                "learning_rate": config.learning_rate,
                "max_epochs": config.max_epochs,
                "finetuning_type": config.finetuning_type,
                "batch_size": config.batch_size,
                "max_sequence_length": config.max_sequence_length,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return config
