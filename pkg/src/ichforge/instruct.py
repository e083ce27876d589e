"""Instruction-sample construction, LLM-assisted QA synthesis, dataset
export/import, and eval-split selection."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from ichforge.client import ChatMessage, EndpointConfig, chat_complete


class TaskKind(Enum):
    KNOWLEDGE_QA = "KnowledgeQA"
    CONTEXT_QA = "ContextQA"
    TERM_INTERPRETATION = "TermInterpretation"

    @classmethod
    def from_name(cls, name: str) -> "TaskKind":
        for member in cls:
            if member.value == name:
                return member
        known = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown task {name!r} (expected one of: {known})")


class Provenance(Enum):
    TEMPLATE = "Template"
    SYNTHETIC = "Synthetic"
    MANUAL = "Manual"


class ReviewState(Enum):
    PENDING = "Pending"
    ACCEPTED = "Accepted"
    EDITED = "Edited"
    REJECTED = "Rejected"


# Canonical instruction frames, frozen so dataset builds are reproducible.
CONTEXT_MARKER = "<Reference Material>"
CONTEXT_DIRECTIVE = (
    "Using the provided content, answer the following question and ensure "
    "the output strictly derives from the given material:"
)
TERM_FRAME = (
    "As a professional scholar in Intangible Cultural Heritage (ICH), "
    "provide a concise introduction to the following Chinese ICH item: "
)

# Appended to every synthesis prompt so responses are machine-checkable.
SYNTH_FORMAT_SUFFIX = (
    "\n\n请仅输出一个JSON数组，每个元素是形如 "
    '{"question": "...", "answer": "..."} 的对象，不要输出任何其他内容。'
)


@dataclass(slots=True)
class InstructionSample:
    id: str
    task: TaskKind
    instruction: str
    output: str
    context: str | None = None
    provenance: Provenance = Provenance.TEMPLATE
    source_doc_id: str | None = None
    review_state: ReviewState = ReviewState.ACCEPTED
    edited_output: str | None = None

    def effective_output(self) -> str:
        if self.review_state is ReviewState.EDITED and self.edited_output:
            return self.edited_output
        return self.output


@dataclass(frozen=True, slots=True)
class PromptTemplate:
    name: str
    body: str

    def __post_init__(self) -> None:
        if self.body.count("{source_text}") != 1:
            raise ValueError(
                f"template {self.name!r} must contain the {{source_text}} "
                "placeholder exactly once"
            )

    def fill(self, source_text: str) -> str:
        return self.body.replace("{source_text}", source_text)


@dataclass(slots=True)
class SynthesisResult:
    samples: list[InstructionSample]
    diagnostics: list[str] = field(default_factory=list)


def _sample_id(task: TaskKind, instruction: str, output: str, source_doc_id: str | None) -> str:
    payload = "\x00".join([task.value, instruction, output, source_doc_id or ""])
    prefix = {"KnowledgeQA": "kqa", "ContextQA": "cqa", "TermInterpretation": "term"}[task.value]
    return f"{prefix}-{hashlib.sha1(payload.encode()).hexdigest()[:12]}"


def _initial_state(provenance: Provenance) -> ReviewState:
    # Synthetic output awaits human review; curated exemplars start accepted.
    return ReviewState.PENDING if provenance is Provenance.SYNTHETIC else ReviewState.ACCEPTED


def build_knowledge_qa(
    question: str,
    answer: str,
    source_doc_id: str | None = None,
    provenance: Provenance = Provenance.TEMPLATE,
) -> InstructionSample:
    if not question or not answer:
        raise ValueError("knowledge QA needs a non-empty question and answer")
    return InstructionSample(
        id=_sample_id(TaskKind.KNOWLEDGE_QA, question, answer, source_doc_id),
        task=TaskKind.KNOWLEDGE_QA,
        instruction=question,
        output=answer,
        provenance=provenance,
        source_doc_id=source_doc_id,
        review_state=_initial_state(provenance),
    )


def build_context_qa(
    material: str,
    question: str,
    answer: str,
    source_doc_id: str | None = None,
    provenance: Provenance = Provenance.TEMPLATE,
) -> InstructionSample:
    if not material or not question or not answer:
        raise ValueError("context QA needs non-empty material, question, and answer")
    instruction = f"{CONTEXT_MARKER} {CONTEXT_DIRECTIVE} {question}"
    return InstructionSample(
        id=_sample_id(TaskKind.CONTEXT_QA, instruction, answer, source_doc_id),
        task=TaskKind.CONTEXT_QA,
        instruction=instruction,
        output=answer,
        context=material,
        provenance=provenance,
        source_doc_id=source_doc_id,
        review_state=_initial_state(provenance),
    )


def build_term_interpretation(
    term: str,
    explanation: str,
    source_doc_id: str | None = None,
    provenance: Provenance = Provenance.TEMPLATE,
) -> InstructionSample:
    if not term or not explanation:
        raise ValueError("term interpretation needs a non-empty term and explanation")
    return InstructionSample(
        id=_sample_id(TaskKind.TERM_INTERPRETATION, TERM_FRAME + term, explanation, source_doc_id),
        task=TaskKind.TERM_INTERPRETATION,
        instruction=TERM_FRAME + term,
        output=explanation,
        provenance=provenance,
        source_doc_id=source_doc_id,
        review_state=_initial_state(provenance),
    )


def assemble_user_message(sample: InstructionSample) -> str:
    """The single user message a model sees for this sample. Context QA
    substitutes the material for the reference marker."""
    if sample.task is TaskKind.CONTEXT_QA and sample.context:
        return sample.instruction.replace(CONTEXT_MARKER, sample.context, 1)
    return sample.instruction


def _parse_qa_response(text: str) -> list[tuple[str, str]] | None:
    """Strict parse of the synthesis contract: a JSON array of
    {"question", "answer"} objects with non-empty string values."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        return None
    if not isinstance(payload, list):
        return None
    pairs: list[tuple[str, str]] = []
    for item in payload:
        if not isinstance(item, dict):
            return None
        question, answer = item.get("question"), item.get("answer")
        if not isinstance(question, str) or not isinstance(answer, str):
            return None
        if not question or not answer:
            return None
        pairs.append((question, answer))
    return pairs


def synthesize_qa_pairs(
    source_text: str,
    template: PromptTemplate,
    client_config: EndpointConfig,
    max_pairs: int,
    source_doc_id: str | None = None,
    transport=None,
) -> SynthesisResult:
    """Ask the endpoint for QA pairs over one source text.

    Each well-formed pair becomes a Pending Synthetic sample; identical
    (question, answer) pairs collapse to one. An unparseable response
    contributes zero samples plus one diagnostic, never fabricated data.
    """
    if not source_text:
        raise ValueError("source_text must be non-empty")
    prompt = template.fill(source_text) + SYNTH_FORMAT_SUFFIX
    exchange = chat_complete(
        client_config, [ChatMessage("user", prompt)], transport=transport
    )
    pairs = _parse_qa_response(exchange.response_text)
    if pairs is None:
        excerpt = exchange.response_text[:120]
        return SynthesisResult(
            samples=[],
            diagnostics=[
                f"rejected generation for source {source_doc_id or '<unknown>'}: "
                f"response is not a JSON question/answer array ({excerpt!r})"
            ],
        )
    samples: list[InstructionSample] = []
    seen: set[tuple[str, str]] = set()
    for question, answer in pairs:
        if (question, answer) in seen:
            continue
        seen.add((question, answer))
        samples.append(
            build_knowledge_qa(
                question, answer, source_doc_id=source_doc_id,
                provenance=Provenance.SYNTHETIC,
            )
        )
        if len(samples) >= max_pairs:
            break
    return SynthesisResult(samples=samples)


def sample_to_record(sample: InstructionSample, apply_edit: bool = False) -> dict:
    """JSONL object for one sample. With apply_edit, the Edited text becomes
    the output field and edited_output is cleared (training-file view)."""
    output = sample.output
    edited = sample.edited_output
    if apply_edit and sample.review_state is ReviewState.EDITED and edited:
        output, edited = edited, None
    return {
        "id": sample.id,
        "task": sample.task.value,
        "instruction": sample.instruction,
        "context": sample.context,
        "output": output,
        "provenance": sample.provenance.value,
        "source_doc_id": sample.source_doc_id,
        "review_state": sample.review_state.value,
        "edited_output": edited,
    }


def sample_from_record(record: dict) -> InstructionSample:
    return InstructionSample(
        id=record["id"],
        task=TaskKind.from_name(record["task"]),
        instruction=record["instruction"],
        output=record["output"],
        context=record.get("context"),
        provenance=Provenance(record.get("provenance", "Manual")),
        source_doc_id=record.get("source_doc_id"),
        review_state=ReviewState(record.get("review_state", "Accepted")),
        edited_output=record.get("edited_output"),
    )


def export_dataset(
    samples: Iterable[InstructionSample],
    include_states: set[ReviewState] | frozenset[ReviewState],
    path: str | Path,
) -> int:
    """Write the selected samples as JSONL, ordered by id, edits applied.

    Fails on duplicate ids rather than silently merging.
    """
    selected = [s for s in samples if s.review_state in include_states]
    selected.sort(key=lambda s: s.id)
    seen_ids: set[str] = set()
    for sample in selected:
        if sample.id in seen_ids:
            raise ValueError(f"duplicate sample id {sample.id!r} in export")
        seen_ids.add(sample.id)
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        for sample in selected:
            handle.write(
                json.dumps(sample_to_record(sample, apply_edit=True), ensure_ascii=False)
            )
            handle.write("\n")
    return len(selected)


def load_samples(path: str | Path) -> list[InstructionSample]:
    samples: list[InstructionSample] = []
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                samples.append(sample_from_record(json.loads(line)))
    return samples


def make_eval_split(
    samples: Sequence[InstructionSample],
    task: TaskKind,
    size: int,
    seed: int,
) -> list[InstructionSample]:
    """Seeded sample (without replacement) of Accepted/Edited samples of one
    task. Pure in (samples, task, size, seed)."""
    eligible = sorted(
        (
            s
            for s in samples
            if s.task is task and s.review_state in (ReviewState.ACCEPTED, ReviewState.EDITED)
        ),
        key=lambda s: s.id,
    )
    if size < 0:
        raise ValueError("size must be >= 0")
    if len(eligible) < size:
        raise ValueError(f"need {size}, have {len(eligible)}")
    rng = random.Random(seed)
    return rng.sample(eligible, size)
