"""Append-only decision log over an instruction-sample store.

Every decision is durably appended before it is applied; replaying the
log from an empty store reconstructs the exact effective states.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterator

from ichforge.instruct import (
    InstructionSample,
    ReviewState,
    TaskKind,
    load_samples,
    sample_to_record,
)


class DecisionAction(Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    EDIT = "Edit"

    @classmethod
    def from_name(cls, name: str) -> "DecisionAction":
        for member in cls:
            if member.value == name:
                return member
        raise ReviewError("bad_request", f"unknown action {name!r}")


ACTION_TO_STATE = {
    DecisionAction.ACCEPT: ReviewState.ACCEPTED,
    DecisionAction.REJECT: ReviewState.REJECTED,
    DecisionAction.EDIT: ReviewState.EDITED,
}


class ReviewError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


@dataclass(frozen=True, slots=True)
class ReviewDecision:
    sample_id: str
    action: DecisionAction
    reviewer: str
    edited_output: str | None = None
    decided_at: str = ""

    def to_record(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "action": self.action.value,
            "reviewer": self.reviewer,
            "edited_output": self.edited_output,
            "decided_at": self.decided_at,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ReviewDecision":
        return cls(
            sample_id=record["sample_id"],
            action=DecisionAction.from_name(record["action"]),
            reviewer=record.get("reviewer", ""),
            edited_output=record.get("edited_output"),
            decided_at=record.get("decided_at", ""),
        )


@dataclass(frozen=True, slots=True)
class ReviewQueueStats:
    pending: int
    accepted: int
    edited: int
    rejected: int

    @property
    def total(self) -> int:
        return self.pending + self.accepted + self.edited + self.rejected


class ReviewStore:
    """In-memory sample index plus the durable decision log.

    Reads are lock-free; all writes go through one lock, and a decision is
    flushed to disk before the caller gets an answer.
    """

    def __init__(
        self,
        samples: list[InstructionSample],
        log_path: str | Path | None = None,
        corpus_texts: dict[str, str] | None = None,
    ):
        self._samples: dict[str, InstructionSample] = {}
        for sample in samples:
            if sample.id in self._samples:
                raise ReviewError("conflict", f"duplicate sample id {sample.id!r}")
            self._samples[sample.id] = sample
        self._order = sorted(self._samples)
        self._log_path = Path(log_path) if log_path else None
        self._corpus_texts = corpus_texts or {}
        self._history: list[ReviewDecision] = []
        self._write_lock = threading.Lock()
        if self._log_path and self._log_path.exists():
            self._replay(self._log_path)

    @property
    def history(self) -> list[ReviewDecision]:
        return list(self._history)

    def _replay(self, log_path: Path) -> None:
        with log_path.open(encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    decision = ReviewDecision.from_record(json.loads(line))
                    self._apply(decision)
                    self._history.append(decision)

    def _apply(self, decision: ReviewDecision) -> InstructionSample:
        sample = self._samples[decision.sample_id]
        sample.review_state = ACTION_TO_STATE[decision.action]
        sample.edited_output = (
            decision.edited_output if decision.action is DecisionAction.EDIT else None
        )
        return sample

    def _validate(self, decision: ReviewDecision) -> InstructionSample:
        sample = self._samples.get(decision.sample_id)
        if sample is None:
            raise ReviewError("not_found", f"no sample with id {decision.sample_id!r}")
        if decision.action is DecisionAction.EDIT:
            if not decision.edited_output:
                raise ReviewError("validation", "Edit requires non-empty edited_output")
            if decision.edited_output == sample.output:
                raise ReviewError(
                    "validation", "edited_output must differ from the current output"
                )
        return sample

    def submit_decision(self, decision: ReviewDecision) -> InstructionSample:
        """Validate, durably log, and apply one decision.

        Replaying the exact same decision (same sample, action, text, and
        reviewer as the latest entry for that sample) is a no-op.
        """
        with self._write_lock:
            sample = self._validate(decision)
            latest = self._latest_for(decision.sample_id)
            if latest is not None and (
                latest.action is decision.action
                and latest.edited_output == decision.edited_output
                and latest.reviewer == decision.reviewer
            ):
                return sample
            if not decision.decided_at:
                decision = ReviewDecision(
                    sample_id=decision.sample_id,
                    action=decision.action,
                    reviewer=decision.reviewer,
                    edited_output=decision.edited_output,
                    decided_at=datetime.now(timezone.utc).isoformat(),
                )
            if self._log_path:
                with self._log_path.open("a", encoding="utf-8") as handle:
                    handle.write(json.dumps(decision.to_record(), ensure_ascii=False))
                    handle.write("\n")
                    handle.flush()
                    os.fsync(handle.fileno())
            self._history.append(decision)
            return self._apply(decision)

    def _latest_for(self, sample_id: str) -> ReviewDecision | None:
        for decision in reversed(self._history):
            if decision.sample_id == sample_id:
                return decision
        return None

    def get(self, sample_id: str) -> InstructionSample:
        sample = self._samples.get(sample_id)
        if sample is None:
            raise ReviewError("not_found", f"no sample with id {sample_id!r}")
        return sample

    def list_samples(
        self,
        state: ReviewState = ReviewState.PENDING,
        task: TaskKind | None = None,
        page: int = 0,
        page_size: int = 50,
    ) -> tuple[list[InstructionSample], int]:
        """One stable page of samples in id order, plus the filtered total."""
        if page < 0:
            raise ReviewError("bad_request", "page must be >= 0")
        if not 1 <= page_size <= 200:
            raise ReviewError("bad_request", "page_size must be in 1..200")
        matching = [
            self._samples[sid]
            for sid in self._order
            if self._samples[sid].review_state is state
            and (task is None or self._samples[sid].task is task)
        ]
        start = page * page_size
        return matching[start : start + page_size], len(matching)

    def stats(self) -> ReviewQueueStats:
        counts = {state: 0 for state in ReviewState}
        for sample in self._samples.values():
            counts[sample.review_state] += 1
        return ReviewQueueStats(
            pending=counts[ReviewState.PENDING],
            accepted=counts[ReviewState.ACCEPTED],
            edited=counts[ReviewState.EDITED],
            rejected=counts[ReviewState.REJECTED],
        )

    def all_samples(self) -> list[InstructionSample]:
        return [self._samples[sid] for sid in self._order]

    def source_snippet(self, sample: InstructionSample, width: int = 240) -> str | None:
        if sample.source_doc_id is None:
            return None
        text = self._corpus_texts.get(sample.source_doc_id)
        if text is None:
            return None
        return text[:width]

    def export_records(self, states: set[ReviewState]) -> Iterator[dict]:
        """Records in id order with edits applied, like dataset export."""
        for sid in self._order:
            sample = self._samples[sid]
            if sample.review_state in states:
                yield sample_to_record(sample, apply_edit=True)

    @classmethod
    def from_files(
        cls,
        store_path: str | Path,
        log_path: str | Path | None = None,
        corpus_path: str | Path | None = None,
    ) -> "ReviewStore":
        corpus_texts: dict[str, str] = {}
        if corpus_path:
            from ichforge.corpus import read_corpus

            corpus_texts = {doc.id: doc.text for doc in read_corpus(corpus_path)}
        return cls(load_samples(store_path), log_path, corpus_texts)
