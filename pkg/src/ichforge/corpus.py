"""Corpus ingestion, rule-based cleaning, token counts, and category stats."""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from ichforge._kernels import count_tokens as _count_tokens_kernel


class SourceCategory(Enum):
    """The five source-category rows every corpus statistic is keyed by."""

    POLICIES_REGULATIONS = "PoliciesRegulations"
    NEWS_THEMATIC_REPORTS = "NewsThematicReports"
    ACADEMIC_RESOURCES = "AcademicResources"
    PROJECT_INVENTORY = "ProjectInventory"
    JOURNAL_ABSTRACTS = "JournalAbstracts"

    @classmethod
    def from_name(cls, name: str) -> "SourceCategory":
        for member in cls:
            if member.value == name:
                return member
        known = ", ".join(m.value for m in cls)
        raise ValueError(f"unknown category {name!r} (expected one of: {known})")


@dataclass(slots=True)
class Document:
    id: str
    category: SourceCategory
    text: str
    source_path: str
    token_count: int = 0


@dataclass(slots=True)
class CategoryStats:
    num_tokens: int
    num_texts: int
    avg_length: float
    max_length: int
    min_length: int


@dataclass(slots=True)
class IngestReport:
    ingested: int = 0
    skipped: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def note_skip(self, message: str) -> None:
        self.skipped += 1
        self.diagnostics.append(message)


@dataclass(slots=True)
class IngestResult:
    documents: list[Document]
    report: IngestReport


INGEST_FORMATS = ("plain", "jsonl")

# A tag is <, optional /, an element name starting right away, then nothing,
# a sole /, or whitespace-led attributes (no angle brackets inside).
_TAG_RE = re.compile(r"</?([a-zA-Z][a-zA-Z0-9]*)(/|\s[^<>]*)?>")

_KNOWN_HTML_ELEMENTS = frozenset(
    """a abbr address area article aside audio b base bdo big blockquote body
    br button canvas caption center cite code col colgroup dd del dfn dir div
    dl dt em embed fieldset figcaption figure font footer form frame frameset
    h1 h2 h3 h4 h5 h6 head header hr html i iframe img input ins kbd label
    legend li link main map marquee menu meta nav nobr noframes noscript
    object ol option p param pre q s samp script section select small source
    span strike strong style sub sup table tbody td textarea tfoot th thead
    title tr tt u ul var video wbr""".split()
)

# Full-width digits and Latin letters fold to ASCII; CJK punctuation stays.
_FULLWIDTH_FOLD = {
    cp: cp - 0xFEE0
    for cp in [*range(0xFF10, 0xFF1A), *range(0xFF21, 0xFF3B), *range(0xFF41, 0xFF5B)]
}

_WS_RUN_RE = re.compile(r"\s+")


def _drop_controls(text: str) -> str:
    return "".join(
        ch for ch in text if ch == "\n" or unicodedata.category(ch) != "Cc"
    )


def _strip_html_tags(text: str) -> str:
    def replace_known(match: re.Match[str]) -> str:
        if match.group(1).lower() in _KNOWN_HTML_ELEMENTS:
            return " "
        return match.group(0)

    # Re-run until stable so removals cannot uncover a fresh tag.
    while True:
        stripped = _TAG_RE.sub(replace_known, text)
        if stripped == text:
            return text
        text = stripped


def clean_text(raw: str) -> str:
    """Apply the fixed cleaning rules, in order: NFC normalization, control
    characters dropped (newline survives as whitespace), full-width digits
    and Latin letters folded to ASCII, known HTML tags replaced by a space,
    whitespace runs collapsed, ends stripped.

    Total and idempotent; an empty result means "drop this document".
    """
    text = unicodedata.normalize("NFC", raw)
    text = _drop_controls(text)
    text = text.translate(_FULLWIDTH_FOLD)
    text = _strip_html_tags(text)
    return _WS_RUN_RE.sub(" ", text).strip()


def count_tokens(text: str) -> int:
    """Tokens = CJK/other non-whitespace code points, one each, plus one per
    maximal ASCII-alphanumeric run."""
    return _count_tokens_kernel(text)


def _record_id(source_path: str, index: int) -> str:
    digest = hashlib.sha1(f"{source_path}\x00{index}".encode()).hexdigest()
    return f"doc-{digest[:16]}"


def ingest_documents(
    root_path: str | Path, category: SourceCategory, format: str
) -> IngestResult:
    """Read raw documents from disk. Text is left uncleaned.

    ``plain`` reads every *.txt under root (one document per file);
    ``jsonl`` reads every *.jsonl (one document per line, "text" field).
    ``root_path`` may also point at a single file of either kind.
    Malformed jsonl lines are skipped and counted in the report.
    """
    root = Path(root_path)
    if not root.exists():
        raise FileNotFoundError(f"ingest root does not exist: {root}")
    if format not in INGEST_FORMATS:
        raise ValueError(f"unknown ingest format {format!r}")

    pattern = "*.txt" if format == "plain" else "*.jsonl"
    if root.is_file():
        files = [root]
        base = root.parent
    else:
        files = sorted(root.rglob(pattern))
        base = root

    report = IngestReport()
    documents: list[Document] = []
    for path in files:
        rel = path.relative_to(base).as_posix()
        if format == "plain":
            documents.append(
                Document(
                    id=_record_id(rel, 0),
                    category=category,
                    text=path.read_text(encoding="utf-8"),
                    source_path=rel,
                )
            )
            report.ingested += 1
            continue
        with path.open(encoding="utf-8") as handle:
            for index, line in enumerate(handle):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    report.note_skip(f"{rel}:{index + 1}: invalid JSON ({exc.msg})")
                    continue
                text = record.get("text") if isinstance(record, dict) else None
                if not isinstance(text, str):
                    report.note_skip(f"{rel}:{index + 1}: missing string 'text' field")
                    continue
                documents.append(
                    Document(
                        id=_record_id(rel, index),
                        category=category,
                        text=text,
                        source_path=rel,
                    )
                )
                report.ingested += 1
    return IngestResult(documents, report)


def finalize_documents(documents: Iterable[Document]) -> list[Document]:
    """Clean every document, set token counts, and drop the ones that clean
    to empty text."""
    kept: list[Document] = []
    for doc in documents:
        cleaned = clean_text(doc.text)
        if not cleaned:
            continue
        doc.text = cleaned
        doc.token_count = count_tokens(cleaned)
        kept.append(doc)
    return kept


def compute_stats(documents: Iterable[Document]) -> dict[SourceCategory, CategoryStats]:
    """Aggregate per-category token sums and length extrema.

    Rows appear in category declaration order; avg_length is kept at full
    precision (renderers round to two decimals).
    """
    sums: dict[SourceCategory, list[int]] = {}
    for doc in documents:
        row = sums.get(doc.category)
        if row is None:
            sums[doc.category] = [doc.token_count, 1, doc.token_count, doc.token_count]
        else:
            row[0] += doc.token_count
            row[1] += 1
            if doc.token_count > row[2]:
                row[2] = doc.token_count
            if doc.token_count < row[3]:
                row[3] = doc.token_count
    return {
        category: CategoryStats(
            num_tokens=row[0],
            num_texts=row[1],
            avg_length=row[0] / row[1],
            max_length=row[2],
            min_length=row[3],
        )
        for category in SourceCategory
        if (row := sums.get(category)) is not None
    }


def deduplicate(
    documents: Iterable[Document],
) -> tuple[list[Document], list[tuple[str, str]]]:
    """Drop exact-duplicate texts, keeping the first occurrence.

    Returns (survivors in input order, [(kept_id, dropped_id), ...]).
    """
    first_by_text: dict[str, str] = {}
    survivors: list[Document] = []
    removals: list[tuple[str, str]] = []
    for doc in documents:
        kept_id = first_by_text.get(doc.text)
        if kept_id is None:
            first_by_text[doc.text] = doc.id
            survivors.append(doc)
        else:
            removals.append((kept_id, doc.id))
    return survivors, removals


def document_to_record(doc: Document) -> dict:
    return {
        "id": doc.id,
        "category": doc.category.value,
        "text": doc.text,
        "source_path": doc.source_path,
        "token_count": doc.token_count,
    }


def document_from_record(record: dict) -> Document:
    return Document(
        id=record["id"],
        category=SourceCategory.from_name(record["category"]),
        text=record["text"],
        source_path=record["source_path"],
        token_count=record["token_count"],
    )


def write_corpus(documents: Iterable[Document], path: str | Path) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        for doc in documents:
            handle.write(json.dumps(document_to_record(doc), ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def read_corpus(path: str | Path) -> Iterator[Document]:
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield document_from_record(json.loads(line))
