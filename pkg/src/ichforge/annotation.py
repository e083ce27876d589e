"""Inline entity markup and POS-pair formats for heritage texts.

Markup grammar: paired ``<LABEL>...</LABEL>`` tags from the closed label
set, no nesting; literal ``<`` in content is written ``&lt;`` and ``&``
is written ``&amp;``. All offsets count Unicode code points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator


class EntityLabel(Enum):
    TITLE = "ICH-TITLE"
    PLACE = "ICH-PLACE"
    TERM = "ICH-TERM"

    @classmethod
    def from_name(cls, name: str) -> "EntityLabel":
        for member in cls:
            if member.value == name:
                return member
        raise MarkupError(f"unknown label {name}")


class MarkupError(ValueError):
    """Raised for malformed entity markup or POS lines."""


@dataclass(frozen=True, slots=True)
class EntitySpan:
    start: int
    end: int
    label: EntityLabel


@dataclass(frozen=True, slots=True)
class PosToken:
    surface: str
    tag: str


@dataclass(frozen=True, slots=True)
class AnnotatedDocument:
    doc_id: str
    text: str
    entities: tuple[EntitySpan, ...]
    pos_tokens: tuple[PosToken, ...] | None = None


@dataclass(frozen=True, slots=True)
class Violation:
    kind: str
    message: str
    span_index: int | None = None


DEFAULT_POS_TAGS = frozenset("n v a d p m q r c u w".split())

_LABEL_NAMES = {member.value for member in EntityLabel}


def _byte_offset(markup: str, index: int) -> int:
    return len(markup[:index].encode("utf-8"))


def parse_annotated_text(markup: str, doc_id: str = "") -> AnnotatedDocument:
    """Parse inline markup into plain text plus entity spans.

    Raises MarkupError (with the offending label and byte offset) for
    unknown labels, nesting, mismatched or unclosed tags, empty entities,
    and bad escapes.
    """
    text_parts: list[str] = []
    length = 0
    entities: list[EntitySpan] = []
    open_label: EntityLabel | None = None
    open_start = 0
    i = 0
    while i < len(markup):
        ch = markup[i]
        if ch == "<":
            close = markup.find(">", i + 1)
            if close == -1:
                raise MarkupError(f"unterminated tag at byte offset {_byte_offset(markup, i)}")
            body = markup[i + 1 : close]
            if body.startswith("/"):
                name = body[1:]
                if name not in _LABEL_NAMES:
                    raise MarkupError(
                        f"unknown label {name} at byte offset {_byte_offset(markup, i)}"
                    )
                label = EntityLabel.from_name(name)
                if open_label is None:
                    raise MarkupError(
                        f"closing tag </{name}> without opener at byte offset "
                        f"{_byte_offset(markup, i)}"
                    )
                if label is not open_label:
                    raise MarkupError(
                        f"mismatched closing tag </{name}> for <{open_label.value}> "
                        f"at byte offset {_byte_offset(markup, i)}"
                    )
                if length == open_start:
                    raise MarkupError(
                        f"empty entity <{name}> at byte offset {_byte_offset(markup, i)}"
                    )
                entities.append(EntitySpan(open_start, length, label))
                open_label = None
            else:
                if body not in _LABEL_NAMES:
                    raise MarkupError(
                        f"unknown label {body} at byte offset {_byte_offset(markup, i)}"
                    )
                if open_label is not None:
                    raise MarkupError(
                        f"nested tag <{body}> inside <{open_label.value}> at byte offset "
                        f"{_byte_offset(markup, i)}"
                    )
                open_label = EntityLabel.from_name(body)
                open_start = length
            i = close + 1
        elif ch == "&":
            if markup.startswith("&lt;", i):
                text_parts.append("<")
                i += 4
            elif markup.startswith("&amp;", i):
                text_parts.append("&")
                i += 5
            else:
                raise MarkupError(
                    f"bare '&' at byte offset {_byte_offset(markup, i)} "
                    "(write it as &amp;)"
                )
            length += 1
        else:
            text_parts.append(ch)
            length += 1
            i += 1
    if open_label is not None:
        raise MarkupError(f"unclosed tag <{open_label.value}>")
    return AnnotatedDocument(doc_id, "".join(text_parts), tuple(entities))


def escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;")


def serialize_annotated(doc: AnnotatedDocument) -> str:
    """Inverse of parse_annotated_text: insert tags at span boundaries and
    escape the plain text. Refuses invalid documents."""
    violations = validate_annotations(doc)
    if violations:
        raise MarkupError(f"cannot serialize invalid document: {violations[0].message}")
    parts: list[str] = []
    cursor = 0
    for span in doc.entities:
        parts.append(escape_text(doc.text[cursor : span.start]))
        parts.append(f"<{span.label.value}>")
        parts.append(escape_text(doc.text[span.start : span.end]))
        parts.append(f"</{span.label.value}>")
        cursor = span.end
    parts.append(escape_text(doc.text[cursor:]))
    return "".join(parts)


def validate_annotations(doc: AnnotatedDocument) -> list[Violation]:
    """Every invariant violation, as report entries; empty means valid."""
    violations: list[Violation] = []
    n = len(doc.text)
    for idx, span in enumerate(doc.entities):
        label = span.label.value if isinstance(span.label, EntityLabel) else span.label
        if not isinstance(span.label, EntityLabel) and label not in _LABEL_NAMES:
            violations.append(
                Violation("unknown-label", f"span {idx}: unknown label {label!r}", idx)
            )
        if span.start < 0 or span.end > n or span.start >= span.end:
            violations.append(
                Violation(
                    "out-of-bounds",
                    f"span {idx}: offsets ({span.start}, {span.end}) out of bounds "
                    f"for text of length {n}",
                    idx,
                )
            )
    for idx in range(1, len(doc.entities)):
        prev, cur = doc.entities[idx - 1], doc.entities[idx]
        if cur.start < prev.start:
            violations.append(
                Violation(
                    "unsorted", f"span {idx} starts before span {idx - 1}", idx
                )
            )
        elif cur.start < prev.end:
            violations.append(
                Violation(
                    "overlap",
                    f"spans {idx - 1} ({prev.start},{prev.end}) and {idx} "
                    f"({cur.start},{cur.end}) overlap",
                    idx,
                )
            )
    if doc.pos_tokens is not None:
        for idx, token in enumerate(doc.pos_tokens):
            if not token.surface or "/" in token.surface or any(
                ch.isspace() for ch in token.surface
            ):
                violations.append(
                    Violation(
                        "bad-surface",
                        f"pos token {idx}: surface {token.surface!r} is empty or "
                        "contains whitespace or '/'",
                        idx,
                    )
                )
        joined = "".join(token.surface for token in doc.pos_tokens)
        squeezed = "".join(ch for ch in doc.text if not ch.isspace())
        if joined != squeezed:
            violations.append(
                Violation(
                    "pos-mismatch",
                    "concatenated POS surfaces do not reconstruct the text",
                )
            )
    return violations


def extract_entities(
    doc: AnnotatedDocument, label_filter: EntityLabel | None = None
) -> list[tuple[str, EntityLabel]]:
    """(surface, label) pairs in start order, optionally filtered."""
    return [
        (doc.text[span.start : span.end], span.label)
        for span in doc.entities
        if label_filter is None or span.label is label_filter
    ]


def parse_pos_line(
    line: str, tagset: frozenset[str] | set[str] = DEFAULT_POS_TAGS
) -> list[PosToken]:
    """Parse whitespace-separated ``surface/tag`` pairs."""
    tokens: list[PosToken] = []
    for index, piece in enumerate(line.split()):
        if "/" not in piece:
            raise MarkupError(f"token {index} ({piece!r}) has no '/' separator")
        surface, tag = piece.rsplit("/", 1)
        if not surface or "/" in surface:
            raise MarkupError(f"token {index} ({piece!r}) has a malformed surface")
        if tag not in tagset:
            raise MarkupError(f"unknown tag {tag} in token {index} ({piece!r})")
        tokens.append(PosToken(surface, tag))
    return tokens


def format_pos_line(tokens: Iterable[PosToken]) -> str:
    return " ".join(f"{token.surface}/{token.tag}" for token in tokens)


def document_to_record(doc: AnnotatedDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "text": doc.text,
        "entities": [
            {"start": span.start, "end": span.end, "label": span.label.value}
            for span in doc.entities
        ],
        "pos": [[t.surface, t.tag] for t in doc.pos_tokens]
        if doc.pos_tokens is not None
        else None,
    }


def document_from_record(record: dict) -> AnnotatedDocument:
    pos = record.get("pos")
    return AnnotatedDocument(
        doc_id=record["doc_id"],
        text=record["text"],
        entities=tuple(
            EntitySpan(e["start"], e["end"], EntityLabel.from_name(e["label"]))
            for e in record["entities"]
        ),
        pos_tokens=tuple(PosToken(s, t) for s, t in pos) if pos is not None else None,
    )


def write_annotated(docs: Iterable[AnnotatedDocument], path: str | Path) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8", newline="\n") as handle:
        for doc in docs:
            handle.write(json.dumps(document_to_record(doc), ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def read_annotated(path: str | Path) -> Iterator[AnnotatedDocument]:
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield document_from_record(json.loads(line))
