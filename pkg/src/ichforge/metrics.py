"""Overlap metrics for generated text: ROUGE-1/2-F, ROUGE-L-F, BLEU-1..4,
and chrF, computed from scratch over character- or whitespace-token views.

All scores live in [0, 1]; report renderers scale by 100. LCS runs on the
kernel layer (compiled when available).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from ichforge._kernels import lcs_length

MODES = ("char", "whitespace")

BLEU_MAX_ORDER = 4
BLEU_EPS = 1e-9
CHRF_ORDER = 6
CHRF_BETA = 2.0

METRIC_NAMES = (
    "rouge1_f",
    "rouge2_f",
    "rougeL_f",
    "bleu1",
    "bleu2",
    "bleu3",
    "bleu4",
    "chrf",
)

REPORT_COLUMNS = (
    "ROUGE-1-F",
    "ROUGE-2-F",
    "ROUGE-L-F",
    "BLEU-1",
    "BLEU-2",
    "BLEU-3",
    "BLEU-4",
    "chrF",
)


@dataclass(frozen=True, slots=True)
class TokenSequence:
    tokens: tuple[str, ...]
    mode: str

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True, slots=True)
class NGramCounts:
    n: int
    counts: Counter

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True, slots=True)
class MetricReport:
    """The eight-score row rendered by the benchmark tables."""

    rouge1_f: float
    rouge2_f: float
    rougeL_f: float
    bleu1: float
    bleu2: float
    bleu3: float
    bleu4: float
    chrf: float
    sample_count: int

    def scores(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def rendered(self) -> dict[str, str]:
        """Scores scaled to the 0-100 display convention, two decimals."""
        return {name: f"{value * 100:.2f}" for name, value in self.scores().items()}


def tokenize(text: str, mode: str = "char") -> TokenSequence:
    """char: one token per non-whitespace code point; whitespace: split on
    whitespace runs."""
    if mode == "char":
        tokens = tuple(ch for ch in text if not ch.isspace())
    elif mode == "whitespace":
        tokens = tuple(text.split())
    else:
        raise ValueError(f"unknown tokenization mode {mode!r}")
    return TokenSequence(tokens, mode)


def ngram_counts(seq: TokenSequence, n: int) -> NGramCounts:
    if n < 1:
        raise ValueError("n-gram order must be >= 1")
    tokens = seq.tokens
    return NGramCounts(n, Counter(tokens[i : i + n] for i in range(len(tokens) - n + 1)))


def _require_same_mode(candidate: TokenSequence, reference: TokenSequence) -> None:
    if candidate.mode != reference.mode:
        raise ValueError(
            f"mode mismatch: candidate is {candidate.mode!r}, reference is {reference.mode!r}"
        )


def _clipped_overlap(cand: Counter, ref: Counter) -> int:
    return sum((cand & ref).values())


def rouge_n_f(candidate: TokenSequence, reference: TokenSequence, n: int) -> float:
    """F1 over clipped n-gram overlap; 0 when either side has no n-grams or
    nothing overlaps. Sequences too short for any n-gram on both sides
    compare by plain equality, so identical inputs always score 1."""
    _require_same_mode(candidate, reference)
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    cand_total, ref_total = cand.total, ref.total
    if cand_total == 0 and ref_total == 0:
        return 1.0 if candidate.tokens == reference.tokens else 0.0
    if cand_total == 0 or ref_total == 0:
        return 0.0
    overlap = _clipped_overlap(cand.counts, ref.counts)
    if overlap == 0:
        return 0.0
    precision = overlap / cand_total
    recall = overlap / ref_total
    return 2 * precision * recall / (precision + recall)


def rouge_l_f(candidate: TokenSequence, reference: TokenSequence) -> float:
    """F1 over longest-common-subsequence length."""
    _require_same_mode(candidate, reference)
    if not candidate.tokens or not reference.tokens:
        return 0.0
    ids: dict[str, int] = {}
    a = [ids.setdefault(tok, len(ids)) for tok in candidate.tokens]
    b = [ids.setdefault(tok, len(ids)) for tok in reference.tokens]
    lcs = lcs_length(a, b)
    if lcs == 0:
        return 0.0
    precision = lcs / len(a)
    recall = lcs / len(b)
    return 2 * precision * recall / (precision + recall)


def bleu_n(candidate: TokenSequence, reference: TokenSequence, n: int) -> float:
    """Cumulative BLEU: geometric mean of clipped precisions for orders
    1..n, times the brevity penalty.

    A zero match count is smoothed by adding 1e-9 to numerator and
    denominator. Orders the candidate is too short for are skipped
    (effective order), so identical inputs always score 1; an empty
    candidate scores 0.
    """
    if not 1 <= n <= BLEU_MAX_ORDER:
        raise ValueError(f"BLEU order must be in 1..{BLEU_MAX_ORDER}, got {n}")
    _require_same_mode(candidate, reference)
    c, r = len(candidate.tokens), len(reference.tokens)
    if c == 0:
        return 0.0
    log_sum = 0.0
    effective = 0
    for k in range(1, n + 1):
        cand = ngram_counts(candidate, k)
        total = cand.total
        if total == 0:
            continue
        matched = _clipped_overlap(cand.counts, ngram_counts(reference, k).counts)
        if matched == 0:
            p_k = BLEU_EPS / (total + BLEU_EPS)
        else:
            p_k = matched / total
        log_sum += math.log(p_k)
        effective += 1
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_sum / effective)


def chrf(candidate: str, reference: str) -> float:
    """Character n-gram F-score, orders 1..6, beta=2, whitespace removed.

    Per-order F values are averaged; orders where neither side has any
    n-grams are skipped. Either side empty (after whitespace removal)
    scores 0.
    """
    cand = "".join(ch for ch in candidate if not ch.isspace())
    ref = "".join(ch for ch in reference if not ch.isspace())
    if not cand or not ref:
        return 0.0
    beta_sq = CHRF_BETA * CHRF_BETA
    f_sum = 0.0
    orders = 0
    for n in range(1, CHRF_ORDER + 1):
        cand_counts = Counter(cand[i : i + n] for i in range(len(cand) - n + 1))
        ref_counts = Counter(ref[i : i + n] for i in range(len(ref) - n + 1))
        cand_total = sum(cand_counts.values())
        ref_total = sum(ref_counts.values())
        if cand_total == 0 and ref_total == 0:
            continue
        overlap = sum((cand_counts & ref_counts).values())
        precision = overlap / cand_total if cand_total else 0.0
        recall = overlap / ref_total if ref_total else 0.0
        denom = beta_sq * precision + recall
        f_sum += (1 + beta_sq) * precision * recall / denom if denom > 0 else 0.0
        orders += 1
    return f_sum / orders if orders else 0.0


def score_pair(candidate: str, reference: str, mode: str = "char") -> dict[str, float]:
    """All eight metrics for one (candidate, reference) text pair."""
    cand = tokenize(candidate, mode)
    ref = tokenize(reference, mode)
    scores = {
        "rouge1_f": rouge_n_f(cand, ref, 1),
        "rouge2_f": rouge_n_f(cand, ref, 2),
        "rougeL_f": rouge_l_f(cand, ref),
    }
    for n in range(1, BLEU_MAX_ORDER + 1):
        scores[f"bleu{n}"] = bleu_n(cand, ref, n)
    scores["chrf"] = chrf(candidate, reference)
    return scores


def evaluate_corpus(
    pairs: Sequence[tuple[str, str]] | Iterable[tuple[str, str]],
    mode: str = "char",
) -> MetricReport:
    """Mean per-pair scores over an eval set.

    Per-metric means use math.fsum, so the result does not depend on pair
    order and parallel scoring cannot change it.
    """
    sums = {name: [] for name in METRIC_NAMES}
    count = 0
    for candidate, reference in pairs:
        for name, value in score_pair(candidate, reference, mode).items():
            sums[name].append(value)
        count += 1
    if count == 0:
        raise ValueError("evaluate_corpus needs at least one pair")
    means = {name: math.fsum(values) / count for name, values in sums.items()}
    return MetricReport(sample_count=count, **means)
