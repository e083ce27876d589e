"""Pure-Python kernels; same contracts as the compiled module."""

from __future__ import annotations

IMPLEMENTATION = "pure"


def lcs_length(a: list[int], b: list[int]) -> int:
    """Length of the longest common subsequence of two id sequences.

    Rolling single-row DP, O(len(a)*len(b)) time, O(min) memory.
    """
    if not a or not b:
        return 0
    if len(b) > len(a):
        a, b = b, a
    row = [0] * (len(b) + 1)
    for x in a:
        diag = 0
        for j, y in enumerate(b, start=1):
            prev = row[j]
            if x == y:
                row[j] = diag + 1
            elif row[j - 1] > row[j]:
                row[j] = row[j - 1]
            diag = prev
    return row[len(b)]


def count_tokens(text: str) -> int:
    """One token per non-whitespace code point, except each maximal run of
    ASCII alphanumerics counts once."""
    count = 0
    in_run = False
    for ch in text:
        code = ord(ch)
        if code < 128 and (
            48 <= code <= 57 or 65 <= code <= 90 or 97 <= code <= 122
        ):
            if not in_run:
                count += 1
                in_run = True
        else:
            in_run = False
            if not ch.isspace():
                count += 1
    return count
