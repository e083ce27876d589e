#!/usr/bin/env python3
"""Time the compiled kernels against their pure-Python twins.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import time

from ichforge._kernels import pure

try:
    from ichforge._kernels import _speedups
except ImportError:
    _speedups = None


def time_call(fn, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def make_text(rng: random.Random, length: int) -> str:
    chars = "苗族古歌缂丝非物质文化遗产保护传承abcdefgh0123456789 ，。"
    return "".join(rng.choice(chars) for _ in range(length))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if _speedups is None:
        print("compiled kernels are not built; run pip install -e . first")
        return 1

    rng = random.Random(7)

    rows = []
    for size in (200, 500, 1000):
        a = [rng.randint(0, 50) for _ in range(size)]
        b = [rng.randint(0, 50) for _ in range(size)]
        t_pure = time_call(pure.lcs_length, a, b, repeat=args.repeat)
        t_fast = time_call(_speedups.lcs_length, a, b, repeat=args.repeat)
        assert pure.lcs_length(a, b) == _speedups.lcs_length(a, b)
        rows.append((f"lcs_length {size}x{size}", t_pure, t_fast))

    for size in (10_000, 100_000, 1_000_000):
        text = make_text(rng, size)
        t_pure = time_call(pure.count_tokens, text, repeat=args.repeat)
        t_fast = time_call(_speedups.count_tokens, text, repeat=args.repeat)
        assert pure.count_tokens(text) == _speedups.count_tokens(text)
        rows.append((f"count_tokens {size} chars", t_pure, t_fast))

    print(f"{'workload':<28}{'pure (ms)':>12}{'compiled (ms)':>15}{'speedup':>9}")
    print("-" * 64)
    for name, t_pure, t_fast in rows:
        print(f"{name:<28}{t_pure * 1e3:>12.3f}{t_fast * 1e3:>15.3f}{t_pure / t_fast:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
