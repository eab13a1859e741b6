#!/usr/bin/env python3
"""Benchmark the compiled edit-distance kernel against the pure-Python one.

Times levenshtein and within_distance over a workload shaped like a real
dictionary scan: many short lowercase tokens, a threshold of 2, mostly
misses. Run after `pip install -e .` so the extension is built.
"""

import random
import string
import time

from vulnmatch.textdist import BACKEND, pure

try:
    from vulnmatch.textdist import _speedups
except ImportError:
    _speedups = None

ALPHABET = string.ascii_lowercase + "._-"


def make_pairs(n: int, seed: int = 7) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        a = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(3, 24)))
        if rng.random() < 0.3:
            b = list(a)
            for _ in range(rng.randint(1, 3)):
                pos = rng.randrange(len(b))
                b[pos] = rng.choice(ALPHABET)
            b = "".join(b)
        else:
            b = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(3, 24)))
        pairs.append((a, b))
    return pairs


def bench(label: str, fn, pairs, *extra) -> float:
    start = time.perf_counter()
    for a, b in pairs:
        fn(a, b, *extra)
    elapsed = time.perf_counter() - start
    print(f"  {label:<28s} {elapsed * 1000:9.1f} ms  ({len(pairs) / elapsed:,.0f} pairs/s)")
    return elapsed


def main() -> None:
    pairs = make_pairs(200_000)
    print(f"imported backend: {BACKEND}")
    print(f"workload: {len(pairs):,} string pairs\n")

    print("levenshtein:")
    t_pure = bench("pure python", pure.levenshtein, pairs)
    if _speedups is not None:
        t_c = bench("compiled", _speedups.levenshtein, pairs)
        print(f"  speedup: {t_pure / t_c:.1f}x")

    print("\nwithin_distance (limit=2):")
    t_pure = bench("pure python", pure.within_distance, pairs, 2)
    if _speedups is not None:
        t_c = bench("compiled", _speedups.within_distance, pairs, 2)
        print(f"  speedup: {t_pure / t_c:.1f}x")

    if _speedups is None:
        print("\ncompiled extension not available; only the fallback was timed")


if __name__ == "__main__":
    main()
