"""Edit-distance kernel with a compiled core and a pure-Python fallback.

The compiled extension is selected at import time when present; set
``VULNMATCH_PURE=1`` to force the pure-Python implementation. ``BACKEND``
names the implementation in use. ``benchmarks/bench_textdist.py`` compares
the two.
"""

import os

from . import pure

if os.environ.get("VULNMATCH_PURE"):
    levenshtein = pure.levenshtein
    within_distance = pure.within_distance
    BACKEND = "pure"
else:
    try:
        from ._speedups import levenshtein, within_distance

        BACKEND = "c"
    except ImportError:
        levenshtein = pure.levenshtein
        within_distance = pure.within_distance
        BACKEND = "pure"

__all__ = ["BACKEND", "levenshtein", "pure", "within_distance"]
