"""Pure-Python edit distance. The compiled twin lives in _speedups.pyx."""


def levenshtein(a: str, b: str) -> int:
    """Levenshtein distance: insertions, deletions, substitutions, cost 1 each."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    current = [0] * (len(b) + 1)
    for i, ca in enumerate(a, start=1):
        current[0] = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + cost,
            )
        previous, current = current, previous
    return previous[len(b)]


def within_distance(a: str, b: str, limit: int) -> bool:
    """True iff levenshtein(a, b) <= limit, with early exit.

    The length difference is a lower bound on the distance, and each DP row's
    minimum is non-decreasing, so the scan stops as soon as a row exceeds the
    limit.
    """
    if limit < 0:
        return False
    if a == b:
        return True
    if len(a) < len(b):
        a, b = b, a
    if len(a) - len(b) > limit:
        return False
    if not b:
        return len(a) <= limit
    previous = list(range(len(b) + 1))
    current = [0] * (len(b) + 1)
    for i, ca in enumerate(a, start=1):
        current[0] = i
        row_min = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            value = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + cost,
            )
            current[j] = value
            if value < row_min:
                row_min = value
        if row_min > limit:
            return False
        previous, current = current, previous
    return previous[len(b)] <= limit
