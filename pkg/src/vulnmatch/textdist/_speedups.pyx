# cython: boundscheck=False, wraparound=False
"""C implementation of the edit-distance kernel.

Mirrors vulnmatch.textdist.pure exactly; the test suite asserts agreement.
"""

from libc.stdlib cimport free, malloc


def levenshtein(str a, str b):
    """Levenshtein distance: insertions, deletions, substitutions, cost 1 each."""
    if a == b:
        return 0
    cdef str s = a
    cdef str t = b
    if len(s) < len(t):
        s, t = t, s
    cdef Py_ssize_t ls = len(s)
    cdef Py_ssize_t lt = len(t)
    if lt == 0:
        return ls
    cdef Py_ssize_t *previous = <Py_ssize_t *> malloc((lt + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *current = <Py_ssize_t *> malloc((lt + 1) * sizeof(Py_ssize_t))
    if previous == NULL or current == NULL:
        free(previous)
        free(current)
        raise MemoryError()
    cdef Py_ssize_t i, j, cost, value, result
    cdef Py_ssize_t *swap
    cdef Py_UCS4 ca
    try:
        for j in range(lt + 1):
            previous[j] = j
        for i in range(1, ls + 1):
            current[0] = i
            ca = s[i - 1]
            for j in range(1, lt + 1):
                cost = 0 if ca == t[j - 1] else 1
                value = previous[j] + 1
                if current[j - 1] + 1 < value:
                    value = current[j - 1] + 1
                if previous[j - 1] + cost < value:
                    value = previous[j - 1] + cost
                current[j] = value
            swap = previous
            previous = current
            current = swap
        result = previous[lt]
    finally:
        free(previous)
        free(current)
    return result


def within_distance(str a, str b, Py_ssize_t limit):
    """True iff levenshtein(a, b) <= limit, with early exit."""
    if limit < 0:
        return False
    if a == b:
        return True
    cdef str s = a
    cdef str t = b
    if len(s) < len(t):
        s, t = t, s
    cdef Py_ssize_t ls = len(s)
    cdef Py_ssize_t lt = len(t)
    if ls - lt > limit:
        return False
    if lt == 0:
        return ls <= limit
    cdef Py_ssize_t *previous = <Py_ssize_t *> malloc((lt + 1) * sizeof(Py_ssize_t))
    cdef Py_ssize_t *current = <Py_ssize_t *> malloc((lt + 1) * sizeof(Py_ssize_t))
    if previous == NULL or current == NULL:
        free(previous)
        free(current)
        raise MemoryError()
    cdef Py_ssize_t i, j, cost, value, row_min
    cdef Py_ssize_t *swap
    cdef Py_UCS4 ca
    cdef bint result
    try:
        for j in range(lt + 1):
            previous[j] = j
        for i in range(1, ls + 1):
            current[0] = i
            row_min = i
            ca = s[i - 1]
            for j in range(1, lt + 1):
                cost = 0 if ca == t[j - 1] else 1
                value = previous[j] + 1
                if current[j - 1] + 1 < value:
                    value = current[j - 1] + 1
                if previous[j - 1] + cost < value:
                    value = previous[j - 1] + cost
                current[j] = value
                if value < row_min:
                    row_min = value
            if row_min > limit:
                return False
            swap = previous
            previous = current
            current = swap
        result = previous[lt] <= limit
    finally:
        free(previous)
        free(current)
    return result
