# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled kernels; contracts mirror ichforge._kernels.pure."""

from cpython.unicode cimport PyUnicode_READ_CHAR
from libc.stdlib cimport free, malloc

IMPLEMENTATION = "compiled"


def lcs_length(a, b):
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0 or lb == 0:
        return 0
    if lb > la:
        a, b = b, a
        la, lb = lb, la

    cdef long* av = <long*> malloc(la * sizeof(long))
    cdef long* bv = <long*> malloc(lb * sizeof(long))
    cdef long* row = <long*> malloc((lb + 1) * sizeof(long))
    if av == NULL or bv == NULL or row == NULL:
        free(av); free(bv); free(row)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef long diag, prev, x
    try:
        for i in range(la):
            av[i] = a[i]
        for j in range(lb):
            bv[j] = b[j]
        for j in range(lb + 1):
            row[j] = 0
        for i in range(la):
            diag = 0
            x = av[i]
            for j in range(1, lb + 1):
                prev = row[j]
                if x == bv[j - 1]:
                    row[j] = diag + 1
                elif row[j - 1] > row[j]:
                    row[j] = row[j - 1]
                diag = prev
        return row[lb]
    finally:
        free(av)
        free(bv)
        free(row)


def count_tokens(text):
    if not isinstance(text, str):
        raise TypeError("expected str")
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i
    cdef Py_UCS4 ch
    cdef long count = 0
    cdef bint in_run = False
    for i in range(n):
        ch = PyUnicode_READ_CHAR(text, i)
        if (48 <= ch <= 57) or (65 <= ch <= 90) or (97 <= ch <= 122):
            if not in_run:
                count += 1
                in_run = True
        else:
            in_run = False
            if not _is_space(ch):
                count += 1
    return count


cdef inline bint _is_space(Py_UCS4 ch):
    # Py_UNICODE_ISSPACE covers ASCII and Unicode whitespace classes.
    return Py_UNICODE_ISSPACE(ch)


cdef extern from "Python.h":
    bint Py_UNICODE_ISSPACE(Py_UCS4 ch)
