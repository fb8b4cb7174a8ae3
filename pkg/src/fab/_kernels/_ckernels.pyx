# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the hot loops; same contracts as _pykernels."""

from cpython.bytes cimport PyBytes_FromStringAndSize
from libc.stdlib cimport malloc, free

from ._pykernels import BudgetExceeded


def compose(v, w):
    cdef Py_ssize_t n = len(w), i
    cdef list out = [0] * n
    for i in range(n):
        out[i] = v[w[i]]
    return tuple(out)


cdef bytes _pack(object t, Py_ssize_t n):
    cdef unsigned short *buf = <unsigned short *> malloc(n * sizeof(unsigned short))
    cdef Py_ssize_t i
    try:
        for i in range(n):
            buf[i] = <unsigned short> t[i]
        return PyBytes_FromStringAndSize(<char *> buf, n * sizeof(unsigned short))
    finally:
        free(buf)


def closure(gens, Py_ssize_t n, budget=None):
    cdef Py_ssize_t ng = len(gens), i, j, k
    cdef Py_ssize_t lim = -1 if budget is None else budget
    cdef unsigned short *g = <unsigned short *> malloc((ng * n + 1) * sizeof(unsigned short))
    cdef unsigned short *y = <unsigned short *> malloc((n + 1) * sizeof(unsigned short))
    cdef const unsigned short *x
    cdef bytes bx, by
    cdef set seen = set()
    cdef list order = []
    cdef list frontier, nxt
    try:
        for k in range(ng):
            for i in range(n):
                g[k * n + i] = <unsigned short> gens[k][i]
        bx = _pack(tuple(range(n)), n)
        seen.add(bx)
        order.append(bx)
        frontier = [bx]
        while frontier:
            nxt = []
            for bx in frontier:
                x = <const unsigned short *> (<char *> bx)
                for k in range(ng):
                    for i in range(n):
                        y[i] = g[k * n + x[i]]
                    by = PyBytes_FromStringAndSize(<char *> y, n * sizeof(unsigned short))
                    if by not in seen:
                        seen.add(by)
                        order.append(by)
                        nxt.append(by)
                        if lim >= 0 and len(order) > lim:
                            raise BudgetExceeded(len(order))
            frontier = nxt
        out = []
        for bx in order:
            x = <const unsigned short *> (<char *> bx)
            out.append(tuple([x[i] for i in range(n)]))
        return out
    finally:
        free(g)
        free(y)


def orbit(x, Py_ssize_t n):
    pos = {}
    cur = tuple(x)
    cdef Py_ssize_t k = 1
    while cur not in pos:
        pos[cur] = k
        cur = tuple([x[i] for i in cur])
        k += 1
    t = pos[cur]
    return t, k - t


def mat_mul(A, B, long tau, long pi):
    cdef Py_ssize_t d = len(A), m = len(B[0]) if B else 0, inner = len(B), i, j, k
    cdef long s
    out = []
    for i in range(d):
        row = []
        Ai = A[i]
        for j in range(m):
            s = 0
            for k in range(inner):
                s += <long> Ai[k] * <long> B[k][j]
            if s >= tau:
                s = tau + (s - tau) % pi
            row.append(s)
        out.append(tuple(row))
    return tuple(out)


def sumset(unsigned long long a, unsigned long long b, table):
    cdef unsigned long long out = 0
    cdef int i, j
    for i in range(64):
        if (a >> i) & 1:
            row = table[i]
            for j in range(64):
                if (b >> j) & 1:
                    out |= (<unsigned long long> 1) << (<int> row[j])
                elif (b >> j) == 0:
                    break
        elif (a >> i) == 0:
            break
    return out


def imageset(unsigned long long a, f):
    cdef unsigned long long out = 0
    cdef int i
    for i in range(64):
        if (a >> i) & 1:
            out |= (<unsigned long long> 1) << (<int> f[i])
        elif (a >> i) == 0:
            break
    return out
