# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte-Carlo sampling kernels.

Mirror of ``_pymc`` with identical comparison and accumulation order, so the
two backends produce bit-identical output for the same uniform stream.
"""

import numpy as np

cimport cython

BACKEND = "cython"


def initial_step(double[::1] u, double[::1] init_cum, double[::1] init_info,
                 long[::1] states, double[::1] acc):
    cdef Py_ssize_t i, j, m = u.shape[0], s = init_cum.shape[0]
    with nogil:
        for i in range(m):
            j = 0
            while j < s - 1 and u[i] >= init_cum[j]:
                j += 1
            states[i] = j
            acc[i] = init_info[j]


def markov_step(double[::1] u, double[:, ::1] cum_rows, double[:, ::1] info_rows,
                long[::1] states, double[::1] acc):
    cdef Py_ssize_t i, j, cur, m = u.shape[0], s = cum_rows.shape[1]
    with nogil:
        for i in range(m):
            cur = states[i]
            j = 0
            while j < s - 1 and u[i] >= cum_rows[cur, j]:
                j += 1
            acc[i] += info_rows[cur, j]
            states[i] = j
