# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Shortest augmenting path LSAP solver, compiled kernel."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def solve_rows(double[:, ::1] C):
    """Solve a rectangular LSAP with n <= m rows.

    Returns (col4row, u, v) exactly like the numpy fallback.
    """
    cdef Py_ssize_t n = C.shape[0], m = C.shape[1]
    u_arr = np.zeros(n)
    v_arr = np.zeros(m)
    col_arr = np.full(n, -1, dtype=np.int64)
    row_arr = np.full(m, -1, dtype=np.int64)
    short_arr = np.empty(m)
    path_arr = np.empty(m, dtype=np.int64)
    sc_arr = np.empty(m, dtype=np.uint8)
    srows_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef long long[::1] col4row = col_arr
    cdef long long[::1] row4col = row_arr
    cdef double[::1] shortest = short_arr
    cdef long long[::1] path = path_arr
    cdef unsigned char[::1] scanned = sc_arr
    cdef long long[::1] srows = srows_arr
    cdef Py_ssize_t cur, i, j, k, nrows, sink, best, best_free
    cdef double min_val, r, lowest
    cdef bint infeasible = False
    with nogil:
        for cur in range(n):
            for j in range(m):
                shortest[j] = INFINITY
                path[j] = -1
                scanned[j] = 0
            nrows = 0
            min_val = 0.0
            i = cur
            sink = -1
            while sink == -1:
                srows[nrows] = i
                nrows += 1
                lowest = INFINITY
                best = -1
                best_free = -1
                for j in range(m):
                    if scanned[j]:
                        continue
                    r = min_val + C[i, j] - u[i] - v[j]
                    if r < shortest[j]:
                        path[j] = i
                        shortest[j] = r
                    if shortest[j] < lowest:
                        lowest = shortest[j]
                        best = j
                        best_free = j if row4col[j] == -1 else -1
                    elif shortest[j] == lowest and best_free == -1 and row4col[j] == -1:
                        best_free = j
                if lowest == INFINITY:
                    infeasible = True
                    break
                j = best_free if best_free != -1 else best
                min_val = lowest
                scanned[j] = 1
                if row4col[j] == -1:
                    sink = j
                else:
                    i = row4col[j]
            if infeasible:
                break
            u[cur] += min_val
            for k in range(1, nrows):
                i = srows[k]
                u[i] += min_val - shortest[col4row[i]]
            for j in range(m):
                if scanned[j]:
                    v[j] -= min_val - shortest[j]
            j = sink
            while True:
                i = path[j]
                row4col[j] = i
                k = col4row[i]
                col4row[i] = j
                j = k
                if i == cur:
                    break
    if infeasible:
        raise ValueError("cost matrix is infeasible")
    return col_arr, u_arr, v_arr
