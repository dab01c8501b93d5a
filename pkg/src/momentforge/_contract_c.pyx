# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled tree contraction kernel: batched message passing up a rooted
tree with optional per-row pinning of internal summation variables. The
reference semantics live in _contract_py.contract_trees."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def contract_trees(
    const double[:, ::1] M,
    const int[::1] order,
    int root,
    const int[::1] leaf_off,
    const int[::1] leaf_idx,
    const int[::1] child_off,
    const int[::1] child_idx,
    const long long[:, ::1] leaf_values,
    const long long[:, ::1] pins,
    double[::1] out,
):
    cdef Py_ssize_t B = leaf_values.shape[0]
    cdef Py_ssize_t N = M.shape[0]
    cdef Py_ssize_t n_internal = order.shape[0]
    cdef bint have_pins = pins.shape[0] == B and pins.shape[1] > 0

    cdef cnp.ndarray[double, ndim=2] msg_arr = np.empty((n_internal, N))
    cdef double[:, ::1] msgs = msg_arr
    cdef cnp.ndarray[double, ndim=1] tmp_arr = np.empty(N)
    cdef double[::1] tmp = tmp_arr

    cdef Py_ssize_t b, k, v, a, x, c, w
    cdef long long s, pv
    cdef double acc, keep

    for b in range(B):
        for k in range(n_internal):
            v = order[k]
            for a in range(N):
                tmp[a] = 1.0
            for c in range(leaf_off[v], leaf_off[v + 1]):
                s = leaf_values[b, leaf_idx[c]]
                for a in range(N):
                    tmp[a] *= M[s, a]
            for c in range(child_off[v], child_off[v + 1]):
                w = child_idx[c]
                for a in range(N):
                    tmp[a] *= msgs[w, a]
            if have_pins:
                pv = pins[b, v]
                if pv >= 0:
                    keep = tmp[pv]
                    for a in range(N):
                        tmp[a] = 0.0
                    tmp[pv] = keep
            if v == root:
                acc = 0.0
                for a in range(N):
                    acc += tmp[a]
                out[b] = acc
            else:
                for x in range(N):
                    acc = 0.0
                    for a in range(N):
                        acc += tmp[a] * M[a, x]
                    msgs[v, x] = acc
    return np.asarray(out)
