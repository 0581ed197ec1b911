# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Must stay bit-compatible with ``_pykernels``.

No fast-math: the difference formulas are evaluated in a fixed order so the
two backends (and the Python guards in the engines) agree exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

ctypedef cnp.int64_t i64


def eval_agents(const double[:, ::1] a, const double[:, ::1] at, const double[::1] held,
                const i64[::1] sigma, const i64[::1] tau, const i64[::1] idx,
                i64[::1] partner, double[::1] delta, double eps):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t k, jn
    cdef i64 i, jo, best_j
    cdef double base, best, d
    cdef const double* row
    cdef const double* col
    with nogil:
        for k in range(m):
            i = idx[k]
            jo = tau[i]
            base = held[jo]
            row = &a[i, 0]
            col = &at[jo, 0]
            best = eps
            best_j = -1
            # jn == jo evaluates to exactly 0.0 and can never beat best >= 0
            for jn in range(n):
                d = (row[jn] + col[sigma[jn]]) - (base + held[jn])
                if d > best:
                    best = d
                    best_j = jn
            partner[i] = best_j
            delta[i] = best if best_j >= 0 else 0.0


def eval_jobs(const double[:, ::1] a, const double[:, ::1] at, const double[::1] held,
              const i64[::1] sigma, const i64[::1] tau, const i64[::1] idx,
              i64[::1] partner, double[::1] delta, double eps):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t k, ag
    cdef i64 j, i, jo, best_i
    cdef double base, best, d
    cdef const double* row
    cdef const double* col
    with nogil:
        for k in range(m):
            j = idx[k]
            i = sigma[j]
            base = held[j]
            row = &a[i, 0]
            col = &at[j, 0]
            best = eps
            best_i = -1
            for ag in range(n):
                jo = tau[ag]
                d = (col[ag] + row[jo]) - (held[jo] + base)
                if d > best:
                    best = d
                    best_i = ag
            partner[j] = best_i
            delta[j] = best if best_i >= 0 else 0.0


def check_conflicts(const i64[::1] sigma, const i64[::1] agent_partner, const i64[::1] job_partner):
    """Greedy reservation pass: agents first, then jobs, ascending."""
    cdef Py_ssize_t n = sigma.shape[0]
    reserved_arr = np.zeros(n, dtype=np.uint8)
    agent_conf_arr = np.zeros(n, dtype=np.uint8)
    job_conf_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] reserved = reserved_arr
    cdef cnp.uint8_t[::1] agent_conf = agent_conf_arr
    cdef cnp.uint8_t[::1] job_conf = job_conf_arr
    cdef Py_ssize_t i, j
    cdef i64 other, holder
    with nogil:
        for i in range(n):
            if agent_partner[i] < 0:
                continue
            other = sigma[agent_partner[i]]
            if reserved[i] or reserved[other]:
                agent_conf[i] = 1
            else:
                reserved[i] = 1
                reserved[other] = 1
        for j in range(n):
            if job_partner[j] < 0:
                continue
            holder = sigma[j]
            other = job_partner[j]
            if reserved[holder] or reserved[other]:
                job_conf[j] = 1
            else:
                reserved[holder] = 1
                reserved[other] = 1
    return reserved_arr.view(bool), agent_conf_arr.view(bool), job_conf_arr.view(bool)


def hungarian_max(const double[:, ::1] a):
    """Shortest augmenting path Hungarian method, O(n^3), maximising.

    Returns ``tau`` (job of each agent).
    """
    cdef Py_ssize_t n = a.shape[0]
    u_arr = np.zeros(n + 1)
    v_arr = np.zeros(n + 1)
    p_arr = np.zeros(n + 1, dtype=np.int64)
    way_arr = np.zeros(n + 1, dtype=np.int64)
    minv_arr = np.empty(n + 1)
    used_arr = np.empty(n + 1, dtype=np.uint8)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef i64[::1] p = p_arr
    cdef i64[::1] way = way_arr
    cdef double[::1] minv = minv_arr
    cdef cnp.uint8_t[::1] used = used_arr
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur
    with nogil:
        for i in range(1, n + 1):
            p[0] = i
            j0 = 0
            for j in range(n + 1):
                minv[j] = INFINITY
                used[j] = 0
            while True:
                used[j0] = 1
                i0 = p[j0]
                delta = INFINITY
                j1 = 0
                for j in range(1, n + 1):
                    if not used[j]:
                        cur = -a[i0 - 1, j - 1] - u[i0] - v[j]
                        if cur < minv[j]:
                            minv[j] = cur
                            way[j] = j0
                        if minv[j] < delta:
                            delta = minv[j]
                            j1 = j
                for j in range(n + 1):
                    if used[j]:
                        u[p[j]] += delta
                        v[j] -= delta
                    else:
                        minv[j] -= delta
                j0 = j1
                if p[j0] == 0:
                    break
            while True:
                j1 = way[j0]
                p[j0] = p[j1]
                j0 = j1
                if j0 == 0:
                    break
    tau = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        tau[p_arr[j] - 1] = j - 1
    return tau


def auction_rounds(const double[:, ::1] a, double[::1] prices, i64[::1] agent_job,
                   i64[::1] job_owner, double eps, Py_ssize_t max_rounds):
    """Run up to ``max_rounds`` Jacobi bidding rounds in place.

    Returns ``(unassigned_count, rounds_run, displacements)``.
    """
    cdef Py_ssize_t n = a.shape[0]
    bid_arr = np.empty(n)
    bidder_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] bid = bid_arr
    cdef i64[::1] bidder = bidder_arr
    cdef Py_ssize_t rounds = 0, i, j, unassigned = 0, displaced = 0
    cdef i64 j1, old
    cdef double v, v1, v2, offer
    with nogil:
        while rounds < max_rounds:
            unassigned = 0
            for i in range(n):
                if agent_job[i] < 0:
                    unassigned += 1
            if unassigned == 0:
                break
            for j in range(n):
                bid[j] = -INFINITY
                bidder[j] = -1
            for i in range(n):
                if agent_job[i] >= 0:
                    continue
                v1 = -INFINITY
                v2 = -INFINITY
                j1 = -1
                for j in range(n):
                    v = a[i, j] - prices[j]
                    if v > v1:
                        v2 = v1
                        v1 = v
                        j1 = j
                    elif v > v2:
                        v2 = v
                if n == 1:
                    offer = prices[j1] + eps
                else:
                    offer = a[i, j1] - v2 + eps
                # ties go to the lowest agent index (agents scanned ascending)
                if offer > bid[j1]:
                    bid[j1] = offer
                    bidder[j1] = i
            for j in range(n):
                if bidder[j] < 0:
                    continue
                old = job_owner[j]
                if old >= 0:
                    agent_job[old] = -1
                    displaced += 1
                job_owner[j] = bidder[j]
                agent_job[bidder[j]] = j
                prices[j] = bid[j]
            rounds += 1
        unassigned = 0
        for i in range(n):
            if agent_job[i] < 0:
                unassigned += 1
    return unassigned, rounds, displaced
