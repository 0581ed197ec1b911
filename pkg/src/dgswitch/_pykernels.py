"""Pure numpy fallback for the compiled kernels in ``_ckernels``.

Same signatures, same results bit for bit; only slower.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 64


def eval_agents(a, at, held, sigma, tau, idx, partner, delta, eps):
    idx = np.asarray(idx, dtype=np.int64)
    for start in range(0, idx.shape[0], _BLOCK):
        rows = idx[start:start + _BLOCK]
        jo = tau[rows]
        # d[k, jn] = (a[i, jn] + a[sigma[jn], jo]) - (a[i, jo] + a[sigma[jn], jn])
        d = (a[rows] + at[jo][:, sigma]) - (held[jo][:, None] + held[None, :])
        d[np.arange(rows.shape[0]), jo] = -np.inf
        best = np.argmax(d, axis=1)
        val = d[np.arange(rows.shape[0]), best]
        ok = val > eps
        partner[rows] = np.where(ok, best, -1)
        delta[rows] = np.where(ok, val, 0.0)


def eval_jobs(a, at, held, sigma, tau, idx, partner, delta, eps):
    idx = np.asarray(idx, dtype=np.int64)
    for start in range(0, idx.shape[0], _BLOCK):
        cols = idx[start:start + _BLOCK]
        holder = sigma[cols]
        # d[k, ag] = (a[ag, j] + a[holder, tau[ag]]) - (a[ag, tau[ag]] + a[holder, j])
        d = (at[cols] + a[holder][:, tau]) - (held[tau][None, :] + held[cols][:, None])
        d[np.arange(cols.shape[0]), holder] = -np.inf
        best = np.argmax(d, axis=1)
        val = d[np.arange(cols.shape[0]), best]
        ok = val > eps
        partner[cols] = np.where(ok, best, -1)
        delta[cols] = np.where(ok, val, 0.0)


def check_conflicts(sigma, agent_partner, job_partner):
    n = sigma.shape[0]
    reserved = np.zeros(n, dtype=bool)
    agent_conf = np.zeros(n, dtype=bool)
    job_conf = np.zeros(n, dtype=bool)
    for i in np.flatnonzero(agent_partner >= 0).tolist():
        other = int(sigma[agent_partner[i]])
        if reserved[i] or reserved[other]:
            agent_conf[i] = True
        else:
            reserved[i] = reserved[other] = True
    for j in np.flatnonzero(job_partner >= 0).tolist():
        holder = int(sigma[j])
        other = int(job_partner[j])
        if reserved[holder] or reserved[other]:
            job_conf[j] = True
        else:
            reserved[holder] = reserved[other] = True
    return reserved, agent_conf, job_conf


def hungarian_max(a):
    n = a.shape[0]
    cost = -np.asarray(a, dtype=np.float64)
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            free[0] = False
            cur = np.full(n + 1, np.inf)
            cur[1:] = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            cand = np.where(free, minv, np.inf)
            j1 = int(np.argmin(cand))
            delta = cand[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
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
    tau[p[1:] - 1] = np.arange(n)
    return tau


def auction_rounds(a, prices, agent_job, job_owner, eps, max_rounds):
    n = a.shape[0]
    rounds = 0
    displaced = 0
    while rounds < max_rounds:
        free = np.flatnonzero(agent_job < 0)
        if free.size == 0:
            break
        net = a[free] - prices[None, :]
        j1 = np.argmax(net, axis=1)
        rows = np.arange(free.size)
        if n == 1:
            offer = prices[j1] + eps
        else:
            net[rows, j1] = -np.inf
            v2 = net.max(axis=1)
            offer = a[free, j1] - v2 + eps
        # highest offer per job, ties to the lowest agent index
        order = np.lexsort((free, -offer, j1))
        jobs_sorted = j1[order]
        first = np.ones(order.size, dtype=bool)
        first[1:] = jobs_sorted[1:] != jobs_sorted[:-1]
        win = order[first]
        won_jobs = j1[win]
        winners = free[win]
        old = job_owner[won_jobs]
        had = old >= 0
        agent_job[old[had]] = -1
        displaced += int(had.sum())
        job_owner[won_jobs] = winners
        agent_job[winners] = won_jobs
        prices[won_jobs] = offer[win]
        rounds += 1
    return int((agent_job < 0).sum()), rounds, displaced
