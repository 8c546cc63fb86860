"""Compiled inner loops for the partition search.

Objectives are in edge units: ``E = m_in - gamma * c * sum_r W_r**2`` where
``W_r`` sums the node weights ``w`` over group ``r``.  Modularity is ``E / m``.
``sign`` is +1 to maximize and -1 to minimize.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _group_totals(assignment, w, q):
    W = np.zeros(q)
    for i in range(assignment.shape[0]):
        W[assignment[i]] += w[i]
    return W


@njit(cache=True, nogil=True)
def _in_group_edges(indptr, indices, counts, assignment):
    ends = 0
    for i in range(assignment.shape[0]):
        gi = assignment[i]
        for p in range(indptr[i], indptr[i + 1]):
            if assignment[indices[p]] == gi:
                ends += counts[p]
    return ends // 2


@njit(cache=True, nogil=True)
def objective(indptr, indices, counts, w, c, gamma, assignment, q):
    W = _group_totals(assignment, w, q)
    return _in_group_edges(indptr, indices, counts, assignment) - gamma * c * np.sum(W * W)


@njit(cache=True, nogil=True)
def anneal(indptr, indices, counts, w, c, gamma, sign, q, assignment,
           t_initial, cooling, t_final, steps_per_temperature, seed):
    """Metropolis annealing over single-node moves; ``assignment`` is updated in place.

    Returns the best assignment seen at the end of any temperature step
    (or the final state, whichever is better).
    """
    np.random.seed(seed)
    n = assignment.shape[0]
    W = _group_totals(assignment, w, q)
    energy = objective(indptr, indices, counts, w, c, gamma, assignment, q)
    best = assignment.copy()
    best_f = sign * energy
    if q < 2 or n == 0:
        return best
    t = t_initial
    while t > t_final:
        for _ in range(steps_per_temperature):
            i = np.random.randint(n)
            r = assignment[i]
            s = np.random.randint(q - 1)
            if s >= r:
                s += 1
            lr = 0
            ls = 0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                gj = assignment[j]
                if gj == r:
                    lr += counts[p]
                elif gj == s:
                    ls += counts[p]
            wi = w[i]
            delta = (ls - lr) - gamma * c * 2.0 * wi * (W[s] - W[r] + wi)
            df = sign * delta
            if df >= 0.0 or np.random.random() < np.exp(df / t):
                assignment[i] = s
                W[r] -= wi
                W[s] += wi
                energy += delta
        if sign * energy > best_f:
            best_f = sign * energy
            best[:] = assignment
        t *= cooling
    if sign * energy > best_f:
        best[:] = assignment
    return best


@njit(cache=True, nogil=True)
def greedy(indptr, indices, counts, w, c, gamma, sign, q, assignment, tol):
    """Sweep nodes in index order, moving each to its best group while that strictly helps.

    Ties go to the lowest group index.  Returns the number of moves made.
    """
    n = assignment.shape[0]
    W = _group_totals(assignment, w, q)
    links = np.zeros(q, dtype=np.int64)
    moves = 0
    improved = True
    while improved:
        improved = False
        for i in range(n):
            r = assignment[i]
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j != i:
                    links[assignment[j]] += counts[p]
            wi = w[i]
            best_gain = tol
            best_s = -1
            for s in range(q):
                if s == r:
                    continue
                gain = sign * ((links[s] - links[r]) - gamma * c * 2.0 * wi * (W[s] - W[r] + wi))
                if gain > best_gain:
                    best_gain = gain
                    best_s = s
            for p in range(indptr[i], indptr[i + 1]):
                links[assignment[indices[p]]] = 0
            if best_s >= 0:
                assignment[i] = best_s
                W[r] -= wi
                W[best_s] += wi
                moves += 1
                improved = True
    return moves
