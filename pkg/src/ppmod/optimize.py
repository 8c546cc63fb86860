"""Partition search for generalized modularity.

Three routes: simulated annealing over single-node moves, a deterministic
greedy polish, and exhaustive enumeration for graphs small enough to check
every assignment.  Each can maximize or minimize.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .graph import Graph, Partition
from .quality import NullModel, modularity, null_weights

GREEDY_TOL = 1e-9
MAX_ENUMERATION = 10**7


class SearchMode(str, enum.Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"

    @property
    def sign(self) -> float:
        return 1.0 if self is SearchMode.MAXIMIZE else -1.0

    @classmethod
    def for_coefficient(cls, B: float) -> "SearchMode":
        """Direction of modularity search that maximizes ``B * Q + C``."""
        return cls.MAXIMIZE if B > 0 else cls.MINIMIZE


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling schedule.

    Temperatures are in units of edges: a move that loses one in-group edge
    net of the null-model term is accepted with probability ``exp(-1/T)``.
    ``sweeps_per_temperature`` counts single-node proposals per temperature
    step; ``None`` means one proposal per node.
    """

    t_initial: float = 1.0
    cooling: float = 0.99
    sweeps_per_temperature: int | None = None
    t_final: float = 1e-4
    seed: int = 0
    restarts: int = 5

    def __post_init__(self):
        if not self.t_initial > 0 or not self.t_final > 0:
            raise ValueError("temperatures must be positive")
        if not self.t_final < self.t_initial:
            raise ValueError("t_final must be below t_initial")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling must lie in (0, 1)")
        if self.sweeps_per_temperature is not None and self.sweeps_per_temperature < 1:
            raise ValueError("sweeps_per_temperature must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be positive")

    def with_seed(self, seed: int) -> "AnnealSchedule":
        return replace(self, seed=seed)


def _kernel_args(graph: Graph, gamma: float, null: NullModel):
    if graph.m == 0:
        raise ValueError("empty graph")
    w, c = null_weights(graph, null)
    return graph.indptr, graph.indices, graph.counts, w.astype(np.float64), float(c), float(gamma)


def _restart_seeds(seed: int, restarts: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(restarts)


def anneal(graph: Graph, q: int, gamma: float = 1.0, null: NullModel = NullModel.CONFIGURATION,
           schedule: AnnealSchedule | None = None, mode: SearchMode = SearchMode.MAXIMIZE,
           initial: Partition | None = None, workers: int = 1) -> Partition:
    """Simulated annealing with independent restarts; the best partition found is returned.

    Each restart starts from a uniformly random assignment (or from
    ``initial`` if given) and draws its randomness from its own child of
    ``SeedSequence(schedule.seed)``, so results do not depend on ``workers``.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    schedule = schedule or AnnealSchedule()
    mode = SearchMode(mode)
    args = _kernel_args(graph, gamma, null)
    n = graph.n
    steps = schedule.sweeps_per_temperature or max(n, 1)

    def run(ss: np.random.SeedSequence):
        rng = np.random.default_rng(ss)
        if initial is not None:
            start = initial.assignment.copy()
        else:
            start = rng.integers(0, q, size=n).astype(np.int64)
        kseed = int(rng.integers(0, 2**31 - 1))
        best = _kernels.anneal(*args, mode.sign, q, start, schedule.t_initial, schedule.cooling,
                               schedule.t_final, steps, kseed)
        score = mode.sign * _kernels.objective(*args, best, q)
        return score, best

    seeds = _restart_seeds(schedule.seed, schedule.restarts)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(ss) for ss in seeds]
    # first restart wins ties so the outcome is order-independent
    best_score, best = results[0]
    for score, assignment in results[1:]:
        if score > best_score:
            best_score, best = score, assignment
    return Partition(graph, best, q)


def greedy_refine(graph: Graph, partition: Partition, gamma: float = 1.0,
                  null: NullModel = NullModel.CONFIGURATION,
                  mode: SearchMode = SearchMode.MAXIMIZE) -> Partition:
    """Best-single-move local search to a fixed point; returns a new partition."""
    mode = SearchMode(mode)
    args = _kernel_args(graph, gamma, null)
    assignment = partition.assignment.copy()
    _kernels.greedy(*args, mode.sign, partition.q, assignment, GREEDY_TOL)
    return Partition(graph, assignment, partition.q)


def optimize(graph: Graph, q: int, gamma: float = 1.0, null: NullModel = NullModel.CONFIGURATION,
             schedule: AnnealSchedule | None = None, mode: SearchMode = SearchMode.MAXIMIZE,
             workers: int = 1) -> Partition:
    """Anneal, then polish the result greedily."""
    part = anneal(graph, q, gamma, null, schedule, mode, workers=workers)
    return greedy_refine(graph, part, gamma, null, mode)


def canonical_assignments(n: int, q: int) -> np.ndarray:
    """All assignments of ``n`` nodes to at most ``q`` groups, one per relabeling class.

    Rows are restricted growth strings (each node joins an existing group or
    the next unused one) in lexicographic order.
    """
    if q**n > MAX_ENUMERATION:
        raise ValueError(f"instance too large to enumerate: q^n = {q}^{n} > {MAX_ENUMERATION}")
    rows = np.zeros((1, min(n, 1)), dtype=np.int8)
    highest = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        parts, tops = [], []
        for g in range(q):
            ok = highest + 1 >= g
            parts.append(np.column_stack([rows[ok], np.full(ok.sum(), g, dtype=np.int8)]))
            tops.append(np.maximum(highest[ok], g))
        rows = np.concatenate(parts)
        highest = np.concatenate(tops).astype(np.int8)
        order = np.lexsort(rows.T[::-1])
        rows, highest = rows[order], highest[order]
    return rows.astype(np.int64)


def batch_modularity(graph: Graph, assignments: np.ndarray, q: int, gamma: float,
                     null: NullModel = NullModel.CONFIGURATION) -> np.ndarray:
    """Modularity of each row of ``assignments``, vectorized over rows."""
    w, c = null_weights(graph, null)
    rows = np.repeat(np.arange(graph.n), np.diff(graph.indptr))
    upper = rows <= graph.indices
    u, v = rows[upper], graph.indices[upper]
    mult = np.where(u == v, graph.counts[upper] // 2, graph.counts[upper]).astype(np.float64)
    out = np.empty(len(assignments))
    chunk = max(1, 2_000_000 // max(graph.n, 1))
    for lo in range(0, len(assignments), chunk):
        G = assignments[lo:lo + chunk]
        m_in = (G[:, u] == G[:, v]).astype(np.float64) @ mult
        sq = np.zeros(len(G))
        for r in range(q):
            W = (G == r).astype(np.float64) @ w
            sq += W * W
        out[lo:lo + chunk] = (m_in - gamma * c * sq) / graph.m
    return out


def exhaustive_best(graph: Graph, q: int, gamma: float = 1.0,
                    null: NullModel = NullModel.CONFIGURATION,
                    mode: SearchMode = SearchMode.MAXIMIZE) -> tuple[Partition, float]:
    """Global optimum by enumeration; ties go to the lexicographically smallest canonical assignment."""
    if graph.m == 0:
        raise ValueError("empty graph")
    mode = SearchMode(mode)
    G = canonical_assignments(graph.n, q)
    scores = mode.sign * batch_modularity(graph, G, q, gamma, null)
    top = scores.max()
    idx = int(np.argmax(scores >= top - 1e-12 * max(1.0, abs(top))))
    part = Partition(graph, G[idx], q)
    return part, modularity(graph, part, gamma, null)
