"""Objective functions: generalized modularity and Poisson block-model log-likelihoods.

Everything here is evaluated from the group-level statistics cached on a
:class:`~ppmod.graph.Partition`, never from an O(n^2) double sum.  The
log-likelihoods drop every additive term that does not depend on the
parameters or the group assignment, so only differences between them are
meaningful.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph, Partition


class NullModel(str, enum.Enum):
    CONFIGURATION = "config"
    UNIFORM = "uniform"


class ZeroRateError(ValueError):
    pass


@dataclass(frozen=True)
class PlantedPartitionParams:
    omega_in: float
    omega_out: float

    def __post_init__(self):
        if not self.omega_in >= 0:
            raise ValueError(f"omega_in must be nonnegative, got {self.omega_in}")
        if not self.omega_out >= 0:
            raise ValueError(f"omega_out must be nonnegative, got {self.omega_out}")

    @property
    def assortative(self) -> bool:
        return self.omega_in > self.omega_out

    def block_matrix(self, q: int) -> np.ndarray:
        """The two-valued q x q rate matrix."""
        out = np.full((q, q), float(self.omega_out))
        np.fill_diagonal(out, self.omega_in)
        return out


@dataclass(frozen=True)
class EquivalenceConstants:
    """``log L(g) = B * Q(g, gamma) + C`` for every assignment ``g``."""

    B: float
    C: float
    gamma: float


def _require_edges(graph: Graph):
    if graph.m == 0:
        raise ValueError("empty graph")


def null_weights(graph: Graph, null: NullModel) -> tuple[np.ndarray, float]:
    """Per-node weights ``w`` and scale ``c`` with ``sum_ij P_ij d(g_i,g_j) / 2 = c * sum_r W_r^2``.

    ``W_r`` is the total weight of group ``r``.  For the configuration null
    ``w = k`` and ``c = 1/4m``; for the uniform null ``w = 1`` and
    ``c = m / (2 * C(n, 2))``.
    """
    null = NullModel(null)
    if null is NullModel.CONFIGURATION:
        return graph.degrees, 1.0 / (4.0 * graph.m)
    n = graph.n
    if n < 2:
        raise ValueError("uniform null model needs at least two nodes")
    return np.ones(n, dtype=np.int64), graph.m / (n * (n - 1.0))


def _group_weights(partition: Partition, null: NullModel) -> np.ndarray:
    if NullModel(null) is NullModel.CONFIGURATION:
        return partition.kappa
    return partition.sizes


def modularity(graph: Graph, partition: Partition, gamma: float = 1.0,
               null: NullModel = NullModel.CONFIGURATION) -> float:
    """Generalized modularity ``(1/2m) sum_ij (A_ij - gamma P_ij) delta(g_i, g_j)``."""
    _require_edges(graph)
    _, c = null_weights(graph, null)
    W = _group_weights(partition, null).astype(np.float64)
    return (partition.m_in - gamma * c * float(W @ W)) / graph.m


def delta_modularity(graph: Graph, partition: Partition, node: int, target: int,
                     gamma: float = 1.0, null: NullModel = NullModel.CONFIGURATION) -> float:
    """Change in :func:`modularity` if ``node`` moved to group ``target``."""
    _require_edges(graph)
    if not 0 <= target < partition.q:
        raise ValueError(f"group index {target} out of range [0, {partition.q})")
    r = int(partition.assignment[node])
    if r == target:
        return 0.0
    w, c = null_weights(graph, null)
    W = _group_weights(partition, null)
    links = partition.links(node)
    wi = float(w[node])
    d_in = float(links[target] - links[r])
    d_sq = 2.0 * wi * (float(W[target]) - float(W[r]) + wi)
    return (d_in - gamma * c * d_sq) / graph.m


def _block_loglik(partition: Partition, omega: np.ndarray, expected: np.ndarray) -> float:
    """``1/2 sum_rs (e_rs log w_rs - expected_rs w_rs)`` where ``e_rs`` counts edge ends."""
    omega = np.asarray(omega, dtype=np.float64)
    q = partition.q
    if omega.shape != (q, q):
        raise ValueError(f"rate matrix must be {q}x{q}")
    if not np.allclose(omega, omega.T, rtol=0, atol=0):
        raise ValueError("rate matrix must be symmetric")
    if np.any(omega < 0):
        raise ValueError("rates must be nonnegative")
    ends = partition.edge_ends
    if np.any((omega == 0) & (ends > 0)):
        raise ZeroRateError("zero-rate block with observed edges")
    occupied = ends > 0
    data = float(np.sum(ends[occupied] * np.log(omega[occupied])))
    return 0.5 * (data - float(np.sum(expected * omega)))


def dcsbm_log_likelihood(graph: Graph, partition: Partition, omega) -> float:
    """Degree-corrected Poisson SBM log-likelihood, up to assignment-independent constants."""
    _require_edges(graph)
    kappa = partition.kappa.astype(np.float64)
    return _block_loglik(partition, omega, np.outer(kappa, kappa) / (2.0 * graph.m))


def sbm_log_likelihood(graph: Graph, partition: Partition, omega) -> float:
    """Plain Poisson SBM log-likelihood, up to assignment-independent constants."""
    sizes = partition.sizes.astype(np.float64)
    return _block_loglik(partition, omega, np.outer(sizes, sizes))


def _pp_terms(partition: Partition, params: PlantedPartitionParams) -> float:
    m_in, m_out = partition.m_in, partition.m_out
    if (params.omega_out == 0 and m_out > 0) or (params.omega_in == 0 and m_in > 0):
        raise ZeroRateError("zero-rate block with observed edges")
    out = 0.0
    if m_in:
        out += m_in * math.log(params.omega_in)
    if m_out:
        out += m_out * math.log(params.omega_out)
    return out


def pp_log_likelihood(graph: Graph, partition: Partition, params: PlantedPartitionParams) -> float:
    """Degree-corrected planted-partition log-likelihood.

    Same value as :func:`dcsbm_log_likelihood` with ``params.block_matrix(q)``,
    computed from ``m_in``, ``m_out`` and ``sum_r kappa_r^2`` alone.
    """
    _require_edges(graph)
    two_m = 2.0 * graph.m
    kappa = partition.kappa.astype(np.float64)
    s_in = float(kappa @ kappa)
    expected = params.omega_in * s_in + params.omega_out * (two_m * two_m - s_in)
    return _pp_terms(partition, params) - expected / (2.0 * two_m)


def pp_sbm_log_likelihood(graph: Graph, partition: Partition, params: PlantedPartitionParams) -> float:
    """Non-degree-corrected planted-partition log-likelihood (two-valued :func:`sbm_log_likelihood`)."""
    n = float(graph.n)
    sizes = partition.sizes.astype(np.float64)
    s_in = float(sizes @ sizes)
    expected = params.omega_in * s_in + params.omega_out * (n * n - s_in)
    return _pp_terms(partition, params) - 0.5 * expected


def log_mean(a: float, b: float) -> float:
    """Logarithmic mean ``(a - b) / (log a - log b)``; ``a`` when the two coincide."""
    if a <= 0 or b <= 0:
        raise ValueError("logarithmic mean needs positive arguments")
    if abs(a - b) < 1e-12 * max(a, b):
        return float(a)
    return (a - b) / (math.log(a) - math.log(b))


def equivalence_constants(params: PlantedPartitionParams, m: int) -> EquivalenceConstants:
    """Constants mapping configuration-null modularity onto the planted-partition likelihood.

    ``B = m log(w_in / w_out)``, ``C = m (log w_out - w_out)`` and ``gamma`` is
    the logarithmic mean of the two rates.  ``B < 0`` means the likelihood is
    maximized where modularity is minimized.
    """
    w_in, w_out = params.omega_in, params.omega_out
    if w_in <= 0 or w_out <= 0:
        raise ValueError("rates must be positive")
    if w_in == w_out:
        raise ValueError("degenerate: likelihood independent of partition (omega_in == omega_out)")
    B = m * (math.log(w_in) - math.log(w_out))
    C = m * (math.log(w_out) - w_out)
    return EquivalenceConstants(B=B, C=C, gamma=log_mean(w_in, w_out))


def uniform_equivalence_constants(params: PlantedPartitionParams, graph: Graph) -> EquivalenceConstants:
    """Uniform-null counterpart of :func:`equivalence_constants`.

    Here ``params`` are rates relative to the uniform edge density
    ``p = m / C(n, 2)``, so the plain SBM with rates ``p * omega`` satisfies
    ``pp_sbm_log_likelihood = B * Q_uniform(gamma) + C`` with the same
    ``B`` and ``gamma`` as the degree-corrected case.
    """
    base = equivalence_constants(params, graph.m)
    _, c = null_weights(graph, NullModel.UNIFORM)
    p = 2.0 * c
    n = graph.n
    C = graph.m * math.log(p * params.omega_out) - 0.5 * n * n * p * params.omega_out
    return EquivalenceConstants(B=base.B, C=C, gamma=base.gamma)


def uniform_absolute_rates(params: PlantedPartitionParams, graph: Graph) -> PlantedPartitionParams:
    """Convert uniform-null-relative rates to absolute plain-SBM rates."""
    _, c = null_weights(graph, NullModel.UNIFORM)
    return PlantedPartitionParams(2.0 * c * params.omega_in, 2.0 * c * params.omega_out)
