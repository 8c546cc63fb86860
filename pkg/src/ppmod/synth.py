"""Poisson planted-partition graph generators.

Both generators sample block by block: the number of edges in a block is
drawn from a Poisson law with the block's total rate and each edge then picks
its endpoints independently within the two groups.  By Poisson thinning this
gives every node pair an independent Poisson multiplicity with the intended
mean, self-edges included at half the within-group rate, in O(m) time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, Partition, from_arrays
from .quality import PlantedPartitionParams, log_mean


@dataclass(frozen=True)
class SyntheticSpec:
    """``q`` equal groups; each node expects ``d_in`` edges inside its group and ``d_out`` to each other group."""

    q: int
    group_size: int
    d_in: float
    d_out: float
    seed: int = 0

    def __post_init__(self):
        if self.q < 2:
            raise ValueError("q must be at least 2")
        if self.group_size < 1:
            raise ValueError("group_size must be positive")
        if self.d_in < 0 or self.d_out < 0:
            raise ValueError("expected degrees must be nonnegative")

    @property
    def n(self) -> int:
        return self.q * self.group_size

    @property
    def mean_degree(self) -> float:
        return self.d_in + self.d_out * (self.q - 1)

    @property
    def expected_edges(self) -> float:
        return self.n * self.mean_degree / 2


def spec_to_rates(spec: SyntheticSpec) -> PlantedPartitionParams:
    """Per-pair Poisson means of the plain planted-partition model."""
    return PlantedPartitionParams(spec.d_in / spec.group_size, spec.d_out / spec.group_size)


def dc_rates(spec: SyntheticSpec) -> PlantedPartitionParams:
    """The same ensemble's rates relative to the configuration model.

    Every node has expected degree ``k = d_in + (q-1) d_out``, so the
    configuration-model mean for a pair is ``k^2 / 2m`` with ``2m = n k``,
    and ``omega_dc = omega_sbm * 2m / k^2 = q * d / k``.
    """
    k = spec.mean_degree
    if k == 0:
        raise ValueError("ensemble has no edges")
    return PlantedPartitionParams(spec.q * spec.d_in / k, spec.q * spec.d_out / k)


def true_gamma(spec: SyntheticSpec) -> float:
    rates = dc_rates(spec)
    return log_mean(rates.omega_in, rates.omega_out)


def planted_assignment(q: int, group_size: int) -> np.ndarray:
    return np.repeat(np.arange(q, dtype=np.int64), group_size)


def _sample_block(rng, members_r, members_s, mean, p_r=None, p_s=None):
    count = rng.poisson(mean) if mean > 0 else 0
    u = rng.choice(members_r, size=count, p=p_r)
    v = rng.choice(members_s, size=count, p=p_s)
    return u, v


def _sample_blocks(rng, groups, within_mean, between_mean, node_p=None):
    """``within_mean(r)``/``between_mean(r, s)`` give block totals; ``node_p[r]`` endpoint weights."""
    us, vs = [], []
    q = len(groups)
    for r in range(q):
        pr = None if node_p is None else node_p[r]
        for s in range(r, q):
            ps = None if node_p is None else node_p[s]
            mean = within_mean(r) if r == s else between_mean(r, s)
            u, v = _sample_block(rng, groups[r], groups[s], mean, pr, ps)
            us.append(u)
            vs.append(v)
    return np.concatenate(us), np.concatenate(vs)


def generate_planted_partition(spec: SyntheticSpec) -> tuple[Graph, Partition]:
    """Sample the plain Poisson planted-partition model; returns the graph and planted groups."""
    rates = spec_to_rates(spec)
    s = spec.group_size
    rng = np.random.default_rng(spec.seed)
    assignment = planted_assignment(spec.q, s)
    groups = [np.arange(r * s, (r + 1) * s) for r in range(spec.q)]
    # s(s-1)/2 pairs at omega_in plus s self-pairs at omega_in / 2
    u, v = _sample_blocks(rng, groups,
                          lambda r: rates.omega_in * s * s / 2,
                          lambda r, t: rates.omega_out * s * s)
    graph = from_arrays(u, v, spec.n)
    return graph, Partition(graph, assignment, spec.q)


def generate_dc_planted_partition(target_degrees, assignment, params: PlantedPartitionParams,
                                  seed: int = 0) -> Graph:
    """Sample the degree-corrected planted-partition model.

    The pair mean is ``k_i k_j / 2m * omega`` with ``2m = sum(target_degrees)``,
    halved for self-pairs.
    """
    k = np.asarray(target_degrees, dtype=np.float64)
    g = np.asarray(assignment, dtype=np.int64)
    if k.shape != g.shape:
        raise ValueError("target_degrees and assignment must have the same length")
    if np.any(k < 0):
        raise ValueError("target degrees must be nonnegative")
    two_m = k.sum()
    if two_m <= 0:
        raise ValueError("zero total degree")
    if params.omega_in < 0 or params.omega_out < 0:
        raise ValueError("rates must be nonnegative")
    q = int(g.max()) + 1
    rng = np.random.default_rng(seed)
    groups = [np.flatnonzero(g == r) for r in range(q)]
    kappa = np.array([k[idx].sum() for idx in groups])
    node_p = [k[idx] / kappa[r] if kappa[r] > 0 else None for r, idx in enumerate(groups)]

    def within(r):
        return params.omega_in * kappa[r] ** 2 / (2 * two_m)

    def between(r, s):
        return params.omega_out * kappa[r] * kappa[s] / two_m

    u, v = _sample_blocks(rng, groups, within, between, node_p)
    return from_arrays(u, v, len(k))


def expected_edges_dc(target_degrees, assignment, params: PlantedPartitionParams) -> float:
    k = np.asarray(target_degrees, dtype=np.float64)
    g = np.asarray(assignment, dtype=np.int64)
    kappa = np.bincount(g, weights=k)
    two_m = k.sum()
    s_in = float(kappa @ kappa)
    return (params.omega_in * s_in + params.omega_out * (two_m**2 - s_in)) / (2 * two_m)

