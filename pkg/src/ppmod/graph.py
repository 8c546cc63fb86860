"""Undirected multigraphs with self-loops, and partitions with cached group statistics.

Adjacency follows the usual convention for multigraphs: ``A[i, j]`` is the
number of edges between ``i`` and ``j`` and a self-edge adds 2 to ``A[i, i]``.
All edge statistics are held as exact integers.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence, TextIO

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graph input."""


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, line: str, reason: str = "expected two node ids"):
        self.lineno = lineno
        self.line = line
        super().__init__(f"line {lineno}: {reason}: {line.rstrip()!r}")


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected multigraph in CSR form.

    ``indices[indptr[i]:indptr[i+1]]`` are the distinct neighbours of ``i``
    (including ``i`` itself when it carries self-edges) and ``counts`` the
    matching adjacency entries ``A[i, j]``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    counts: np.ndarray
    degrees: np.ndarray
    m: int
    labels: tuple = ()

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.counts, self.degrees):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.degrees)

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.counts[lo:hi]

    def adjacency_count(self, i: int, j: int) -> int:
        nbrs, cnt = self.neighbors(i)
        pos = np.searchsorted(nbrs, j)
        if pos < len(nbrs) and nbrs[pos] == j:
            return int(cnt[pos])
        return 0

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.int64)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        A[rows, self.indices] = self.counts
        return A

    def edges(self) -> list[tuple[int, int]]:
        """Edge multiset as ``(i, j)`` pairs with ``i <= j``, one entry per edge."""
        out = []
        for i in range(self.n):
            nbrs, cnt = self.neighbors(i)
            for j, c in zip(nbrs.tolist(), cnt.tolist()):
                if j > i:
                    out.extend([(i, j)] * c)
                elif j == i:
                    out.extend([(i, i)] * (c // 2))
        return out

    def label(self, i: int):
        return self.labels[i] if self.labels else i


def _from_index_pairs(u: np.ndarray, v: np.ndarray, n: int, labels=()) -> Graph:
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    m = len(u)
    # every edge appears in both rows; a self-edge therefore lands twice on A[i, i]
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    key = rows * n + cols
    uniq, cnt = np.unique(key, return_counts=True)
    r = uniq // n
    c = uniq % n
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, r + 1, 1)
    indptr = np.cumsum(indptr)
    degrees = np.zeros(n, dtype=np.int64)
    np.add.at(degrees, r, cnt)
    return Graph(indptr, c.astype(np.int64), cnt.astype(np.int64), degrees, int(m), tuple(labels))


def from_arrays(u, v, n: int | None = None) -> Graph:
    """Build a graph over nodes ``0..n-1`` from integer endpoint arrays.

    Unlike :func:`build_graph`, ``n`` may exceed the largest id so that
    isolated nodes are kept, and an edgeless graph is allowed.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if n is None:
        n = int(max(u.max(initial=-1), v.max(initial=-1))) + 1
    if len(u) and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
        raise GraphError("node index out of range")
    return _from_index_pairs(u, v, n)


def build_graph(edge_pairs: Iterable[tuple[Hashable, Hashable]]) -> Graph:
    """Build a graph from node-id pairs.

    Integer ids are used directly as node indices (nodes ``0..max_id``).
    Any other ids are interned to dense indices in first-seen order, and the
    original ids are kept in ``Graph.labels``.
    """
    pairs = list(edge_pairs)
    if not pairs:
        raise GraphError("empty graph")
    for lineno, p in enumerate(pairs, 1):
        if len(p) != 2:
            raise EdgeListParseError(lineno, repr(p))
    ints = all(isinstance(x, (int, np.integer)) and not isinstance(x, bool) and x >= 0
               for p in pairs for x in p)
    if ints:
        u = np.array([p[0] for p in pairs], dtype=np.int64)
        v = np.array([p[1] for p in pairs], dtype=np.int64)
        n = int(max(u.max(), v.max())) + 1
        return _from_index_pairs(u, v, n)
    index: dict = {}
    u, v = [], []
    for a, b in pairs:
        u.append(index.setdefault(a, len(index)))
        v.append(index.setdefault(b, len(index)))
    return _from_index_pairs(np.array(u), np.array(v), len(index), labels=list(index))


def parse_edgelist(stream: TextIO) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(stream, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, line)
        pairs.append((parts[0], parts[1]))
    return pairs


def load_edgelist(source: str | os.PathLike | TextIO) -> Graph:
    """Read a whitespace-separated edge list, one edge per line.

    Blank lines and lines starting with ``#`` are skipped.  When every id is
    a non-negative integer the ids are used as node indices; otherwise ids
    are interned as strings in first-seen order and kept in ``labels``.
    """
    if hasattr(source, "read"):
        pairs = parse_edgelist(source)
    else:
        with open(source) as fh:
            pairs = parse_edgelist(fh)
    if not pairs:
        raise GraphError("empty graph")
    if all(a.isdigit() and b.isdigit() for a, b in pairs):
        return build_graph([(int(a), int(b)) for a, b in pairs])
    return build_graph(pairs)


def write_edgelist(graph: Graph, dest: str | os.PathLike | TextIO, header: str | None = None):
    def _write(fh):
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for i, j in graph.edges():
            fh.write(f"{graph.label(i)} {graph.label(j)}\n")

    if hasattr(dest, "write"):
        _write(dest)
    else:
        with open(dest, "w") as fh:
            _write(fh)


@dataclass(eq=False)
class Partition:
    """Assignment of nodes to ``q`` groups with incrementally maintained statistics.

    ``edge_ends[r, s]`` is ``sum(A[i, j])`` over ``i`` in ``r`` and ``j`` in ``s``,
    so the diagonal counts every in-group edge twice.
    """

    graph: Graph = field(repr=False)
    assignment: np.ndarray
    q: int
    kappa: np.ndarray = field(init=False)
    sizes: np.ndarray = field(init=False)
    edge_ends: np.ndarray = field(init=False)

    def __post_init__(self):
        self.assignment = np.array(self.assignment, dtype=np.int64)
        if self.q < 1:
            raise ValueError("q must be positive")
        if self.assignment.shape != (self.graph.n,):
            raise ValueError(f"assignment length {len(self.assignment)} != n = {self.graph.n}")
        if self.graph.n and (self.assignment.min() < 0 or self.assignment.max() >= self.q):
            raise ValueError(f"group index out of range [0, {self.q})")
        self.recount()

    def recount(self):
        g = self.assignment
        G = self.graph
        q = self.q
        self.kappa = np.bincount(g, weights=G.degrees, minlength=q).astype(np.int64)
        self.sizes = np.bincount(g, minlength=q).astype(np.int64)
        rows = np.repeat(g, np.diff(G.indptr))
        cols = g[G.indices]
        ends = np.zeros((q, q), dtype=np.int64)
        np.add.at(ends, (rows, cols), G.counts)
        self.edge_ends = ends

    @property
    def m_in(self) -> int:
        return int(np.trace(self.edge_ends)) // 2

    @property
    def m_out(self) -> int:
        return self.graph.m - self.m_in

    def block_edges(self) -> np.ndarray:
        """``m_rs``: edges between groups ``r != s``, in-group edges on the diagonal."""
        out = self.edge_ends.copy()
        np.fill_diagonal(out, np.diag(out) // 2)
        return out

    def occupied(self) -> int:
        return int(np.count_nonzero(self.sizes))

    def copy(self) -> "Partition":
        new = object.__new__(Partition)
        new.graph = self.graph
        new.assignment = self.assignment.copy()
        new.q = self.q
        new.kappa = self.kappa.copy()
        new.sizes = self.sizes.copy()
        new.edge_ends = self.edge_ends.copy()
        return new

    def links(self, node: int) -> np.ndarray:
        """Edges from ``node`` to each group, self-edges excluded."""
        nbrs, cnt = self.graph.neighbors(node)
        mask = nbrs != node
        return np.bincount(self.assignment[nbrs[mask]], weights=cnt[mask],
                           minlength=self.q).astype(np.int64)

    def move(self, node: int, target: int) -> "Partition":
        """Move ``node`` to group ``target``, updating statistics in O(degree + q)."""
        if not 0 <= target < self.q:
            raise ValueError(f"group index {target} out of range [0, {self.q})")
        r = int(self.assignment[node])
        if r == target:
            return self
        s = target
        nbrs, cnt = self.graph.neighbors(node)
        loop = nbrs == node
        self_ends = int(cnt[loop].sum())
        per_group = self.links(node)
        ends = self.edge_ends
        ends[r, :] -= per_group
        ends[:, r] -= per_group
        ends[s, :] += per_group
        ends[:, s] += per_group
        ends[r, r] -= self_ends
        ends[s, s] += self_ends
        k = self.graph.degrees[node]
        self.kappa[r] -= k
        self.kappa[s] += k
        self.sizes[r] -= 1
        self.sizes[s] += 1
        self.assignment[node] = s
        return self

    def to_dict(self) -> dict:
        G = self.graph
        return {str(G.label(i)): int(g) for i, g in enumerate(self.assignment.tolist())}


def new_partition(graph: Graph, assignment: Sequence[int], q: int) -> Partition:
    return Partition(graph, np.asarray(assignment), q)


def move_node(partition: Partition, node: int, target: int) -> Partition:
    return partition.move(node, target)


def write_partition(partition: Partition, dest: TextIO, fmt: str = "json"):
    if fmt == "json":
        json.dump(partition.to_dict(), dest, indent=1)
        dest.write("\n")
    elif fmt == "csv":
        w = csv.writer(dest, lineterminator="\n")
        w.writerow(["node_id", "group"])
        for k, g in partition.to_dict().items():
            w.writerow([k, g])
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_partition(graph: Graph, source: TextIO, q: int | None = None, fmt: str = "json") -> Partition:
    """Read a partition written by :func:`write_partition` back onto ``graph``."""
    if fmt == "json":
        mapping = json.load(source)
    elif fmt == "csv":
        rows = list(csv.reader(source))
        mapping = {r[0]: int(r[1]) for r in rows[1:] if r}
    else:
        raise ValueError(f"unknown format {fmt!r}")
    assignment = [mapping[str(graph.label(i))] for i in range(graph.n)]
    if q is None:
        q = max(assignment) + 1
    return Partition(graph, np.asarray(assignment), q)


def partition_to_string(partition: Partition, fmt: str = "json") -> str:
    buf = io.StringIO()
    write_partition(partition, buf, fmt)
    return buf.getvalue()
