"""Directed graphs: edge-list ingestion, structural validation, walk counting."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import GraphParseError, GraphValidationError

__all__ = [
    "DirectedGraph",
    "GraphMode",
    "ValidationReport",
    "load_edge_list",
    "validate",
    "require_valid",
    "walk_count_matrix",
    "count_paths",
    "random_strongly_connected",
    "complete_graph",
    "cycle_graph",
    "plastic_graph",
]

INT64_MAX = 2**63 - 1


class GraphMode(enum.Enum):
    DISCRETE_TIME = "discrete"
    CONTINUOUS_TIME = "continuous"


class DirectedGraph:
    """Immutable 0/1 adjacency structure on nodes ``0 .. n-1``."""

    __slots__ = ("_adj",)

    def __init__(self, adjacency):
        adj = np.array(adjacency, dtype=np.int64, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if adj.shape[0] < 2:
            raise ValueError("a graph needs at least 2 nodes")
        if not np.all((adj == 0) | (adj == 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        adj.setflags(write=False)
        self._adj = adj

    @classmethod
    def from_edges(cls, edges, n=None):
        edges = list(edges)
        if not edges:
            raise ValueError("empty edge set")
        if n is None:
            n = max(max(e) for e in edges) + 1
        adj = np.zeros((n, n), dtype=np.int64)
        for src, dst in edges:
            adj[src, dst] = 1
        return cls(adj)

    @property
    def adjacency(self) -> np.ndarray:
        return self._adj

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self._adj))]

    @property
    def self_loops(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(np.diag(self._adj))]

    def successors(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self._adj[i])]

    def with_self_loops(self) -> "DirectedGraph":
        """Same graph with a loop added at every node (adjacency ``A + I``)."""
        return DirectedGraph(np.maximum(self._adj, np.eye(self.n, dtype=np.int64)))

    def __eq__(self, other):
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return np.array_equal(self._adj, other._adj)

    def __hash__(self):
        return hash(self._adj.tobytes())

    def __repr__(self):
        return f"DirectedGraph(n={self.n}, edges={self.edges})"


def load_edge_list(text) -> DirectedGraph:
    """Parse a whitespace-separated ``src dst`` edge list.

    Blank lines and lines starting with ``#`` are skipped; node ids are
    0-based and the node count is one past the largest id seen. Repeated
    edges collapse to one.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(f"expected 'src dst', got {raw!r}", lineno)
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"node ids must be integers, got {raw!r}", lineno) from None
        if src < 0 or dst < 0:
            raise GraphParseError(f"negative node id in {raw!r}", lineno)
        edges.add((src, dst))
    if not edges:
        raise GraphParseError("empty edge set")
    n = max(max(e) for e in edges) + 1
    if n < 2:
        raise GraphParseError("graph must have at least 2 nodes")
    return DirectedGraph.from_edges(sorted(edges), n=n)


@dataclass(frozen=True)
class ValidationReport:
    mode: GraphMode
    strongly_connected: bool
    components: tuple[tuple[int, ...], ...]
    self_loops: tuple[int, ...]
    problems: tuple[str, ...] = field(default=())

    @property
    def valid(self) -> bool:
        return not self.problems

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "valid": self.valid,
            "strongly_connected": self.strongly_connected,
            "components": [list(c) for c in self.components],
            "self_loops": list(self.self_loops),
            "problems": list(self.problems),
        }


def validate(g: DirectedGraph, mode: GraphMode = GraphMode.CONTINUOUS_TIME) -> ValidationReport:
    """Check strong connectivity and, in continuous time, absence of self loops."""
    sparse = csr_matrix(g.adjacency)
    ncomp, labels = connected_components(sparse, directed=True, connection="strong")
    components = tuple(
        sorted(tuple(int(v) for v in np.flatnonzero(labels == c)) for c in range(ncomp))
    )
    problems = []
    if ncomp != 1:
        problems.append(
            f"not strongly connected: {ncomp} components {[list(c) for c in components]}; "
            + _unreachable_witness(sparse, g.n)
        )
    loops = tuple(g.self_loops)
    if mode is GraphMode.CONTINUOUS_TIME and loops:
        nodes = ", ".join(str(v) for v in loops)
        problems.append(f"self loop at node{'s' if len(loops) > 1 else ''} {nodes}")
    return ValidationReport(mode, ncomp == 1, components, loops, tuple(problems))


def _unreachable_witness(sparse, n):
    forward = set(breadth_first_order(sparse, 0, directed=True, return_predecessors=False))
    missing = sorted(set(range(n)) - forward)
    if missing:
        return f"node 0 cannot reach node {missing[0]}"
    backward = set(breadth_first_order(sparse.T.tocsr(), 0, directed=True, return_predecessors=False))
    missing = sorted(set(range(n)) - backward)
    return f"node {missing[0]} cannot reach node 0"


def require_valid(g: DirectedGraph, mode: GraphMode) -> ValidationReport:
    report = validate(g, mode)
    if not report.valid:
        raise GraphValidationError(report)
    return report


def walk_count_matrix(g: DirectedGraph, steps: int) -> np.ndarray:
    """``A**steps`` in exact integer arithmetic (object array of Python ints)."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    base = g.adjacency.astype(object)
    result = np.eye(g.n, dtype=np.int64).astype(object)
    while steps:
        if steps & 1:
            result = result @ base
        steps >>= 1
        if steps:
            base = base @ base
    return result


def count_paths(g: DirectedGraph, i: int, j: int, steps: int) -> int:
    """Number of directed walks with exactly ``steps`` edges from ``i`` to ``j``.

    Raises OverflowError when the count does not fit in a signed 64-bit
    integer.
    """
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise IndexError(f"nodes must lie in [0, {g.n})")
    count = int(walk_count_matrix(g, steps)[i, j])
    if count > INT64_MAX:
        raise OverflowError(f"walk count from {i} to {j} in {steps} steps exceeds int64 range")
    return count


# Standard test graphs


def complete_graph(n: int) -> DirectedGraph:
    return DirectedGraph(np.ones((n, n), dtype=np.int64) - np.eye(n, dtype=np.int64))


def cycle_graph(n: int) -> DirectedGraph:
    return DirectedGraph.from_edges([(k, (k + 1) % n) for k in range(n)], n=n)


def plastic_graph() -> DirectedGraph:
    """0->1, 1->0, 1->2, 2->0; Perron root is the real root of x**3 = x + 1."""
    return DirectedGraph.from_edges([(0, 1), (1, 0), (1, 2), (2, 0)])


def random_strongly_connected(n: int, density: float, seed, self_loops: bool = False) -> DirectedGraph:
    """Random Hamiltonian cycle plus Bernoulli(``density``) extra edges."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    adj = np.zeros((n, n), dtype=np.int64)
    adj[order, np.roll(order, -1)] = 1
    extra = rng.random((n, n)) < density
    adj |= extra.astype(np.int64)
    if not self_loops:
        np.fill_diagonal(adj, 0)
    return DirectedGraph(adj)
