"""Undirected social graphs: generation, loading and centrality analytics.

Node ids are contiguous integers 0..n-1, neighbor lists are kept sorted so
that every iteration order in the package is deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np
import scipy.sparse
import scipy.sparse.linalg


class GraphError(Exception):
    """Invalid graph construction, parameter or query."""


class EdgeListParseError(GraphError):
    """Malformed line in an edge-list stream."""

    def __init__(self, line_number: int, line: str):
        self.line_number = line_number
        self.line = line
        super().__init__(f"malformed edge-list line {line_number}: {line!r}")


class DisconnectedGraphError(GraphError):
    """Raised by operations that are undefined on disconnected graphs."""


class CorrelationError(ValueError):
    """Pearson correlation is undefined (constant or too-short input)."""


class Graph:
    """Simple undirected graph with sorted adjacency lists.

    Invariants enforced at construction: symmetric adjacency, no self-loops,
    no duplicate edges, neighbor lists sorted ascending.
    """

    __slots__ = ("n", "_adj", "_csr", "_rev")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise GraphError(f"node count must be positive, got {n}")
        self.n = int(n)
        neighbor_sets: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        self._adj = [np.array(sorted(s), dtype=np.int64) for s in neighbor_sets]
        self._csr: tuple[np.ndarray, np.ndarray] | None = None
        self._rev: np.ndarray | None = None

    # -- basic queries ---------------------------------------------------

    def neighbors(self, v: int) -> np.ndarray:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adj], dtype=np.int64)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self._adj) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in self._adj[u]:
                if u < v:
                    yield u, int(v)

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency in CSR form (indptr, indices) over directed edge slots."""
        if self._csr is None:
            degrees = self.degrees
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(degrees, out=indptr[1:])
            indices = (
                np.concatenate(self._adj)
                if self.edge_count
                else np.empty(0, dtype=np.int64)
            )
            self._csr = (indptr, indices)
        return self._csr

    def reverse_edges(self) -> np.ndarray:
        """For each directed edge slot (u -> v), the slot index of (v -> u)."""
        if self._rev is None:
            indptr, indices = self.csr()
            rev = np.empty(len(indices), dtype=np.int64)
            for u in range(self.n):
                row = self._adj[u]
                for k in range(len(row)):
                    v = row[k]
                    rev[indptr[u] + k] = indptr[v] + np.searchsorted(self._adj[v], u)
            self._rev = rev
        return self._rev

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        return bool((_bfs_distances(self, 0) >= 0).all())


def _bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from source; -1 marks unreachable nodes."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = du + 1
                queue.append(int(v))
    return dist


# -- construction ---------------------------------------------------------


def generate_pa(n: int, m: int, seed: int) -> Graph:
    """Barabasi-Albert preferential-attachment graph.

    Starts from a complete graph on the first m nodes; every later node
    attaches m edges by degree-proportional sampling without replacement
    (duplicate draws within one attachment round are rejected).
    """
    if m < 1 or n < m:
        raise GraphError(f"require n >= m >= 1, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    # one entry per directed endpoint; drawing uniformly from this list is
    # exactly degree-proportional sampling
    endpoints: list[int] = []
    for u in range(m):
        for v in range(u + 1, m):
            edges.append((u, v))
            endpoints.append(u)
            endpoints.append(v)
    for new in range(m, n):
        targets: set[int] = set()
        if not endpoints:
            targets.add(0)  # m=1 seed graph has no edges yet; attach to node 0
        while len(targets) < m:
            targets.add(int(endpoints[rng.integers(len(endpoints))]))
        for t in sorted(targets):
            edges.append((new, t))
            endpoints.append(new)
            endpoints.append(t)
    return Graph(n, edges)


@dataclass(frozen=True)
class EdgeListResult:
    graph: Graph
    self_loops_dropped: int
    duplicate_edges_dropped: int


def load_edge_list(source: IO[str] | str | Iterable[str]) -> EdgeListResult:
    """Parse a SNAP-style edge list ("u v" per line, '#' comments ignored).

    Raw ids are compacted to 0..n-1 in first-appearance order; self-loops
    and duplicate edges are dropped and counted.
    """
    if isinstance(source, str):
        lines: Iterable[str] = source.splitlines()
    else:
        lines = source
    id_map: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    seen_edges: set[tuple[int, int]] = set()
    self_loops = 0
    duplicates = 0
    for line_number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(line_number, raw.rstrip("\n"))
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(line_number, raw.rstrip("\n")) from None
        for raw_id in (a, b):
            if raw_id not in id_map:
                id_map[raw_id] = len(id_map)
        u, v = id_map[a], id_map[b]
        if u == v:
            self_loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen_edges:
            duplicates += 1
            continue
        seen_edges.add(key)
        edges.append(key)
    if not id_map:
        raise GraphError("edge list holds no nodes")
    return EdgeListResult(Graph(len(id_map), edges), self_loops, duplicates)


def write_edge_list(g: Graph, stream: IO[str]) -> None:
    for u, v in g.edges():
        stream.write(f"{u} {v}\n")


# -- centralities ----------------------------------------------------------

DENSE_SOLVER_THRESHOLD = 2000


def current_flow_closeness(
    g: Graph,
    dense_threshold: int = DENSE_SOLVER_THRESHOLD,
    cg_tol: float = 1e-10,
) -> np.ndarray:
    """Current-flow closeness: (n-1) / sum of effective resistances.

    Effective resistance is computed from the Laplacian pseudoinverse; a
    direct dense factorization is used below `dense_threshold` nodes and
    conjugate gradient above it.
    """
    n = g.n
    if n < 2:
        raise GraphError("current-flow closeness needs at least 2 nodes")
    if not g.is_connected():
        raise DisconnectedGraphError("effective resistance is infinite on a disconnected graph")
    if n < dense_threshold:
        diag = _laplacian_pinv_diag_dense(g)
    else:
        diag = _laplacian_pinv_diag_cg(g, cg_tol)
    # sum_w R_eff(v, w) = n * Lpinv[v, v] + trace(Lpinv); Lpinv rows sum to 0
    resistance_sums = n * diag + diag.sum()
    return (n - 1) / resistance_sums


def _laplacian_dense(g: Graph) -> np.ndarray:
    lap = np.zeros((g.n, g.n))
    for u in range(g.n):
        nbrs = g.neighbors(u)
        lap[u, u] = len(nbrs)
        lap[u, nbrs] = -1.0
    return lap


def _laplacian_pinv_diag_dense(g: Graph) -> np.ndarray:
    return np.diag(np.linalg.pinv(_laplacian_dense(g), hermitian=True)).copy()


def _laplacian_sparse(g: Graph) -> scipy.sparse.csr_matrix:
    indptr, indices = g.csr()
    data = np.full(len(indices), -1.0)
    adjacency = scipy.sparse.csr_matrix((data, indices, indptr), shape=(g.n, g.n))
    return scipy.sparse.diags(g.degrees.astype(float)) + adjacency


def _laplacian_pinv_diag_cg(g: Graph, tol: float) -> np.ndarray:
    n = g.n
    lap = _laplacian_sparse(g)
    diag = np.empty(n)
    for v in range(n):
        b = np.full(n, -1.0 / n)
        b[v] += 1.0
        x, info = scipy.sparse.linalg.cg(lap, b, rtol=tol, atol=0.0)
        if info != 0:
            raise GraphError(f"conjugate gradient failed to converge for node {v}")
        diag[v] = x[v] - x.mean()  # fix the gauge: pinv columns sum to 0
    return diag


def classic_centrality(g: Graph, kind: str) -> np.ndarray:
    """Closeness, shortest-path betweenness (Brandes) or degree centrality."""
    n = g.n
    if kind == "degree":
        if n < 2:
            raise GraphError("degree centrality needs at least 2 nodes")
        return g.degrees / (n - 1)
    if kind not in ("closeness", "betweenness"):
        raise GraphError(f"unknown centrality kind {kind!r}")
    if n < 2:
        raise GraphError("distance-based centrality needs at least 2 nodes")
    if not g.is_connected():
        raise DisconnectedGraphError(f"{kind} centrality is undefined on a disconnected graph")
    if kind == "closeness":
        scores = np.empty(n)
        for v in range(n):
            scores[v] = (n - 1) / _bfs_distances(g, v).sum()
        return scores
    return _brandes_betweenness(g)


def _brandes_betweenness(g: Graph) -> np.ndarray:
    n = g.n
    bc = np.zeros(n)
    for s in range(n):
        stack: list[int] = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in g.neighbors(v):
                w = int(w)
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    # each unordered pair was visited from both endpoints
    if n > 2:
        bc /= (n - 1) * (n - 2)
    return bc


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise CorrelationError("pearson needs two equal-length vectors of length >= 2")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise CorrelationError("pearson is undefined for constant input")
    return float(np.corrcoef(x, y)[0, 1])


# -- roles ------------------------------------------------------------------


@dataclass(frozen=True)
class RoleAssignment:
    """Partition of the vertex set into one smart source, random sources and
    (implicitly) regular nodes."""

    smart_source: int
    random_sources: tuple[int, ...]

    def __post_init__(self):
        if self.smart_source in self.random_sources:
            raise GraphError("smart source must not be a random source")
        if len(set(self.random_sources)) != len(self.random_sources):
            raise GraphError("duplicate random sources")

    def validate(self, node_count: int) -> None:
        for v in (self.smart_source, *self.random_sources):
            if not 0 <= v < node_count:
                raise GraphError(f"source node {v} out of range for n={node_count}")

    @property
    def sources(self) -> tuple[int, ...]:
        return tuple(sorted((self.smart_source, *self.random_sources)))
