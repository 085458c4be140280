"""Simple undirected graphs: edge-list IO, 2-core shaving, degree statistics.

Node ids are arbitrary non-negative integers.  Internally every graph keeps
a dense index 0..n-1 (sorted id order) for sparse matrix work; the original
ids are preserved for output.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

log = logging.getLogger(__name__)


class EdgeListParseError(ValueError):
    """A line of an edge-list file could not be parsed."""

    def __init__(self, lineno: int, line: str, reason: str = "expected two integer tokens"):
        self.lineno = lineno
        self.line = line
        super().__init__(f"line {lineno}: {reason}: {line!r}")


@dataclass(frozen=True)
class DegreeMoments:
    """First and second moments of the degree distribution."""

    mean_k: float
    mean_k2: float


class Graph:
    """Immutable simple undirected graph.

    Self-loops and duplicate edges passed to the constructor are dropped
    and counted (``dropped_self_loops``, ``dropped_duplicates``); real edge
    lists are dirty and rejecting them outright is unhelpful.
    """

    __slots__ = ("_adj", "_node_ids", "_index", "m",
                 "dropped_self_loops", "dropped_duplicates")

    def __init__(self, edges: Iterable[tuple[int, int]], nodes: Iterable[int] = ()):
        adj: dict[int, set[int]] = {v: set() for v in nodes}
        loops = 0
        dups = 0
        m = 0
        for u, v in edges:
            if u == v:
                loops += 1
                continue
            s = adj.setdefault(u, set())
            if v in s:
                dups += 1
                continue
            s.add(v)
            adj.setdefault(v, set()).add(u)
            m += 1
        node_ids = tuple(sorted(adj))
        self._adj = {v: tuple(sorted(adj[v])) for v in node_ids}
        self._node_ids = node_ids
        self._index = {v: i for i, v in enumerate(node_ids)}
        self.m = m
        self.dropped_self_loops = loops
        self.dropped_duplicates = dups
        if loops or dups:
            log.warning("dropped %d self-loop(s) and %d duplicate edge(s)", loops, dups)

    @property
    def n(self) -> int:
        return len(self._node_ids)

    @property
    def node_ids(self) -> tuple[int, ...]:
        return self._node_ids

    def index(self, v: int) -> int:
        """Dense 0..n-1 index of node id ``v``."""
        return self._index[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> np.ndarray:
        """Degree array in dense index order."""
        return np.array([len(self._adj[v]) for v in self._node_ids], dtype=np.int64)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as (u, v) with u < v, sorted."""
        for u in self._node_ids:
            for v in self._adj[u]:
                if u < v:
                    yield (u, v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def has_node(self, v: int) -> bool:
        return v in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._adj == other._adj

    def __hash__(self):
        return hash((self._node_ids, tuple(self._adj.values())))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def from_networkx(nxg) -> Graph:
    return Graph(nxg.edges(), nodes=nxg.nodes())


def parse_edge_list(text: str) -> Graph:
    """Parse whitespace-separated "u v" lines into a simple graph.

    Lines starting with '#' are comments.  A header comment of the form
    "# n=<n> m=<m>" declares the node count; when present, ids 0..n-1 are
    retained even if isolated.  Duplicate edges and self-loops are dropped
    with a counted warning.  Empty input yields the empty graph.
    """
    edges: list[tuple[int, int]] = []
    declared_n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if declared_n is None:
                declared_n = _parse_header(line)
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(lineno, raw)
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(lineno, raw) from None
        edges.append((u, v))
    nodes: list[int] = []
    if declared_n is not None:
        # retain isolated declared nodes: pad with the smallest unused ids
        mentioned = {u for e in edges for u in e}
        candidate = 0
        while len(mentioned) + len(nodes) < declared_n:
            if candidate not in mentioned:
                nodes.append(candidate)
            candidate += 1
    return Graph(edges, nodes=nodes)


def _parse_header(line: str) -> int | None:
    fields = dict(tok.split("=", 1) for tok in line[1:].split() if "=" in tok)
    try:
        return int(fields["n"])
    except (KeyError, ValueError):
        return None


def serialize(g: Graph) -> str:
    """Canonical edge-list text: "# n=<n> m=<m>" header, then sorted "u v" lines."""
    lines = [f"# n={g.n} m={g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def shave(g: Graph) -> Graph:
    """Return the 2-core: iteratively peel degree-<=1 nodes until all degrees >= 2.

    Queue-based peel, O(n + m).  Returns the empty graph when nothing
    survives (e.g. trees).  The input is unmodified.
    """
    deg = {v: g.degree(v) for v in g.node_ids}
    queue = [v for v, d in deg.items() if d <= 1]
    removed: set[int] = set()
    while queue:
        v = queue.pop()
        if v in removed:
            continue
        removed.add(v)
        for w in g.neighbors(v):
            if w in removed:
                continue
            deg[w] -= 1
            if deg[w] <= 1:
                queue.append(w)
    if not removed:
        return g
    kept = [v for v in g.node_ids if v not in removed]
    edges = [(u, v) for u, v in g.edges() if u not in removed and v not in removed]
    return Graph(edges, nodes=kept)


def degree_moments(g: Graph) -> DegreeMoments:
    """<k> and <k^2> of the degree distribution; errors on the empty graph."""
    if g.n == 0:
        raise ValueError("moments undefined on zero nodes")
    d = g.degrees().astype(float)
    return DegreeMoments(mean_k=float(d.mean()), mean_k2=float((d * d).mean()))


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> Graph:
    keep = set(nodes)
    edges = [(u, v) for u, v in g.edges() if u in keep and v in keep]
    return Graph(edges, nodes=keep)


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest connected component (ties: smallest min id)."""
    if g.n == 0:
        return g
    seen: set[int] = set()
    best: list[int] = []
    for start in g.node_ids:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        if len(comp) > len(best):
            best = comp
    return induced_subgraph(g, best)
