from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from app.utils.errors import ArgumentError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Edge:
    """An undirected edge stored as (min, max)."""

    u: int
    v: int

    def __post_init__(self):
        if self.u == self.v:
            raise ArgumentError(f"Self-loop on vertex {self.u}")
        if self.u > self.v:
            raise ArgumentError(f"Edge ({self.u}, {self.v}) is not canonical; use Edge.of")
        if self.u < 0:
            raise ArgumentError(f"Negative vertex id in edge ({self.u}, {self.v})")

    @classmethod
    def of(cls, a: int, b: int) -> "Edge":
        return cls(min(a, b), max(a, b))

    def __iter__(self) -> Iterator[int]:
        yield self.u
        yield self.v

    def other(self, x: int) -> int:
        if x == self.u:
            return self.v
        if x == self.v:
            return self.u
        raise ArgumentError(f"Vertex {x} is not an endpoint of {self}")

    def as_list(self) -> List[int]:
        return [self.u, self.v]

    def __str__(self) -> str:
        return f"{self.u}-{self.v}"


@dataclass(frozen=True)
class Matching:
    """A set of edges; validity against a host graph is checked by the matching service."""

    edges: FrozenSet[Edge] = frozenset()

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]]) -> "Matching":
        return cls(frozenset(Edge.of(a, b) for a, b in pairs))

    @cached_property
    def covered(self) -> FrozenSet[int]:
        return frozenset(x for e in self.edges for x in e)

    @cached_property
    def _mates(self) -> Dict[int, int]:
        mates: Dict[int, int] = {}
        for e in self.edges:
            mates[e.u] = e.v
            mates[e.v] = e.u
        return mates

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, edge: Edge) -> bool:
        return edge in self.edges

    def mate(self, v: int) -> Optional[int]:
        return self._mates.get(v)

    def is_saturated(self, v: int) -> bool:
        return v in self._mates

    def mates_array(self, n: int) -> List[int]:
        """Mate of every vertex in 0..n-1, -1 when unsaturated."""
        mates = [-1] * n
        for v, w in self._mates.items():
            mates[v] = w
        return mates

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def symmetric_difference(self, edges: Iterable[Edge]) -> "Matching":
        return Matching(self.edges.symmetric_difference(edges))

    def relabeled(self, id_map: Dict[int, int]) -> "Matching":
        """Apply an old->new id map, dropping edges with an unmapped endpoint."""
        return Matching(
            frozenset(
                Edge.of(id_map[e.u], id_map[e.v])
                for e in self.edges
                if e.u in id_map and e.v in id_map
            )
        )


@dataclass(frozen=True)
class ComponentPartition:
    sets: Tuple[FrozenSet[int], ...]
    component_of: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self) -> Iterator[FrozenSet[int]]:
        return iter(self.sets)

    def sizes(self) -> List[int]:
        return [len(s) for s in self.sets]


@dataclass(frozen=True)
class Graph:
    """
    Simple undirected graph over dense vertex ids 0..n-1.

    Graphs are immutable; every rewrite returns a fresh graph.
    """

    n: int
    adjacency: Tuple[FrozenSet[int], ...] = field(default=())

    def __post_init__(self):
        if self.n < 0:
            raise ArgumentError(f"Vertex count must be nonnegative, got {self.n}")
        if not self.adjacency and self.n:
            object.__setattr__(self, "adjacency", tuple(frozenset() for _ in range(self.n)))
        if len(self.adjacency) != self.n:
            raise ArgumentError(f"Adjacency has {len(self.adjacency)} rows for n={self.n}")
        for v, neighbors in enumerate(self.adjacency):
            if v in neighbors:
                raise ArgumentError(f"Self-loop on vertex {v}")
            for w in neighbors:
                if not 0 <= w < self.n:
                    raise ArgumentError(f"Neighbor {w} of {v} outside 0..{self.n - 1}")
                if v not in self.adjacency[w]:
                    raise ArgumentError(f"Adjacency is not symmetric on {v}-{w}")

    # construction

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        rows: List[set] = [set() for _ in range(n)]
        for a, b in edges:
            if a == b:
                raise ArgumentError(f"Self-loop on vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ArgumentError(f"Edge ({a}, {b}) outside 0..{n - 1}")
            rows[a].add(b)
            rows[b].add(a)
        return cls(n, tuple(frozenset(r) for r in rows))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((a, b) for a in range(n) for b in range(a + 1, n)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((i, i + 1) for i in range(n - 1)))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise ArgumentError(f"A cycle needs at least 3 vertices, got {n}")
        return cls.from_edges(n, ((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def star(cls, leaves: int) -> "Graph":
        """K_{1,leaves} with center 0."""
        return cls.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)))

    @classmethod
    def circulant(cls, n: int, offsets: Iterable[int]) -> "Graph":
        edges = set()
        for k in offsets:
            for i in range(n):
                j = (i + k) % n
                if i != j:
                    edges.add(Edge.of(i, j))
        return cls.from_edges(n, ((e.u, e.v) for e in edges))

    @classmethod
    def disjoint_union(cls, graphs: Sequence["Graph"]) -> "Graph":
        offset = 0
        edges: List[Tuple[int, int]] = []
        for g in graphs:
            edges.extend((e.u + offset, e.v + offset) for e in g.edges)
            offset += g.n
        return cls.from_edges(offset, edges)

    # structural queries

    def check_vertex(self, v: int) -> None:
        if not isinstance(v, int) or not 0 <= v < self.n:
            raise ArgumentError(f"Vertex id {v} out of range 0..{self.n - 1}")

    def neighbors(self, v: int) -> FrozenSet[int]:
        self.check_vertex(v)
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        self.check_vertex(v)
        return len(self.adjacency[v])

    def max_degree(self) -> int:
        return max((len(r) for r in self.adjacency), default=0)

    def degrees(self) -> List[int]:
        return [len(r) for r in self.adjacency]

    def has_edge(self, a: int, b: int) -> bool:
        return 0 <= a < self.n and 0 <= b < self.n and b in self.adjacency[a]

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        return tuple(
            Edge(v, w) for v in range(self.n) for w in sorted(self.adjacency[v]) if v < w
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def isolated_vertices(self) -> List[int]:
        """V_0(G)."""
        return [v for v in range(self.n) if not self.adjacency[v]]

    def non_isolated_vertices(self) -> List[int]:
        """V_{>=1}(G)."""
        return [v for v in range(self.n) if self.adjacency[v]]

    def is_subgraph_of(self, other: "Graph") -> bool:
        return self.n <= other.n and all(other.has_edge(e.u, e.v) for e in self.edges)

    def components(self) -> ComponentPartition:
        component_of = [-1] * self.n
        sets: List[FrozenSet[int]] = []
        for start in range(self.n):
            if component_of[start] != -1:
                continue
            cid = len(sets)
            component_of[start] = cid
            stack = [start]
            members = [start]
            while stack:
                v = stack.pop()
                for w in self.adjacency[v]:
                    if component_of[w] == -1:
                        component_of[w] = cid
                        stack.append(w)
                        members.append(w)
            sets.append(frozenset(members))
        return ComponentPartition(tuple(sets), tuple(component_of))

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.components()) == 1

    # rewrites

    def induced_subgraph(self, vertices: Iterable[int]) -> Tuple["Graph", Dict[int, int]]:
        """
        Induced subgraph on the given vertices with ids re-densified.

        Args:
            vertices (Iterable[int]): Vertices to keep

        Returns:
            Tuple[Graph, Dict[int, int]]: The subgraph and its old->new id map
        """
        keep = sorted(set(vertices))
        for v in keep:
            self.check_vertex(v)
        id_map = {old: new for new, old in enumerate(keep)}
        rows = tuple(
            frozenset(id_map[w] for w in self.adjacency[old] if w in id_map) for old in keep
        )
        return Graph(len(keep), rows), id_map

    def delete_vertex(self, v: int) -> Tuple["Graph", Dict[int, int]]:
        """G \\ v, with the old->new id map of the surviving vertices."""
        self.check_vertex(v)
        return self.induced_subgraph(w for w in range(self.n) if w != v)

    def add_vertices(self, count: int) -> "Graph":
        if count < 0:
            raise ArgumentError(f"Cannot add {count} vertices")
        return Graph(self.n + count, self.adjacency + tuple(frozenset() for _ in range(count)))

    def add_edge(self, a: int, b: int) -> "Graph":
        self.check_vertex(a)
        self.check_vertex(b)
        if a == b:
            raise ArgumentError(f"Self-loop on vertex {a}")
        if self.has_edge(a, b):
            raise PreconditionError(f"Edge {Edge.of(a, b)} already present")
        rows = list(self.adjacency)
        rows[a] = rows[a] | {b}
        rows[b] = rows[b] | {a}
        return Graph(self.n, tuple(rows))

    def remove_edges(self, edges: Iterable[Edge]) -> "Graph":
        rows = [set(r) for r in self.adjacency]
        for e in edges:
            if e.v not in rows[e.u]:
                raise PreconditionError(f"Edge {e} not present")
            rows[e.u].discard(e.v)
            rows[e.v].discard(e.u)
        return Graph(self.n, tuple(frozenset(r) for r in rows))

    def oplus(self, v: int, u: int) -> "Graph":
        """
        G ⊕ e_vu: attach the isolated vertex u to v.

        Args:
            v (int): Attachment vertex
            u (int): Vertex of V_0(G)

        Returns:
            Graph: The graph with E(G) ∪ {e_vu}
        """
        self.check_vertex(v)
        self.check_vertex(u)
        if u == v:
            raise PreconditionError(f"Cannot attach vertex {u} to itself")
        if self.adjacency[u]:
            raise PreconditionError(f"Vertex {u} is not isolated (degree {len(self.adjacency[u])})")
        return self.add_edge(v, u)

    def ominus(self, v: int, h: "Graph") -> "Graph":
        """
        G ⊖ E(v, H): drop every edge from v to N_H(v); the vertex set is unchanged.

        Args:
            v (int): Vertex of V(G) ∩ V(H)
            h (Graph): Subgraph of G sharing vertex ids

        Returns:
            Graph: The rewritten graph
        """
        self.check_vertex(v)
        if not h.is_subgraph_of(self):
            raise PreconditionError("Second graph is not a subgraph of the first")
        if v >= h.n:
            raise PreconditionError(f"Vertex {v} is not a vertex of the subgraph")
        return self.remove_edges(Edge.of(v, w) for w in h.adjacency[v])

    def relabeled(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex old renamed perm[old]."""
        if sorted(perm) != list(range(self.n)):
            raise ArgumentError("Relabeling is not a permutation of the vertex ids")
        return Graph.from_edges(self.n, ((perm[e.u], perm[e.v]) for e in self.edges))

    def without_isolated(self) -> "Graph":
        graph, _ = self.induced_subgraph(self.non_isolated_vertices())
        return graph

    def check_invariants(self) -> None:
        """Degree sum equals twice the edge count (symmetry and loops are checked on build)."""
        if sum(self.degrees()) != 2 * self.edge_count:
            raise ArgumentError("Degree sum differs from twice the edge count")

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={[e.as_list() for e in self.edges]})"
