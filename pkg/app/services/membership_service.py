import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Set

from app.data.graph import Edge, Graph
from app.services.matching_service import find_path_from, maximum_mates
from app.utils.errors import ArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MembershipReport:
    """
    Outcome of checking G against F(d, m).

    maximal_ok is true iff no legal edge addition exists; blocking_edge is one
    such addition, with ids >= n standing for fresh vertices.
    """

    d: int
    m: int
    delta_ok: bool
    nu_ok: bool
    maximal_ok: bool
    nu_value: int
    delta_value: int
    blocking_edge: Optional[Edge] = None
    blocking_class: Optional[str] = None

    @property
    def is_member(self) -> bool:
        return self.delta_ok and self.nu_ok and self.maximal_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "m": self.m,
            "member": self.is_member,
            "delta": self.delta_value,
            "delta_ok": self.delta_ok,
            "nu": self.nu_value,
            "nu_ok": self.nu_ok,
            "maximal_ok": self.maximal_ok,
            "blocking_edge": self.blocking_edge.as_list() if self.blocking_edge else None,
            "blocking_class": self.blocking_class,
        }

    def describe(self) -> str:
        if self.is_member:
            return f"member of F({self.d},{self.m}): Δ={self.delta_value}, ν={self.nu_value}"
        reasons: List[str] = []
        if not self.delta_ok:
            reasons.append(f"Δ={self.delta_value} ≥ d={self.d}")
        if not self.nu_ok:
            reasons.append(f"ν={self.nu_value} ≥ m={self.m}")
        if not self.maximal_ok:
            reasons.append(f"not maximal: edge {self.blocking_edge} (class {self.blocking_class}) can be added")
        return f"not a member of F({self.d},{self.m}): " + "; ".join(reasons)


def matching_grows(adj: List[List[int]], mate: Sequence[int], a: int, b: int) -> bool:
    """
    Whether ν(G + ab) exceeds ν(G), given a maximum matching of G as mates.

    Vertex ids equal to len(adj) denote one fresh isolated vertex.
    """
    if a >= len(adj) or b >= len(adj):
        adj = adj + [[] for _ in range(max(a, b) + 1 - len(adj))]
        mate = list(mate) + [-1] * (len(adj) - len(mate))
    if mate[a] == -1 and mate[b] == -1:
        return True
    adj[a].append(b)
    adj[b].append(a)
    try:
        working = list(mate)
        for root in range(len(adj)):
            if working[root] == -1 and adj[root] and find_path_from(adj, working, root) is not None:
                return True
        return False
    finally:
        adj[a].pop()
        adj[b].pop()


class MembershipService:
    def is_member_F(self, graph: Graph, d: int, m: int) -> MembershipReport:
        """
        Check Δ < d, ν < m and maximality of the edge set.

        Maximality is tested against three kinds of additions: an absent edge
        inside V(G), an edge from a vertex of G to one fresh vertex, and an
        edge between two fresh vertices. Every candidate is decided by an
        exact matching computation on the enlarged graph.

        Args:
            graph (Graph): Graph to check
            d (int): Degree cap (Δ < d)
            m (int): Matching cap (ν < m)

        Returns:
            MembershipReport: Flags, values, and a blocking edge when not maximal
        """
        if d < 2 or m < 2:
            raise ArgumentError(f"F(d, m) needs d >= 2 and m >= 2, got d={d}, m={m}")

        adj = [sorted(r) for r in graph.adjacency]
        mate = maximum_mates(adj)
        nu_value = sum(1 for v, w in enumerate(mate) if w > v)
        delta_value = graph.max_degree()
        delta_ok = delta_value < d
        nu_ok = nu_value < m

        blocking: Optional[Edge] = None
        blocking_class: Optional[str] = None
        if delta_ok and nu_ok:
            blocking, blocking_class = self._find_legal_addition(graph, adj, mate, nu_value, d, m)

        report = MembershipReport(
            d=d,
            m=m,
            delta_ok=delta_ok,
            nu_ok=nu_ok,
            maximal_ok=blocking is None,
            nu_value=nu_value,
            delta_value=delta_value,
            blocking_edge=blocking,
            blocking_class=blocking_class,
        )
        logger.debug(f"Membership check: {report.describe()}")
        return report

    def _find_legal_addition(self, graph: Graph, adj, mate, nu_value: int, d: int, m: int):
        n = graph.n
        degrees = graph.degrees()
        open_vertices = [v for v in range(n) if degrees[v] <= d - 2]
        room = nu_value + 1 < m

        # A fresh endpoint behaves like any isolated vertex, so the pendant
        # test is computed once per vertex.
        pendant_ok: Dict[int, bool] = {}
        for v in open_vertices:
            pendant_ok[v] = room or not matching_grows(adj, mate, v, n)

        isolated: Set[int] = {v for v in range(n) if degrees[v] == 0}
        for i, a in enumerate(open_vertices):
            for b in open_vertices[i + 1 :]:
                if graph.has_edge(a, b):
                    continue
                if a in isolated and b in isolated:
                    legal = room
                elif b in isolated:
                    legal = pendant_ok[a]
                elif a in isolated:
                    legal = pendant_ok[b]
                else:
                    legal = room or not matching_grows(adj, mate, a, b)
                if legal:
                    return Edge(a, b), "a"
        for v in open_vertices:
            if pendant_ok[v]:
                return Edge(v, n), "b"
        if room:
            return Edge(n, n + 1), "c"
        return None, None
