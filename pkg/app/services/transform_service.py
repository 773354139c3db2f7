import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple

from app.data.graph import Edge, Graph, Matching
from app.services.bounds_service import BoundsService, PartitionProfile
from app.services.matching_service import MatchingService
from app.services.membership_service import MembershipService
from app.services.star_service import StarService
from app.utils.config import Settings
from app.utils.errors import ArgumentError, InternalInvariantError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepRecord:
    k: int
    chosen_v: int
    removed_edges: Tuple[Edge, ...]
    added_edges: Tuple[Edge, ...]
    nu: int
    edge_count: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "chosen_v": self.chosen_v,
            "removed_edges": [e.as_list() for e in self.removed_edges],
            "added_edges": [e.as_list() for e in self.added_edges],
            "nu": self.nu,
            "edge_count": self.edge_count,
        }


@dataclass(frozen=True)
class TransformState:
    """
    G_k with its maximum matching M_k and the reserved pendant pool.

    Claw components stay in the graph; strip_claws views them away.
    """

    k: int
    d: int
    m: int
    graph: Graph
    matching: Matching
    pool: Mapping[int, Tuple[int, ...]]
    consumed: FrozenSet[int] = frozenset()
    log: Tuple[StepRecord, ...] = ()


@dataclass(frozen=True)
class ReducedGraph:
    """G_k' = G_k minus its claw components, with M_k' and t_k."""

    graph: Graph
    matching: Matching
    id_map: Dict[int, int]
    claws: Tuple[FrozenSet[int], ...]

    @property
    def t(self) -> int:
        return len(self.claws)

    def original_id(self, v: int) -> int:
        return self._inverse[v]

    @property
    def _inverse(self) -> Dict[int, int]:
        return {new: old for old, new in self.id_map.items()}


@dataclass(frozen=True)
class FactorComponent:
    vertices: Tuple[int, ...]
    r: int
    edge_count: int


@dataclass(frozen=True)
class FinalDecomposition:
    t: int
    components: Tuple[FactorComponent, ...]
    claws: Tuple[Tuple[int, ...], ...] = ()

    @property
    def r_values(self) -> List[int]:
        return [c.r for c in self.components]

    def to_profile(self, d: int) -> PartitionProfile:
        j = d // 2
        return PartitionProfile(
            t=self.t,
            J_size=sum(1 for r in self.r_values if r == j),
            r_list=tuple(sorted((r for r in self.r_values if r != j), reverse=True)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "claws": [list(c) for c in self.claws],
            "components": [
                {"vertices": list(c.vertices), "r": c.r, "edges": c.edge_count} for c in self.components
            ],
        }


@dataclass(frozen=True)
class TransformResult:
    final: Graph
    matching: Matching
    decomposition: FinalDecomposition
    steps: Tuple[StepRecord, ...] = field(default_factory=tuple)

    @property
    def iterations(self) -> int:
        return len(self.steps)


def is_claw_component(graph: Graph, members: FrozenSet[int], d: int) -> bool:
    if len(members) != d:
        return False
    degrees = [graph.degree(v) for v in members]
    return sum(degrees) == 2 * (d - 1) and (d - 1) in degrees


class TransformService:
    """
    Rewrites a member of F(d, m) into claws plus factor-critical components.

    Each step picks the least non-star vertex v of G_k', gives it d-1 fresh
    pendants and drops its original edges. Vertex ids never change; pendants
    come from a pool of isolated vertices reserved up front.
    """

    def __init__(
        self,
        settings: Optional[Settings] = None,
        matching_service: Optional[MatchingService] = None,
        star_service: Optional[StarService] = None,
    ):
        self.settings = settings or Settings()
        self.matching_service = matching_service or MatchingService(self.settings)
        self.star_service = star_service or StarService(self.settings, self.matching_service)
        self.membership = MembershipService()

    def attach_isolated_pool(self, graph: Graph, matching: Matching, d: int, m: Optional[int] = None) -> TransformState:
        """
        Reserve d-1 isolated vertices for every matched vertex, adding fresh ones if short.

        Args:
            graph (Graph): G_0
            matching (Matching): A maximum matching of G_0
            d (int): Degree cap
            m (Optional[int]): Matching cap; defaults to ν + 1

        Returns:
            TransformState: State at k = 0
        """
        if d < 2:
            raise ArgumentError(f"Degree cap must be at least 2, got {d}")
        if not self.matching_service.is_maximum(graph, matching):
            raise PreconditionError("Matching is not a maximum matching of the graph")
        nu = len(matching)
        m = nu + 1 if m is None else m
        if nu != m - 1:
            raise PreconditionError(f"Matching has {nu} edges, expected m - 1 = {m - 1}")

        needed = 2 * nu * (d - 1)
        isolated = graph.isolated_vertices()
        if len(isolated) < needed:
            short = needed - len(isolated)
            isolated = isolated + list(range(graph.n, graph.n + short))
            graph = graph.add_vertices(short)
            logger.debug(f"Added {short} isolated vertices to the pendant pool")
        reserve = isolated[:needed]
        pool = {
            v: tuple(reserve[i * (d - 1) : (i + 1) * (d - 1)])
            for i, v in enumerate(sorted(matching.covered))
        }
        return TransformState(k=0, d=d, m=m, graph=graph, matching=matching, pool=pool)

    def strip_claws(self, state: TransformState) -> ReducedGraph:
        claws = tuple(c for c in state.graph.components() if is_claw_component(state.graph, c, state.d))
        in_claw = frozenset().union(*claws) if claws else frozenset()
        reduced, id_map = state.graph.induced_subgraph(v for v in range(state.graph.n) if v not in in_claw)
        reduced_matching = state.matching.relabeled(id_map)
        if len(reduced_matching) != (state.m - 1) - len(claws):
            raise InternalInvariantError(
                f"Reduced matching has {len(reduced_matching)} edges with {len(claws)} claws stripped"
            )
        if not self.matching_service.is_maximum(reduced, reduced_matching):
            raise InternalInvariantError("Reduced matching is not maximum")
        return ReducedGraph(reduced, reduced_matching, id_map, claws)

    def pending_vertices(self, state: TransformState) -> List[int]:
        """Original ids of the non-star vertices of G_k', ascending."""
        reduced = self.strip_claws(state)
        stars = self.star_service.star_set(reduced.graph, reduced.matching)
        return sorted(reduced.original_id(v) for v in stars.non_star_vertices())

    def transform_step(self, state: TransformState) -> TransformState:
        """
        One rewrite at the least non-star vertex of G_k'.

        Args:
            state (TransformState): State G_k, M_k

        Returns:
            TransformState: State k+1 with ν unchanged and |E| grown by d-1 - degree(v)
        """
        pending = self.pending_vertices(state)
        if not pending:
            raise PreconditionError("Every vertex of the reduced graph is a star vertex")
        before = len(pending)
        v = pending[0]
        graph = state.graph
        degree = graph.degree(v)
        # only G_0 is maximal; later steps may pick a vertex that lost edges to an earlier one
        if state.k == 0 and degree != state.d - 1:
            raise InternalInvariantError(
                f"Non-star vertex {v} has degree {degree}, expected {state.d - 1}; input was not maximal"
            )
        if v in state.consumed or v not in state.pool:
            raise InternalInvariantError(f"No unused pendant block reserved for vertex {v}")

        pendants = state.pool[v]
        grown = graph
        for w in pendants:
            grown = grown.oplus(v, w)
        rewritten = grown.ominus(v, graph)
        removed = tuple(Edge.of(v, w) for w in sorted(graph.neighbors(v)))
        added = tuple(Edge.of(v, w) for w in pendants)

        mate = state.matching.mate(v)
        matching = Matching(
            (state.matching.edges - {Edge.of(v, mate)}) | {Edge.of(v, pendants[0])}
        )

        nu = len(matching)
        if rewritten.edge_count != graph.edge_count + (state.d - 1) - degree:
            grown_by = rewritten.edge_count - graph.edge_count
            raise InternalInvariantError(f"Step {state.k} grew |E| by {grown_by}, expected {state.d - 1 - degree}")
        if rewritten.max_degree() >= state.d:
            raise InternalInvariantError(f"Step {state.k} broke the degree cap")
        if nu != state.m - 1 or not self.matching_service.is_maximum(rewritten, matching):
            raise InternalInvariantError(f"Step {state.k} did not keep a maximum matching of size {state.m - 1}")

        record = StepRecord(state.k, v, removed, added, nu, rewritten.edge_count)
        following = TransformState(
            k=state.k + 1,
            d=state.d,
            m=state.m,
            graph=rewritten,
            matching=matching,
            pool=state.pool,
            consumed=state.consumed | {v},
            log=state.log + (record,),
        )
        after_nu = len(self.strip_claws(following).matching)
        before_nu = len(self.strip_claws(state).matching)
        # one step can free more than one claw, so the drop may exceed one
        if after_nu >= before_nu:
            raise InternalInvariantError(f"Step {state.k} did not shrink the reduced matching ({before_nu} -> {after_nu})")
        logger.debug(f"Step {state.k}: vertex {v} rewritten, {before} pending before, ν(G') {before_nu} -> {after_nu}")
        return following

    def transform(self, graph: Graph, d: int, m: int) -> TransformResult:
        """
        Run the rewrite to its fixpoint and decompose the result.

        Args:
            graph (Graph): A member of F(d, m)
            d (int): Degree cap
            m (int): Matching cap

        Returns:
            TransformResult: Final graph, matching, decomposition and step log
        """
        report = self.membership.is_member_F(graph, d, m)
        if not report.is_member:
            raise PreconditionError(report.describe(), details=report)

        matching = self.matching_service.maximum_matching(graph)
        state = self.attach_isolated_pool(graph, matching, d, m)
        while self.pending_vertices(state):
            if state.k >= m - 1:
                raise InternalInvariantError(f"Rewrite did not terminate within {m - 1} steps")
            state = self.transform_step(state)

        decomposition = self.decompose_final(state.graph, state.matching, d)
        total = decomposition.t + sum(decomposition.r_values)
        if total != m - 1:
            raise InternalInvariantError(f"Decomposition accounts for ν = {total}, expected {m - 1}")
        if state.graph.edge_count < graph.edge_count:
            raise InternalInvariantError("Rewrite lost edges")
        logger.info(
            f"Transform finished after {state.k} steps: t={decomposition.t}, r={decomposition.r_values}"
        )
        return TransformResult(state.graph, state.matching, decomposition, state.log)

    def decompose_final(self, graph: Graph, matching: Matching, d: int) -> FinalDecomposition:
        """
        Classify every non-trivial component as a claw or a factor-critical block.

        Args:
            graph (Graph): Fixpoint graph of the rewrite
            matching (Matching): Its maximum matching
            d (int): Degree cap

        Returns:
            FinalDecomposition: Claw count t and the blocks with their r
        """
        claws: List[Tuple[int, ...]] = []
        blocks: List[FactorComponent] = []
        for members in graph.components():
            if len(members) == 1:
                continue
            if is_claw_component(graph, members, d):
                claws.append(tuple(sorted(members)))
                continue
            sub, id_map = graph.induced_subgraph(members)
            if not self.star_service.is_factor_critical(sub):
                raise InternalInvariantError(f"Component {sorted(members)} is neither a claw nor factor-critical")
            r = len(matching.relabeled(id_map))
            if r != self.matching_service.nu(sub):
                raise InternalInvariantError(f"Matching is not maximum on component {sorted(members)}")
            if sub.n != 2 * r + 1:
                raise InternalInvariantError(f"Factor-critical component {sorted(members)} has ν = {r}")
            if sub.edge_count > BoundsService.component_edge_bound(r, d):
                raise InternalInvariantError(f"Component {sorted(members)} exceeds the edge bound for r = {r}")
            blocks.append(FactorComponent(tuple(sorted(members)), r, sub.edge_count))
        return FinalDecomposition(t=len(claws), components=tuple(blocks), claws=tuple(claws))
