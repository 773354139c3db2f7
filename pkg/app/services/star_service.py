from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, List, Optional, Set

from app.data.graph import Edge, Graph, Matching
from app.services.matching_service import AlternatingPath, AugmentingPath, MatchingService
from app.utils.config import Settings
from app.utils.errors import ArgumentError, InternalInvariantError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StarPath(AlternatingPath):
    """Even alternating path that leaves an unsaturated vertex by a non-matching edge."""

    def problems(self, graph: Graph, matching: Matching) -> List[str]:
        found = super().problems(graph, matching)
        if len(self) % 2 != 0:
            found.append("star path must have an even number of edges")
        if matching.is_saturated(self.start):
            found.append("star path must start at an unsaturated vertex")
        if self.in_matching and self.in_matching[0]:
            found.append("star path must start with a non-matching edge")
        return found


@dataclass(frozen=True)
class StarSet:
    graph: Graph
    matching: Matching
    vertices: FrozenSet[int]

    def __contains__(self, v: int) -> bool:
        return v in self.vertices

    def __len__(self) -> int:
        return len(self.vertices)

    def non_star_vertices(self) -> List[int]:
        return [v for v in range(self.graph.n) if v not in self.vertices]


@dataclass(frozen=True)
class MergeOutcome:
    """Either a star path from x1 to y_m or an augmenting path from x1 to y1."""

    kind: str
    path: AlternatingPath

    STAR = "star"
    AUGMENTING = "augmenting"

    @property
    def is_star(self) -> bool:
        return self.kind == self.STAR

    @property
    def is_augmenting(self) -> bool:
        return self.kind == self.AUGMENTING


class StarService:
    def __init__(self, settings: Optional[Settings] = None, matching_service: Optional[MatchingService] = None):
        self.settings = settings or Settings()
        self.matching_service = matching_service or MatchingService(self.settings)

    def _require_matching(self, graph: Graph, matching: Matching) -> None:
        if not self.matching_service.is_matching(graph, matching):
            raise PreconditionError("Edge set is not a matching of the graph")

    def iter_star_paths(
        self, graph: Graph, matching: Matching, sources: Optional[Iterable[int]] = None
    ) -> Iterator[StarPath]:
        """
        Enumerate every star path by depth-first search over simple alternating paths.

        After the non-matching step into a saturated vertex the matching step
        is forced, so only the non-matching choices branch.

        Args:
            graph (Graph): Host graph
            matching (Matching): A matching of the graph
            sources (Optional[Iterable[int]]): Restrict to these unsaturated start vertices

        Yields:
            StarPath: Paths in order of start vertex, then ascending neighbor choices
        """
        self._require_matching(graph, matching)
        starts = range(graph.n) if sources is None else sorted(set(sources))
        for root in starts:
            if matching.is_saturated(root):
                continue
            vertices = [root]
            on_path: Set[int] = {root}
            yield from self._extend(graph, matching, vertices, on_path)

    def _extend(self, graph: Graph, matching: Matching, vertices: List[int], on_path: Set[int]) -> Iterator[StarPath]:
        yield StarPath(tuple(vertices), tuple(i % 2 == 1 for i in range(len(vertices) - 1)))
        end = vertices[-1]
        for y in sorted(graph.adjacency[end]):
            if y in on_path:
                continue
            z = matching.mate(y)
            # unsaturated y would close an augmenting path, not a star path
            if z is None or z in on_path:
                continue
            vertices.extend((y, z))
            on_path.update((y, z))
            yield from self._extend(graph, matching, vertices, on_path)
            on_path.difference_update((y, z))
            del vertices[-2:]

    def star_set(self, graph: Graph, matching: Matching) -> StarSet:
        """Star(G, M): every vertex at which some star path terminates."""
        ends = {path.end for path in self.iter_star_paths(graph, matching)}
        return StarSet(graph, matching, frozenset(ends))

    def star_reach(self, graph: Graph, matching: Matching, source: int) -> FrozenSet[int]:
        """Vertices reached by star paths leaving the unsaturated vertex source."""
        graph.check_vertex(source)
        if matching.is_saturated(source):
            raise PreconditionError(f"Vertex {source} is saturated; star paths start at unsaturated vertices")
        return frozenset(path.end for path in self.iter_star_paths(graph, matching, sources=[source]))

    def find_star_path(self, graph: Graph, matching: Matching, target: int) -> Optional[StarPath]:
        if not isinstance(target, int) or not 0 <= target < graph.n:
            raise ArgumentError(f"Vertex id {target} out of range 0..{graph.n - 1}")
        for path in self.iter_star_paths(graph, matching):
            if path.end == target:
                return path
        return None

    def merge_star_paths(self, graph: Graph, matching: Matching, p1: StarPath, p2: StarPath) -> MergeOutcome:
        """
        Combine two intersecting star paths into a star path or an augmenting path.

        Let x_i be the first vertex of p1 lying on p2, with x_i = y_j. If
        i is the start, x1 = y1 and p2 itself is returned. Otherwise, when the
        matching edge at y_j points back along p2 the walk x1..x_i, y_{j-1}..y1
        is augmenting; when it points forward, x1..x_i, y_{j+1}..y_m is a star
        path.

        Args:
            graph (Graph): Host graph
            matching (Matching): Matching both paths alternate against
            p1 (StarPath): Path x1..xn
            p2 (StarPath): Path y1..ym sharing a vertex with p1

        Returns:
            MergeOutcome: The tagged result, validated before return
        """
        for label, path in (("first", p1), ("second", p2)):
            problems = StarPath(path.vertices, path.in_matching).problems(graph, matching)
            if problems:
                raise PreconditionError(f"The {label} path is not a star path: {problems}")
        xs, ys = p1.vertices, p2.vertices
        position = {v: k for k, v in enumerate(ys)}
        i = next((k for k, v in enumerate(xs) if v in position), None)
        if i is None:
            raise PreconditionError("Star paths are vertex-disjoint")

        if i == 0:
            # x1 is the only unsaturated vertex of p1 and y1 the only one of p2
            if xs[0] != ys[0]:
                raise InternalInvariantError(f"Unsaturated vertex {xs[0]} lies inside the second star path")
            outcome = MergeOutcome(MergeOutcome.STAR, StarPath(p2.vertices, p2.in_matching))
        else:
            j = position[xs[i]]
            if Edge.of(ys[j - 1], ys[j]) in matching:
                vertices = xs[: i + 1] + ys[j - 1 :: -1]
                outcome = MergeOutcome(MergeOutcome.AUGMENTING, AugmentingPath.along(matching, vertices))
            else:
                vertices = xs[: i + 1] + ys[j + 1 :]
                outcome = MergeOutcome(MergeOutcome.STAR, StarPath.along(matching, vertices))

        problems = outcome.path.problems(graph, matching)
        if problems:
            raise InternalInvariantError(f"Merged {outcome.kind} path is invalid: {problems}")
        logger.debug(f"Merged star paths at index {i}: {outcome.kind} path {outcome.path.vertices}")
        return outcome

    def all_star_component_witness(self, graph: Graph, matching: Matching, component: Iterable[int]) -> int:
        """
        The unique unsaturated vertex of a component made entirely of star vertices.

        Args:
            graph (Graph): Host graph
            matching (Matching): A maximum matching of the graph
            component (Iterable[int]): Vertex set of a connected component

        Returns:
            int: The single unsaturated vertex of the component
        """
        members = frozenset(component)
        if members not in graph.components().sets:
            raise PreconditionError("Vertex set is not a connected component of the graph")
        if not self.matching_service.is_maximum(graph, matching):
            raise PreconditionError("Matching is not maximum")
        stars = self.star_set(graph, matching)
        outside = sorted(members - stars.vertices)
        if outside:
            raise PreconditionError(f"Component has non-star vertices {outside}")
        unsaturated = sorted(v for v in members if not matching.is_saturated(v))
        if len(unsaturated) != 1:
            raise InternalInvariantError(
                f"All-star component has {len(unsaturated)} unsaturated vertices: {unsaturated}"
            )
        return unsaturated[0]

    def avoidable_vertices(self, graph: Graph) -> FrozenSet[int]:
        """{v : ν(G\\v) = ν(G)}."""
        nu = self.matching_service.nu(graph)
        return frozenset(
            v for v in range(graph.n) if self.matching_service.nu(graph.delete_vertex(v)[0]) == nu
        )

    def is_factor_critical(self, graph: Graph) -> bool:
        if not graph.is_connected():
            return False
        return len(self.avoidable_vertices(graph)) == graph.n

    def is_factor_critical_via_star(self, graph: Graph) -> bool:
        if not graph.is_connected():
            return False
        matching = self.matching_service.maximum_matching(graph)
        return len(self.star_set(graph, matching)) == graph.n

    def gallai_check(self, graph: Graph) -> bool:
        """A factor-critical graph has 2ν + 1 vertices."""
        if not self.is_factor_critical(graph):
            raise PreconditionError("Graph is not factor-critical")
        nu = self.matching_service.nu(graph)
        if graph.n != 2 * nu + 1:
            raise InternalInvariantError(f"Factor-critical graph on {graph.n} vertices has ν = {nu}")
        return True
