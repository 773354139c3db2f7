import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import pandas as pd

from app.data.graph import Edge, Graph
from app.services.enumeration import canonical_form, collect_graphs_with_edges
from app.services.matching_service import MatchingService
from app.services.membership_service import MembershipService
from app.services.star_service import StarService
from app.utils.config import Settings
from app.utils.errors import (
    ArgumentError,
    InternalInvariantError,
    PreconditionError,
    SizeLimitError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundParams:
    d: int
    m: int

    def __post_init__(self):
        if not isinstance(self.d, int) or not isinstance(self.m, int) or self.d < 2 or self.m < 2:
            raise ArgumentError(f"Parameters need d >= 2 and m >= 2, got d={self.d}, m={self.m}")

    @property
    def j(self) -> int:
        """⌈(d-1)/2⌉, the matching number of the dense block C(d)."""
        return self.d // 2

    @property
    def is_odd(self) -> bool:
        return self.d % 2 == 1


@dataclass(frozen=True)
class PartitionProfile:
    """t claws, J_size blocks with r = j, and the remaining factor-critical sizes."""

    t: int
    J_size: int
    r_list: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.t < 0 or self.J_size < 0 or any(r < 0 for r in self.r_list):
            raise ArgumentError(f"Profile entries must be nonnegative: {self}")

    def total(self, j: int) -> int:
        return self.t + j * self.J_size + sum(self.r_list)

    def to_dict(self) -> dict:
        return {"t": self.t, "J": self.J_size, "r": list(self.r_list)}


@dataclass(frozen=True)
class BoundResult:
    params: BoundParams
    value: int
    profile: PartitionProfile
    trivial: int

    @property
    def trivial_gap(self) -> int:
        return self.trivial - self.value

    def to_dict(self) -> dict:
        return {
            "d": self.params.d,
            "m": self.params.m,
            "e": self.value,
            "profile": self.profile.to_dict(),
            "trivial": self.trivial,
        }


def _partitions(total: int, largest: int) -> Iterator[Tuple[int, ...]]:
    if total == 0:
        yield ()
        return
    for first in range(min(total, largest), 0, -1):
        for rest in _partitions(total - first, first):
            yield (first,) + rest


class BoundsService:
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

    # closed forms

    def trivial_bound(self, params: BoundParams) -> int:
        """Edge bound from covering every edge by the 2ν matched vertices."""
        return 2 * (params.m - 1) * (params.d - 1) - (params.m - 1)

    @staticmethod
    def component_edge_bound(r: int, d: int) -> int:
        """Most edges of a factor-critical component with ν = r and Δ < d."""
        if r < 0:
            raise ArgumentError(f"Component size r must be nonnegative, got {r}")
        return min((2 * r + 1) * r, (2 * r + 1) * (d - 1) // 2)

    def case_formula(self, params: BoundParams) -> int:
        """The two-case closed form, odd d = 2j+1 and even d = 2j."""
        j, k = params.j, params.m - 1
        if params.is_odd:
            return 2 * j * k + j * (k // j)
        return (2 * j - 1) * k + (j - 1) * (k // j)

    def e_bound(self, params: BoundParams) -> BoundResult:
        """
        e(d, m) with the profile attaining it.

        Args:
            params (BoundParams): Degree and matching caps

        Returns:
            BoundResult: Value, optimal profile and the trivial bound
        """
        j, k = params.j, params.m - 1
        value = (params.d - 1) * k + (k // j) * ((params.d - 1) // 2)
        if value != self.case_formula(params):
            raise InternalInvariantError(f"Unified and case formulas disagree for {params}")
        profile = PartitionProfile(t=k - j * (k // j), J_size=k // j)
        if self.profile_value(profile, params.d) != value:
            raise InternalInvariantError(f"Optimal profile does not attain e for {params}")
        return BoundResult(params, value, profile, self.trivial_bound(params))

    @staticmethod
    def e_ss(s: int) -> int:
        """e(s, s)."""
        if s < 2:
            raise ArgumentError(f"e(s, s) needs s >= 2, got {s}")
        if s % 2 == 1:
            return s * (s - 1)
        return (2 * s - 1) * (s - 1) // 2

    def is_extremal_unique(self, params: BoundParams) -> bool:
        if params.d == 2:
            return True
        if params.m == 2 and params.d != 4:
            return True
        return (params.m - 1) % params.j == 0

    def alternate_extremal(self, params: BoundParams) -> Optional[Graph]:
        """
        A second extremal graph, not isomorphic to construct_extremal, when one exists.

        Args:
            params (BoundParams): Degree and matching caps

        Returns:
            Optional[Graph]: The alternate without isolated vertices, or None when the extremal graph is unique
        """
        if self.is_extremal_unique(params):
            return None
        d = params.d
        profile = self.e_bound(params).profile
        if params.m == 2:
            # d = 4: the triangle ties with K_{1,3}
            alternate = Graph.complete(3)
        else:
            graph = self.construct_extremal(params)
            if profile.J_size >= 1:
                block_start = d * profile.t
                alternate = self.coalesce_claw_with_component(
                    graph, range(d), range(block_start, block_start + 2 * params.j + 1), d
                )
            else:
                alternate = self.coalesce_claws(graph, range(d), range(d, 2 * d), d)
        report = self.membership.is_member_F(alternate, d, params.m)
        if alternate.edge_count != self.e_bound(params).value or not report.is_member:
            raise InternalInvariantError(f"Alternate extremal graph for {params} is not extremal", details=report)
        return alternate.without_isolated()

    # profiles

    def profile_value(self, profile: PartitionProfile, d: int) -> int:
        j = d // 2
        return (
            (d - 1) * profile.t
            + profile.J_size * self.component_edge_bound(j, d)
            + sum(self.component_edge_bound(r, d) for r in profile.r_list)
        )

    def optimize_profiles(self, params: BoundParams) -> Tuple[int, List[PartitionProfile]]:
        """
        Brute-force the profile maximization over every t and partition of m-1-t.

        Returns:
            Tuple[int, List[PartitionProfile]]: The maximum and every profile attaining it
        """
        j, k = params.j, params.m - 1
        best = -1
        winners: List[PartitionProfile] = []
        for t in range(k + 1):
            for parts in _partitions(k - t, k - t):
                profile = PartitionProfile(
                    t=t,
                    J_size=sum(1 for r in parts if r == j),
                    r_list=tuple(r for r in parts if r != j),
                )
                value = self.profile_value(profile, params.d)
                if value > best:
                    best, winners = value, [profile]
                elif value == best:
                    winners.append(profile)
        logger.debug(f"Profile optimum for {params}: {best} over {len(winners)} profiles")
        return best, winners

    def reduction_rewrite(self, profile: PartitionProfile, d: int, m: Optional[int] = None) -> PartitionProfile:
        """
        Fold every r into {0, j} by moving units into t without lowering the value.

        r > j: each unit above j moves to t at equal value.
        0 < r < j: the whole of r moves to t, which does not lose value.
        """
        j = d // 2
        if m is not None and profile.total(j) != m - 1:
            raise PreconditionError(f"Profile {profile} does not sum to m - 1 = {m - 1}")
        t = profile.t
        rewritten: List[int] = []
        for r in profile.r_list:
            if r > j:
                t += r - j
                r = j
            elif 0 < r < j:
                t += r
                r = 0
            rewritten.append(r)
        result = PartitionProfile(t=t, J_size=profile.J_size, r_list=tuple(rewritten))
        if self.profile_value(result, d) < self.profile_value(profile, d):
            raise InternalInvariantError(f"Rewrite of {profile} lost value")
        if result.total(j) != profile.total(j):
            raise InternalInvariantError(f"Rewrite of {profile} changed the matching total")
        return result

    # constructions

    def construct_claw(self, d: int) -> Graph:
        if d < 2:
            raise ArgumentError(f"Claw needs d >= 2, got {d}")
        return Graph.star(d - 1)

    def construct_C(self, d: int) -> Graph:
        """
        The dense factor-critical block: K_{2j+1} for odd d; for even d,
        K_{2j} minus a perfect matching plus an apex on all but one vertex.
        """
        if d < 3:
            raise ArgumentError(f"C(d) needs d >= 3, got {d}")
        j = d // 2
        if d % 2 == 1:
            block = Graph.complete(2 * j + 1)
        else:
            pairs = [
                (a, b)
                for a in range(2 * j)
                for b in range(a + 1, 2 * j)
                if not (a % 2 == 0 and b == a + 1)
            ]
            pairs.extend((a, 2 * j) for a in range(2 * j - 1))
            block = Graph.from_edges(2 * j + 1, pairs)
        self._check_block(block, d, j)
        return block

    def _check_block(self, block: Graph, d: int, r: int) -> None:
        if block.n != 2 * r + 1:
            raise InternalInvariantError(f"Block for d={d} has {block.n} vertices, expected {2 * r + 1}")
        if block.edge_count != self.component_edge_bound(r, d):
            raise InternalInvariantError(f"Block for d={d} has {block.edge_count} edges")
        if block.max_degree() > d - 1:
            raise InternalInvariantError(f"Block for d={d} has Δ = {block.max_degree()}")
        if d % 2 == 0 and block.degrees().count(d - 2) != 1:
            raise InternalInvariantError(f"Block for even d={d} needs exactly one vertex of degree {d - 2}")
        if not self.star_service.is_factor_critical(block):
            raise InternalInvariantError(f"Block for d={d} is not factor-critical")
        if self.matching_service.nu(block) != r:
            raise InternalInvariantError(f"Block for d={d} has the wrong matching number")

    def construct_extremal(self, params: BoundParams) -> Graph:
        """
        A member of F(d, m) with e(d, m) edges: t claws followed by J copies of C(d).

        Args:
            params (BoundParams): Degree and matching caps

        Returns:
            Graph: The extremal graph, checked for Δ, ν, edge count and membership
        """
        result = self.e_bound(params)
        if params.d == 2:
            graph = Graph.disjoint_union([Graph.complete(2)] * (params.m - 1))
        else:
            parts = [self.construct_claw(params.d)] * result.profile.t
            parts += [self.construct_C(params.d)] * result.profile.J_size
            graph = Graph.disjoint_union(parts)

        if graph.edge_count != result.value:
            raise InternalInvariantError(f"Extremal graph has {graph.edge_count} edges, expected {result.value}")
        if graph.max_degree() >= params.d or self.matching_service.nu(graph) != params.m - 1:
            raise InternalInvariantError(f"Extremal graph breaks Δ or ν for {params}")
        report = self.membership.is_member_F(graph, params.d, params.m)
        if not report.is_member:
            raise InternalInvariantError(report.describe(), details=report)
        logger.info(f"Constructed extremal graph for d={params.d}, m={params.m}: {graph.edge_count} edges")
        return graph

    def _claw_center(self, graph: Graph, component: Iterable[int], d: int) -> int:
        members = frozenset(component)
        if members not in graph.components().sets:
            raise PreconditionError(f"Vertex set {sorted(members)} is not a component")
        edges = sum(graph.degree(v) for v in members) // 2
        centers = [v for v in sorted(members) if graph.degree(v) == d - 1]
        if len(members) != d or edges != d - 1 or not centers:
            raise PreconditionError(f"Component {sorted(members)} is not a claw K_1,{d - 1}")
        return centers[0]

    def _preserves(self, before: Graph, after: Graph, d: int) -> None:
        nu = self.matching_service.nu(before)
        if after.edge_count != before.edge_count:
            raise InternalInvariantError("Rewrite changed the edge count")
        if after.max_degree() >= d:
            raise InternalInvariantError("Rewrite broke the degree cap")
        if self.matching_service.nu(after) != nu:
            raise InternalInvariantError("Rewrite changed the matching number")
        if self.membership.is_member_F(before, d, nu + 1).is_member:
            report = self.membership.is_member_F(after, d, nu + 1)
            if not report.is_member:
                raise InternalInvariantError(report.describe(), details=report)

    def coalesce_claws(self, graph: Graph, c1: Iterable[int], c2: Iterable[int], d: int) -> Graph:
        """
        Join two claws into one tree and detach a leaf.

        One leaf edge of the first claw is dropped and its center is joined to
        the least leaf of the second claw; the dropped leaf becomes isolated.

        Args:
            graph (Graph): Graph containing both claws as components
            c1 (Iterable[int]): Vertices of the first claw
            c2 (Iterable[int]): Vertices of the second claw
            d (int): Degree cap, at least 3

        Returns:
            Graph: Same edge count and ν; a member whenever the input was
        """
        if d == 2:
            raise PreconditionError("Claws cannot be coalesced when d = 2")
        first, second = frozenset(c1), frozenset(c2)
        a = self._claw_center(graph, first, d)
        b = self._claw_center(graph, second, d)
        if first == second:
            raise PreconditionError("The two claws must be different components")
        detached = max(graph.neighbors(a))
        leaf = min(graph.neighbors(b))
        result = graph.remove_edges([Edge.of(a, detached)]).add_edge(a, leaf)
        self._preserves(graph, result, d)
        logger.debug(f"Coalesced claws at centers {a} and {b}; vertex {detached} detached")
        return result

    def construct_merged_component(self, d: int, direct: bool = True) -> Graph:
        """
        Factor-critical graph on 2j+3 vertices, Δ < d, with as many edges as a claw plus C(d).

        Odd d uses the circulant C_{2j+3}(1..j). Even d uses C_{2j+3}(1..j-1)
        plus alternate edges of the Hamilton cycle of step j+1. With
        direct=False, or if the circulant fails its checks, an exhaustive
        search on at most merge_search_n_cap vertices is used.
        """
        if d < 3:
            raise ArgumentError(f"Merged component needs d >= 3, got {d}")
        j = d // 2
        n = 2 * j + 3
        target = (d - 1) + self.component_edge_bound(j, d)
        if direct:
            candidate = self._merged_circulant(d)
            if self._is_merged_component(candidate, d, target):
                self._check_merged(candidate, d)
                logger.info(f"Merged component for d={d}: circulant on {n} vertices")
                return candidate
            logger.warning(f"Circulant candidate failed for d={d}, falling back to search")
        cap = self.settings.merge_search_n_cap
        if n > cap:
            raise InternalInvariantError(f"Construction search for d={d} needs {n} vertices, cap is {cap}")
        found = self._search_merged(d, n, target)
        if found is None:
            raise InternalInvariantError(f"Construction search for d={d} found no merged component")
        self._check_merged(found, d)
        logger.info(f"Merged component for d={d}: found by search on {n} vertices")
        return found

    def _merged_circulant(self, d: int) -> Graph:
        j = d // 2
        n = 2 * j + 3
        if d % 2 == 1:
            return Graph.circulant(n, range(1, j + 1))
        base = Graph.circulant(n, range(1, j)) if j > 1 else Graph.empty(n)
        cycle = [(k * (j + 1)) % n for k in range(n)]
        extra = [Edge.of(cycle[2 * i], cycle[2 * i + 1]) for i in range(j + 1)]
        return Graph.from_edges(n, [(e.u, e.v) for e in base.edges] + [(e.u, e.v) for e in extra])

    def _is_merged_component(self, graph: Graph, d: int, target: int) -> bool:
        return (
            graph.edge_count == target
            and graph.max_degree() <= d - 1
            and self.star_service.is_factor_critical(graph)
        )

    def _check_merged(self, graph: Graph, d: int) -> None:
        j = d // 2
        if graph.n != 2 * j + 3:
            raise InternalInvariantError(f"Merged component for d={d} has {graph.n} vertices, expected {2 * j + 3}")
        nu = self.matching_service.nu(graph)
        if nu != j + 1:
            raise InternalInvariantError(f"Merged component for d={d} has ν = {nu}, expected {j + 1}")

    def _search_merged(self, d: int, n: int, target: int) -> Optional[Graph]:
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        degree = [0] * n
        chosen: List[Tuple[int, int]] = []

        def branch(index: int) -> Optional[Graph]:
            if len(chosen) == target:
                graph = Graph.from_edges(n, chosen)
                return graph if self._is_merged_component(graph, d, target) else None
            if len(chosen) + len(pairs) - index < target:
                return None
            if len(chosen) + sum(d - 1 - k for k in degree) // 2 < target:
                return None
            a, b = pairs[index]
            if degree[a] < d - 1 and degree[b] < d - 1:
                chosen.append((a, b))
                degree[a] += 1
                degree[b] += 1
                found = branch(index + 1)
                chosen.pop()
                degree[a] -= 1
                degree[b] -= 1
                if found is not None:
                    return found
            return branch(index + 1)

        return branch(0)

    def coalesce_claw_with_component(
        self, graph: Graph, claw: Iterable[int], component: Iterable[int], d: int
    ) -> Graph:
        """
        Replace a claw and a copy of C(d) by one merged component on 2j+3 of their
        d + 2j + 1 vertices; the other d-2 become isolated.

        Args:
            graph (Graph): Graph containing both as components
            claw (Iterable[int]): Vertices of the claw
            component (Iterable[int]): Vertices of a factor-critical component with r = j
            d (int): Degree cap, at least 3

        Returns:
            Graph: Same edge count and ν
        """
        if d < 3:
            raise PreconditionError(f"Claw and block coalescing needs d >= 3, got {d}")
        j = d // 2
        claw_set, block_set = frozenset(claw), frozenset(component)
        self._claw_center(graph, claw_set, d)
        if block_set not in graph.components().sets:
            raise PreconditionError(f"Vertex set {sorted(block_set)} is not a component")
        block, _ = graph.induced_subgraph(block_set)
        if block.n != 2 * j + 1 or block.edge_count != self.component_edge_bound(j, d):
            raise PreconditionError(f"Component {sorted(block_set)} is not a dense block for d={d}")
        if not self.star_service.is_factor_critical(block):
            raise PreconditionError(f"Component {sorted(block_set)} is not factor-critical")

        merged = self.construct_merged_component(d)
        slots = sorted(claw_set | block_set)
        stale = [Edge.of(v, w) for v in slots for w in graph.neighbors(v) if v < w]
        result = graph.remove_edges(stale)
        for e in merged.edges:
            result = result.add_edge(slots[e.u], slots[e.v])
        self._preserves(graph, result, d)
        logger.debug(f"Merged claw {sorted(claw_set)} with block {sorted(block_set)}")
        return result

    def count_extremal_variants(self, params: BoundParams, n_cap: Optional[int] = None, jobs: int = 1) -> int:
        """
        Number of non-isomorphic extremal graphs (isolated vertices dropped) on at most n_cap vertices.

        Args:
            params (BoundParams): Degree and matching caps
            n_cap (Optional[int]): Vertex cap, at most exhaustive_n_max_cap
            jobs (int): Worker processes for the search

        Returns:
            int: Count of isomorphism classes
        """
        cap = self.settings.exhaustive_n_max_cap
        n_cap = cap if n_cap is None else n_cap
        if n_cap > cap:
            raise SizeLimitError(f"Variant counting capped at {cap} vertices, got {n_cap}")
        value = self.e_bound(params).value
        graphs = collect_graphs_with_edges(n_cap, params.d, params.m, value, jobs=jobs)
        for graph in graphs:
            if graph.max_degree() >= params.d or self.matching_service.nu(graph) >= params.m:
                raise InternalInvariantError(f"Search leaf {graph!r} breaks the caps of {params}")
        classes = {canonical_form(g.without_isolated(), self.settings.canonical_n_cap) for g in graphs}
        logger.info(f"Extremal variants for {params} on <= {n_cap} vertices: {len(classes)}")
        return len(classes)

    def bound_table(self, d_values: Sequence[int], m_values: Sequence[int]) -> pd.DataFrame:
        """
        Bound values over a parameter grid.

        Returns:
            pd.DataFrame: One row per (d, m) with e, trivial bound, profile and uniqueness
        """
        rows = []
        for d in d_values:
            for m in m_values:
                params = BoundParams(d, m)
                result = self.e_bound(params)
                rows.append(
                    {
                        "d": d,
                        "m": m,
                        "e": result.value,
                        "trivial": result.trivial,
                        "trivial_gap": result.trivial_gap,
                        "t": result.profile.t,
                        "J": result.profile.J_size,
                        "unique": self.is_extremal_unique(params),
                        "e_ss": self.e_ss(d) if d == m else None,
                    }
                )
        df = pd.DataFrame(rows, columns=["d", "m", "e", "trivial", "trivial_gap", "t", "J", "unique", "e_ss"])
        logger.info(f"Built bound table with {len(df)} rows")
        return df
