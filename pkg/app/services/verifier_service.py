import logging
import random
import time
from dataclasses import dataclass
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from tenacity import retry, retry_if_exception_type, stop_after_attempt

from app.data.graph import Graph
from app.services import enumeration
from app.services.bounds_service import BoundParams, BoundsService
from app.services.matching_service import MatchingService, find_path_from, flip_path, mates_to_matching
from app.services.membership_service import MembershipReport, MembershipService, matching_grows
from app.services.star_service import StarService
from app.utils.config import Settings
from app.utils.errors import ArgumentError, InternalInvariantError, SizeLimitError

logger = logging.getLogger(__name__)

EXACT = "exact"
SAMPLED = "sampled"


class RejectedSample(Exception):
    """A random greedy run ended outside F(d, m)."""


@dataclass(frozen=True)
class VerifyReport:
    d: int
    m: int
    formula_value: int
    search_value: Optional[int]
    n_max_searched: int
    witness: Optional[Graph]
    variant_count: Optional[int]
    regime: str
    seeds: Tuple[int, ...] = ()
    lower_bound_ok: bool = True
    violation: Optional[str] = None
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.violation is None

    def to_dict(self) -> Dict[str, Any]:
        """JSON payload; elapsed time is left out so reruns compare byte for byte."""
        return {
            "d": self.d,
            "m": self.m,
            "formula": self.formula_value,
            "search": self.search_value,
            "n_max": self.n_max_searched,
            "regime": self.regime,
            "witness_edges": [e.as_list() for e in self.witness.edges] if self.witness else None,
            "variants": self.variant_count,
            "seeds": list(self.seeds),
        }


class VerifierService:
    def __init__(
        self,
        settings: Optional[Settings] = None,
        matching_service: Optional[MatchingService] = None,
        star_service: Optional[StarService] = None,
        bounds_service: Optional[BoundsService] = None,
    ):
        self.settings = settings or Settings()
        self.matching_service = matching_service or MatchingService(self.settings)
        self.star_service = star_service or StarService(self.settings, self.matching_service)
        self.bounds_service = bounds_service or BoundsService(self.settings, self.matching_service, self.star_service)
        self.membership = MembershipService()

    def is_member_F(self, graph: Graph, d: int, m: int) -> MembershipReport:
        return self.membership.is_member_F(graph, d, m)

    def canonical_form(self, graph: Graph) -> bytes:
        return enumeration.canonical_form(graph, self.settings.canonical_n_cap)

    def iter_nonisomorphic_graphs(self, n: int) -> Iterator[Graph]:
        return enumeration.iter_nonisomorphic_graphs(n, self.settings.canonical_n_cap)

    def factor_critical_graphs(self, n: int, max_degree: Optional[int] = None) -> List[Graph]:
        """Non-isomorphic factor-critical graphs on n vertices, optionally with Δ <= max_degree."""
        found = []
        for graph in self.iter_nonisomorphic_graphs(n):
            if max_degree is not None and graph.max_degree() > max_degree:
                continue
            if self.star_service.is_factor_critical(graph):
                found.append(graph)
        return found

    def exhaustive_max_edges(self, d: int, m: int, n_max: Optional[int] = None, jobs: Optional[int] = None) -> VerifyReport:
        """
        Exact maximum edge count over all graphs on at most n_max vertices with Δ < d, ν < m.

        Args:
            d (int): Degree cap
            m (int): Matching cap
            n_max (Optional[int]): Vertex count, at most exhaustive_n_max_cap
            jobs (Optional[int]): Worker processes; the result does not depend on it

        Returns:
            VerifyReport: Exact regime report with search value and witness
        """
        params = BoundParams(d, m)
        cap = self.settings.exhaustive_n_max_cap
        n_max = cap if n_max is None else n_max
        if n_max < 1:
            raise ArgumentError(f"n_max must be positive, got {n_max}")
        if n_max > cap:
            raise SizeLimitError(f"Exhaustive search capped at {cap} vertices, got {n_max}")
        jobs = self.settings.jobs if jobs is None else jobs

        started = time.perf_counter()
        outcome = enumeration.search_max_edges(n_max, d, m, jobs=jobs)
        witness = Graph.from_edges(n_max, outcome.witness)
        nu = self.matching_service.nu(witness)
        if nu >= m or witness.max_degree() >= d or witness.edge_count != outcome.best:
            raise InternalInvariantError(f"Search witness breaks its caps: ν={nu}, Δ={witness.max_degree()}")
        elapsed = time.perf_counter() - started

        formula = self.bounds_service.e_bound(params).value
        violation = None
        if outcome.best > formula:
            violation = f"search found {outcome.best} edges, above e({d},{m}) = {formula}"
        logger.info(f"Exhaustive search d={d}, m={m}, n_max={n_max}: {outcome.best} edges in {elapsed:.2f}s")
        return VerifyReport(
            d=d,
            m=m,
            formula_value=formula,
            search_value=outcome.best,
            n_max_searched=n_max,
            witness=witness,
            variant_count=None,
            regime=EXACT,
            violation=violation,
            elapsed=elapsed,
        )

    def random_maximal_graph(self, d: int, m: int, n: int, seed: int) -> Graph:
        """
        Add uniformly random legal edges on n vertices until none is left.

        Runs that end outside F(d, m) are redrawn from the same random stream
        up to generation_attempts times.

        Args:
            d (int): Degree cap
            m (int): Matching cap
            n (int): Vertex count, at least 2(m-1)
            seed (int): Seed of the random stream

        Returns:
            Graph: A member of F(d, m) on n vertices
        """
        BoundParams(d, m)
        if n < 2 * (m - 1):
            raise ArgumentError(f"Need at least 2(m-1) = {2 * (m - 1)} vertices, got {n}")
        rng = random.Random(seed)

        @retry(
            stop=stop_after_attempt(self.settings.generation_attempts),
            retry=retry_if_exception_type(RejectedSample),
            reraise=True,
        )
        def attempt() -> Graph:
            return self._sample_once(rng, d, m, n)

        try:
            return attempt()
        except RejectedSample as e:
            logger.error(f"Error generating a member of F({d},{m}) on {n} vertices: {str(e)}")
            raise ArgumentError(
                f"No member of F({d},{m}) on {n} vertices after {self.settings.generation_attempts} attempts"
            )

    def _sample_once(self, rng: random.Random, d: int, m: int, n: int) -> Graph:
        adj: List[List[int]] = [[] for _ in range(n)]
        mate = [-1] * n
        size = 0
        while True:
            legal = self._legal_pairs(adj, mate, size, d, m)
            if not legal:
                break
            a, b = rng.choice(legal)
            adj[a].append(b)
            adj[b].append(a)
            if mate[a] == -1 and mate[b] == -1:
                mate[a], mate[b] = b, a
                size += 1
            else:
                for root in range(n):
                    if mate[root] == -1 and adj[root]:
                        path = find_path_from(adj, mate, root)
                        if path is not None:
                            flip_path(mate, path)
                            size += 1
                            break
            if size >= m:
                raise InternalInvariantError("Random generation exceeded the matching cap")

        graph = Graph.from_edges(n, ((v, w) for v in range(n) for w in adj[v] if v < w))
        if size != m - 1:
            raise RejectedSample(f"maximal graph has ν = {size} < {m - 1}")
        report = self.membership.is_member_F(graph, d, m)
        if not report.is_member:
            raise RejectedSample(report.describe())
        return graph

    def _legal_pairs(self, adj: List[List[int]], mate: Sequence[int], size: int, d: int, m: int) -> List[Tuple[int, int]]:
        n = len(adj)
        open_vertices = [v for v in range(n) if len(adj[v]) <= d - 2]
        candidates = [
            (a, b)
            for i, a in enumerate(open_vertices)
            for b in open_vertices[i + 1 :]
            if b not in adj[a]
        ]
        if size < m - 1:
            return candidates
        # at ν = m - 1 an edge touching a non-star vertex never grows the matching
        graph = Graph.from_edges(n, ((v, w) for v in range(n) for w in adj[v] if v < w))
        stars = self.star_service.star_set(graph, mates_to_matching(mate))
        sorted_adj = [sorted(r) for r in adj]
        legal = []
        for a, b in candidates:
            if a not in stars or b not in stars or not matching_grows(sorted_adj, mate, a, b):
                legal.append((a, b))
        return legal

    def sample_size(self, params: BoundParams) -> int:
        """Vertex count for sampling; leaves room for every isolated-vertex attachment."""
        return 2 * (params.m - 1) * params.d + 2

    def verify_bound(
        self,
        d: int,
        m: int,
        n_max: Optional[int] = None,
        jobs: Optional[int] = None,
        seeds: Optional[Sequence[int]] = None,
    ) -> VerifyReport:
        """
        Check e(d, m) from both sides.

        The extremal construction gives the lower bound. The upper bound is
        checked exactly when the extremal graph fits in n_max vertices, and
        otherwise against random maximal members, one per seed.

        Args:
            d (int): Degree cap
            m (int): Matching cap
            n_max (Optional[int]): Exhaustive search vertex cap
            jobs (Optional[int]): Worker processes for the exact search
            seeds (Optional[Sequence[int]]): Seeds for the sampled regime

        Returns:
            VerifyReport: Exact or sampled report; violation is set on any mismatch
        """
        params = BoundParams(d, m)
        cap = self.settings.exhaustive_n_max_cap
        n_max = cap if n_max is None else n_max
        if n_max > cap:
            raise SizeLimitError(f"Exhaustive search capped at {cap} vertices, got {n_max}")
        started = time.perf_counter()
        bound = self.bounds_service.e_bound(params)
        extremal = self.bounds_service.construct_extremal(params)
        lower_ok = self.membership.is_member_F(extremal, d, m).is_member and extremal.edge_count == bound.value
        footprint = extremal.without_isolated().n

        if footprint <= n_max:
            exact = self.exhaustive_max_edges(d, m, n_max, jobs)
            variants = self.bounds_service.count_extremal_variants(params, n_max, jobs=jobs or self.settings.jobs)
            violation = exact.violation
            if violation is None and exact.search_value != bound.value:
                violation = f"search found {exact.search_value} edges, e({d},{m}) = {bound.value}"
            if not lower_ok:
                violation = violation or "extremal construction is not a member"
            report = VerifyReport(
                d=d,
                m=m,
                formula_value=bound.value,
                search_value=exact.search_value,
                n_max_searched=n_max,
                witness=exact.witness,
                variant_count=variants,
                regime=EXACT,
                lower_bound_ok=lower_ok,
                violation=violation,
                elapsed=time.perf_counter() - started,
            )
        else:
            report = self._sampled(params, bound.value, bound.trivial, n_max, seeds, lower_ok, started)
        if report.ok:
            logger.info(f"Verified e({d},{m}) = {bound.value} ({report.regime}) in {report.elapsed:.2f}s")
        else:
            logger.warning(f"Verification of e({d},{m}) failed: {report.violation}")
        return report

    def _sampled(self, params, formula, trivial, n_max, seeds, lower_ok, started) -> VerifyReport:
        seeds = tuple(self.settings.sample_seeds if seeds is None else seeds)
        n = self.sample_size(params)
        best: Optional[Graph] = None
        violation = None if lower_ok else "extremal construction is not a member"
        for seed in seeds:
            sample = self.random_maximal_graph(params.d, params.m, n, seed)
            if sample.edge_count > formula or sample.edge_count > trivial:
                violation = violation or f"seed {seed} produced {sample.edge_count} edges, above e = {formula}"
            if best is None or sample.edge_count > best.edge_count:
                best = sample
        return VerifyReport(
            d=params.d,
            m=params.m,
            formula_value=formula,
            search_value=best.edge_count if best is not None else None,
            n_max_searched=n_max,
            witness=best,
            variant_count=None,
            regime=SAMPLED,
            seeds=seeds,
            lower_bound_ok=lower_ok,
            violation=violation,
            elapsed=time.perf_counter() - started,
        )
