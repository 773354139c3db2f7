import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from app.data.graph import Graph
from app.services.matching_service import find_path_from, flip_path
from app.utils.errors import InternalInvariantError, SizeLimitError

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]

# Decisions on this many leading pairs define one shard of the search.
SHARD_DEPTH = 3


# canonical forms


def _refine(adj: Sequence[Sequence[int]], colors: List[int]) -> List[int]:
    """Colour refinement to a stable partition; colour values stay isomorphism-invariant."""
    while True:
        signatures = [(colors[v], tuple(sorted(colors[w] for w in adj[v]))) for v in range(len(adj))]
        ranks = {s: i for i, s in enumerate(sorted(set(signatures)))}
        refined = [ranks[s] for s in signatures]
        if len(ranks) == len(set(colors)):
            return refined
        colors = refined


def _component_code(adj: Sequence[Sequence[int]]) -> Tuple[int, Tuple[Pair, ...]]:
    """
    Least relabeled edge list over all individualization-refinement leaves.

    Two leaves with the same relabeled edge list give an automorphism. A
    branch is skipped when an automorphism fixing the individualized
    vertices pointwise maps its vertex onto an already explored sibling.
    """
    k = len(adj)
    best: Optional[Tuple[Pair, ...]] = None
    first_labels: Dict[Tuple[Pair, ...], List[int]] = {}
    automorphisms: List[List[int]] = []

    def orbit_root(fixed: Sequence[int]):
        parent = list(range(k))

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for perm in automorphisms:
            if all(perm[v] == v for v in fixed):
                for v in range(k):
                    parent[find(v)] = find(perm[v])
        return find

    def search(colors: List[int], fixed: Tuple[int, ...]) -> None:
        nonlocal best
        colors = _refine(adj, colors)
        counts: Dict[int, int] = {}
        for c in colors:
            counts[c] = counts.get(c, 0) + 1
        target = min((c for c, size in counts.items() if size > 1), default=None)
        if target is None:
            code = tuple(
                sorted(
                    (min(colors[a], colors[b]), max(colors[a], colors[b]))
                    for a in range(k)
                    for b in adj[a]
                    if a < b
                )
            )
            if code in first_labels:
                vertex_of = {label: u for u, label in enumerate(first_labels[code])}
                automorphisms.append([vertex_of[colors[v]] for v in range(k)])
            else:
                first_labels[code] = colors
            if best is None or code < best:
                best = code
            return
        explored: List[int] = []
        for v in range(k):
            if colors[v] != target:
                continue
            find = orbit_root(fixed)
            if any(find(v) == find(u) for u in explored):
                continue
            explored.append(v)
            split = [2 * c + (1 if c == target and u != v else 0) for u, c in enumerate(colors)]
            search(split, fixed + (v,))

    search([0] * k, ())
    return k, best or ()


def canonical_form(graph: Graph, cap: int = 10) -> bytes:
    """
    Isomorphism-invariant encoding: equal bytes iff the graphs are isomorphic.

    Each component gets the lexicographically least edge list found by
    individualization-refinement; component codes are sorted and joined.

    Args:
        graph (Graph): Graph with at most cap vertices
        cap (int): Vertex limit

    Returns:
        bytes: The canonical encoding
    """
    if graph.n > cap:
        raise SizeLimitError(f"Canonical form capped at {cap} vertices, got {graph.n}")
    codes = []
    for members in graph.components():
        sub, _ = graph.induced_subgraph(members)
        k, edges = _component_code([sorted(r) for r in sub.adjacency])
        codes.append(f"{k}:" + ",".join(f"{a}-{b}" for a, b in edges))
    return (f"n={graph.n};" + "|".join(sorted(codes))).encode("ascii")


def iter_nonisomorphic_graphs(n: int, cap: int = 10) -> Iterator[Graph]:
    """
    One representative per isomorphism class of graphs on n vertices.

    Classes are grown edge by edge from the empty graph and deduplicated by
    canonical form; output is ordered by edge count, then by encoding.
    """
    if n > cap:
        raise SizeLimitError(f"Graph generation capped at {cap} vertices, got {n}")
    level: Dict[bytes, Graph] = {canonical_form(Graph.empty(n), cap): Graph.empty(n)}
    while level:
        for key in sorted(level):
            yield level[key]
        following: Dict[bytes, Graph] = {}
        for graph in level.values():
            for a in range(n):
                for b in range(a + 1, n):
                    if graph.has_edge(a, b):
                        continue
                    child = graph.add_edge(a, b)
                    following.setdefault(canonical_form(child, cap), child)
        level = following


# branch-and-bound edge search


@dataclass(frozen=True)
class SearchOutcome:
    best: int
    witness: Tuple[Pair, ...]
    leaves: Tuple[Tuple[Pair, ...], ...] = ()


class EdgeSearch:
    """
    Labeled graphs on n vertices with Δ < d and ν < m, explored pair by pair.

    Pairs are visited in lexicographic order, inclusion before exclusion.
    A maximum matching is kept incrementally: each accepted edge either
    matches two exposed vertices or triggers one augmenting-path search.
    """

    def __init__(self, n: int, d: int, m: int):
        self.n = n
        self.d = d
        self.m = m
        self.pairs: List[Pair] = [(a, b) for a in range(n) for b in range(a + 1, n)]
        # remaining[i][v]: pairs at positions >= i incident to v
        self.remaining = [[0] * n for _ in range(len(self.pairs) + 1)]
        for i in range(len(self.pairs) - 1, -1, -1):
            row = list(self.remaining[i + 1])
            a, b = self.pairs[i]
            row[a] += 1
            row[b] += 1
            self.remaining[i] = row
        self.adj: List[List[int]] = [[] for _ in range(n)]
        self.mate = [-1] * n
        self.size = 0
        self.chosen: List[Pair] = []

    def optimistic(self, index: int) -> int:
        room = self.remaining[index]
        total = sum(min(self.d - 1 - len(self.adj[v]), room[v]) for v in range(self.n))
        return len(self.chosen) + total // 2

    def push(self, a: int, b: int):
        """Add ab if Δ and ν stay below their caps; returns an undo token or None."""
        if len(self.adj[a]) >= self.d - 1 or len(self.adj[b]) >= self.d - 1:
            return None
        saved = list(self.mate)
        self.adj[a].append(b)
        self.adj[b].append(a)
        grown = False
        if self.mate[a] == -1 and self.mate[b] == -1:
            self.mate[a], self.mate[b] = b, a
            grown = True
        else:
            for root in range(self.n):
                if self.mate[root] == -1 and self.adj[root]:
                    path = find_path_from(self.adj, self.mate, root)
                    if path is not None:
                        flip_path(self.mate, path)
                        grown = True
                        break
        if grown and self.size + 1 >= self.m:
            self.adj[a].pop()
            self.adj[b].pop()
            self.mate = saved
            return None
        self.size += int(grown)
        self.chosen.append((a, b))
        return saved, grown

    def pop(self, token) -> None:
        saved, grown = token
        a, b = self.chosen.pop()
        self.adj[a].pop()
        self.adj[b].pop()
        self.mate = saved
        self.size -= int(grown)

    def maximize(self, start: int = 0, floor: int = -1) -> SearchOutcome:
        """Most edges reachable from the current prefix; first such leaf in search order."""
        best = floor
        witness: Tuple[Pair, ...] = ()

        def branch(index: int) -> None:
            nonlocal best, witness
            if self.optimistic(index) <= best:
                return
            if index == len(self.pairs):
                best = len(self.chosen)
                witness = tuple(self.chosen)
                return
            token = self.push(*self.pairs[index])
            if token is not None:
                branch(index + 1)
                self.pop(token)
            branch(index + 1)

        branch(start)
        return SearchOutcome(best, witness)

    def collect(self, target: int, start: int = 0) -> SearchOutcome:
        """Every leaf with exactly target edges."""
        leaves: List[Tuple[Pair, ...]] = []

        def branch(index: int) -> None:
            if self.optimistic(index) < target:
                return
            if len(self.chosen) == target:
                leaves.append(tuple(self.chosen))
                return
            if index == len(self.pairs):
                return
            token = self.push(*self.pairs[index])
            if token is not None:
                branch(index + 1)
                self.pop(token)
            branch(index + 1)

        branch(start)
        witness = leaves[0] if leaves else ()
        return SearchOutcome(target if leaves else -1, witness, tuple(leaves))

    def apply_prefix(self, decisions: Sequence[bool]) -> bool:
        """Replay include/exclude decisions on the leading pairs; False if an inclusion is illegal."""
        for pair, include in zip(self.pairs, decisions):
            if include and self.push(*pair) is None:
                return False
        return True


def _shard_prefixes(pair_count: int) -> List[Tuple[bool, ...]]:
    depth = min(SHARD_DEPTH, pair_count)
    return list(product((True, False), repeat=depth))


def _run_shard(args) -> SearchOutcome:
    n, d, m, prefix, mode, target = args
    search = EdgeSearch(n, d, m)
    if not search.apply_prefix(prefix):
        return SearchOutcome(-1, ())
    if mode == "max":
        return search.maximize(start=len(prefix))
    return search.collect(target, start=len(prefix))


def _map_shards(n: int, d: int, m: int, mode: str, target: int, jobs: int) -> List[SearchOutcome]:
    prefixes = _shard_prefixes(n * (n - 1) // 2)
    tasks = [(n, d, m, prefix, mode, target) for prefix in prefixes]
    if jobs <= 1:
        return [_run_shard(task) for task in tasks]
    logger.info(f"Searching {len(tasks)} shards on {jobs} workers")
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_shard, tasks))


def search_max_edges(n: int, d: int, m: int, jobs: int = 1) -> SearchOutcome:
    """
    Maximum edge count over labeled graphs on n vertices with Δ < d, ν < m.

    Shards are reduced in search order, so the witness does not depend on jobs.
    """
    if n < 2:
        return SearchOutcome(0, ())
    outcomes = _map_shards(n, d, m, "max", 0, jobs)
    best = max(outcomes, key=lambda o: o.best)
    winner = next(o for o in outcomes if o.best == best.best)
    if winner.best < 0:
        raise InternalInvariantError("Edge search found no graph at all")
    return winner


def collect_graphs_with_edges(n: int, d: int, m: int, target: int, jobs: int = 1) -> List[Graph]:
    """Every labeled graph on n vertices with Δ < d, ν < m and exactly target edges."""
    if target == 0:
        return [Graph.empty(n)]
    if n < 2:
        return []
    graphs: List[Graph] = []
    for outcome in _map_shards(n, d, m, "collect", target, jobs):
        graphs.extend(Graph.from_edges(n, leaf) for leaf in outcome.leaves)
    return graphs
