import pytest

from app.data.graph import Graph
from app.services.bounds_service import BoundParams
from app.services.transform_service import TransformState, is_claw_component
from app.utils.errors import InternalInvariantError, PreconditionError


def two_triangles() -> Graph:
    return Graph.disjoint_union([Graph.complete(3), Graph.complete(3)])


class TestPool:
    def test_pool_blocks(self, transform_service, matching_service):
        g = Graph.cycle(4)
        matching = matching_service.maximum_matching(g)
        state = transform_service.attach_isolated_pool(g, matching, d=3, m=3)
        assert state.graph.n == 4 + 8
        assert state.pool == {0: (4, 5), 1: (6, 7), 2: (8, 9), 3: (10, 11)}

    def test_pool_reuses_isolated_vertices(self, transform_service, matching_service):
        g = Graph.from_edges(6, [(0, 1)])
        state = transform_service.attach_isolated_pool(g, matching_service.maximum_matching(g), d=2)
        assert state.graph.n == 6
        assert state.pool == {0: (2,), 1: (3,)}

    def test_pool_needs_maximum_matching(self, transform_service):
        from app.data.graph import Matching

        g = Graph.path(4)
        with pytest.raises(PreconditionError):
            transform_service.attach_isolated_pool(g, Matching.from_pairs([(1, 2)]), d=3)


class TestStripClaws:
    def test_claws_are_viewed_away(self, transform_service, matching_service):
        g = Graph.disjoint_union([Graph.star(2), Graph.complete(3)])
        state = transform_service.attach_isolated_pool(g, matching_service.maximum_matching(g), d=3, m=3)
        reduced = transform_service.strip_claws(state)
        assert reduced.t == 1
        assert len(reduced.matching) == 1
        assert reduced.graph.n == state.graph.n - 3

    def test_claw_shape(self):
        g = Graph.disjoint_union([Graph.star(3), Graph.path(4)])
        assert is_claw_component(g, frozenset({0, 1, 2, 3}), 4)
        assert not is_claw_component(g, frozenset({4, 5, 6, 7}), 4)


class TestTransform:
    def test_fixpoint_input(self, transform_service):
        result = transform_service.transform(two_triangles(), 3, 3)
        assert result.iterations == 0
        assert result.decomposition.t == 0
        assert result.decomposition.r_values == [1, 1]

    def test_four_cycle_splits_into_two_claws(self, transform_service):
        result = transform_service.transform(Graph.cycle(4), 3, 3)
        assert result.iterations == 1
        step = result.steps[0]
        assert step.chosen_v == 0
        assert [e.as_list() for e in step.removed_edges] == [[0, 1], [0, 3]]
        assert [e.as_list() for e in step.added_edges] == [[0, 4], [0, 5]]
        assert step.to_dict()["nu"] == 2
        assert result.decomposition.t == 2
        assert result.decomposition.components == ()
        assert result.final.edge_count == 4

    def test_vertex_that_lost_edges_gains_pendants(self, transform_service):
        # cubic member of F(4, 6): vertex 0 is a cut vertex matched to 1, so removing it
        # leaves {2, 3, 4, 5} with a perfect matching and vertices 2, 3 at degree 2
        g = Graph.from_edges(
            10,
            [(0, 1), (0, 2), (0, 3), (2, 4), (2, 5), (3, 4), (3, 5), (4, 5)]
            + [(1, 6), (1, 7), (6, 8), (6, 9), (7, 8), (7, 9), (8, 9)],
        )
        result = transform_service.transform(g, 4, 6)
        assert result.iterations == 2
        second = result.steps[1]
        assert second.chosen_v == 2
        assert [e.as_list() for e in second.removed_edges] == [[2, 4], [2, 5]]
        assert len(second.added_edges) == 3
        assert [step.edge_count for step in result.steps] == [15, 16]
        assert result.final.edge_count == 16
        assert result.decomposition.t == 2
        assert sorted(result.decomposition.r_values) == [1, 2]

    def test_non_maximal_input(self, transform_service):
        with pytest.raises(PreconditionError) as info:
            transform_service.transform(Graph.complete(3), 3, 3)
        assert info.value.exit_code == 4
        assert not info.value.details.is_member

    def test_step_requires_pending_vertex(self, transform_service, matching_service):
        g = two_triangles()
        state = transform_service.attach_isolated_pool(g, matching_service.maximum_matching(g), d=3, m=3)
        assert isinstance(state, TransformState)
        with pytest.raises(PreconditionError):
            transform_service.transform_step(state)

    @pytest.mark.parametrize("d, m", [(3, 3), (4, 2), (4, 4), (5, 3), (6, 3), (5, 5)])
    def test_extremal_graphs_are_fixpoints(self, transform_service, bounds_service, d, m):
        params = BoundParams(d, m)
        result = transform_service.transform(bounds_service.construct_extremal(params), d, m)
        assert result.iterations == 0
        assert result.decomposition.to_profile(d) == bounds_service.e_bound(params).profile

    def test_perfect_matching_component(self, transform_service):
        # a 6-cycle with long chords: a perfect matching, so every vertex starts non-star
        g = Graph.circulant(6, [1, 3]).add_vertices(1)
        result = transform_service.transform(g, 4, 4)
        assert result.final.edge_count >= g.edge_count
        assert 1 <= result.iterations <= 3
        assert result.decomposition.t + sum(result.decomposition.r_values) == 3


class TestDecomposeFinal:
    def test_claw_and_triangle(self, transform_service, matching_service):
        g = Graph.disjoint_union([Graph.star(2), Graph.complete(3)]).add_vertices(1)
        final = transform_service.decompose_final(g, matching_service.maximum_matching(g), 3)
        assert final.t == 1
        assert final.claws == ((0, 1, 2),)
        assert final.r_values == [1]
        assert final.to_profile(3).to_dict() == {"t": 1, "J": 1, "r": []}

    def test_rejects_other_components(self, transform_service, matching_service):
        g = Graph.path(3)
        with pytest.raises(InternalInvariantError):
            transform_service.decompose_final(g, matching_service.maximum_matching(g), 4)


@pytest.mark.slow
class TestRandomMembers:
    @pytest.mark.parametrize("d, m", [(d, m) for d in (3, 4, 5) for m in (3, 4, 5)])
    def test_pipeline_invariants(self, transform_service, verifier_service, bounds_service, d, m):
        params = BoundParams(d, m)
        bound = bounds_service.e_bound(params).value
        n = verifier_service.sample_size(params)
        for seed in range(1, 57):
            g = verifier_service.random_maximal_graph(d, m, n, seed)
            result = transform_service.transform(g, d, m)
            assert result.iterations <= m - 1
            assert g.edge_count <= result.final.edge_count <= bound
            previous = g.edge_count
            for step in result.steps:
                assert step.nu == m - 1
                assert step.edge_count >= previous
                previous = step.edge_count
            decomposition = result.decomposition
            assert decomposition.t + sum(decomposition.r_values) == m - 1
            covered = decomposition.t * (d - 1) + sum(c.edge_count for c in decomposition.components)
            assert covered == result.final.edge_count
            assert covered <= bounds_service.profile_value(decomposition.to_profile(d), d) <= bound
