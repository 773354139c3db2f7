import networkx as nx
import pytest

from app.data.graph import Graph
from app.services.bounds_service import BoundParams, PartitionProfile
from app.services.enumeration import canonical_form
from app.utils.errors import ArgumentError, InternalInvariantError, PreconditionError

from .strategies import to_networkx

GRID = [(d, m) for d in range(2, 13) for m in range(2, 13)]


class TestFormula:
    @pytest.mark.parametrize(
        "d, m, value, t, J",
        [
            (3, 3, 6, 0, 2),
            (2, 2, 1, 0, 1),
            (4, 4, 10, 1, 1),
            (3, 2, 3, 0, 1),
            (4, 2, 3, 1, 0),
            (5, 5, 20, 0, 2),
            (2, 4, 3, 0, 3),
        ],
    )
    def test_known_values(self, bounds_service, d, m, value, t, J):
        result = bounds_service.e_bound(BoundParams(d, m))
        assert result.value == value
        assert (result.profile.t, result.profile.J_size) == (t, J)

    def test_bad_params(self):
        with pytest.raises(ArgumentError):
            BoundParams(1, 3)
        with pytest.raises(ArgumentError):
            BoundParams(3, 0)

    def test_case_formula_matches_unified(self, bounds_service):
        for d, m in GRID:
            params = BoundParams(d, m)
            assert bounds_service.case_formula(params) == bounds_service.e_bound(params).value

    def test_trivial_bound_is_tight_only_for_small_degree(self, bounds_service):
        for d, m in GRID:
            result = bounds_service.e_bound(BoundParams(d, m))
            assert result.value <= result.trivial
            assert (result.trivial_gap == 0) == (d <= 3)

    @pytest.mark.parametrize("d, m, value", [(3, 3, 6), (4, 3, 10), (2, 5, 4), (6, 2, 9)])
    def test_trivial_bound_values(self, bounds_service, d, m, value):
        assert bounds_service.trivial_bound(BoundParams(d, m)) == value

    @pytest.mark.parametrize("s, value", [(2, 1), (3, 6), (4, 10), (5, 20), (6, 27)])
    def test_diagonal(self, bounds_service, s, value):
        assert bounds_service.e_ss(s) == value
        assert bounds_service.e_bound(BoundParams(s, s)).value == value

    def test_component_edge_bound(self, bounds_service):
        assert bounds_service.component_edge_bound(0, 5) == 0
        assert bounds_service.component_edge_bound(1, 3) == 3
        assert bounds_service.component_edge_bound(2, 4) == 7
        assert bounds_service.component_edge_bound(2, 9) == 10

    @pytest.mark.parametrize(
        "d, m, unique",
        [(3, 3, True), (4, 4, False), (4, 2, False), (3, 2, True), (2, 7, True), (6, 4, True), (6, 3, False)],
    )
    def test_uniqueness(self, bounds_service, d, m, unique):
        assert bounds_service.is_extremal_unique(BoundParams(d, m)) is unique


class TestAlternates:
    def test_unique_parameters_have_none(self, bounds_service):
        assert bounds_service.alternate_extremal(BoundParams(3, 3)) is None
        assert bounds_service.alternate_extremal(BoundParams(5, 2)) is None

    def test_triangle_ties_with_the_claw(self, bounds_service):
        assert bounds_service.alternate_extremal(BoundParams(4, 2)) == Graph.complete(3)

    @pytest.mark.parametrize("d, m", [(4, 4), (5, 4), (7, 3), (6, 5)])
    def test_alternate_is_another_extremal_graph(self, bounds_service, verifier_service, d, m):
        params = BoundParams(d, m)
        alternate = bounds_service.alternate_extremal(params)
        extremal = bounds_service.construct_extremal(params)
        assert alternate.edge_count == extremal.edge_count
        assert verifier_service.is_member_F(alternate, d, m).is_member
        assert not nx.is_isomorphic(to_networkx(alternate), to_networkx(extremal.without_isolated()))


class TestProfiles:
    def test_brute_force_optimum(self, bounds_service):
        for d in range(2, 9):
            for m in range(2, 10):
                params = BoundParams(d, m)
                result = bounds_service.e_bound(params)
                best, winners = bounds_service.optimize_profiles(params)
                assert best == result.value
                assert result.profile in winners

    def test_rewrite_folds_large_component(self, bounds_service):
        rewritten = bounds_service.reduction_rewrite(PartitionProfile(t=0, J_size=0, r_list=(3,)), d=5, m=4)
        assert rewritten == PartitionProfile(t=1, J_size=0, r_list=(2,))

    def test_rewrite_moves_small_components(self, bounds_service):
        rewritten = bounds_service.reduction_rewrite(PartitionProfile(t=0, J_size=0, r_list=(1, 1)), d=5)
        assert rewritten == PartitionProfile(t=2, J_size=0, r_list=(0, 0))

    def test_rewrite_checks_total(self, bounds_service):
        with pytest.raises(PreconditionError):
            bounds_service.reduction_rewrite(PartitionProfile(t=1, J_size=0, r_list=(2,)), d=5, m=3)

    def test_rewrite_never_loses_value(self, bounds_service):
        for d in range(3, 9):
            params = BoundParams(d, 7)
            _, profiles = bounds_service.optimize_profiles(params)
            for profile in profiles:
                rewritten = bounds_service.reduction_rewrite(profile, d, 7)
                assert all(r in (0, d // 2) for r in rewritten.r_list)
                assert bounds_service.profile_value(rewritten, d) == bounds_service.profile_value(profile, d)

    def test_negative_profile(self):
        with pytest.raises(ArgumentError):
            PartitionProfile(t=-1, J_size=0)


class TestConstructions:
    def test_claw(self, bounds_service):
        assert bounds_service.construct_claw(4) == Graph.star(3)
        assert bounds_service.construct_claw(2) == Graph.star(1)
        with pytest.raises(ArgumentError):
            bounds_service.construct_claw(1)

    def test_block_for_even_degree(self, bounds_service):
        block = bounds_service.construct_C(4)
        assert block.n == 5
        assert block.edge_count == 7
        assert sorted(block.degrees()) == [2, 3, 3, 3, 3]

    def test_block_for_odd_degree(self, bounds_service):
        assert bounds_service.construct_C(5) == Graph.complete(5)

    def test_block_needs_degree_three(self, bounds_service):
        with pytest.raises(ArgumentError):
            bounds_service.construct_C(2)

    def test_even_block_degree_profile_is_checked(self, bounds_service, monkeypatch):
        # five-cycle plus a chord: three vertices of degree 2
        block = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])
        monkeypatch.setattr(bounds_service, "component_edge_bound", lambda r, d: 6)
        with pytest.raises(InternalInvariantError, match="degree 2"):
            bounds_service._check_block(block, 4, 2)

    def test_merged_component_checks(self, bounds_service):
        bounds_service._check_merged(Graph.cycle(5), 3)
        with pytest.raises(InternalInvariantError, match="vertices"):
            bounds_service._check_merged(Graph.cycle(5), 4)
        with pytest.raises(InternalInvariantError, match="ν = 1"):
            bounds_service._check_merged(Graph.star(4), 3)

    @pytest.mark.parametrize("d", range(3, 11))
    def test_blocks_are_factor_critical(self, bounds_service, star_service, d):
        block = bounds_service.construct_C(d)
        assert star_service.is_factor_critical(block)
        assert block.max_degree() < d
        if d % 2 == 0:
            assert block.degrees().count(d - 2) == 1

    def test_extremal_examples(self, bounds_service):
        assert canonical_form(bounds_service.construct_extremal(BoundParams(3, 3))) == canonical_form(
            Graph.disjoint_union([Graph.complete(3), Graph.complete(3)])
        )
        assert bounds_service.construct_extremal(BoundParams(2, 4)) == Graph.disjoint_union([Graph.complete(2)] * 3)
        assert bounds_service.construct_extremal(BoundParams(4, 2)) == Graph.star(3)
        assert canonical_form(bounds_service.construct_extremal(BoundParams(5, 5))) == canonical_form(
            Graph.disjoint_union([Graph.complete(5), Graph.complete(5)])
        )

    @pytest.mark.parametrize("d, m", [(d, m) for d in range(2, 8) for m in range(2, 7)])
    def test_extremal_is_member(self, bounds_service, verifier_service, d, m):
        params = BoundParams(d, m)
        graph = bounds_service.construct_extremal(params)
        assert graph.edge_count == bounds_service.e_bound(params).value
        assert verifier_service.is_member_F(graph, d, m).is_member


class TestCoalescing:
    def test_two_claws(self, bounds_service, verifier_service, matching_service):
        g = bounds_service.construct_extremal(BoundParams(6, 3))
        result = bounds_service.coalesce_claws(g, range(0, 6), range(6, 12), 6)
        assert result.edge_count == g.edge_count
        assert matching_service.nu(result) == 2
        assert result.degree(5) == 0
        assert result.has_edge(0, 7)
        assert verifier_service.is_member_F(result, 6, 3).is_member

    def test_claws_need_degree_three(self, bounds_service):
        g = Graph.disjoint_union([Graph.complete(2), Graph.complete(2)])
        with pytest.raises(PreconditionError):
            bounds_service.coalesce_claws(g, [0, 1], [2, 3], 2)

    def test_non_claw_component(self, bounds_service):
        g = Graph.disjoint_union([Graph.star(2), Graph.complete(3)])
        with pytest.raises(PreconditionError):
            bounds_service.coalesce_claws(g, [0, 1, 2], [3, 4, 5], 3)

    @pytest.mark.parametrize("d", range(3, 11))
    def test_merged_component(self, bounds_service, star_service, d):
        j = d // 2
        merged = bounds_service.construct_merged_component(d)
        assert merged.n == 2 * j + 3
        assert merged.edge_count == (d - 1) + bounds_service.component_edge_bound(j, d)
        assert merged.max_degree() < d
        assert star_service.is_factor_critical(merged)

    def test_merged_component_for_degree_three_is_five_cycle(self, bounds_service):
        merged = bounds_service.construct_merged_component(3, direct=False)
        assert nx.is_isomorphic(to_networkx(merged), nx.cycle_graph(5))

    def test_merged_search_cap(self, bounds_service):
        with pytest.raises(InternalInvariantError):
            bounds_service.construct_merged_component(6, direct=False)

    @pytest.mark.slow
    def test_merged_search_for_degree_four(self, bounds_service, star_service):
        merged = bounds_service.construct_merged_component(4, direct=False)
        assert merged.n == 7
        assert merged.edge_count == 10
        assert star_service.is_factor_critical(merged)

    @pytest.mark.parametrize("d, m", [(4, 4), (5, 4), (6, 5), (4, 6)])
    def test_claw_with_block(self, bounds_service, verifier_service, d, m):
        params = BoundParams(d, m)
        g = bounds_service.construct_extremal(params)
        profile = bounds_service.e_bound(params).profile
        assert profile.t >= 1 and profile.J_size >= 1
        claw = range(0, d)
        block = range(d * profile.t, d * profile.t + 2 * (d // 2) + 1)
        result = bounds_service.coalesce_claw_with_component(g, claw, block, d)
        assert result.edge_count == g.edge_count
        assert verifier_service.is_member_F(result, d, m).is_member
        assert len(result.isolated_vertices()) == len(g.isolated_vertices()) + d - 2


class TestVariants:
    @pytest.mark.parametrize("d, m, n_cap, count", [(4, 2, 4, 2), (3, 3, 6, 1), (3, 2, 4, 1), (2, 3, 4, 1), (4, 3, 5, 1)])
    def test_counts(self, bounds_service, d, m, n_cap, count):
        assert bounds_service.count_extremal_variants(BoundParams(d, m), n_cap) == count


class TestTable:
    def test_grid(self, bounds_service):
        df = bounds_service.bound_table(range(2, 6), range(2, 6))
        assert len(df) == 16
        assert list(df.columns) == ["d", "m", "e", "trivial", "trivial_gap", "t", "J", "unique", "e_ss"]
        row = df[(df.d == 4) & (df.m == 4)].iloc[0]
        assert row.e == 10
        assert row.e_ss == 10
        assert not row.unique
        assert (df[df.d <= 3].trivial_gap == 0).all()
