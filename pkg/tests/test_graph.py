from __future__ import annotations

import json
import math
import random

import pytest

from egame.graph import (
    EGCMGraph,
    GraphFormatError,
    GraphStructureError,
    OddNeighborlyError,
    amplitude_product_for_m,
    canonicalize_triangle,
    labels_for_roles,
    load_graph,
    make_cyclic3,
    recover_m,
    save_graph,
    validate,
    validate_spec,
)

PHI = (1.0 + math.sqrt(5.0)) / 2.0


class TestAmplitudeProduct:
    def test_m3_is_exactly_one(self):
        assert amplitude_product_for_m(3) == 1.0

    def test_m2_is_exactly_zero(self):
        assert amplitude_product_for_m(2) == 0.0

    def test_m5_is_phi_squared(self):
        assert abs(amplitude_product_for_m(5) - PHI**2) <= 1e-12

    def test_strictly_increasing_below_four(self):
        values = [amplitude_product_for_m(m) for m in range(2, 200)]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert all(v < 4.0 for v in values)

    def test_odd_m_at_least_one(self):
        for m in range(3, 101, 2):
            assert 1.0 <= amplitude_product_for_m(m) < 4.0

    @pytest.mark.parametrize("bad", [1, 0, -3])
    def test_domain_error(self, bad):
        with pytest.raises(GraphStructureError):
            amplitude_product_for_m(bad)

    def test_recover_m_round_trips(self):
        for m in range(2, 60):
            assert recover_m(amplitude_product_for_m(m)) == m

    def test_recover_m_rejects_off_grid_products(self):
        assert recover_m(4.5) is None
        assert recover_m(1.4) is None


class TestMakeCyclic3:
    def test_all_ones(self):
        g = make_cyclic3(3, 3, 3)
        for u, v in ((0, 1), (0, 2), (1, 2)):
            assert g.amp(u, v) == 1.0
            assert g.amp(v, u) == 1.0

    def test_m5_edge_gets_phi(self):
        g = make_cyclic3(5, 3, 3)
        assert abs(g.amp(0, 1) - PHI) <= 1e-12
        assert abs(g.amp(1, 0) - PHI) <= 1e-12
        assert g.amp(0, 2) == 1.0
        assert g.amp(2, 1) == 1.0

    def test_split_preserves_product(self):
        g = make_cyclic3(3, 3, 3, splits=(2.0, 1.0, 1.0))
        assert g.amp(0, 1) == 2.0
        assert g.amp(1, 0) == 0.5

    @pytest.mark.parametrize("ms", [(4, 3, 3), (3, 6, 3), (3, 3, 2)])
    def test_even_m_rejected(self, ms):
        with pytest.raises(OddNeighborlyError, match="odd-neighborly"):
            make_cyclic3(*ms)

    def test_nonpositive_split_rejected(self):
        with pytest.raises(GraphStructureError):
            make_cyclic3(3, 3, 3, splits=(0.0, 1.0, 1.0))
        with pytest.raises(GraphStructureError):
            make_cyclic3(3, 3, 3, splits=(1.0, -2.0, 1.0))

    def test_always_validates_eligible(self):
        rng = random.Random(7)
        for _ in range(50):
            ms = [rng.choice((3, 5, 7, 9)) for _ in range(3)]
            splits = [rng.uniform(1 / 3, 3.0) for _ in range(3)]
            report = validate(make_cyclic3(*ms, splits=splits))
            assert report.certificate_eligible
            assert not report.problems


class TestCanonicalize:
    def test_all_ones_identity_relabeling(self):
        g = make_cyclic3(3, 3, 3)
        lb = canonicalize_triangle(g)
        assert lb.gammas == g.nodes
        assert (lb.p, lb.q, lb.p1, lb.q1, lb.p2, lb.q2) == (1.0,) * 6

    def test_tie_break_prefers_earliest_pair(self):
        # m=5 between A and B; the two m=3 edges tie, {A, C} wins.
        g = make_cyclic3(5, 3, 3, nodes=("A", "B", "C"))
        lb = canonicalize_triangle(g)
        assert (lb.gamma1, lb.gamma2, lb.gamma3) == ("A", "C", "B")
        assert abs(lb.p * lb.q - 1.0) <= 1e-12

    def test_two_node_graph_rejected(self):
        g = EGCMGraph(("a", "b"), [("a", "b", 1.0, 1.0)])
        with pytest.raises(GraphStructureError):
            canonicalize_triangle(g)

    def test_even_m_rejected(self):
        root = math.sqrt(amplitude_product_for_m(4))
        g = EGCMGraph(
            ("a", "b", "c"),
            [("a", "b", root, root), ("a", "c", 1.0, 1.0), ("b", "c", 1.0, 1.0)],
        )
        with pytest.raises(OddNeighborlyError):
            canonicalize_triangle(g)

    def test_ordering_invariant_under_node_permutations(self):
        base_nodes = ("x", "y", "z")
        g = make_cyclic3(5, 7, 3, splits=(1.4, 0.6, 2.2), nodes=base_nodes)
        for perm in (
            (0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0),
        ):
            nodes = tuple(base_nodes[i] for i in perm)
            edges = []
            for i, j in g.edge_pairs():
                edges.append((g.nodes[i], g.nodes[j], g.amp(i, j), g.amp(j, i)))
            shuffled = EGCMGraph(nodes, edges)
            lb = canonicalize_triangle(shuffled)
            lb.check()
            assert lb.pq <= lb.p1 * lb.q1 + 1e-9
            assert lb.pq <= lb.p2 * lb.q2 + 1e-9
            # The minimal product always lands on the gamma1-gamma2 pair.
            assert abs(lb.pq - 1.0) <= 1e-9


class TestValidate:
    def test_all_ones_eligible(self):
        report = validate(make_cyclic3(3, 3, 3))
        assert report.certificate_eligible
        assert report.is_triangle
        for edge in report.edges:
            assert edge.positive
            assert edge.product == 1.0
            assert edge.recovered_m == 3
            assert edge.odd_neighborly

    def test_product_in_gap_is_ineligible(self):
        g = EGCMGraph(
            ("a", "b", "c"),
            [("a", "b", 3.0, 1.5), ("a", "c", 1.0, 1.0), ("b", "c", 1.0, 1.0)],
        )
        report = validate(g)
        bad = next(e for e in report.edges if {repr(e.u), repr(e.v)} == {"'a'", "'b'"})
        assert bad.product == 4.5
        assert not bad.odd_neighborly
        assert not report.certificate_eligible
        assert report.engine_playable

    def test_zero_amplitude_reported_not_raised(self):
        spec = {
            "nodes": ["a", "b", "c"],
            "edges": [
                {"from": "a", "to": "b", "amp": 0.0, "amp_back": 1.0},
                {"from": "a", "to": "c", "amp": 1.0, "amp_back": 1.0},
                {"from": "b", "to": "c", "amp": 1.0, "amp_back": 1.0},
            ],
        }
        report = validate_spec(spec)
        assert any("amp" in p and "positive" in p for p in report.problems)
        assert not report.engine_playable
        assert not report.certificate_eligible
        assert not report.edges[0].positive

    def test_missing_reverse_amplitude_reported(self):
        spec = {
            "nodes": ["a", "b"],
            "edges": [{"from": "a", "to": "b", "amp": 1.0}],
        }
        report = validate_spec(spec)
        assert any("amp_back" in p for p in report.problems)

    def test_two_node_graph_engine_playable_not_eligible(self):
        report = validate(EGCMGraph(("a", "b"), [("a", "b", 1.0, 1.0)]))
        assert report.engine_playable
        assert not report.is_triangle
        assert not report.certificate_eligible


class TestConstruction:
    def test_zero_amplitude_rejected(self):
        with pytest.raises(GraphStructureError):
            EGCMGraph(("a", "b"), [("a", "b", 0.0, 1.0)])

    def test_self_loop_rejected(self):
        with pytest.raises(GraphStructureError):
            EGCMGraph(("a", "b"), [("a", "a", 1.0, 1.0)])

    def test_duplicate_edge_rejected(self):
        with pytest.raises(GraphStructureError):
            EGCMGraph(("a", "b"), [("a", "b", 1.0, 1.0), ("b", "a", 2.0, 0.5)])

    def test_unknown_node_rejected(self):
        with pytest.raises(GraphStructureError):
            EGCMGraph(("a", "b"), [("a", "z", 1.0, 1.0)])

    def test_inconsistent_declared_m_rejected(self):
        with pytest.raises(GraphStructureError):
            EGCMGraph(("a", "b"), [("a", "b", 1.0, 1.5, 3)])

    def test_consistent_declared_m_accepted(self):
        g = EGCMGraph(("a", "b"), [("a", "b", 2.0, 0.5, 3)])
        assert g.declared_m(0, 1) == 3

    def test_labels_for_roles_reads_amplitudes(self):
        g = make_cyclic3(3, 5, 7, splits=(1.5, 0.8, 2.0))
        lb = labels_for_roles(g, 1, 2, 0)
        assert lb.gamma1 == g.nodes[1]
        assert lb.p == g.amp(1, 2)
        assert lb.q1 == g.amp(0, 1)


class TestJsonRoundTrip:
    def test_round_trip_is_value_exact(self, tmp_path):
        g = make_cyclic3(5, 7, 9, splits=(1.37, 0.52, 2.9))
        path = tmp_path / "triangle.json"
        save_graph(g, str(path))
        assert load_graph(str(path)) == g

    def test_round_trip_keeps_declared_m(self, tmp_path):
        g = make_cyclic3(3, 3, 3)
        path = tmp_path / "ones.json"
        save_graph(g, str(path))
        g2 = load_graph(str(path))
        assert g2.declared_m(0, 1) == 3
        assert g2 == g

    def test_parse_error_carries_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"nodes": [1, 2\n  "edges": []}')
        with pytest.raises(GraphFormatError) as err:
            load_graph(str(path))
        assert err.value.line is not None
        assert err.value.column is not None

    def test_numeric_node_ids_survive(self, tmp_path):
        g = EGCMGraph((0, 1, 2), [(0, 1, 1.0, 1.0), (0, 2, 1.0, 1.0), (1, 2, 1.0, 1.0)])
        path = tmp_path / "ints.json"
        save_graph(g, str(path))
        assert load_graph(str(path)) == g
