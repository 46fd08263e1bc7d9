from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egame.divergence import (
    CertificateError,
    ConditionStarError,
    IneligibleGraphError,
    ScheduleStrategy,
    alternating_sequence,
    alternation_image,
    condition_star,
    divergence_certificate,
    form_recursion_residual,
    inequalities,
    kappas,
    legality_audit,
    macro_cycle,
)
from egame.engine import Outcome, apply_sequence, fire, play
from egame.graph import (
    EGCMGraph,
    GraphStructureError,
    TriangleLabels,
    canonicalize_triangle,
    labels_for_roles,
    make_cyclic3,
)

from _corpus import CASES, star_position

PHI = (1.0 + math.sqrt(5.0)) / 2.0


class TestKappas:
    def test_all_ones(self, all_ones):
        _, lb = all_ones
        assert kappas(lb) == (2.0, 2.0)

    def test_phi_sides(self):
        lb = canonicalize_triangle(make_cyclic3(3, 5, 5))
        k1, k2 = kappas(lb)
        assert abs(k1 - 2 * PHI) <= 1e-12
        assert abs(k2 - 2 * PHI) <= 1e-12

    def test_scaled_split_shifts_both(self):
        lb = TriangleLabels("a", "b", "c", 1.0, 1.0, 2.0, 0.5, 1.0, 1.0)
        lb.check()
        assert kappas(lb) == (3.0, 3.0)

    def test_product_at_four_rejected(self):
        lb = TriangleLabels("a", "b", "c", 2.0, 2.0, 2.0, 2.0, 2.0, 2.0)
        with pytest.raises(GraphStructureError):
            kappas(lb)

    def test_positive_on_corpus(self, corpus100):
        for _, lb in corpus100:
            k1, k2 = kappas(lb)
            assert k1 > 0.0 and k2 > 0.0


class TestConditionStar:
    def test_unit_start_holds(self, all_ones):
        _, lb = all_ones
        status = condition_star(lb, (1.0, 0.0, 0.0))
        assert status.holds
        assert status.linear_form == 1.0

    def test_positive_third_entry_fails_signs(self, all_ones):
        _, lb = all_ones
        status = condition_star(lb, (0.0, 0.0, 1.0))
        assert not status.sign_ok
        assert not status.holds

    def test_origin_fails_on_zero_form(self, all_ones):
        _, lb = all_ones
        status = condition_star(lb, (0.0, 0.0, 0.0))
        assert status.sign_ok
        assert status.linear_form == 0.0
        assert not status.holds


class TestAlternatingSequence:
    def test_case_two_from_unit_start(self, all_ones):
        _, lb = all_ones
        assert alternating_sequence(lb, (1.0, 0.0, 0.0)) == ("g1", "g2")

    def test_case_one_full_length(self, all_ones):
        _, lb = all_ones
        assert alternating_sequence(lb, (2.0, 1.0, -2.0)) == ("g1", "g2", "g1")

    def test_case_three_starts_at_gamma2(self, all_ones):
        _, lb = all_ones
        assert alternating_sequence(lb, (0.0, 1.0, 0.0)) == ("g2", "g1")

    def test_lengths_scale_with_m(self):
        lb = canonicalize_triangle(make_cyclic3(5, 5, 5))
        assert len(alternating_sequence(lb, (1.0, 1.0, -0.1))) == 5
        assert len(alternating_sequence(lb, (1.0, 0.0, 0.0))) == 4

    def test_requires_condition_star(self, all_ones):
        _, lb = all_ones
        with pytest.raises(ConditionStarError):
            alternating_sequence(lb, (0.0, 0.0, 1.0))


class TestAlternationImage:
    def test_unit_start(self, all_ones):
        _, lb = all_ones
        assert alternation_image(lb, (1.0, 0.0, 0.0)) == (0.0, -1.0, 2.0)

    def test_case_one_fixture(self, all_ones):
        _, lb = all_ones
        assert alternation_image(lb, (2.0, 1.0, -2.0)) == (-1.0, -2.0, 4.0)

    def test_rejects_both_zero(self, all_ones):
        _, lb = all_ones
        with pytest.raises(ConditionStarError):
            alternation_image(lb, (0.0, 0.0, -1.0))

    def test_simulation_agrees_across_cases(self, corpus100):
        rng = random.Random(17)
        for _, lb in corpus100:
            graph = lb.to_graph()
            for case in CASES:
                triple = star_position(lb, rng, case)
                seq = alternating_sequence(lb, triple)
                sim, _ = apply_sequence(graph, triple, seq)
                image = alternation_image(lb, triple)
                assert max(abs(s - f) for s, f in zip(sim, image)) <= 1e-9

    def test_sign_pattern(self, corpus100):
        rng = random.Random(19)
        for _, lb in corpus100[:40]:
            triple = star_position(lb, rng, "I")
            a2, b2, c2 = alternation_image(lb, triple)
            assert a2 <= 0.0 and b2 <= 0.0 and c2 > 0.0


class TestMacroCycle:
    def test_unit_chain_fixture(self, all_ones):
        _, lb = all_ones
        assert macro_cycle(lb, (1.0, 0.0, 0.0)) == (2.0, 1.0, -2.0)
        assert macro_cycle(lb, (2.0, 1.0, -2.0)) == (3.0, 2.0, -4.0)

    def test_swapped_start(self, all_ones):
        _, lb = all_ones
        assert macro_cycle(lb, (0.0, 1.0, 0.0)) == (1.0, 2.0, -2.0)

    def test_matches_engine_firing(self, corpus100):
        rng = random.Random(29)
        for _, lb in corpus100:
            graph = lb.to_graph()
            for case in CASES:
                triple = star_position(lb, rng, case)
                seq = alternating_sequence(lb, triple)
                mid, _ = apply_sequence(graph, triple, seq)
                sim = fire(graph, mid, lb.gamma3)
                closed = macro_cycle(lb, triple)
                assert max(abs(s - f) for s, f in zip(sim, closed)) <= 1e-9

    def test_closure_preserves_condition_star(self, corpus100):
        # The induction step: the image meets condition (*) strictly with no
        # zero entries, for every case at every corpus graph.
        rng = random.Random(37)
        for _, lb in corpus100:
            for case in CASES:
                triple = star_position(lb, rng, case)
                nxt = macro_cycle(lb, triple)
                status = condition_star(lb, nxt)
                assert status.holds
                assert status.linear_form > 1e-9
                assert all(abs(x) > 1e-9 for x in nxt)


class TestInequalities:
    def test_all_ones_sits_on_the_boundary(self, all_ones):
        _, lb = all_ones
        assert inequalities(lb) == (1.0, 1.0, 1.0)

    def test_phi_sides_values(self):
        lb = canonicalize_triangle(make_cyclic3(3, 5, 5))
        one, two, three = inequalities(lb)
        assert abs(one - PHI**3) <= 1e-9
        assert abs(two - PHI**3) <= 1e-9
        assert abs(three - (2 * PHI**3 - 1)) <= 1e-9

    def test_holds_for_any_role_assignment_on_real_triangles(self):
        # Putting the largest product on the gamma1-gamma2 pair still keeps
        # both values >= 1: side products never drop below 2 - sqrt(pq).
        g = make_cyclic3(5, 3, 3, splits=(1.7, 0.6, 2.3))
        for roles in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            lb = labels_for_roles(g, *roles)
            one, two, three = inequalities(lb)
            assert one >= 1.0 - 1e-9
            assert two >= 1.0 - 1e-9
            assert three > 0.0

    def test_sub_unit_side_product_violates(self):
        # Labels that no odd-neighborly triangle can produce: a side product
        # of 1/2 drops below 2 - sqrt(pq) and breaks the first inequality.
        lb = TriangleLabels("a", "b", "c", 1.0, 1.0,
                            math.sqrt(0.5), math.sqrt(0.5),
                            math.sqrt(0.5), math.sqrt(0.5))
        with pytest.raises(CertificateError):
            inequalities(lb)

    def test_corpus_suite(self, corpus100):
        for _, lb in corpus100:
            one, two, three = inequalities(lb)
            assert one >= 1.0 - 1e-9
            assert two >= 1.0 - 1e-9
            assert three > 0.0


class TestFormRecursion:
    def test_unit_fixture_residual_zero(self, all_ones):
        _, lb = all_ones
        assert form_recursion_residual(lb, (2.0, 1.0, -2.0)) <= 1e-12

    def test_origin_residual_zero(self, all_ones):
        _, lb = all_ones
        assert form_recursion_residual(lb, (0.0, 0.0, 0.0)) == 0.0

    @given(
        st.tuples(
            st.floats(min_value=-50, max_value=50),
            st.floats(min_value=-50, max_value=50),
            st.floats(min_value=-50, max_value=50),
        )
    )
    @settings(max_examples=300, deadline=None)
    def test_identity_is_algebraic_all_ones(self, triple):
        g = make_cyclic3(3, 3, 3)
        lb = canonicalize_triangle(g)
        assert form_recursion_residual(lb, triple) <= 1e-9

    def test_identity_on_random_labels_and_positions(self, corpus100):
        # Positions here are arbitrary reals; condition (*) is not needed.
        rng = random.Random(41)
        for _, lb in corpus100:
            for _ in range(10):
                triple = tuple(rng.uniform(-20, 20) for _ in range(3))
                assert form_recursion_residual(lb, triple) <= 1e-9


class TestLegalityAudit:
    def test_case_two_values(self, all_ones):
        _, lb = all_ones
        values = legality_audit(lb, (1.0, 0.0, 0.0))
        assert values == [1.0, 1.0]

    def test_case_one_values(self, all_ones):
        _, lb = all_ones
        values = legality_audit(lb, (2.0, 1.0, -2.0))
        assert [round(v, 9) for v in values] == [2.0, 3.0, 1.0]

    def test_non_canonical_roles_still_audit(self):
        # The closed forms do not need the minimal product on gamma1-gamma2;
        # five positive values with engine agreement on an m=5 main pair.
        g = make_cyclic3(5, 3, 3)
        lb = labels_for_roles(g, 0, 1, 2)
        triple = (1.0, 1.0, -0.1)
        assert condition_star(lb, triple).holds
        values = legality_audit(lb, triple)
        assert len(values) == 5
        assert all(v > 0.0 for v in values)

    def test_corpus_cases(self, corpus100):
        rng = random.Random(43)
        for _, lb in corpus100[:40]:
            for case in CASES:
                triple = star_position(lb, rng, case)
                values = legality_audit(lb, triple)
                expected_len = lb.m12() if case == "I" else lb.m12() - 1
                assert len(values) == expected_len
                assert all(v > 0.0 for v in values)


class TestCertificate:
    def test_all_ones_certificate(self, all_ones):
        g, _ = all_ones
        cert = divergence_certificate(g, n_cycles=4)
        assert (cert.kappa1, cert.kappa2) == (2.0, 2.0)
        omega1 = cert.fundamentals[0]
        assert [c.after for c in omega1.cycles[:3]] == [
            (2.0, 1.0, -2.0),
            (3.0, 2.0, -4.0),
            (4.0, 3.0, -6.0),
        ]
        assert cert.verdict == "not_admissible"
        assert not cert.strict_form_growth

    def test_omega3_preprocessing(self, all_ones):
        g, _ = all_ones
        cert = divergence_certificate(g, n_cycles=2)
        omega3 = cert.fundamentals[2]
        assert omega3.preprocessing == ("g3",)
        assert omega3.start_certified == (1.0, 1.0, -1.0)

    def test_strict_growth_off_the_boundary(self):
        g = make_cyclic3(3, 5, 5)
        cert = divergence_certificate(g, n_cycles=10)
        assert cert.strict_form_growth
        for fund in cert.fundamentals:
            forms = [c.form_after for c in fund.cycles]
            assert all(b > a for a, b in zip(forms, forms[1:]))

    def test_constant_form_on_the_boundary_family(self, all_ones):
        g, _ = all_ones
        cert = divergence_certificate(g, n_cycles=6)
        for fund in cert.fundamentals:
            forms = [c.form_before for c in fund.cycles] + [fund.cycles[-1].form_after]
            assert all(abs(f - forms[0]) <= 1e-12 for f in forms)

    def test_even_m_graph_rejected(self):
        root = math.sqrt(2.0)  # m = 4 product
        g = EGCMGraph(
            ("a", "b", "c"),
            [("a", "b", root, root), ("a", "c", 1.0, 1.0), ("b", "c", 1.0, 1.0)],
        )
        with pytest.raises(IneligibleGraphError):
            divergence_certificate(g)

    def test_two_node_graph_rejected(self, a2_graph):
        with pytest.raises(IneligibleGraphError):
            divergence_certificate(a2_graph)

    def test_witnesses_chain(self, corpus100):
        for g, _ in corpus100[:10]:
            cert = divergence_certificate(g, n_cycles=5)
            for fund in cert.fundamentals:
                assert fund.cycles[0].before == fund.start_certified
                for prev, nxt in zip(fund.cycles, fund.cycles[1:]):
                    assert prev.after == nxt.before

    def test_json_document_shape(self, all_ones):
        g, _ = all_ones
        doc = divergence_certificate(g, n_cycles=2).to_json_dict()
        assert doc["schema"] == "divergence-certificate/1"
        assert doc["graph"] == g.to_spec()
        assert doc["inequalities"] == {"i": 1.0, "ii": 1.0, "iii": 1.0}
        assert {f["name"] for f in doc["fundamentals"]} == {"omega1", "omega2", "omega3"}
        assert doc["verdict"] == "not_admissible"


class TestScheduleStrategy:
    def test_never_terminates_on_unit_triangle(self, all_ones):
        g, lb = all_ones
        trace = play(g, (1.0, 0.0, 0.0), ScheduleStrategy(lb, g), max_moves=600)
        assert trace.outcome is Outcome.MOVE_LIMIT_REACHED

    def test_handles_omega3_preprocessing(self, all_ones):
        g, lb = all_ones
        trace = play(g, (0.0, 0.0, 1.0), ScheduleStrategy(lb, g), max_moves=100)
        assert trace.outcome is Outcome.MOVE_LIMIT_REACHED
        assert trace.events[0].node == "g3"
        assert trace.events[0].after == (1.0, 1.0, -1.0)
