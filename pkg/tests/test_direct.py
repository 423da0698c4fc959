import random
from fractions import Fraction

import pytest

from helpers import (
    all_subsets,
    empirical_probability,
    query_from_string,
    random_dataset,
)

from plkb.data import from_rows
from plkb.direct import (
    SubsetCounter,
    active_kb,
    build_direct_kb,
    relevant_kb,
    relevant_kb_scan,
)
from plkb.kb import KnowledgeBase, WeightedClause, parse_kb, rule_clause, serialize_kb
from plkb.lp import infer_pos

# Clauses whose bodies are subsets of the assignment a1=0,a2=1,a3=0,a4=1,
# with the exact label frequency of each subset in the eight strings.
EXPECTED_RELEVANT_0101 = {
    rule_clause([("a1", "0")]): Fraction(1, 3),
    rule_clause([("a2", "1")]): Fraction(1, 2),
    rule_clause([("a3", "0")]): Fraction(1, 2),
    rule_clause([("a4", "1")]): Fraction(1),
    rule_clause([("a1", "0"), ("a2", "1")]): Fraction(0),
    rule_clause([("a1", "0"), ("a3", "0")]): Fraction(1, 2),
    rule_clause([("a2", "1"), ("a3", "0")]): Fraction(1, 2),
    rule_clause([("a2", "1"), ("a4", "1")]): Fraction(1),
    rule_clause([("a1", "0"), ("a2", "1"), ("a3", "0")]): Fraction(0),
}


class TestBuildDirectKb:
    def test_relevant_golden_for_0101(self, strings_direct_kb):
        rel = relevant_kb(query_from_string("0101"), strings_direct_kb)
        got = {wc.clause: wc.probability for wc in rel}
        assert got == EXPECTED_RELEVANT_0101

    def test_single_positive_instance(self):
        ds = from_rows(["a"], [(("x",), True)])
        kb = build_direct_kb(ds)
        assert serialize_kb(kb) == "1.000000 pos | !a=x"

    def test_full_factorial_two_by_two(self):
        rows = [((a, b), True) for a in "01" for b in "01"]
        ds = from_rows(["f1", "f2"], rows)
        kb = build_direct_kb(ds)
        # 4 singleton bodies plus 4 pair bodies
        assert len(kb) == 8

    def test_probabilities_are_rationals(self, strings_direct_kb):
        assert all(isinstance(wc.probability, Fraction) for wc in strings_direct_kb)

    def test_max_arity_caps_subset_size(self, strings_ds):
        kb = build_direct_kb(strings_ds, max_arity=1)
        assert all(len(wc.clause.body) == 1 for wc in kb)
        assert len(kb) == 8  # 4 features x 2 observed values

    def test_max_arity_below_one_rejected(self, strings_ds):
        with pytest.raises(ValueError, match="max_arity"):
            build_direct_kb(strings_ds, max_arity=0)

    def test_unbounded_pass_refused_on_wide_data(self):
        features = [f"f{i}" for i in range(1, 22)]
        ds = from_rows(features, [(tuple("0" * 21), True)])
        with pytest.raises(ValueError, match="max_arity"):
            build_direct_kb(ds)
        assert len(build_direct_kb(ds, max_arity=1)) == 21

    def test_empty_dataset_rejected(self, strings_ds):
        with pytest.raises(ValueError, match="empty"):
            build_direct_kb(strings_ds.replace_instances([]))

    def test_probabilities_match_brute_force_recount(self):
        rng = random.Random(77)
        for _ in range(20):
            ds = random_dataset(rng, max_features=4, max_rows=20)
            kb = build_direct_kb(ds)
            for wc in kb:
                assert wc.probability == empirical_probability(
                    ds, sorted(wc.clause.body)
                )

    def test_every_observed_subset_is_counted(self):
        rng = random.Random(78)
        ds = random_dataset(rng, max_features=4, max_rows=12)
        kb = build_direct_kb(ds)
        bodies = {wc.clause.body for wc in kb}
        for inst in ds.instances:
            for combo in all_subsets(inst.values.items()):
                assert frozenset(combo) in bodies

    def test_no_clause_repeats_a_feature(self, strings_direct_kb):
        for wc in strings_direct_kb:
            feats = [f for f, _ in wc.clause.body]
            assert len(feats) == len(set(feats))


class TestRelevantKb:
    def test_empty_query(self, strings_direct_kb):
        assert len(relevant_kb({}, strings_direct_kb)) == 0

    def test_single_pair_query(self, strings_direct_kb):
        rel = relevant_kb({"a4": "1"}, strings_direct_kb)
        assert serialize_kb(rel) == "1.000000 pos | !a4=1"

    def test_matches_reference_scan(self, strings_direct_kb):
        rng = random.Random(5)
        values = ["0", "1"]
        for _ in range(20):
            q = {
                f"a{i}": rng.choice(values)
                for i in range(1, 5)
                if rng.random() < 0.7
            }
            fast = relevant_kb(q, strings_direct_kb)
            slow = relevant_kb_scan(q, strings_direct_kb)
            assert serialize_kb(fast) == serialize_kb(slow)

    def test_scan_used_for_non_rule_kbs(self):
        kb = parse_kb("0.5 a | b\n0.7 pos | !f=1")
        rel = relevant_kb({"f": "1"}, kb)
        assert serialize_kb(rel) == "0.700000 pos | !f=1"

    def test_classification_agrees_with_full_kb(self, strings_direct_kb):
        for bits in range(16):
            s = format(bits, "04b")
            q = query_from_string(s)
            via_relevant = infer_pos(relevant_kb(q, strings_direct_kb), q)
            via_full = infer_pos(strings_direct_kb, q, engine="lp")
            assert via_relevant.label == via_full.label
            assert via_relevant.p_avg == pytest.approx(via_full.p_avg, abs=1e-6)


class TestActiveKb:
    def test_keeps_bodyless_class_clause(self):
        kb = KnowledgeBase(
            [
                WeightedClause(0.75, rule_clause([])),
                WeightedClause(0.5, rule_clause([("a", "1")])),
            ]
        )
        sub = active_kb({"a": "0"}, kb)
        assert serialize_kb(sub) == "0.750000 pos"

    def test_falls_back_to_whole_kb_for_non_rule_clauses(self):
        kb = parse_kb("0.5 a | b\n0.7 pos | !f=1")
        assert active_kb({"f": "1"}, kb) is kb

    def test_matches_full_inference_on_tree_kbs(self, strings_tree_kb):
        for bits in range(16):
            s = format(bits, "04b")
            q = query_from_string(s)
            via_active = infer_pos(active_kb(q, strings_tree_kb), q)
            via_full = infer_pos(strings_tree_kb, q, engine="lp")
            assert via_active.label == via_full.label
            assert via_active.p_avg == pytest.approx(via_full.p_avg, abs=1e-6)


class TestSubsetCounter:
    def test_merge_is_partition_independent(self):
        rng = random.Random(13)
        ds = random_dataset(rng, max_features=4, max_rows=20)
        arity = len(ds.features)
        whole = SubsetCounter()
        for inst in ds.instances:
            whole.add_instance(inst.values, inst.label, arity)
        for cut in (1, len(ds) // 2, len(ds) - 1):
            left = SubsetCounter()
            right = SubsetCounter()
            for inst in ds.instances[:cut]:
                left.add_instance(inst.values, inst.label, arity)
            for inst in ds.instances[cut:]:
                right.add_instance(inst.values, inst.label, arity)
            assert left.merge(right).counts == whole.counts
            assert right.merge(left).counts == whole.counts

    def test_merge_does_not_mutate_inputs(self):
        a = SubsetCounter({(("f", "1"),): [2, 1]})
        b = SubsetCounter({(("f", "1"),): [3, 0]})
        merged = a.merge(b)
        assert merged.counts == {(("f", "1"),): [5, 1]}
        assert a.counts == {(("f", "1"),): [2, 1]}
        assert b.counts == {(("f", "1"),): [3, 0]}
