"""Direct knowledge-base construction by counting labels over all
feature-value subsets of each instance, plus query-relevant extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping

from .data import Dataset
from .kb import KnowledgeBase, WeightedClause, rule_clause

Query = Mapping[str, str]

# Beyond this many features an unbounded subset pass is clearly a mistake.
MAX_UNBOUNDED_FEATURES = 20


@dataclass
class SubsetCounter:
    """(total, positive) sample counts per feature-value subset.

    Keys are sorted tuples of (feature, value) pairs, the canonical set
    encoding.  Counters merge associatively, so counting can be
    partitioned across instance chunks and combined in any order.
    """

    counts: dict[tuple[tuple[str, str], ...], list[int]] = field(default_factory=dict)

    def add_instance(self, values: Mapping[str, str], label: bool, max_arity: int):
        pairs = sorted(values.items())
        hit = int(label)
        counts = self.counts
        for k in range(1, min(max_arity, len(pairs)) + 1):
            # combinations of a sorted list come out sorted: canonical keys
            for key in combinations(pairs, k):
                entry = counts.get(key)
                if entry is None:
                    counts[key] = [1, hit]
                else:
                    entry[0] += 1
                    entry[1] += hit

    def merge(self, other: "SubsetCounter") -> "SubsetCounter":
        out = SubsetCounter({k: list(v) for k, v in self.counts.items()})
        for key, (total, pos) in other.counts.items():
            entry = out.counts.get(key)
            if entry is None:
                out.counts[key] = [total, pos]
            else:
                entry[0] += total
                entry[1] += pos
        return out

    def to_kb(self) -> KnowledgeBase:
        clauses = [
            WeightedClause(Fraction(pos, total), rule_clause(key))
            for key, (total, pos) in self.counts.items()
        ]
        return KnowledgeBase(clauses)


def build_direct_kb(train: Dataset, max_arity: int | None = None) -> KnowledgeBase:
    """One clause ``[n_pos/n_total] pos | !k1 | ... | !kj`` per observed
    feature-value subset of size <= max_arity (None = unbounded).

    Probabilities are exact rationals.  The unbounded pass enumerates
    2^n subsets per instance, so it is refused above
    ``MAX_UNBOUNDED_FEATURES`` features without an explicit cap.
    """
    if len(train) == 0:
        raise ValueError("cannot build a knowledge base from an empty dataset")
    n_features = len(train.features)
    if max_arity is None:
        if n_features > MAX_UNBOUNDED_FEATURES:
            raise ValueError(
                f"{n_features} features need an explicit max_arity "
                f"(unbounded subset pass allowed up to {MAX_UNBOUNDED_FEATURES})"
            )
        max_arity = n_features
    if max_arity < 1:
        raise ValueError("max_arity must be >= 1")
    counter = SubsetCounter()
    for inst in train.instances:
        counter.add_instance(inst.values, inst.label, max_arity)
    return counter.to_kb()


def _select_subset_clauses(
    query: Query, kb: KnowledgeBase, include_empty: bool
) -> KnowledgeBase:
    pairs = set(query.items())
    index = kb.by_body
    # The index exists only when every clause is rule-shaped, in which case
    # clause <-> body is a bijection.  Enumerating query subsets beats a
    # full scan unless the query is wide relative to the KB.
    if len(index) == len(kb.clauses) and 2 ** len(pairs) <= 8 * len(kb.clauses) + 64:
        selected = []
        if include_empty:
            wc = index.get(frozenset())
            if wc is not None:
                selected.append(wc)
        ordered = sorted(pairs)
        for k in range(1, len(pairs) + 1):
            for combo in combinations(ordered, k):
                wc = index.get(frozenset(combo))
                if wc is not None:
                    selected.append(wc)
        return KnowledgeBase(selected)
    selected = [
        wc
        for wc in kb.clauses
        if wc.clause.is_rule_shaped
        and (include_empty or wc.clause.body)
        and wc.clause.body <= pairs
    ]
    return KnowledgeBase(selected)


def relevant_kb(query: Query, kb: KnowledgeBase) -> KnowledgeBase:
    """Clauses whose negated feature-value set is a non-empty subset of
    the query's pairs.

    For a full query this sub-KB classifies identically to ``kb``: every
    dropped clause has a literal the query forces true, which pins the
    clause and decouples it from the class atom.
    """
    return _select_subset_clauses(query, kb, include_empty=False)


def relevant_kb_scan(query: Query, kb: KnowledgeBase) -> KnowledgeBase:
    """Reference implementation of relevant extraction: scan every clause
    and keep those whose body is a non-empty subset of the query."""
    pairs = set(query.items())
    selected = [
        wc
        for wc in kb.clauses
        if wc.clause.is_rule_shaped and wc.clause.body and wc.clause.body <= pairs
    ]
    return KnowledgeBase(selected)


def active_kb(query: Query, kb: KnowledgeBase) -> KnowledgeBase:
    """Like :func:`relevant_kb` but keeps body-less class-atom clauses too.

    Used by the evaluation pipeline: a bare ``[p] pos`` clause (single-leaf
    tree) constrains every query, so dropping it would change results.
    Falls back to the whole KB when some clause is not rule-shaped, since
    the neutralisation argument only covers rule clauses.
    """
    if len(kb.by_body) != len(kb.clauses):
        return kb
    return _select_subset_clauses(query, kb, include_empty=True)
