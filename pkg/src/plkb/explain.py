"""k-feature explanations by exhaustive sub-query enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping

from .data import SeedSpec
from .direct import relevant_kb
from .kb import KnowledgeBase
from .lp import InferenceResult, infer_pos

Query = Mapping[str, str]


@dataclass(frozen=True)
class Explanation:
    """The size-k sub-query that extremises the class probability.

    ``direction`` is "max" when the full query classified positive (the
    sub-query most responsible for pushing it up), "min" otherwise.
    """

    sub_query: dict[str, str]
    score: float
    direction: str


def _serialized(sub: dict[str, str]) -> str:
    return ",".join(f"{f}={v}" for f, v in sorted(sub.items()))


def evaluate_sub_query(
    sub: Query,
    kb: KnowledgeBase,
    domains=None,
    *,
    use_relevant: bool = True,
) -> InferenceResult:
    """Score one partial query.

    With ``use_relevant`` the sub-query is answered on its own relevant
    sub-KB, so only clauses about the asserted pairs weigh in; this is the
    evaluation the worked answers of the direct method correspond to.
    Without it, the partial query runs against the full program, where
    clauses over unasserted features also pull on the class atom.
    """
    if use_relevant:
        return infer_pos(relevant_kb(sub, kb), sub, domains)
    return infer_pos(kb, sub, domains)


def compute_explanation(
    query: Query,
    kb: KnowledgeBase,
    k: int,
    domains=None,
    *,
    use_relevant: bool = True,
) -> Explanation:
    """Evaluate every size-k subset of the query and keep the extremum.

    If the full query classifies positive, the sub-query maximising the
    bound midpoint is the explanation; otherwise the minimising one.
    Ties break on the lexicographically smallest serialized sub-query.
    """
    query = dict(query)
    if not 1 <= k <= len(query):
        raise ValueError(f"k={k} out of range for a query of {len(query)} features")
    full = evaluate_sub_query(query, kb, domains, use_relevant=use_relevant)
    positive = full.label

    best: tuple[float, str] | None = None
    best_sub: dict[str, str] | None = None
    best_score = 0.0
    for combo in combinations(sorted(query.items()), k):
        sub = dict(combo)
        score = evaluate_sub_query(sub, kb, domains, use_relevant=use_relevant).p_avg
        key = (-score if positive else score, _serialized(sub))
        if best is None or key < best:
            best = key
            best_sub = sub
            best_score = score
    assert best_sub is not None
    return Explanation(
        sub_query=best_sub,
        score=best_score,
        direction="max" if positive else "min",
    )


def explanation_accuracy(expl: Explanation, spec: SeedSpec) -> float:
    """Fraction of explanation positions whose value equals the seed's."""
    if not expl.sub_query:
        raise ValueError("empty explanation")
    correct = 0
    for feature, value in expl.sub_query.items():
        if not feature.startswith("a"):
            raise ValueError(f"feature {feature!r} is not a string position")
        try:
            pos = int(feature[1:])
        except ValueError:
            raise ValueError(f"feature {feature!r} is not a string position") from None
        if not 1 <= pos <= spec.length:
            raise ValueError(f"position {pos} outside the seed of length {spec.length}")
        if spec.seed[pos - 1] == value:
            correct += 1
    return correct / len(expl.sub_query)


def masked_string(expl: Explanation, length: int) -> str:
    """Render like ``323--1-1--``: explanation values at their positions."""
    out = ["-"] * length
    for feature, value in expl.sub_query.items():
        pos = int(feature[1:])
        out[pos - 1] = value
    return "".join(out)
