"""Shared test fixtures: the worked example dataset, random generators,
and independent brute-force oracles."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from plkb.data import Dataset, from_rows
from plkb.kb import Atom, Clause, KnowledgeBase, Literal, WeightedClause

# Eight labelled bit-strings over features a1..a4; small enough to check
# every derived number by hand.
POSITIVE_STRINGS = ["0000", "1111", "1010", "1100"]
NEGATIVE_STRINGS = ["0010", "0100", "1110", "1000"]
STRING_FEATURES = ["a1", "a2", "a3", "a4"]


def eight_strings_dataset() -> Dataset:
    rows = [(tuple(s), True) for s in POSITIVE_STRINGS]
    rows += [(tuple(s), False) for s in NEGATIVE_STRINGS]
    return from_rows(STRING_FEATURES, rows)


def query_from_string(s: str) -> dict[str, str]:
    return {f"a{i}": ch for i, ch in enumerate(s, start=1)}


def empirical_probability(ds: Dataset, pairs) -> Fraction | None:
    """Brute-force recount: P(label | all pairs hold), None if unsupported."""
    total = 0
    pos = 0
    for inst in ds.instances:
        if all(inst.values[f] == v for f, v in pairs):
            total += 1
            pos += int(inst.label)
    if total == 0:
        return None
    return Fraction(pos, total)


def random_dataset(rng: random.Random, max_features=6, max_values=3, max_rows=40) -> Dataset:
    n_features = rng.randint(1, max_features)
    n_values = rng.randint(2, max_values)
    n_rows = rng.randint(2, max_rows)
    features = [f"f{i}" for i in range(1, n_features + 1)]
    values = [str(v) for v in range(n_values)]
    rows = []
    for _ in range(n_rows):
        vals = tuple(rng.choice(values) for _ in features)
        rows.append((vals, rng.random() < 0.5))
    return from_rows(features, rows)


def world_probabilities(rng: random.Random, n_atoms: int) -> list[float]:
    weights = [rng.random() + 1e-9 for _ in range(2 ** n_atoms)]
    total = sum(weights)
    return [w / total for w in weights]


def random_clause_over(rng: random.Random, atoms: list[Atom]) -> Clause:
    size = rng.randint(1, len(atoms))
    chosen = rng.sample(atoms, size)
    return Clause(Literal(a, rng.random() < 0.5) for a in chosen)


def clause_probability_from_worlds(clause: Clause, atoms: list[Atom], omega: list[float]) -> float:
    """Sum the world probabilities of every complete conjunction that
    satisfies the clause (the falsifying pattern is unique)."""
    idx = {a: i for i, a in enumerate(atoms)}
    mask = 0
    want = 0
    for lit in clause.literals:
        bit = 1 << idx[lit.atom]
        mask |= bit
        if lit.negated:
            want |= bit
    return sum(p for w, p in enumerate(omega) if (w & mask) != want)


def _clause_count_cap(n_atoms: int, n_clauses: int) -> int:
    # there are 3^n - 1 distinct clauses over n atoms (each atom absent,
    # positive, or negated)
    return min(n_clauses, 3 ** n_atoms - 1)


def satisfiable_random_kb(
    rng: random.Random, n_atoms: int, n_clauses: int
) -> tuple[KnowledgeBase, list[Atom]]:
    """A KB whose clause probabilities come from an explicit random world
    distribution, hence satisfiable by construction."""
    atoms = [Atom(f"x{i}") for i in range(1, n_atoms + 1)]
    omega = world_probabilities(rng, n_atoms)
    by_clause = {}
    while len(by_clause) < _clause_count_cap(n_atoms, n_clauses):
        clause = random_clause_over(rng, atoms)
        if clause in by_clause:
            continue
        p = clause_probability_from_worlds(clause, atoms, omega)
        by_clause[clause] = WeightedClause(min(max(p, 0.0), 1.0), clause)
    return KnowledgeBase(by_clause.values()), atoms


def arbitrary_random_kb(
    rng: random.Random, n_atoms: int, n_clauses: int
) -> tuple[KnowledgeBase, list[Atom]]:
    """A KB with arbitrary clause probabilities; may be unsatisfiable."""
    atoms = [Atom(f"x{i}") for i in range(1, n_atoms + 1)]
    by_clause = {}
    while len(by_clause) < _clause_count_cap(n_atoms, n_clauses):
        clause = random_clause_over(rng, atoms)
        if clause in by_clause:
            continue
        by_clause[clause] = WeightedClause(rng.random(), clause)
    return KnowledgeBase(by_clause.values()), atoms


def all_subsets(pairs):
    items = sorted(pairs)
    for k in range(1, len(items) + 1):
        yield from combinations(items, k)
