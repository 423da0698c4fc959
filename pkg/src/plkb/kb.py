"""Weighted propositional clauses and the knowledge-base text format.

A knowledge base is a set of disjunction clauses, each paired with a
probability.  Learned clauses always have the shape
``pos | !f1=v1 | ... | !fk=vk`` ("these feature values imply the positive
class"), but the container and the text format also accept arbitrary
clauses over bare propositional atoms, which is useful for hand-written
knowledge and for consistency experiments.

All values are immutable; operations that change a knowledge base return
a new one, so instances can be shared freely across threads.  Atoms and
literals are interned: direct construction stays valid, but the module
helpers reuse instances because learned KBs hold hundreds of thousands
of clauses over a few hundred distinct atoms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

Probability = Union[float, Fraction]

CLASS_ATOM_NAME = "pos"

_NAME_RE = re.compile(r"[^\s=|!,#]+\Z")


class KBParseError(ValueError):
    """Raised for malformed knowledge-base text; carries a line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _check_name(kind: str, s: str) -> str:
    if not s or not _NAME_RE.match(s):
        raise ValueError(
            f"invalid {kind} {s!r}: must be non-empty and contain no "
            "whitespace, '=', '|', '!', ',' or '#'"
        )
    return s


class Atom:
    """A propositional atom.

    Three spellings exist: the distinguished class atom ``pos``, a bare
    proposition ``name``, and a feature-value pair ``feature=value``.
    """

    __slots__ = ("feature", "value", "_hash")

    def __init__(self, feature: str, value: str | None = None):
        _check_name("atom name", feature)
        if value is not None:
            _check_name("atom value", value)
            if feature == CLASS_ATOM_NAME:
                raise ValueError(f"feature name {CLASS_ATOM_NAME!r} is reserved")
        self.feature = feature
        self.value = value
        self._hash = hash((feature, value))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Atom):
            return NotImplemented
        return self.feature == other.feature and self.value == other.value

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Atom({self.feature!r}, {self.value!r})"

    @property
    def is_class_atom(self) -> bool:
        return self.feature == CLASS_ATOM_NAME and self.value is None

    def __str__(self) -> str:
        if self.value is None:
            return self.feature
        return f"{self.feature}={self.value}"


POS = Atom(CLASS_ATOM_NAME)

_ATOM_CACHE: dict[tuple[str, str | None], Atom] = {(CLASS_ATOM_NAME, None): POS}
_LITERAL_CACHE: dict[tuple[str, str | None, bool], "Literal"] = {}


def _atom(feature: str, value: str | None = None) -> Atom:
    key = (feature, value)
    a = _ATOM_CACHE.get(key)
    if a is None:
        a = _ATOM_CACHE[key] = Atom(feature, value)
    return a


class Literal:
    __slots__ = ("atom", "negated", "_hash")

    def __init__(self, atom: Atom, negated: bool = False):
        self.atom = atom
        self.negated = negated
        self._hash = hash((atom, negated))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Literal):
            return NotImplemented
        return self.negated == other.negated and self.atom == other.atom

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Literal({self.atom!r}, {self.negated!r})"

    def __str__(self) -> str:
        return ("!" if self.negated else "") + str(self.atom)


def _literal(atom: Atom, negated: bool = False) -> Literal:
    key = (atom.feature, atom.value, negated)
    lit = _LITERAL_CACHE.get(key)
    if lit is None:
        lit = _LITERAL_CACHE[key] = Literal(atom, negated)
    return lit


_PAIR_LITERAL_CACHE: dict[tuple[str, str], Literal] = {}


def _negated_pair_literal(pair: tuple[str, str]) -> Literal:
    lit = _PAIR_LITERAL_CACHE.get(pair)
    if lit is None:
        lit = _PAIR_LITERAL_CACHE[pair] = _literal(_atom(*pair), True)
    return lit


_POS_LITERAL = _literal(POS)


def _literal_sort_key(lit: Literal):
    return (0 if lit.atom.is_class_atom else 1, lit.atom.feature, lit.atom.value or "")


class Clause:
    """A disjunction of literals, stored in canonical order.

    Canonical order puts the class atom first, then remaining literals
    sorted by (name, value).  Duplicates collapse; a literal next to its
    own negation is rejected.  Equality and hashing follow the canonical
    tuple, so clauses compare order-insensitively.
    """

    __slots__ = ("literals", "_hash", "_body", "_rule")

    literals: tuple[Literal, ...]

    def __init__(self, literals: Iterable[Literal]):
        seen: dict[Atom, Literal] = {}
        for lit in literals:
            prev = seen.get(lit.atom)
            if prev is not None and prev.negated != lit.negated:
                raise ValueError(f"clause contains both {prev} and {lit}")
            seen[lit.atom] = lit
        ordered = tuple(sorted(seen.values(), key=_literal_sort_key))
        if not ordered:
            raise ValueError("clause must contain at least one literal")
        self.literals = ordered
        self._hash = hash(ordered)
        self._body = None
        self._rule = None

    @classmethod
    def _trusted(
        cls,
        ordered: tuple[Literal, ...],
        body: frozenset[tuple[str, str]],
        rule: bool,
    ) -> "Clause":
        """Internal: accept pre-canonicalised literals without re-checking."""
        self = cls.__new__(cls)
        self.literals = ordered
        self._hash = hash(ordered)
        self._body = body
        self._rule = rule
        return self

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Clause):
            return NotImplemented
        return self.literals == other.literals

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Clause({self.literals!r})"

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(lit.atom for lit in self.literals)

    def has_positive(self, atom: Atom) -> bool:
        return any(lit.atom == atom and not lit.negated for lit in self.literals)

    @property
    def body(self) -> frozenset[tuple[str, str]]:
        """Feature-value pairs appearing negated in the clause.

        For learned clauses (``pos | !f=v | ...``) this is the rule body.
        """
        if self._body is None:
            self._body = frozenset(
                (lit.atom.feature, lit.atom.value)
                for lit in self.literals
                if lit.negated and lit.atom.value is not None
            )
        return self._body

    @property
    def is_rule_shaped(self) -> bool:
        """True when the clause is ``pos`` plus negated feature-value literals."""
        if self._rule is None:
            saw_pos = False
            ok = True
            for lit in self.literals:
                if lit.atom.is_class_atom:
                    if lit.negated:
                        ok = False
                        break
                    saw_pos = True
                elif not lit.negated or lit.atom.value is None:
                    ok = False
                    break
            self._rule = ok and saw_pos
        return self._rule

    def __str__(self) -> str:
        return " | ".join(str(lit) for lit in self.literals)


def rule_clause(pairs: Iterable[tuple[str, str]]) -> Clause:
    """Build ``pos | !f1=v1 | ...`` from feature-value pairs."""
    ordered_pairs = sorted(pairs)
    feats = [f for f, _ in ordered_pairs]
    if len(set(feats)) != len(feats):
        raise ValueError(f"rule body repeats a feature: {feats}")
    lits = [_POS_LITERAL]
    lits.extend(_negated_pair_literal(p) for p in ordered_pairs)
    return Clause._trusted(tuple(lits), frozenset(ordered_pairs), True)


@dataclass(frozen=True)
class WeightedClause:
    probability: Probability
    clause: Clause

    def __post_init__(self):
        if not 0 <= self.probability <= 1:
            raise ValueError(f"probability {self.probability} outside [0, 1]")

    def __str__(self) -> str:
        return f"{float(self.probability):.6f} {self.clause}"


@dataclass(frozen=True)
class KnowledgeBase:
    """An immutable collection of weighted clauses, unique by clause.

    Duplicate clauses with the same probability collapse at construction;
    duplicates with different probabilities are an error (use
    :func:`merge` for override semantics).
    """

    clauses: tuple[WeightedClause, ...] = field(default=())

    def __init__(self, clauses: Iterable[WeightedClause] = ()):
        by_clause: dict[Clause, WeightedClause] = {}
        for wc in clauses:
            prev = by_clause.get(wc.clause)
            if prev is not None and prev.probability != wc.probability:
                raise ValueError(
                    f"duplicate clause {wc.clause} with conflicting "
                    f"probabilities {prev.probability} and {wc.probability}"
                )
            by_clause[wc.clause] = wc
        object.__setattr__(self, "clauses", tuple(by_clause.values()))

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[WeightedClause]:
        return iter(self.clauses)

    def __repr__(self) -> str:
        return f"KnowledgeBase(<{len(self.clauses)} clauses, {len(self.universe)} atoms>)"

    @cached_property
    def universe(self) -> frozenset[Atom]:
        return frozenset(a for wc in self.clauses for a in wc.clause.atoms)

    @cached_property
    def by_body(self) -> dict[frozenset[tuple[str, str]], WeightedClause]:
        """Rule-shaped clauses indexed by body; empty if any clause is not a rule."""
        index: dict[frozenset[tuple[str, str]], WeightedClause] = {}
        for wc in self.clauses:
            if not wc.clause.is_rule_shaped:
                return {}
            index[wc.clause.body] = wc
        return index

    def probability_of(self, clause: Clause) -> Probability | None:
        for wc in self.clauses:
            if wc.clause == clause:
                return wc.probability
        return None


def parse_kb(text: str) -> KnowledgeBase:
    """Parse the one-clause-per-line text format.

    Grammar per line: ``prob SP lit (" | " lit)*`` where ``lit`` is an
    optionally ``!``-prefixed atom (``pos``, a bare name, or ``name=value``).
    ``#`` starts a comment; blank lines are skipped.  Probabilities are
    parsed as exact decimals.
    """
    out: list[WeightedClause] = []
    seen: dict[Clause, tuple[int, Probability]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise KBParseError(line_no, f"expected 'probability clause', got {line!r}")
        prob_text, clause_text = parts
        try:
            prob = Fraction(prob_text)
        except (ValueError, ZeroDivisionError):
            raise KBParseError(line_no, f"bad probability {prob_text!r}") from None
        if not 0 <= prob <= 1:
            raise KBParseError(line_no, f"probability {prob_text} outside [0, 1]")
        literals = []
        for tok in clause_text.split("|"):
            tok = tok.strip()
            if not tok:
                raise KBParseError(line_no, "empty literal")
            negated = tok.startswith("!")
            if negated:
                tok = tok[1:].strip()
            name, eq, value = tok.partition("=")
            try:
                atom = _atom(name, value) if eq else _atom(name)
            except ValueError as exc:
                raise KBParseError(line_no, str(exc)) from None
            literals.append(_literal(atom, negated))
        try:
            clause = Clause(literals)
        except ValueError as exc:
            raise KBParseError(line_no, str(exc)) from None
        prev = seen.get(clause)
        if prev is not None:
            prev_line, prev_prob = prev
            if prev_prob != prob:
                raise KBParseError(
                    line_no,
                    f"clause {clause} already given probability "
                    f"{float(prev_prob):.6f} on line {prev_line}",
                )
            continue
        seen[clause] = (line_no, prob)
        out.append(WeightedClause(prob, clause))
    return KnowledgeBase(out)


def serialize_kb(kb: KnowledgeBase) -> str:
    """Render one line per clause, sorted by the clause's canonical text."""
    lines = sorted(
        (str(wc.clause), f"{float(wc.probability):.6f}") for wc in kb.clauses
    )
    return "\n".join(f"{prob} {clause}" for clause, prob in lines)


def merge(kb: KnowledgeBase, extra: Sequence[WeightedClause]) -> KnowledgeBase:
    """Overlay hand-written clauses onto a learned knowledge base.

    Supplied clauses must contain the class atom positively.  A clause that
    already exists keeps its position but takes the supplied probability:
    domain knowledge wins over the learned value.  Inconsistency between
    the merged clauses is fine; inference tolerates it.
    """
    for wc in extra:
        if not wc.clause.has_positive(POS):
            raise ValueError(
                f"merged clause {wc.clause} does not contain {CLASS_ATOM_NAME!r} positively"
            )
    merged: dict[Clause, WeightedClause] = {wc.clause: wc for wc in kb.clauses}
    for wc in extra:
        merged[wc.clause] = wc
    return KnowledgeBase(merged.values())
