"""Linear-programming inference over weighted-clause knowledge bases.

The program built here estimates literal probabilities from clause
probabilities.  For a KB with clauses c_i (probability p_i) over literals
z, the variables are pi(z), pi(!z) per atom and pi(c_i) per clause, with

    pi(c_i) <= sum of pi(z) for z in c_i          (union bound)
    pi(c_i) >= pi(z)        for each z in c_i     (monotonicity)
    pi(z) + pi(!z) = 1,  all variables in [0, 1]

and objective  minimise sum_i |pi(c_i) - p_i|,  linearised through
deviation variables e+_i, e-_i >= 0 with pi(c_i) - p_i = e+_i - e-_i.
Minimising the deviation instead of forcing pi(c_i) = p_i is what lets
inconsistent knowledge coexist: clause probabilities bend as little as
possible.

Classification asks for the class atom's probability under a query.
Query feature values are hard constraints (pi(a=v) fixed to 1, sibling
values to 0); the knowledge is soft.  Because the optimum of pi(pos) is
generally a range, inference solves lexicographically: first the minimal
deviation v*, then min/max of the target probability subject to the
deviation staying within v* + TAU_LEX.  The label is positive only when
the midpoint exceeds 0.5.

An exact world-distribution oracle (all 2^n complete conjunctions) is
included for cross-checking on small universes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix, vstack

from .kb import POS, Atom, KnowledgeBase, Literal

logger = logging.getLogger(__name__)

TAU_FEAS = 1e-7   # solver feasibility tolerance
# Slack when re-fixing the stage-1 objective.  It must absorb solver noise
# in v* yet stay small enough that the bound inflation it causes (slack
# divided by the deviation slope, often exactly the slack) sits well under
# the 1e-6 tolerances the probability bounds are checked at.
TAU_LEX = 1e-7
TAU_ZERO = 1e-6   # deviation below this hints consistency
# A bound midpoint of exactly 0.5 classifies negative; the band keeps that
# rule stable when solver noise perturbs the midpoint by ~TAU_LEX.
LABEL_EPS = 1e-6

LE = "<="
EQ = "=="


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[tuple[int, float], ...]
    sense: str
    rhs: float


@dataclass(frozen=True)
class LinearProgram:
    """A minimisation LP with boxed variables.

    ``atom_index`` maps each atom to the variable index of its positive
    literal; the negative literal sits at the next index.  The semantic
    maps are empty for hand-built programs.
    """

    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[int, float], ...]
    bounds: tuple[tuple[float, float | None], ...]
    atom_index: dict[Atom, int] = field(default_factory=dict)
    clause_vars: tuple[int, ...] = ()
    deviation_vars: tuple[int, ...] = ()

    @property
    def n_variables(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class LpSolution:
    values: dict[str, float]
    objective_value: float
    status: str  # optimal | infeasible | unbounded


@dataclass(frozen=True)
class InferenceResult:
    p_lower: float
    p_upper: float
    p_avg: float
    objective_min: float
    label: bool


def _atom_sort_key(atom: Atom):
    return (0 if atom.is_class_atom else 1, atom.feature, atom.value or "")


def _literal_var(atom_index: Mapping[Atom, int], lit: Literal) -> int:
    return atom_index[lit.atom] + (1 if lit.negated else 0)


def build_lp(kb: KnowledgeBase) -> LinearProgram:
    """Construct the program described in the module docstring.

    Variable layout: positive/negative literal pairs per atom, then one
    variable per clause, then the deviation pair per clause.  Constraint
    order: union bounds, monotonicity, complement equalities, deviation
    equalities.
    """
    if len(kb) == 0:
        raise ValueError("cannot build a program from an empty knowledge base")
    atoms = sorted(kb.universe, key=_atom_sort_key)
    atom_index = {a: 2 * i for i, a in enumerate(atoms)}
    names: list[str] = []
    for a in atoms:
        names.append(str(a))
        names.append(f"!{a}")
    n = len(atoms)
    m = len(kb.clauses)
    clause_vars = tuple(2 * n + i for i in range(m))
    names.extend(f"c{i}" for i in range(m))
    dev_vars = tuple(2 * n + m + i for i in range(2 * m))
    names.extend(x for i in range(m) for x in (f"dev+{i}", f"dev-{i}"))

    union_rows: list[Constraint] = []
    mono_rows: list[Constraint] = []
    dev_rows: list[Constraint] = []
    for i, wc in enumerate(kb.clauses):
        cv = clause_vars[i]
        lit_vars = [_literal_var(atom_index, lit) for lit in wc.clause.literals]
        union_rows.append(
            Constraint(
                ((cv, 1.0), *((v, -1.0) for v in lit_vars)), LE, 0.0
            )
        )
        for v in lit_vars:
            mono_rows.append(Constraint(((v, 1.0), (cv, -1.0)), LE, 0.0))
        ep, em = dev_vars[2 * i], dev_vars[2 * i + 1]
        dev_rows.append(
            Constraint(((cv, 1.0), (ep, -1.0), (em, 1.0)), EQ, float(wc.probability))
        )
    complement_rows = [
        Constraint(((atom_index[a], 1.0), (atom_index[a] + 1, 1.0)), EQ, 1.0)
        for a in atoms
    ]

    bounds: list[tuple[float, float | None]] = [(0.0, 1.0)] * (2 * n + m)
    bounds.extend([(0.0, None)] * (2 * m))
    objective = tuple((v, 1.0) for v in dev_vars)
    return LinearProgram(
        variables=tuple(names),
        constraints=tuple(union_rows + mono_rows + complement_rows + dev_rows),
        objective=objective,
        bounds=tuple(bounds),
        atom_index=atom_index,
        clause_vars=clause_vars,
        deviation_vars=dev_vars,
    )


def apply_query(
    lp: LinearProgram,
    query: Mapping[str, str],
    domains: Mapping[str, frozenset[str] | set[str]] | None = None,
) -> LinearProgram:
    """Fix pi(a=v) = 1 for each queried pair and pi(a=v') = 0 for every
    sibling value present in the program; unqueried features stay free.

    Atoms the program never mentions are skipped silently.  When
    ``domains`` is given, a query value outside its feature's domain is
    logged as a warning but the asserted atom is still fixed if present.
    """
    by_feature: dict[str, list[Atom]] = {}
    for atom in lp.atom_index:
        if atom.value is not None:
            by_feature.setdefault(atom.feature, []).append(atom)
    bounds = list(lp.bounds)
    for feature, value in sorted(query.items()):
        if domains is not None:
            if feature not in domains:
                raise ValueError(f"query feature {feature!r} not in domains")
            if value not in domains[feature]:
                logger.warning(
                    "query value %s=%s outside the feature's domain", feature, value
                )
        for atom in by_feature.get(feature, ()):
            idx = lp.atom_index[atom]
            fixed = 1.0 if atom.value == value else 0.0
            bounds[idx] = (fixed, fixed)
    return replace(lp, bounds=tuple(bounds))


def _assemble(lp: LinearProgram):
    ub_rows, ub_cols, ub_vals, b_ub = [], [], [], []
    eq_rows, eq_cols, eq_vals, b_eq = [], [], [], []
    for con in lp.constraints:
        if con.sense == LE:
            r = len(b_ub)
            for col, val in con.coeffs:
                ub_rows.append(r)
                ub_cols.append(col)
                ub_vals.append(val)
            b_ub.append(con.rhs)
        else:
            r = len(b_eq)
            for col, val in con.coeffs:
                eq_rows.append(r)
                eq_cols.append(col)
                eq_vals.append(val)
            b_eq.append(con.rhs)
    nv = lp.n_variables
    a_ub = (
        csr_matrix((ub_vals, (ub_rows, ub_cols)), shape=(len(b_ub), nv))
        if b_ub
        else None
    )
    a_eq = (
        csr_matrix((eq_vals, (eq_rows, eq_cols)), shape=(len(b_eq), nv))
        if b_eq
        else None
    )
    return a_ub, (np.array(b_ub) if b_ub else None), a_eq, (np.array(b_eq) if b_eq else None)


_STATUS = {0: "optimal", 1: "iteration limit", 2: "infeasible", 3: "unbounded", 4: "numerical"}


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Minimise the program's own objective; exact within solver tolerance."""
    a_ub, b_ub, a_eq, b_eq = _assemble(lp)
    c = np.zeros(lp.n_variables)
    for idx, coef in lp.objective:
        c[idx] += coef
    res = linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=list(lp.bounds),
        method="highs",
    )
    status = _STATUS.get(res.status, "numerical")
    if status == "unbounded":
        raise RuntimeError("internal error: boxed program reported unbounded")
    values = (
        dict(zip(lp.variables, (float(v) for v in res.x))) if res.x is not None else {}
    )
    objective = float(res.fun) if res.fun is not None else float("nan")
    return LpSolution(values=values, objective_value=objective, status=status)


def _solve_vector(c, a_ub, b_ub, a_eq, b_eq, bounds):
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs")
    if res.status != 0:
        raise RuntimeError(
            f"internal error: solver returned {_STATUS.get(res.status, res.status)}"
        )
    return res


def _stage_one_arrays(lp: LinearProgram):
    a_ub, b_ub, a_eq, b_eq = _assemble(lp)
    c1 = np.zeros(lp.n_variables)
    for idx, coef in lp.objective:
        c1[idx] += coef
    return a_ub, b_ub, a_eq, b_eq, c1


def minimum_deviation(lp: LinearProgram) -> float:
    """Stage-1 objective value: the least total clause-probability bend."""
    a_ub, b_ub, a_eq, b_eq, c1 = _stage_one_arrays(lp)
    res = _solve_vector(c1, a_ub, b_ub, a_eq, b_eq, list(lp.bounds))
    return float(res.fun)


def _bounded_target(lp: LinearProgram, target_var: int) -> tuple[float, float, float]:
    """Lexicographic solve: (v*, min, max) of the target variable."""
    a_ub, b_ub, a_eq, b_eq, c1 = _stage_one_arrays(lp)
    bounds = list(lp.bounds)
    res1 = _solve_vector(c1, a_ub, b_ub, a_eq, b_eq, bounds)
    v_star = float(res1.fun)

    dev_row = csr_matrix(
        (np.ones(len(lp.deviation_vars)),
         (np.zeros(len(lp.deviation_vars), dtype=int), np.array(lp.deviation_vars))),
        shape=(1, lp.n_variables),
    )
    a_ub2 = vstack([a_ub, dev_row]) if a_ub is not None else dev_row
    b_ub2 = (
        np.concatenate([b_ub, [v_star + TAU_LEX]])
        if b_ub is not None
        else np.array([v_star + TAU_LEX])
    )
    ct = np.zeros(lp.n_variables)
    ct[target_var] = 1.0
    lo = float(_solve_vector(ct, a_ub2, b_ub2, a_eq, b_eq, bounds).x[target_var])
    hi = float(_solve_vector(-ct, a_ub2, b_ub2, a_eq, b_eq, bounds).x[target_var])
    return v_star, lo, hi


def _pinned_probs(
    kb: KnowledgeBase, query: Mapping[str, str], target: Atom
) -> list[float] | None:
    """Clause probabilities when the program collapses to one unknown.

    If every clause holds the target positively and all its other literals
    are negated feature-value pairs the query asserts, then each pi(c_i)
    is squeezed to pi(target) and the whole program is
    ``minimise sum |p - p_i|`` over a single scalar.
    """
    probs: list[float] = []
    if target == POS:
        pairs = set(query.items())
        for wc in kb.clauses:
            clause = wc.clause
            if not (clause.is_rule_shaped and clause.body <= pairs):
                return None
            probs.append(float(wc.probability))
        return probs
    for wc in kb.clauses:
        saw_target = False
        for lit in wc.clause.literals:
            if lit.atom == target and not lit.negated:
                saw_target = True
            elif (
                lit.negated
                and lit.atom.value is not None
                and query.get(lit.atom.feature) == lit.atom.value
            ):
                continue
            else:
                return None
        if not saw_target:
            return None
        probs.append(float(wc.probability))
    return probs


def _median_interval(probs: list[float]) -> tuple[float, float, float]:
    """(v*, lo, hi) of p in [0,1] minimising f(p) = sum |p - p_i|.

    f is piecewise linear and convex; its exact minimisers are the median
    interval of the multiset (a single order statistic for odd counts, the
    segment between the two middle ones for even counts).
    """
    srt = sorted(probs)
    n = len(srt)
    lo = srt[(n - 1) // 2]
    hi = srt[n // 2]
    v_star = float(sum(abs(lo - p) for p in srt))
    return v_star, lo, hi


def infer_pos(
    kb: KnowledgeBase,
    query: Mapping[str, str] | None = None,
    domains: Mapping[str, frozenset[str] | set[str]] | None = None,
    *,
    target: Atom = POS,
    engine: str = "auto",
) -> InferenceResult:
    """Bound the target atom's probability under the query and classify.

    Three-stage solve as described in the module docstring; the label is
    True only when the bound midpoint exceeds 0.5.  An empty knowledge
    base leaves the target unconstrained and yields the maximally
    uncertain result.  ``engine="lp"`` forces the solver path even when
    the program collapses to the exact one-unknown form.
    """
    if engine not in ("auto", "lp"):
        raise ValueError(f"unknown engine {engine!r}")
    query = dict(query or {})
    if len(kb) == 0:
        return InferenceResult(0.0, 1.0, 0.5, 0.0, False)
    if target not in kb.universe:
        raise ValueError(f"target atom {target} does not occur in the knowledge base")

    if engine == "auto":
        probs = _pinned_probs(kb, query, target)
        if probs is not None:
            return _result(*_median_interval(probs))

    lp = apply_query(build_lp(kb), query, domains)
    v_star, lo, hi = _bounded_target(lp, lp.atom_index[target])
    return _result(v_star, lo, hi)


def _result(v_star: float, lo: float, hi: float) -> InferenceResult:
    lo = float(min(max(lo, 0.0), 1.0))
    hi = float(min(max(hi, 0.0), 1.0))
    if lo > hi:
        lo, hi = hi, lo
    avg = (lo + hi) / 2.0
    return InferenceResult(
        p_lower=lo,
        p_upper=hi,
        p_avg=avg,
        objective_min=float(max(v_star, 0.0)),
        label=bool(avg > 0.5 + LABEL_EPS),
    )


def check_consistency(kb: KnowledgeBase) -> tuple[bool, float]:
    """(hint, minimal deviation).  A strictly positive minimum proves the
    KB inconsistent; a zero minimum does not prove consistency, since the
    program relaxes the exact world semantics."""
    if len(kb) == 0:
        return True, 0.0
    v_star = minimum_deviation(build_lp(kb))
    v_star = max(v_star, 0.0)
    return v_star <= TAU_ZERO, v_star


MAX_ORACLE_ATOMS = 16


def nilsson_oracle(kb: KnowledgeBase, target_atom: Atom) -> tuple[bool, float, float]:
    """Exact semantics over all 2^n complete conjunctions.

    Solves for a distribution over worlds matching every clause
    probability exactly; returns (feasible, p_min, p_max) for the target
    atom.  Exponential in the atom count, hence the cap; this is the
    cross-check the relaxed program is validated against.
    """
    atoms = sorted(kb.universe, key=_atom_sort_key)
    n = len(atoms)
    if n > MAX_ORACLE_ATOMS:
        raise ValueError(f"{n} atoms exceed the oracle cap of {MAX_ORACLE_ATOMS}")
    if target_atom not in kb.universe:
        raise ValueError(f"target atom {target_atom} does not occur in the knowledge base")
    idx = {a: i for i, a in enumerate(atoms)}
    worlds = np.arange(2 ** n, dtype=np.int64)

    rows = [np.ones(len(worlds))]
    rhs = [1.0]
    for wc in kb.clauses:
        # the single falsifying pattern: every positive literal's bit clear,
        # every negated literal's bit set
        mask = 0
        want = 0
        for lit in wc.clause.literals:
            bit = 1 << idx[lit.atom]
            mask |= bit
            if lit.negated:
                want |= bit
        satisfied = ((worlds & mask) != want).astype(float)
        rows.append(satisfied)
        rhs.append(float(wc.probability))
    a_eq = np.vstack(rows)
    b_eq = np.array(rhs)
    c = ((worlds >> idx[target_atom]) & 1).astype(float)

    res_min = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res_min.status == 2:
        return False, float("nan"), float("nan")
    if res_min.status != 0:
        raise RuntimeError(f"oracle solve failed: {_STATUS.get(res_min.status)}")
    res_max = linprog(-c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res_max.status != 0:
        raise RuntimeError(f"oracle solve failed: {_STATUS.get(res_max.status)}")
    return True, float(res_min.fun), float(-res_max.fun)


def dump_lp(lp: LinearProgram) -> str:
    """Render in the CPLEX-style text interchange format with generic
    variable names, mapped back in leading comments."""
    lines = ["\\ variable map"]
    lines.extend(f"\\ x{i} = {name}" for i, name in enumerate(lp.variables))
    terms = " + ".join(f"{coef:g} x{i}" for i, coef in lp.objective) or "0 x0"
    lines.append("Minimize")
    lines.append(f" obj: {terms}")
    lines.append("Subject To")
    for r, con in enumerate(lp.constraints):
        parts = []
        for col, val in con.coeffs:
            sign = "-" if val < 0 else "+"
            parts.append(f"{sign} {abs(val):g} x{col}")
        body = " ".join(parts).lstrip("+ ")
        op = "<=" if con.sense == LE else "="
        lines.append(f" r{r}: {body} {op} {con.rhs:g}")
    lines.append("Bounds")
    for i, (lo, hi) in enumerate(lp.bounds):
        if hi is None:
            lines.append(f" {lo:g} <= x{i}")
        else:
            lines.append(f" {lo:g} <= x{i} <= {hi:g}")
    lines.append("End")
    return "\n".join(lines)
