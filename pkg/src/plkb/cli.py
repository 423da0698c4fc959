"""Command-line surface.

Every subcommand prints machine-readable JSON to stdout on success (CSV
where noted via --csv/--out) and exits non-zero with a one-line
diagnostic on stderr otherwise.
"""

from __future__ import annotations

import csv as csv_mod
import functools
import json
import sys
from pathlib import Path

import click

from .data import (
    generate_synthetic,
    load_csv,
    load_synthetic,
    random_seed_spec,
    save_synthetic,
)
from .evaluate import (
    ExperimentConfig,
    bench_lp,
    run_eval,
    run_explanation_eval,
    run_knowledge_experiment,
    train_kb,
)
from .explain import compute_explanation, masked_string
from .direct import active_kb
from .kb import merge, parse_kb, serialize_kb
from .lp import build_lp, dump_lp, infer_pos
from .tree import build_id3, format_tree, kb_from_tree


def parse_query(text: str) -> dict[str, str]:
    query: dict[str, str] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, eq, value = part.partition("=")
        if not eq or not name or not value:
            raise ValueError(f"bad query fragment {part!r}; expected feature=value")
        if name in query:
            raise ValueError(f"feature {name!r} assigned twice in query")
        query[name] = value
    return query


def _read_kb(path: str):
    return parse_kb(Path(path).read_text(encoding="utf-8"))


def _domains_for_kb(path: str, kb) -> dict[str, frozenset[str]]:
    """Domains of the KB's features, read from a reference CSV."""
    features = sorted({a.feature for a in kb.universe if a.value is not None})
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv_mod.reader(fh)
        header = next(reader)
        missing = [f for f in features if f not in header]
        if missing:
            raise ValueError(f"domains file lacks columns {missing}")
        cols = {f: header.index(f) for f in features}
        domains: dict[str, set[str]] = {f: set() for f in features}
        for row in reader:
            for f, i in cols.items():
                if i < len(row) and row[i] != "":
                    domains[f].add(row[i])
    return {f: frozenset(vs) for f, vs in domains.items()}


def _emit(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def fail_cleanly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError, RuntimeError, KeyError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
def main():
    """Explainable binary classification with probabilistic knowledge bases."""


method_option = click.option(
    "--method", type=click.Choice(["tree", "tree-all", "direct"]), default="direct",
    show_default=True,
)


@main.command()
@method_option
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--label-col", required=True)
@click.option("--pos-label", required=True)
@click.option("--max-arity", type=int, default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--dump-tree", "tree_path", type=click.Path(), default=None,
              help="Write the learned tree as indented text (tree methods only).")
@fail_cleanly
def train(method, input_path, label_col, pos_label, max_arity, out_path, tree_path):
    """Learn a knowledge base from a CSV and write it out."""
    ds = load_csv(input_path, label_col, pos_label)
    if tree_path and not method.startswith("tree"):
        raise ValueError("--dump-tree only applies to the tree methods")
    if method.startswith("tree"):
        tree = build_id3(ds)
        if tree_path:
            Path(tree_path).write_text(format_tree(tree) + "\n", encoding="utf-8")
        kb = kb_from_tree(tree, "leaves" if method == "tree" else "all_nodes")
    else:
        kb = train_kb(ds, method, max_arity)
    Path(out_path).write_text(serialize_kb(kb) + "\n", encoding="utf-8")
    _emit({"clauses": len(kb), "atoms": len(kb.universe), "out": str(out_path)})


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path())
@click.option("--domains", "domains_path", required=True, type=click.Path())
@click.option("--query", "query_text", required=True)
@click.option("--full-kb", is_flag=True, help="Skip query-active clause extraction.")
@click.option("--dump-lp", "dump_path", type=click.Path(), default=None,
              help="Write the constrained program in LP text format.")
@fail_cleanly
def classify(kb_path, domains_path, query_text, full_kb, dump_path):
    """Classify a (possibly partial) query against a knowledge base."""
    kb = _read_kb(kb_path)
    domains = _domains_for_kb(domains_path, kb)
    query = parse_query(query_text)
    sub = kb if full_kb else active_kb(query, kb)
    if dump_path:
        from .lp import apply_query

        Path(dump_path).write_text(
            dump_lp(apply_query(build_lp(sub), query, domains)) + "\n", encoding="utf-8"
        )
    res = infer_pos(sub, query, domains)
    _emit(
        {
            "label": res.label,
            "p_lower": res.p_lower,
            "p_upper": res.p_upper,
            "p_avg": res.p_avg,
            "objective_min": res.objective_min,
        }
    )


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path())
@click.option("--domains", "domains_path", required=True, type=click.Path())
@click.option("--query", "query_text", required=True)
@click.option("-k", "k", required=True, type=int)
@click.option("--full-kb", is_flag=True,
              help="Score sub-queries on the whole KB instead of their relevant sub-KBs.")
@fail_cleanly
def explain(kb_path, domains_path, query_text, k, full_kb):
    """Report the k most decisive feature values of a query."""
    kb = _read_kb(kb_path)
    domains = _domains_for_kb(domains_path, kb)
    query = parse_query(query_text)
    expl = compute_explanation(query, kb, k, domains, use_relevant=not full_kb)
    payload = {
        "explanation": dict(sorted(expl.sub_query.items())),
        "score": expl.score,
        "direction": expl.direction,
    }
    positions = []
    for f in query:
        if f.startswith("a") and f[1:].isdigit():
            positions.append(int(f[1:]))
        else:
            positions = []
            break
    if positions and sorted(positions) == list(range(1, len(positions) + 1)):
        payload["masked"] = masked_string(expl, len(positions))
    _emit(payload)


@main.command()
@click.option("--length", required=True, type=int)
@click.option("--alphabet", required=True, type=int)
@click.option("--match", "match_count", required=True, type=int)
@click.option("--n", "n_samples", required=True, type=int)
@click.option("--rng-seed", default=0, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@fail_cleanly
def synth(length, alphabet, match_count, n_samples, rng_seed, out_dir):
    """Generate a balanced seed-string dataset plus its ground-truth sidecar."""
    spec = random_seed_spec(length, alphabet, match_count, rng_seed)
    ds = generate_synthetic(spec, n_samples, rng_seed + 1)
    save_synthetic(ds, spec, out_dir)
    _emit(
        {
            "seed": spec.seed,
            "match_count": spec.match_count,
            "n_samples": len(ds),
            "out": str(out_dir),
        }
    )


def _mean(xs):
    return sum(xs) / len(xs)


@main.command(name="eval")
@method_option
@click.option("--input", "input_path", required=True, type=click.Path())
@click.option("--label-col", default="label", show_default=True)
@click.option("--pos-label", default="pos", show_default=True)
@click.option("--max-arity", type=int, default=None)
@click.option("--knowledge", "knowledge_path", type=click.Path(), default=None)
@click.option("--train-fraction", default=0.7, show_default=True)
@click.option("--rng-seed", default=0, type=int, show_default=True)
@click.option("--runs", default=5, type=int, show_default=True)
@fail_cleanly
def eval_cmd(method, input_path, label_col, pos_label, max_arity, knowledge_path,
             train_fraction, rng_seed, runs):
    """Train/test evaluation with per-run F1 and the mean over seeds."""
    ds = load_csv(input_path, label_col, pos_label)
    knowledge = _read_kb(knowledge_path) if knowledge_path else None
    reports = []
    for r in range(runs):
        config = ExperimentConfig(
            dataset=ds, method=method, rng_seed=rng_seed + r,
            train_fraction=train_fraction, max_arity=max_arity, knowledge=knowledge,
        )
        reports.append(run_eval(config))
    _emit(
        {
            "method": method,
            "runs": [r.as_dict() for r in reports],
            "mean_f1": _mean([r.f1 for r in reports]),
        }
    )


@main.command(name="expl-eval")
@method_option
@click.option("--input", "input_dir", required=True, type=click.Path(),
              help="Directory produced by `synth` (data.csv + seed.json).")
@click.option("-k", "k", required=True, type=int)
@click.option("--max-arity", type=int, default=None)
@click.option("--train-fraction", default=0.7, show_default=True)
@click.option("--rng-seed", default=0, type=int, show_default=True)
@click.option("--runs", default=5, type=int, show_default=True)
@click.option("--max-instances", default=None, type=int)
@fail_cleanly
def expl_eval(method, input_dir, k, max_arity, train_fraction, rng_seed, runs,
              max_instances):
    """Mean ground-truth accuracy of k-explanations on synthetic data."""
    ds, spec = load_synthetic(input_dir)
    per_run = []
    for r in range(runs):
        config = ExperimentConfig(
            dataset=ds, method=method, rng_seed=rng_seed + r,
            train_fraction=train_fraction, max_arity=max_arity,
        )
        rep = run_explanation_eval(config, spec, k, max_instances)
        per_run.append(rep)
    _emit(
        {
            "k": k,
            "method": method,
            "runs": [
                {"mean_accuracy": r.mean_accuracy, "n_explained": r.n_explained}
                for r in per_run
            ],
            "mean_accuracy": _mean([r.mean_accuracy for r in per_run]),
        }
    )


@main.command(name="bench-lp")
@click.option("--vars", "n_vars", required=True, type=int)
@click.option("--clauses", "n_clauses", required=True, type=int)
@click.option("--rng-seed", default=0, type=int, show_default=True)
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="Append a result row: n_vars,n_clauses,seconds,objective.")
@fail_cleanly
def bench_lp_cmd(n_vars, n_clauses, rng_seed, csv_path):
    """Time the stage-1 solve on a random knowledge base."""
    res = bench_lp(n_vars, n_clauses, rng_seed)
    if csv_path:
        path = Path(csv_path)
        new = not path.exists()
        with open(path, "a", newline="", encoding="utf-8") as fh:
            writer = csv_mod.writer(fh)
            if new:
                writer.writerow(["n_vars", "n_clauses", "seconds", "objective"])
            writer.writerow([res.n_vars, res.n_clauses, res.seconds, res.objective])
    _emit(
        {
            "n_vars": res.n_vars,
            "n_clauses": res.n_clauses,
            "seconds": res.seconds,
            "objective": res.objective,
        }
    )


@main.command()
@click.option("--kb", "kb_path", required=True, type=click.Path())
@click.option("--knowledge", "knowledge_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@fail_cleanly
def inject(kb_path, knowledge_path, out_path):
    """Merge hand-written clauses into a learned knowledge base."""
    kb = _read_kb(kb_path)
    extra = _read_kb(knowledge_path)
    merged = merge(kb, list(extra.clauses))
    Path(out_path).write_text(serialize_kb(merged) + "\n", encoding="utf-8")
    _emit({"clauses": len(merged), "out": str(out_path)})


@main.command(name="knowledge-exp")
@method_option
@click.option("--input", "input_dir", required=True, type=click.Path(),
              help="Directory produced by `synth` (data.csv + seed.json).")
@click.option("--true", "n_true", default=0, type=int, show_default=True)
@click.option("--random", "n_random", default=0, type=int, show_default=True)
@click.option("--max-arity", type=int, default=None)
@click.option("--train-fraction", default=0.7, show_default=True)
@click.option("--rng-seed", default=0, type=int, show_default=True)
@click.option("--runs", default=5, type=int, show_default=True)
@fail_cleanly
def knowledge_exp(method, input_dir, n_true, n_random, max_arity, train_fraction,
                  rng_seed, runs):
    """Evaluate with ground-truth / pollution clauses injected."""
    ds, spec = load_synthetic(input_dir)
    reports = []
    for r in range(runs):
        config = ExperimentConfig(
            dataset=ds, method=method, rng_seed=rng_seed + r,
            train_fraction=train_fraction, max_arity=max_arity,
        )
        reports.append(
            run_knowledge_experiment(config, spec, n_true, n_random, rng_seed + r)
        )
    _emit(
        {
            "method": method,
            "n_true": n_true,
            "n_random": n_random,
            "runs": [r.as_dict() for r in reports],
            "mean_f1": _mean([r.f1 for r in reports]),
        }
    )


if __name__ == "__main__":
    main()
