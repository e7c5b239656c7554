"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 input validation error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import characterize as ch
from .dag import (
    DagStructure,
    default_names,
    enumerate_dags,
    equivalence_classes,
    read_dag_file,
    skeleton,
    v_structures,
)
from .dataset import format_dataset, ingest_dataset
from .errors import GaussDagError, NumericalError
from .prior import NormalWishartPrior, default_prior, load_prior
from .sampler import GaussianDagParams, sample_dataset, sample_params_from_prior
from .score import Scorer, structure_posterior
from .search import SearchConfig, greedy_search

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


def fmt(x: float) -> str:
    return f"{x:.12g}"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class Report:
    """Reproducible report: header of command, input hashes and seed, then body lines."""

    def __init__(self, command: str, args: argparse.Namespace, inputs=(), seed=None):
        self.lines = [f"# command = {command}"]
        for key in sorted(vars(args)):
            if key in ("func", "out", "command", "seed"):
                continue
            value = getattr(args, key)
            if value is not None and value is not False:
                self.lines.append(f"# {key} = {value}")
        for label, path in inputs:
            digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
            self.lines.append(f"# input {label} sha256 = {digest}")
        if seed is not None:
            self.lines.append(f"# seed = {seed}")

    def add(self, text: str) -> None:
        self.lines.extend(text.rstrip("\n").split("\n"))

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _prior(args, n: int) -> NormalWishartPrior:
    return default_prior(n) if args.prior is None else load_prior(args.prior, n)


def _inputs(args, *keys):
    return [(k, getattr(args, k)) for k in keys if getattr(args, k, None) is not None]


def _require(args, *keys):
    missing = [f"--{k.replace('_', '-')}" for k in keys if getattr(args, k, None) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")


def _dag_for_data(path, names) -> DagStructure:
    return read_dag_file(path).relabel(names)


def cmd_score(args) -> str:
    _require(args, "data", "dag")
    ds = ingest_dataset(args.data)
    g = _dag_for_data(args.dag, ds.names)
    scorer = Scorer(_prior(args, ds.n), ds.values)
    fams = scorer.families(g)
    rep = Report("score", args, _inputs(args, "data", "dag", "prior"))
    rep.add(f"log_score = {fmt(scorer.dag(g))}")
    rep.add("node | parents | family_log_score")
    for i, ps in enumerate(g.parents):
        pa = ",".join(g.names[p] for p in sorted(ps)) or "-"
        rep.add(f"{g.names[i]} | {pa} | {fmt(fams[i])}")
    return rep.text()


def cmd_learn(args) -> str:
    _require(args, "data")
    ds = ingest_dataset(args.data)
    prior = _prior(args, ds.n)
    start = DagStructure.empty(ds.names) if args.dag is None else _dag_for_data(args.dag, ds.names)
    cfg = SearchConfig(max_iterations=args.max_iterations, restarts=args.restarts, seed=args.seed)
    res = greedy_search(prior, ds.values, start, cfg)
    rep = Report("learn", args, _inputs(args, "data", "dag", "prior"), seed=args.seed)
    rep.add(f"log_score = {fmt(res.score)}")
    rep.add("best_dag:")
    rep.add(res.best.to_text())
    rep.add("trace:")
    for mv, s in res.trace:
        rep.add(f"{mv.label(ds.names)} {fmt(s)}")
    return rep.text()


def cmd_posterior(args) -> str:
    _require(args, "data")
    ds = ingest_dataset(args.data)
    prior = _prior(args, ds.n)
    post = structure_posterior(prior, ds.values, ds.names)
    scorer = Scorer(prior, ds.values)
    rows = sorted(post.items(), key=lambda kv: (-kv[1], kv[0].arcs()))
    rep = Report("posterior", args, _inputs(args, "data", "prior"))
    rep.add(f"dags = {len(rows)}")
    rep.add("probability | log_score | arcs")
    for g, pr in rows:
        rep.add(f"{fmt(pr)} | {fmt(scorer.dag(g))} | {g.arc_string()}")
    return rep.text()


def _load_params(path, g: DagStructure) -> GaussianDagParams:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or set(raw) != set(g.names):
        raise ValueError("parameter file must have one entry per DAG node")
    pos = {name: i for i, name in enumerate(g.names)}
    parents, coefs, intercepts, variances = [], [], [], []
    for i, name in enumerate(g.names):
        entry = raw[name]
        c = entry.get("coefficients", {})
        if set(c) != {g.names[p] for p in g.parents[i]}:
            raise ValueError(f"coefficients of {name} must name exactly its parents in the DAG")
        pa = sorted(pos[k] for k in c)
        parents.append(tuple(pa))
        coefs.append([float(c[g.names[p]]) for p in pa])
        intercepts.append(float(entry.get("intercept", 0.0)))
        variances.append(float(entry.get("variance", 1.0)))
    return GaussianDagParams(tuple(parents), intercepts, tuple(coefs), variances)


def cmd_sample(args) -> str:
    _require(args, "dag", "rows")
    g = read_dag_file(args.dag)
    if args.from_prior == (args.params is not None):
        raise UsageError("give exactly one of --params or --from-prior")
    if args.from_prior:
        params = sample_params_from_prior(_prior(args, g.n), g, args.seed)
    else:
        params = _load_params(args.params, g)
    X = sample_dataset(params, g, args.rows, args.seed)
    rep = Report("sample", args, _inputs(args, "dag", "params", "prior"), seed=args.seed)
    return rep.text() + format_dataset(g.names, X)


def _pairs(edges, names):
    return sorted("{" + ",".join(sorted(names[i] for i in e)) + "}" for e in edges)


def _triples(vs, names):
    return sorted(f"({names[i]},{names[j]},{names[k]})" for i, j, k in vs)


def cmd_equiv(args) -> str:
    _require(args, "dag", "dag2")
    g1 = read_dag_file(args.dag)
    g2 = read_dag_file(args.dag2).relabel(g1.names)
    sk1, sk2 = skeleton(g1), skeleton(g2)
    vs1, vs2 = v_structures(g1), v_structures(g2)
    names = g1.names
    rep = Report("equiv", args, _inputs(args, "dag", "dag2"))
    rep.add(f"equivalent = {str(sk1 == sk2 and vs1 == vs2).lower()}")
    rep.add(f"edges_only_in_dag = {' '.join(_pairs(sk1 - sk2, names)) or '-'}")
    rep.add(f"edges_only_in_dag2 = {' '.join(_pairs(sk2 - sk1, names)) or '-'}")
    rep.add(f"v_structures_only_in_dag = {' '.join(_triples(vs1 - vs2, names)) or '-'}")
    rep.add(f"v_structures_only_in_dag2 = {' '.join(_triples(vs2 - vs1, names)) or '-'}")
    return rep.text()


def cmd_classes(args) -> str:
    _require(args, "n")
    dags = enumerate_dags(args.n)
    classes = equivalence_classes(dags)
    rep = Report("classes", args)
    rep.add(f"dags = {len(dags)}")
    rep.add(f"classes = {len(classes)}")
    sizes = Counter(len(c) for c in classes)
    rep.add("class_size | count")
    for size in sorted(sizes):
        rep.add(f"{size} | {sizes[size]}")
    if args.n <= 3:
        rep.add("members:")
        for k, c in enumerate(classes):
            rep.add(f"class {k}: " + " ; ".join(g.arc_string() for g in c))
    return rep.text()


def cmd_characterize(args) -> str:
    _require(args, "mode", "n")
    n = args.n
    names = default_names(n)
    prior = _prior(args, n)
    rep = Report("characterize", args, _inputs(args, "prior"), seed=args.seed)
    if args.mode == "local":
        rep.add(ch.local_standardization_test(prior, args.samples, args.seed).format())
        return rep.text()
    if args.partition is None:
        raise UsageError("--partition is required for this mode")
    pos = {name: i for i, name in enumerate(names)}
    try:
        block1 = [pos[s.strip()] for s in args.partition.split(",")]
    except KeyError as exc:
        raise ValueError(f"unknown variable in --partition: {exc.args[0]}") from None
    part = ch.PartitionSpec.from_block1(block1, n)
    if args.mode == "normal-mean":
        for sign, r in ch.mean_sign_adjudication(prior, part, args.samples, args.seed).items():
            rep.add(f"## mean_sign = {'+' if sign > 0 else '-'}")
            rep.add(r.format())
    elif args.mode == "mixture":
        alpha_b = 10.0 * prior.alpha if args.mix_alpha is None else args.mix_alpha
        other = NormalWishartPrior(prior.nu, prior.alpha_mu, alpha_b, prior.T)
        mix = ch.MixturePrior(prior, other, 0.5 if args.weight is None else args.weight)
        rep.add(ch.counterexample_test(mix, part, args.samples, args.seed).format())
    else:
        rep.add(ch.global_independence_test(args.mode, prior, part, args.samples, args.seed).format())
    return rep.text()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gaussdag", description="Bayesian scoring and structure learning of Gaussian DAG models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text, *flags):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output file (default: standard output)")
        for flag in flags:
            flag(p)
        return p

    data = lambda p: p.add_argument("--data", help="dataset CSV")
    dag = lambda p: p.add_argument("--dag", help="DAG file")
    prior = lambda p: p.add_argument("--prior", help="prior config file (default prior when omitted)")
    seed = lambda p: p.add_argument("--seed", type=int, default=0)

    add("score", cmd_score, "log marginal likelihood of a DAG", data, dag, prior)
    p = add("learn", cmd_learn, "greedy structure search", data, dag, prior, seed)
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--max-iterations", type=int, default=1000)
    add("posterior", cmd_posterior, "exact structure posterior for at most 4 variables", data, prior)
    p = add("sample", cmd_sample, "sample a dataset from a Gaussian DAG model", dag, prior, seed)
    p.add_argument("--params", help="JSON regression parameters per node")
    p.add_argument("--from-prior", action="store_true", help="draw parameters from the prior")
    p.add_argument("--rows", type=int)
    p = add("equiv", cmd_equiv, "Markov equivalence of two DAGs", dag)
    p.add_argument("--dag2", help="second DAG file")
    p = add("classes", cmd_classes, "enumerate DAGs and their equivalence classes")
    p.add_argument("--n", type=int)
    p = add("characterize", cmd_characterize, "Monte Carlo block-independence report", prior, seed)
    p.add_argument("--mode", choices=list(ch.MODES) + ["mixture", "local"])
    p.add_argument("--n", type=int)
    p.add_argument("--partition", help="comma list of block-1 names (X1..Xn)")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--mix-alpha", type=float, help="degrees of freedom of the second mixture component")
    p.add_argument("--weight", type=float, help="mixture weight of the second component (default 0.5)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except UsageError as exc:
        print(f"gaussdag: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"gaussdag: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GaussDagError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"gaussdag: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
