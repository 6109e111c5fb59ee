"""Command-line front end.

Exit codes: 0 success, 2 usage or input error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

from . import ingest
from .errors import ConvergenceError, InputError, ParseError
from .evaluate import (
    bench,
    binary_distance,
    default_ordinal_distance,
    disagreement_rates,
    filter_workers,
    krippendorff_alpha,
    majority_votes,
    ndcg,
    timings_csv,
)
from .model import Query, adjacency_matrix, build_graph
from .parafac import build_tensor, cp_als, expand_1hop, select_triples
from .rank import LdrankConfig, RankInputs, Strategy, rank, read_ranking, write_ranking
from .text import build_matrix, default_stopwords, get_stemmer, read_stopwords

log = logging.getLogger("ldrank")

EXIT_INPUT = 2
EXIT_CONVERGENCE = 3

# hard defaults for options that may also come from --config
DEFAULTS = {
    "strategy": "ldrank",
    "alpha": 0.7,
    "tol": 1e-10,
    "max_iter": 10_000,
    "epsilon": 1e-8,
    "bidirectional": False,
    "edge_weighting": "unit",
    "dangling": "prior",
    "stress": 1000.0,
    "nb_dim": 1,
    "consensus_tol": 1e-9,
    "weighting": "tf",
    "stemmer": "porter",
    "window": 300,
    "seed": 0,
    "query": "",
    "query_entities": "",
    "strategies": "equi,hit,svd,ldrank",
    "reps": 5,
    "ranks": 10,
    "components": 2,
    "predicates": 3,
    "iters": 100,
}


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def read_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment line. Keys use the
    option names with dashes or underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected key=value", path, lineno)
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def write_config(path, values: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in values.items():
            fh.write(f"{key} = {value}\n")


def _resolve(args, parser: argparse.ArgumentParser) -> None:
    """Fill unset options from --config, then from DEFAULTS."""
    actions = {a.dest: a for a in parser._actions}
    config = read_config(args.config) if getattr(args, "config", None) else {}
    for key, raw in config.items():
        action = actions.get(key)
        if action is None or key in ("config", "command", "metric"):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is not None:
            continue
        if isinstance(action, argparse._StoreConstAction):
            value = _bool(raw)
        elif action.type is not None:
            try:
                value = action.type(raw)
            except (TypeError, ValueError):
                raise UsageError(f"bad value for config key {key!r}: {raw!r}") from None
        else:
            value = raw
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r} must be one of {', '.join(map(str, action.choices))}")
        setattr(args, key, value)
    for key, value in DEFAULTS.items():
        if hasattr(args, key) and getattr(args, key) is None:
            setattr(args, key, value)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) in (None, ""):
            raise UsageError(f"the following argument is required: --{name.replace('_', '-')}")


def _split(text: str) -> list[str]:
    return [t.strip() for t in (text or "").split(",") if t.strip()]


# -- argument groups -----------------------------------------------------------


def _add_rank_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; explicit flags win")
    g = p.add_argument_group("inputs")
    g.add_argument("--graph", help="graph.tsv")
    g.add_argument("--texts", help="texts.tsv (entity abstracts)")
    g.add_argument("--serp", help="serp.tsv")
    g.add_argument("--doc-entities", dest="doc_entities", help="doc-entities.tsv")
    g.add_argument("--annotations", help="annotations.tsv; with --pages, builds doc-entities and text windows")
    g.add_argument("--pages", help="directory of <doc_id>.txt page texts")
    g.add_argument("--query", help="query keywords")
    g.add_argument("--query-entities", dest="query_entities", help="comma-separated entity IRIs of the query")
    m = p.add_argument_group("model")
    m.add_argument("--alpha", type=float)
    m.add_argument("--tol", type=float)
    m.add_argument("--max-iter", dest="max_iter", type=int)
    m.add_argument("--epsilon", type=float, help="teleport smoothing towards uniform")
    m.add_argument("--bidirectional", action="store_const", const=True, default=None)
    m.add_argument("--edge-weighting", dest="edge_weighting", choices=["unit", "multiplicity"])
    m.add_argument("--dangling", choices=["prior", "uniform"])
    m.add_argument("--stress", type=float)
    m.add_argument("--nb-dim", dest="nb_dim", type=int)
    m.add_argument("--consensus-tol", dest="consensus_tol", type=float)
    m.add_argument("--weighting", choices=["tf", "tfidf"], help="entity-term weighting")
    m.add_argument("--stemmer", choices=["porter", "identity"])
    m.add_argument("--stopwords", help="stopword file, one per line")
    m.add_argument("--window", type=int, help="text window width around mentions")
    m.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldrank", description="Query-driven ranking of Linked Data entities.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="rank the entities of a graph")
    _add_rank_inputs(p)
    p.add_argument("--strategy", choices=[s.value for s in Strategy])
    p.add_argument("--out", help="ranking file (default: stdout)")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="evaluation metrics, CSV on stdout")
    esub = p.add_subparsers(dest="metric", required=True)
    e = esub.add_parser("ndcg")
    e.add_argument("--config")
    e.add_argument("--ranking")
    e.add_argument("--qrels")
    e.add_argument("--rank", type=int)
    e.set_defaults(func=cmd_eval_ndcg)
    e = esub.add_parser("alpha")
    e.add_argument("--config")
    e.add_argument("--judgments")
    e.add_argument("--distance", choices=["table1", "binary"])
    e.set_defaults(func=cmd_eval_alpha)
    e = esub.add_parser("vote")
    e.add_argument("--config")
    e.add_argument("--judgments")
    e.add_argument("--tiebreak", choices=["highest", "accuracy"])
    e.add_argument("--accuracies", help="CSV worker_id,accuracy (for --tiebreak accuracy)")
    e.set_defaults(func=cmd_eval_vote)
    e = esub.add_parser("filter")
    e.add_argument("--config")
    e.add_argument("--judgments")
    e.add_argument("--threshold", type=float)
    e.add_argument("--out", help="write the kept judgments here")
    e.set_defaults(func=cmd_eval_filter)

    p = sub.add_parser("triples", help="select representative triples with PARAFAC")
    p.add_argument("--config")
    p.add_argument("--graph")
    p.add_argument("--neighborhood", help="neighborhood.tsv for 1-hop expansion")
    p.add_argument("--top-entities", dest="top_entities", help="comma-separated entity IRIs")
    p.add_argument("--rank", type=int, help="CP rank")
    p.add_argument("--components", type=int, help="components kept per entity")
    p.add_argument("--predicates", type=int, help="predicates kept per component")
    p.add_argument("--iters", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_triples)

    p = sub.add_parser("bench", help="time the ranking strategies")
    _add_rank_inputs(p)
    p.add_argument("--strategies")
    p.add_argument("--reps", type=int)
    p.add_argument("--out", help="CSV (default: stdout)")
    p.add_argument("--figure", help="also render a bar chart (PNG)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="NDCG@1..R of several strategies against qrels")
    _add_rank_inputs(p)
    p.add_argument("--qrels")
    p.add_argument("--strategies")
    p.add_argument("--ranks", type=int, help="largest rank cutoff")
    p.add_argument("--out", help="CSV (default: stdout)")
    p.add_argument("--figure", help="also render NDCG curves (PNG)")
    p.set_defaults(func=cmd_report)
    return parser


# -- shared loading ------------------------------------------------------------


def _config(args) -> LdrankConfig:
    return LdrankConfig(
        alpha=args.alpha,
        tol=args.tol,
        max_iter=args.max_iter,
        epsilon_smoothing=args.epsilon,
        bidirectional=bool(args.bidirectional),
        edge_weighting=args.edge_weighting,
        dangling=args.dangling,
        stress=args.stress,
        nb_dim=args.nb_dim,
        consensus_tol=args.consensus_tol,
        seed=args.seed,
    )


def load_rank_inputs(args, strategies):
    _require(args, "graph")
    needs_hit = any(s is not Strategy.EQUI for s in strategies)
    needs_text = any(s in (Strategy.SVD, Strategy.LDRANK) for s in strategies)
    triples = ingest.parse_graph_file(args.graph)
    abstracts = ingest.parse_texts(args.texts) if args.texts else {}
    serp = ingest.parse_serp(args.serp) if args.serp else None
    doc_entities = ingest.parse_doc_entities(args.doc_entities) if args.doc_entities else None
    texts = abstracts
    if args.annotations or args.pages:
        _require(args, "annotations", "pages", "serp")
        client = ingest.FileAnnotationClient(args.annotations)
        pages = ingest.read_pages(args.pages)
        texts = ingest.assemble_texts(abstracts, serp, pages, client, args.window)
        if doc_entities is None:
            doc_entities = ingest.doc_entities_from_annotations(serp, pages, client)
    if needs_hit:
        _require(args, "serp")
        if doc_entities is None:
            raise UsageError("the following argument is required: --doc-entities (or --annotations with --pages)")
    if needs_text and not texts:
        raise UsageError("the following argument is required: --texts (or --annotations with --pages)")
    g = build_graph(triples, texts)
    query = Query.from_text(args.query or "", _split(args.query_entities))
    matrix = None
    if needs_text:
        stop = read_stopwords(args.stopwords) if args.stopwords else default_stopwords()
        matrix = build_matrix(g, args.weighting, stop, get_stemmer(args.stemmer))
    return g, RankInputs(serp, doc_entities, query, matrix)


def _strategies(text) -> list[Strategy]:
    names = _split(text)
    if not names:
        raise UsageError("no strategy given")
    try:
        return [Strategy(n.lower()) for n in names]
    except ValueError:
        bad = [n for n in names if n.lower() not in {s.value for s in Strategy}]
        raise UsageError(f"unknown strategy {bad[0]!r}; expected equi, hit, svd or ldrank") from None


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ------------------------------------------------------------------


def cmd_rank(args) -> int:
    strategy = Strategy(args.strategy)
    cfg = _config(args)
    g, inputs = load_rank_inputs(args, [strategy])
    ranking = rank(g, strategy, inputs, cfg)
    if args.out:
        write_ranking(args.out, ranking)
    else:
        sys.stdout.write(ranking.to_tsv())
    return 0


def cmd_eval_ndcg(args) -> int:
    _require(args, "ranking", "qrels", "rank")
    value = ndcg(read_ranking(args.ranking), ingest.parse_qrels(args.qrels), args.rank)
    sys.stdout.write(f"metric,value\nndcg,{value:.6f}\n")
    return 0


def cmd_eval_alpha(args) -> int:
    _require(args, "judgments")
    dist = binary_distance() if args.distance == "binary" else default_ordinal_distance()
    value = krippendorff_alpha(ingest.parse_judgments(args.judgments), dist)
    sys.stdout.write(f"metric,value\nalpha,{value:.6f}\n")
    return 0


def _read_accuracies(path) -> dict[str, float]:
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["worker_id", "accuracy"]:
            raise ParseError("header must be worker_id,accuracy", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out[row[0].strip()] = float(row[1])
            except (IndexError, ValueError):
                raise ParseError("expected worker_id,accuracy", path, lineno) from None
    return out


def cmd_eval_vote(args) -> int:
    _require(args, "judgments")
    tiebreak = args.tiebreak or "highest"
    acc = None
    if tiebreak == "accuracy":
        _require(args, "accuracies")
        acc = _read_accuracies(args.accuracies)
    votes = majority_votes(ingest.parse_judgments(args.judgments), tiebreak, acc)
    buf = io.StringIO()
    buf.write("unit_id,value\n")
    for unit, grade in votes.items():
        buf.write(f"{unit},{grade}\n")
    sys.stdout.write(buf.getvalue())
    return 0


def cmd_eval_filter(args) -> int:
    _require(args, "judgments")
    threshold = 0.412 if args.threshold is None else args.threshold
    j = ingest.parse_judgments(args.judgments)
    rates = disagreement_rates(j)
    kept = filter_workers(j, threshold)
    buf = io.StringIO()
    buf.write("worker_id,disagreement,kept\n")
    for worker, rate in rates.items():
        buf.write(f"{worker},{rate:.6f},{int(rate <= threshold)}\n")
    sys.stdout.write(buf.getvalue())
    if args.out:
        ingest.write_judgments(args.out, kept)
    return 0


def cmd_triples(args) -> int:
    _require(args, "graph", "top_entities")
    top = _split(args.top_entities)
    if not top:
        raise UsageError("--top-entities is empty")
    rank_ = 10 if args.rank is None else args.rank
    g = build_graph(ingest.parse_graph_file(args.graph))
    if args.neighborhood:
        g = expand_1hop(g, top, ingest.FileNeighborhoodClient(args.neighborhood))
    for uri in top:
        g.index(uri)
    factors = cp_als(build_tensor(g), rank=rank_, iters=args.iters, seed=args.seed)
    m = min(args.components, factors.rank)
    buf = io.StringIO()
    for uri in top:
        buf.write(f"# entity {uri}\n")
        for t in select_triples(factors, g, uri, m=m, q=args.predicates):
            buf.write(f"{t.subject.uri}\t{t.predicate}\t{t.object.uri}\n")
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_bench(args) -> int:
    from .report import plot_timings

    strategies = _strategies(args.strategies)
    if args.reps < 1:
        raise UsageError("--reps must be at least 1")
    cfg = _config(args)
    g, inputs = load_rank_inputs(args, strategies)
    nnz = adjacency_matrix(g, cfg.bidirectional, cfg.edge_weighting).nnz
    runs = {s.value: (lambda s=s: rank(g, s, inputs, cfg)) for s in strategies}
    rows = bench(runs, args.reps, g.n, nnz)
    _emit(timings_csv(rows), args.out)
    if args.figure:
        plot_timings(rows, args.figure)
    return 0


def cmd_report(args) -> int:
    from .report import plot_ndcg

    _require(args, "qrels")
    strategies = _strategies(args.strategies)
    cfg = _config(args)
    g, inputs = load_rank_inputs(args, strategies)
    qrels = ingest.parse_qrels(args.qrels)
    cutoff = min(args.ranks, g.n)
    if cutoff < 1:
        raise UsageError("--ranks must be at least 1")
    curves = {}
    buf = io.StringIO()
    buf.write("strategy,rank,ndcg\n")
    for s in strategies:
        ranking = rank(g, s, inputs, cfg)
        points = [(r, ndcg(ranking.entities, qrels, r)) for r in range(1, cutoff + 1)]
        curves[s.value] = points
        for r, v in points:
            buf.write(f"{s.value},{r},{v:.6f}\n")
    _emit(buf.getvalue(), args.out)
    if args.figure:
        plot_ndcg(curves, args.figure)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    # the leaf parser knows every option of the command, --config included
    leaf = parser._subparsers._group_actions[0].choices[args.command]
    if args.command == "eval":
        leaf = leaf._subparsers._group_actions[0].choices[args.metric]
    try:
        _resolve(args, leaf)
        return args.func(args)
    except UsageError as exc:
        leaf.print_usage(sys.stderr)
        print(f"{leaf.prog}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, OSError) as exc:
        print(f"ldrank: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"ldrank: did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
