"""Greedy hill climbing over DAGs with a cached decomposable score."""

from __future__ import annotations

from dataclasses import dataclass, field

from .dag import DagStructure
from .errors import VariableMismatch
from .prior import NormalWishartPrior
from .sampler import make_rng
from .score import Scorer

KINDS = ("add", "delete", "reverse")


@dataclass(frozen=True, order=True)
class Move:
    kind: str
    source: int
    target: int

    def apply(self, g: DagStructure) -> DagStructure:
        if self.kind == "add":
            return g.add_arc(self.source, self.target)
        if self.kind == "delete":
            return g.remove_arc(self.source, self.target)
        return g.reverse_arc(self.source, self.target)

    def label(self, names) -> str:
        return f"{self.kind} {names[self.source]}->{names[self.target]}"


@dataclass
class SearchConfig:
    max_iterations: int = 1000
    improvement_epsilon: float = 1e-9
    restarts: int = 0
    seed: int = 0
    perturbation_moves: int | None = None

    def __post_init__(self):
        if self.max_iterations < 1 or not self.improvement_epsilon > 0 or self.restarts < 0:
            raise ValueError("invalid search configuration")


@dataclass
class SearchResult:
    best: DagStructure
    score: float
    trace: list[tuple[Move, float]] = field(default_factory=list)


def neighbors(g: DagStructure) -> list[Move]:
    """Acyclicity-preserving single-arc additions, deletions and reversals, sorted by (kind, source, target)."""
    moves = []
    n = g.n
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if g.has_arc(u, v):
                moves.append(Move("delete", u, v))
                if not g.remove_arc(u, v).is_ancestor(u, v):
                    moves.append(Move("reverse", u, v))
            elif not g.has_arc(v, u) and not g.is_ancestor(v, u):
                moves.append(Move("add", u, v))
    moves.sort()
    return moves


def move_delta(scorer: Scorer, g: DagStructure, move: Move) -> float:
    """Score change of ``move``; touches one family (add, delete) or two (reverse)."""
    u, v = move.source, move.target
    pa_v = g.parents[v]
    if move.kind == "add":
        return scorer.family(v, pa_v | {u}) - scorer.family(v, pa_v)
    if move.kind == "delete":
        return scorer.family(v, pa_v - {u}) - scorer.family(v, pa_v)
    pa_u = g.parents[u]
    return (
        scorer.family(v, pa_v - {u})
        - scorer.family(v, pa_v)
        + scorer.family(u, pa_u | {v})
        - scorer.family(u, pa_u)
    )


def hill_climb(scorer: Scorer, start: DagStructure, cfg: SearchConfig) -> SearchResult:
    g = start
    score = scorer.dag(g)
    trace: list[tuple[Move, float]] = []
    for _ in range(cfg.max_iterations):
        best_move, best_delta = None, cfg.improvement_epsilon
        # strict '>' keeps the lexicographically first move among equal deltas
        for mv in neighbors(g):
            d = move_delta(scorer, g, mv)
            if d > best_delta:
                best_move, best_delta = mv, d
        if best_move is None:
            break
        g = best_move.apply(g)
        score = scorer.dag(g)
        trace.append((best_move, score))
    return SearchResult(g, score, trace)


def perturb(g: DagStructure, moves: int, seed: int, stream: int) -> DagStructure:
    rng = make_rng(seed, stream)
    for _ in range(moves):
        options = neighbors(g)
        if not options:
            break
        g = options[int(rng.integers(len(options)))].apply(g)
    return g


def greedy_search(
    prior: NormalWishartPrior,
    data,
    start: DagStructure | None = None,
    cfg: SearchConfig | None = None,
    scorer: Scorer | None = None,
) -> SearchResult:
    """Hill climbing from ``start`` (empty graph by default) plus seeded random restarts.

    Each restart applies ``cfg.perturbation_moves`` (default: the number of
    variables) random legal moves to ``start`` and climbs again. The best run
    is returned together with its trace of accepted moves.
    """
    cfg = SearchConfig() if cfg is None else cfg
    scorer = Scorer(prior, data) if scorer is None else scorer
    if start is None:
        start = DagStructure.empty(prior.n)
    if start.n != prior.n:
        raise VariableMismatch(f"start DAG has {start.n} nodes, data has {prior.n} columns")
    best = hill_climb(scorer, start, cfg)
    k = start.n if cfg.perturbation_moves is None else cfg.perturbation_moves
    for r in range(cfg.restarts):
        res = hill_climb(scorer, perturb(start, k, cfg.seed, r), cfg)
        if res.score > best.score + cfg.improvement_epsilon:
            best = res
    return best
