"""Marginal likelihood scores for Gaussian DAG models.

All values are natural logs. The subset score ``log p(d^Y)`` marginalizes
the complete-model prior to the coordinates ``Y`` and applies the closed
form of the complete model to the restricted data; a DAG score is the sum
over nodes of ``log p(d^{Pa + node}) - log p(d^{Pa})``.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np
from scipy.stats import multivariate_t

from . import linalg
from .dag import DagStructure, enumerate_dags
from .errors import DimensionMismatch, TooLarge, VariableMismatch
from .prior import (
    NormalWishartPrior,
    marginal_prior,
    posterior_update,
    sufficient_stats,
    wishart_log_norm_const,
)

LOG_2PI = math.log(2.0 * math.pi)
MAX_POSTERIOR_NODES = 4


class FamilyKey(NamedTuple):
    node: int
    parents: tuple[int, ...]


def _as_table(data, n: int) -> np.ndarray:
    X = np.asarray(data, dtype=float)
    if X.ndim == 1 and X.size == 0:
        X = X.reshape(0, n)
    if X.ndim != 2 or X.shape[1] != n:
        raise DimensionMismatch(f"data must have {n} columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contains missing or non-finite values")
    return X


def complete_log_marginal(p: NormalWishartPrior, data) -> float:
    """Closed-form ``log p(d)`` of a complete model with prior ``p`` over all data columns."""
    X = _as_table(data, p.n)
    m = X.shape[0]
    if m == 0:
        return 0.0
    post = posterior_update(p, sufficient_stats(X))
    return _closed_form(p.n, m, p.alpha_mu, p.alpha, linalg.logdet(p.T), linalg.logdet(post.T))


def _closed_form(l: int, m: int, alpha_mu: float, alpha: float, logdet_T: float, logdet_R: float) -> float:
    return (
        -0.5 * l * m * LOG_2PI
        + 0.5 * l * math.log(alpha_mu / (alpha_mu + m))
        + wishart_log_norm_const(l, alpha)
        - wishart_log_norm_const(l, alpha + m)
        + 0.5 * alpha * logdet_T
        - 0.5 * (alpha + m) * logdet_R
    )


def subset_log_marginal(p: NormalWishartPrior, data, Y: Iterable[int]) -> float:
    """``log p(d^Y)`` under the complete model; 0 for empty ``Y`` or empty data."""
    X = _as_table(data, p.n)
    y = linalg.index_set(Y, p.n)
    if not y or X.shape[0] == 0:
        return 0.0
    return complete_log_marginal(marginal_prior(p, y), X[:, list(y)])


def sequential_predictive_log_marginal(p: NormalWishartPrior, data, Y: Iterable[int]) -> float:
    """Prequential oracle: sum of one-step-ahead Student-t predictive log densities.

    Row ``k`` is scored by the predictive of the normal-Wishart posterior over
    ``Y`` after rows ``0..k-1``. The predictive of ``(nu, alpha_mu, alpha, T)``
    over ``l`` coordinates is a multivariate t with ``alpha - l + 1`` degrees
    of freedom, location ``nu`` and shape
    ``(alpha_mu + 1) / (alpha_mu (alpha - l + 1)) T``.
    """
    X = _as_table(data, p.n)
    y = linalg.index_set(Y, p.n)
    if not y or X.shape[0] == 0:
        return 0.0
    q = marginal_prior(p, y)
    Z = X[:, list(y)]
    l = len(y)
    total = 0.0
    for row in Z:
        df = q.alpha - l + 1
        shape = (q.alpha_mu + 1.0) / (q.alpha_mu * df) * q.T
        total += float(multivariate_t(loc=q.nu, shape=shape, df=df).logpdf(row))
        q = posterior_update(q, sufficient_stats(row[None, :]))
    return total


def schur_reading_subset_log_marginal(p: NormalWishartPrior, data, Y: Iterable[int]) -> float:
    """Alternative subset score with ``T_Y = ((T^{-1})_YY)^{-1}`` and ``R_Y = ((R^{-1})_YY)^{-1}``.

    ``R`` is the posterior parametric matrix given *all* columns. Kept for
    the conformance report; it does not equal :func:`subset_log_marginal`
    for non-diagonal ``T`` and it depends on columns outside ``Y``.
    """
    X = _as_table(data, p.n)
    y = linalg.index_set(Y, p.n)
    m = X.shape[0]
    if not y or m == 0:
        return 0.0
    post = posterior_update(p, sufficient_stats(X))
    T_y = linalg.submatrix_inverse_marginal(p.T, y)
    R_y = linalg.submatrix_inverse_marginal(post.T, y)
    l = len(y)
    return _closed_form(l, m, p.alpha_mu, p.alpha - p.n + l, linalg.logdet(T_y), linalg.logdet(R_y))


@dataclass(frozen=True)
class ConformanceRow:
    subset: tuple[int, ...]
    normative: float
    oracle: float
    schur_reading: float

    @property
    def discrepancy(self) -> float:
        return self.schur_reading - self.normative


def conformance_rows(p: NormalWishartPrior, data) -> list[ConformanceRow]:
    """Normative, prequential and Schur-reading subset scores for every non-empty subset."""
    rows = []
    for l in range(1, p.n + 1):
        for y in itertools.combinations(range(p.n), l):
            rows.append(
                ConformanceRow(
                    y,
                    subset_log_marginal(p, data, y),
                    sequential_predictive_log_marginal(p, data, y),
                    schur_reading_subset_log_marginal(p, data, y),
                )
            )
    return rows


def format_conformance(rows: list[ConformanceRow], tol: float = 1e-8) -> str:
    lines = ["subset, normative, prequential, schur_reading, schur_minus_normative"]
    for r in rows:
        lines.append(
            f"{{{','.join(map(str, r.subset))}}}, {r.normative:.12g}, {r.oracle:.12g}, "
            f"{r.schur_reading:.12g}, {r.discrepancy:.3e}"
        )
    bad = [r for r in rows if abs(r.discrepancy) > tol * max(1.0, abs(r.normative))]
    lines.append(f"schur_reading_disagreements = {len(bad)} of {len(rows)} (tolerance {tol:g})")
    return "\n".join(lines) + "\n"


def data_fingerprint(data, p: NormalWishartPrior | None = None) -> str:
    h = hashlib.sha256()
    X = np.ascontiguousarray(np.asarray(data, dtype=float))
    h.update(repr(X.shape).encode())
    h.update(X.tobytes())
    if p is not None:
        for a in (p.nu, np.array([p.alpha_mu, p.alpha]), p.T):
            h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()


class FamilyScoreCache:
    """Insert-only map from ``(fingerprint, FamilyKey)`` to log score.

    Reads are lock-free; inserts keep the first value stored for a key, so
    concurrent duplicate computations are harmless.
    """

    def __init__(self):
        self._values: dict[tuple[str, FamilyKey], float] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key):
        return self._values.get(key)

    def insert(self, key, value: float) -> float:
        with self._lock:
            return self._values.setdefault(key, value)

    def __len__(self):
        return len(self._values)


class Scorer:
    """Decomposable DAG scorer bound to one prior and one complete dataset.

    Parameters
    ----------
    prior : NormalWishartPrior
        Prior for the complete model over all columns of ``data``.
    data : array_like, shape (m, n)
    cache : FamilyScoreCache, optional
        Shared family cache; a private one is created when omitted.
    log_structure_prior : callable, optional
        ``g -> log p(g)`` added to every DAG score (uniform by default).
    """

    def __init__(
        self,
        prior: NormalWishartPrior,
        data,
        cache: FamilyScoreCache | None = None,
        log_structure_prior: Callable[[DagStructure], float] | None = None,
    ):
        self.prior = prior
        self.data = _as_table(data, prior.n)
        self.m = self.data.shape[0]
        self.cache = FamilyScoreCache() if cache is None else cache
        self.fingerprint = data_fingerprint(self.data, prior)
        self.log_structure_prior = log_structure_prior
        self._R = posterior_update(prior, sufficient_stats(self.data)).T

    def subset(self, Y: Iterable[int]) -> float:
        y = list(linalg.index_set(Y, self.prior.n))
        if not y or self.m == 0:
            return 0.0
        p = self.prior
        l = len(y)
        return _closed_form(
            l,
            self.m,
            p.alpha_mu,
            p.alpha - p.n + l,
            linalg.logdet(p.T[np.ix_(y, y)]),
            linalg.logdet(self._R[np.ix_(y, y)]),
        )

    def family(self, node: int, parents: Iterable[int]) -> float:
        key = FamilyKey(node, linalg.index_set(parents, self.prior.n))
        if node in key.parents:
            raise ValueError("node cannot be its own parent")
        ck = (self.fingerprint, key)
        value = self.cache.get(ck)
        if value is not None:
            self.cache.hits += 1
            return value
        self.cache.misses += 1
        value = self.subset(key.parents + (node,)) - self.subset(key.parents)
        return self.cache.insert(ck, value)

    def families(self, g: DagStructure) -> list[float]:
        self._check(g)
        return [self.family(i, ps) for i, ps in enumerate(g.parents)]

    def dag(self, g: DagStructure) -> float:
        total = math.fsum(self.families(g))
        if self.log_structure_prior is not None:
            total += self.log_structure_prior(g)
        return total

    def _check(self, g: DagStructure) -> None:
        if g.n != self.prior.n:
            raise VariableMismatch(f"DAG has {g.n} nodes, data has {self.prior.n} columns")


def family_log_score(p: NormalWishartPrior, data, f: FamilyKey) -> float:
    return Scorer(p, data).family(f.node, f.parents)


def dag_log_score(p: NormalWishartPrior, data, g: DagStructure) -> float:
    return Scorer(p, data).dag(g)


def structure_posterior(
    p: NormalWishartPrior,
    data,
    names=None,
    log_structure_prior: Callable[[DagStructure], float] | None = None,
) -> dict[DagStructure, float]:
    """Exact posterior over all DAGs on at most four variables (uniform structure prior by default)."""
    if p.n > MAX_POSTERIOR_NODES:
        raise TooLarge(f"exhaustive posterior is limited to {MAX_POSTERIOR_NODES} variables")
    scorer = Scorer(p, data, log_structure_prior=log_structure_prior)
    dags = enumerate_dags(p.n, names)
    logs = np.array([scorer.dag(g) for g in dags])
    w = np.exp(logs - logs.max())
    probs = w / w.sum()
    return dict(zip(dags, probs.tolist()))
