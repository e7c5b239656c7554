"""Monte Carlo checks of block-independence properties of (normal-)Wishart priors.

A claim "group A is independent of group B" is tested by the sample
correlations between a fixed statistic family on each side: every scalar
entry ``x`` contributes ``x``, ``x**2`` and, when all draws are positive,
``log x``. With ``N`` draws the verdict is *independent* if the largest
absolute correlation is below ``4/sqrt(N)``, *dependent* above
``10/sqrt(N)`` and *inconclusive* in between.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import linalg
from .errors import SampleTooSmall
from .prior import NormalWishartPrior, local_regression_prior
from .sampler import make_rng, sample_normal_wishart, sample_wishart

MIN_SAMPLES = 10_000
INDEPENDENT_Z = 4.0
DEPENDENT_Z = 10.0
MODES = ("wishart", "normal-mean", "normal-wishart")


@dataclass(frozen=True)
class PartitionSpec:
    block1: tuple[int, ...]
    block2: tuple[int, ...]

    @classmethod
    def from_block1(cls, block1: Iterable[int], n: int) -> "PartitionSpec":
        b1 = linalg.index_set(block1, n)
        b2 = linalg.complement(b1, n)
        if not b1 or not b2:
            raise ValueError("both blocks of a partition must be non-empty")
        return cls(b1, b2)

    @property
    def n(self) -> int:
        return len(self.block1) + len(self.block2)


def all_partitions(n: int) -> list[PartitionSpec]:
    """Every ordered split of ``0..n-1`` into two non-empty blocks."""
    out = []
    for l in range(1, n):
        for b1 in itertools.combinations(range(n), l):
            out.append(PartitionSpec.from_block1(b1, n))
    return out


@dataclass(frozen=True)
class StatisticPair:
    a: str
    b: str
    corr: float
    n: int


@dataclass(frozen=True)
class IndependenceReport:
    pairs: tuple[StatisticPair, ...]
    max_abs_corr: float
    threshold: float
    verdict: str
    sample_size: int
    notes: tuple[str, ...] = field(default=())

    @property
    def worst(self) -> StatisticPair:
        return max(self.pairs, key=lambda p: abs(p.corr))

    def format(self) -> str:
        lines = [f"# {note}" for note in self.notes]
        lines += [f"{p.a}, {p.b}, {p.corr:.12g}, {p.n}" for p in self.pairs]
        lines.append(f"max_abs_corr = {self.max_abs_corr:.12g}")
        lines.append(f"threshold = {self.threshold:.12g}")
        lines.append(f"verdict = {self.verdict}")
        return "\n".join(lines) + "\n"


def verdict_for(max_abs_corr: float, n: int) -> str:
    root = math.sqrt(n)
    if max_abs_corr < INDEPENDENT_Z / root:
        return "independent"
    if max_abs_corr > DEPENDENT_Z / root:
        return "dependent"
    return "inconclusive"


def statistic_family(columns: Mapping[str, np.ndarray]) -> list[tuple[str, np.ndarray]]:
    out = []
    for name, x in columns.items():
        x = np.asarray(x, dtype=float)
        out.append((name, x))
        out.append((f"sq({name})", x * x))
        if np.all(x > 0):
            out.append((f"log({name})", np.log(x)))
    return out


def _standardize(stats: list[tuple[str, np.ndarray]]) -> tuple[list[str], np.ndarray]:
    names, cols = [], []
    for name, x in stats:
        sd = x.std()
        if sd > 0 and np.isfinite(sd):
            names.append(name)
            cols.append((x - x.mean()) / sd)
    return names, np.column_stack(cols)


def independence_report(groups: list[Mapping[str, np.ndarray]], notes: Iterable[str] = ()) -> IndependenceReport:
    """Correlate the statistic families of every pair of distinct groups."""
    fams = [_standardize(statistic_family(g)) for g in groups]
    N = fams[0][1].shape[0]
    if N < MIN_SAMPLES:
        raise SampleTooSmall(f"need at least {MIN_SAMPLES} draws, got {N}")
    pairs = []
    for (na, Za), (nb, Zb) in itertools.combinations(fams, 2):
        C = Za.T @ Zb / N
        for i, j in itertools.product(range(len(na)), range(len(nb))):
            pairs.append(StatisticPair(na[i], nb[j], float(C[i, j]), N))
    mx = max(abs(p.corr) for p in pairs)
    return IndependenceReport(tuple(pairs), mx, INDEPENDENT_Z / math.sqrt(N), verdict_for(mx, N), N, tuple(notes))


def _check_samples(samples: int) -> None:
    if samples < MIN_SAMPLES:
        raise SampleTooSmall(f"need at least {MIN_SAMPLES} draws, got {samples}")


def _entries(M: np.ndarray, rows, cols, label: str, upper: bool) -> dict[str, np.ndarray]:
    out = {}
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            if upper and b < a:
                continue
            out[f"{label}[{i},{j}]"] = M[:, a, b]
    return out


def _blocks(W: np.ndarray, part: PartitionSpec):
    b1, b2 = list(part.block1), list(part.block2)
    W11 = W[:, b1][:, :, b1]
    W12 = W[:, b1][:, :, b2]
    W22 = W[:, b2][:, :, b2]
    W21 = W12.transpose(0, 2, 1)
    # W22^{-1} W21, shape (N, l2, l1)
    K = np.linalg.solve(W22, W21)
    S = W11 - W12 @ K
    return W12, W22, K, 0.5 * (S + S.transpose(0, 2, 1))


def wishart_groups(W: np.ndarray, part: PartitionSpec):
    """``{W11 - W12 W22^{-1} W21}`` versus ``{W12, W22}``."""
    W12, W22, _, S = _blocks(W, part)
    A = _entries(S, part.block1, part.block1, "W11.2", upper=True)
    B = _entries(W12, part.block1, part.block2, "W", upper=False)
    B.update(_entries(W22, part.block2, part.block2, "W", upper=True))
    return A, B


def _transformed_mean(mu: np.ndarray, K: np.ndarray, part: PartitionSpec, sign: int) -> dict[str, np.ndarray]:
    mu1 = mu[:, list(part.block1)]
    mu2 = mu[:, list(part.block2)]
    t = mu2 + sign * (K @ mu1[..., None])[..., 0]
    s = "+" if sign > 0 else "-"
    return {f"mu2{s}[{j}]": t[:, a] for a, j in enumerate(part.block2)}


def global_independence_test(
    mode: str,
    prior: NormalWishartPrior,
    partition: PartitionSpec,
    samples: int,
    seed: int,
    *,
    mean_sign: int = 1,
    precision=None,
) -> IndependenceReport:
    """Monte Carlo test of a block-independence claim.

    Parameters
    ----------
    mode : {"wishart", "normal-mean", "normal-wishart"}
        ``wishart``: ``W ~ Wishart(alpha, T)``; tests ``{W11.2}`` against
        ``{W12, W22}``.
        ``normal-mean``: ``W`` fixed (``precision``, or one draw from the
        prior with no entry below ``1e-6`` in magnitude) and
        ``mu ~ N(nu, (alpha_mu W)^{-1})``; tests ``{mu1}`` against
        ``{mu2 + mean_sign W22^{-1} W21 mu1}``.
        ``normal-wishart``: ``(mu, W)`` from the prior; tests
        ``{mu1, W11.2}`` against ``{mu2 + mean_sign W22^{-1} W21 mu1, W12, W22}``.
    mean_sign : {+1, -1}
        Sign of the mean transformation.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mean_sign not in (1, -1):
        raise ValueError("mean_sign must be +1 or -1")
    if partition.n != prior.n:
        raise ValueError("partition does not cover the prior's coordinates")
    _check_samples(samples)
    notes = [f"mode = {mode}", f"block1 = {list(partition.block1)}", f"seed = {seed}"]
    if mode == "wishart":
        W = sample_wishart(prior.alpha, prior.T, seed, size=samples)
        A, B = wishart_groups(W, partition)
        return independence_report([A, B], notes)
    if mode == "normal-mean":
        W0 = _fixed_precision(prior, seed) if precision is None else linalg.as_symmetric(precision)
        linalg.cholesky_logdet(W0)
        gamma = prior.alpha_mu
        L = linalg.cholesky_logdet(W0)[0]
        z = make_rng(seed, stream=2).standard_normal((samples, prior.n))
        mu = prior.nu + np.linalg.solve(L.T, z.T).T / math.sqrt(gamma)
        Wb = np.broadcast_to(W0, (samples,) + W0.shape)
        _, _, K, _ = _blocks(Wb, partition)
        A = {f"mu1[{i}]": mu[:, i] for i in partition.block1}
        B = _transformed_mean(mu, K, partition, mean_sign)
        notes += [f"eta = {prior.nu.tolist()}", f"gamma = {gamma:.12g}", f"W = {W0.tolist()}"]
        return independence_report([A, B], notes)
    mu, W = sample_normal_wishart(prior, seed, size=samples)
    W12, W22, K, S = _blocks(W, partition)
    A = {f"mu1[{i}]": mu[:, i] for i in partition.block1}
    A.update(_entries(S, partition.block1, partition.block1, "W11.2", upper=True))
    B = _transformed_mean(mu, K, partition, mean_sign)
    B.update(_entries(W12, partition.block1, partition.block2, "W", upper=False))
    B.update(_entries(W22, partition.block2, partition.block2, "W", upper=True))
    return independence_report([A, B], notes)


def _fixed_precision(prior: NormalWishartPrior, seed: int) -> np.ndarray:
    for attempt in range(1000):
        W = sample_wishart(prior.alpha, prior.T, seed, stream=1000 + attempt)
        if np.all(np.abs(W) >= 1e-6):
            return W
    raise RuntimeError("could not draw a precision matrix without near-zero entries")


def mean_sign_adjudication(prior, partition, samples, seed, precision=None) -> dict[int, IndependenceReport]:
    """``normal-mean`` reports for both signs of the mean transformation."""
    return {
        s: global_independence_test(
            "normal-mean", prior, partition, samples, seed, mean_sign=s, precision=precision
        )
        for s in (1, -1)
    }


@dataclass(frozen=True, eq=False)
class MixturePrior:
    """Two-component mixture; a draw comes from ``component_b`` with probability ``weight``."""

    component_a: NormalWishartPrior
    component_b: NormalWishartPrior
    weight: float

    def __post_init__(self):
        if self.component_a.n != self.component_b.n:
            raise ValueError("mixture components must share the dimension")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("weight must lie in [0, 1]")


def counterexample_test(mix: MixturePrior, partition: PartitionSpec, samples: int, seed: int) -> IndependenceReport:
    """Wishart-mode test on draws from a mixture of two Wishart laws."""
    lo, hi = sorted((mix.component_a.alpha, mix.component_b.alpha))
    if hi < 5 * lo:
        raise ValueError("mixture components must differ in degrees of freedom by a factor of at least 5")
    _check_samples(samples)
    Wa = sample_wishart(mix.component_a.alpha, mix.component_a.T, seed, size=samples, stream=0)
    Wb = sample_wishart(mix.component_b.alpha, mix.component_b.T, seed, size=samples, stream=1)
    pick = make_rng(seed, stream=2).random(samples) < mix.weight
    W = np.where(pick[:, None, None], Wb, Wa)
    A, B = wishart_groups(W, partition)
    notes = [
        "mode = wishart-mixture",
        f"alpha_a = {mix.component_a.alpha:.12g}",
        f"alpha_b = {mix.component_b.alpha:.12g}",
        f"weight = {mix.weight:.12g}",
        f"block1 = {list(partition.block1)}",
        f"seed = {seed}",
    ]
    return independence_report([A, B], notes)


def last_node_regressions(mu: np.ndarray, W: np.ndarray):
    """Vectorized ``(m, b, v)`` of the last coordinate regressed on all others."""
    k = W.shape[-1] - 1
    w_kk = W[:, k, k]
    b = -W[:, k, :k] / w_kk[:, None]
    v = 1.0 / w_kk
    m = mu[:, k] - np.einsum("ij,ij->i", b, mu[:, :k])
    return m, b, v


def local_standardization_test(
    p: NormalWishartPrior, samples: int, seed: int, standardized: bool = True
) -> IndependenceReport:
    """Pairwise independence of the last node's ``(m*, b*, 1/v)`` under ``p``.

    ``m* = (m - E[m | b, v]) sqrt(alpha_mu / v)`` and
    ``b* = L'(b - T11^{-1} T12) / sqrt(v)`` with ``T11 = L L'``, using the
    regression prior implied by ``p``. With ``standardized=False`` the raw
    ``(m, b, v)`` are tested instead.
    """
    if p.n < 2:
        raise ValueError("need at least two coordinates")
    _check_samples(samples)
    mu, W = sample_normal_wishart(p, seed, size=samples)
    m, b, v = last_node_regressions(mu, W)
    k = p.n - 1
    if standardized:
        rp = local_regression_prior(p, k, range(k))
        L = linalg.cholesky_logdet(rp.coef_precision)[0]
        sv = np.sqrt(v)
        m = (m - rp.intercept_mean(b)) * np.sqrt(rp.intercept_precision) / sv
        b = ((b - rp.coef_mean) @ L) / sv[:, None]
        tag = "*"
    else:
        tag = ""
    groups = [
        {f"m{tag}": m},
        {f"b{tag}[{j}]": b[:, j] for j in range(k)},
        # 1/v is gamma distributed with all moments finite; v itself can have
        # infinite variance, which breaks the 1/sqrt(N) calibration of the squares
        {"1/v": 1.0 / v},
    ]
    notes = [f"standardized = {standardized}", f"node = {k}", f"seed = {seed}"]
    return independence_report(groups, notes)


def fit_precision_dof(p: NormalWishartPrior, node: int, parents: Iterable[int], samples: int, seed: int) -> float:
    """Method-of-moments degrees of freedom of ``1/v`` for ``node`` given ``parents``.

    For a gamma law with shape ``k`` the ratio ``mean**2 / var`` equals ``k``;
    the one-dimensional Wishart degrees of freedom are ``2 k``.
    """
    pa = list(linalg.index_set(parents, p.n))
    Y = sorted(pa + [node])
    mu, W = sample_normal_wishart(p, seed, size=samples)
    Sigma = np.linalg.inv(W)[:, Y][:, :, Y]
    WY = np.linalg.inv(Sigma)
    j = Y.index(node)
    prec = WY[:, j, j]
    return float(2.0 * prec.mean() ** 2 / prec.var())
