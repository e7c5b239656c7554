"""Seeded sampling of Wishart and normal-Wishart draws and of Gaussian DAG datasets.

Every function takes an explicit integer seed and builds a fresh counter-based
(Philox) generator from it, so a draw is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .dag import DagStructure, topological_order
from .errors import DimensionMismatch, InvalidDegreesOfFreedom, VariableMismatch
from .prior import NormalWishartPrior, local_regression_prior


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by ``(seed, stream)``."""
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, int(stream)])))


@dataclass(frozen=True, eq=False)
class GaussianDagParams:
    """Per-node regression ``x_i = intercepts[i] + coefficients[i] . x[parents[i]] + noise``.

    ``coefficients[i]`` is aligned with the sorted ``parents[i]``; the noise of
    node ``i`` has variance ``variances[i]``.
    """

    parents: tuple[tuple[int, ...], ...]
    intercepts: np.ndarray
    coefficients: tuple[np.ndarray, ...]
    variances: np.ndarray

    def __post_init__(self):
        parents = tuple(tuple(sorted(int(p) for p in ps)) for ps in self.parents)
        coefs = tuple(np.array(c, dtype=float).reshape(-1) for c in self.coefficients)
        intercepts = np.array(self.intercepts, dtype=float).reshape(-1)
        variances = np.array(self.variances, dtype=float).reshape(-1)
        n = len(parents)
        if len(coefs) != n or intercepts.shape[0] != n or variances.shape[0] != n:
            raise DimensionMismatch("parameter arrays disagree on the number of nodes")
        for ps, c in zip(parents, coefs):
            if c.shape[0] != len(ps):
                raise DimensionMismatch("coefficient vector length must equal the parent count")
        if np.any(variances <= 0):
            raise ValueError("variances must be positive")
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "intercepts", intercepts)
        object.__setattr__(self, "variances", variances)

    @property
    def n(self) -> int:
        return len(self.parents)

    def matches(self, g: DagStructure) -> bool:
        return g.n == self.n and all(tuple(sorted(ps)) == qs for ps, qs in zip(g.parents, self.parents))


def _wishart_factor(a: float, T, rng: np.random.Generator, size: int | None) -> np.ndarray:
    """Lower-triangular ``M`` with ``M M'`` Wishart(a, parametric T), via the Bartlett construction."""
    T = linalg.as_symmetric(T)
    n = T.shape[0]
    if not a > n - 1:
        raise InvalidDegreesOfFreedom(f"degrees of freedom must exceed {n - 1}, got {a}")
    L = linalg.cholesky_logdet(linalg.inv_spd(T))[0]
    shape = (1 if size is None else size, n, n)
    A = np.zeros(shape)
    rows, cols = np.tril_indices(n, -1)
    A[:, rows, cols] = rng.standard_normal((shape[0], rows.size))
    for i in range(n):
        A[:, i, i] = np.sqrt(rng.chisquare(a - i, size=shape[0]))
    return L @ A


def sample_wishart(a: float, T, seed: int, size: int | None = None, stream: int = 0) -> np.ndarray:
    """Draw ``W`` with density proportional to ``|W|^((a-n-1)/2) exp(-tr(T W)/2)``.

    Returns one ``(n, n)`` matrix, or an ``(size, n, n)`` stack when ``size`` is given.
    """
    M = _wishart_factor(a, T, make_rng(seed, stream), size)
    W = M @ M.transpose(0, 2, 1)
    W = 0.5 * (W + W.transpose(0, 2, 1))
    return W[0] if size is None else W


def sample_normal_wishart(p: NormalWishartPrior, seed: int, size: int | None = None, stream: int = 0):
    """Draw ``(mu, W)`` with ``W ~ Wishart(alpha, T)`` and ``mu | W ~ N(nu, (alpha_mu W)^{-1})``."""
    rng = make_rng(seed, stream)
    M = _wishart_factor(p.alpha, p.T, rng, size)
    W = M @ M.transpose(0, 2, 1)
    W = 0.5 * (W + W.transpose(0, 2, 1))
    z = rng.standard_normal((M.shape[0], p.n, 1))
    # W = M M' so M'^{-1} z has covariance W^{-1}
    mu = p.nu + np.linalg.solve(M.transpose(0, 2, 1), z)[..., 0] / np.sqrt(p.alpha_mu)
    if size is None:
        return mu[0], W[0]
    return mu, W


def regression_params_from_joint(mu, W, ordering: Sequence[int] | None = None) -> GaussianDagParams:
    """Regression parameters of the complete DAG with node order ``ordering`` for ``N(mu, W^{-1})``.

    The last node ``k`` of the current block gets ``v = 1 / W_kk``,
    ``b = -W_kP / W_kk`` and intercept ``mu_k - b . mu_P``; the recursion
    continues on the leading block ``P`` with precision ``W_PP - W_Pk W_kP / W_kk``.
    """
    mu = np.asarray(mu, dtype=float).reshape(-1)
    W = linalg.as_symmetric(W)
    n = mu.shape[0]
    if W.shape[0] != n:
        raise DimensionMismatch("mu and W disagree on the dimension")
    linalg.cholesky_logdet(W)
    order = list(range(n)) if ordering is None else [int(i) for i in ordering]
    if sorted(order) != list(range(n)):
        raise ValueError(f"ordering {order} is not a permutation of 0..{n - 1}")
    parents: list[tuple[int, ...]] = [()] * n
    coefs: list[np.ndarray] = [np.zeros(0)] * n
    intercepts = np.zeros(n)
    variances = np.zeros(n)
    block = list(order)
    P = W[np.ix_(block, block)]
    while block:
        k = block[-1]
        lead = block[:-1]
        w_kk = P[-1, -1]
        w_kP = P[-1, :-1]
        b = -w_kP / w_kk
        srt = np.argsort(lead)
        parents[k] = tuple(lead[i] for i in srt)
        coefs[k] = b[srt]
        variances[k] = 1.0 / w_kk
        intercepts[k] = mu[k] - b @ mu[lead]
        P = P[:-1, :-1] - np.outer(w_kP, w_kP) / w_kk
        block = lead
    return GaussianDagParams(tuple(parents), intercepts, tuple(coefs), variances)


def recompose_joint(params: GaussianDagParams) -> tuple[np.ndarray, np.ndarray]:
    """Mean and precision of the joint normal implied by the regressions."""
    n = params.n
    B = np.zeros((n, n))
    for i, (ps, c) in enumerate(zip(params.parents, params.coefficients)):
        B[i, list(ps)] = c
    I_B = np.eye(n) - B
    mu = np.linalg.solve(I_B, params.intercepts)
    W = I_B.T @ np.diag(1.0 / params.variances) @ I_B
    return mu, 0.5 * (W + W.T)


def sample_params_from_prior(p: NormalWishartPrior, g: DagStructure, seed: int) -> GaussianDagParams:
    """Draw regression parameters for ``g`` family by family from the implied local priors."""
    if g.n != p.n:
        raise VariableMismatch(f"DAG has {g.n} nodes, prior has {p.n}")
    parents, coefs, intercepts, variances = [], [], [], []
    for i, ps in enumerate(g.parents):
        rng = make_rng(seed, stream=i)
        rp = local_regression_prior(p, i, ps)
        precision = rng.gamma(0.5 * rp.precision_dof, 2.0 / rp.precision_param)
        v = 1.0 / precision
        if rp.parents:
            L = linalg.cholesky_logdet(rp.coef_precision)[0]
            z = rng.standard_normal(len(rp.parents))
            b = rp.coef_mean + np.sqrt(v) * np.linalg.solve(L.T, z)
        else:
            b = np.zeros(0)
        m = rp.intercept_mean(b) + np.sqrt(v / rp.intercept_precision) * rng.standard_normal()
        parents.append(rp.parents)
        coefs.append(b)
        intercepts.append(float(m))
        variances.append(v)
    return GaussianDagParams(tuple(parents), intercepts, tuple(coefs), variances)


def sample_dataset(params: GaussianDagParams, g: DagStructure, rows: int, seed: int) -> np.ndarray:
    """Ancestral sampling of ``rows`` observations, nodes visited in topological order."""
    if not params.matches(g):
        raise VariableMismatch("parameters do not match the DAG's parent sets")
    if rows < 0:
        raise ValueError("rows must be non-negative")
    rng = make_rng(seed)
    noise = rng.standard_normal((rows, g.n)) * np.sqrt(params.variances)
    X = np.zeros((rows, g.n))
    for i in topological_order(g):
        ps = list(params.parents[i])
        X[:, i] = params.intercepts[i] + noise[:, i]
        if ps:
            X[:, i] += X[:, ps] @ params.coefficients[i]
    return X
