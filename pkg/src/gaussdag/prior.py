"""Normal-Wishart priors over the mean and precision of a Gaussian vector.

Parameterization: ``W ~ Wishart`` with ``alpha`` degrees of freedom and
*parametric matrix* ``T``, i.e. density proportional to
``|W|^((alpha - n - 1)/2) exp(-tr(T W)/2)`` so that ``E[W] = alpha T^{-1}``;
``mu | W ~ N(nu, (alpha_mu W)^{-1})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from . import linalg
from .errors import DimensionMismatch, EmptySubset, InvalidDegreesOfFreedom, ParseError


@dataclass(frozen=True, eq=False)
class NormalWishartPrior:
    """Conjugate prior ``(nu, alpha_mu, alpha, T)`` for a complete Gaussian DAG model."""

    nu: np.ndarray
    alpha_mu: float
    alpha: float
    T: np.ndarray

    def __post_init__(self):
        nu = np.array(self.nu, dtype=float).reshape(-1)
        T = linalg.as_symmetric(self.T)
        if T.shape[0] != nu.shape[0]:
            raise DimensionMismatch(f"nu has length {nu.shape[0]} but T has order {T.shape[0]}")
        if not self.alpha_mu > 0:
            raise ValueError(f"alpha_mu must be positive, got {self.alpha_mu}")
        n = nu.shape[0]
        if not self.alpha > n - 1:
            raise InvalidDegreesOfFreedom(f"alpha must exceed n - 1 = {n - 1}, got {self.alpha}")
        linalg.cholesky_logdet(T)
        nu.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "alpha_mu", float(self.alpha_mu))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self) -> int:
        return self.nu.shape[0]

    def allclose(self, other: "NormalWishartPrior", rtol=1e-10, atol=1e-12) -> bool:
        return (
            self.n == other.n
            and np.allclose(self.nu, other.nu, rtol=rtol, atol=atol)
            and np.isclose(self.alpha_mu, other.alpha_mu, rtol=rtol, atol=atol)
            and np.isclose(self.alpha, other.alpha, rtol=rtol, atol=atol)
            and np.allclose(self.T, other.T, rtol=rtol, atol=atol)
        )

    def describe(self) -> str:
        return (
            f"nu = {', '.join(f'{v:.12g}' for v in self.nu)}\n"
            f"alpha_mu = {self.alpha_mu:.12g}\n"
            f"alpha = {self.alpha:.12g}\n"
            "T =\n" + "\n".join(", ".join(f"{v:.12g}" for v in row) for row in self.T) + "\n"
        )


def default_prior(n: int) -> NormalWishartPrior:
    """``nu = 0``, ``alpha_mu = 1``, ``alpha = n + 2``, ``T = I``."""
    return NormalWishartPrior(np.zeros(n), 1.0, n + 2.0, np.eye(n))


def wishart_log_norm_const(l: int, a: float) -> float:
    """Log of the Wishart normalizing constant ``c(l, a)``.

    ``c(l, a) = [2^(a l / 2) pi^(l (l - 1) / 4) prod_{i=1..l} Gamma((a + 1 - i) / 2)]^{-1}``
    """
    if l < 1:
        raise ValueError("dimension must be at least 1")
    if not a > l - 1:
        raise InvalidDegreesOfFreedom(f"degrees of freedom must exceed {l - 1}, got {a}")
    s = 0.5 * a * l * math.log(2.0) + 0.25 * l * (l - 1) * math.log(math.pi)
    s += sum(math.lgamma(0.5 * (a + 1 - i)) for i in range(1, l + 1))
    return -s


def wishart_log_pdf(W, a: float, T) -> float:
    """Log density of ``W`` under the Wishart with ``a`` degrees of freedom and parametric matrix ``T``."""
    W = linalg.as_symmetric(W)
    T = linalg.as_symmetric(T)
    l = W.shape[0]
    return (
        wishart_log_norm_const(l, a)
        + 0.5 * a * linalg.logdet(T)
        + 0.5 * (a - l - 1) * linalg.logdet(W)
        - 0.5 * float(np.sum(T * W))
    )


@dataclass(frozen=True, eq=False)
class SufficientStats:
    count: int
    mean: np.ndarray
    scatter: np.ndarray

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    def restrict(self, Y: Iterable[int]) -> "SufficientStats":
        y = list(Y)
        return SufficientStats(self.count, self.mean[y], self.scatter[np.ix_(y, y)])


def sufficient_stats(data) -> SufficientStats:
    """Row count, column means and centered scatter ``sum (x - xbar)(x - xbar)'``."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"data must be a 2-D table, got shape {X.shape}")
    m, n = X.shape
    if m == 0:
        return SufficientStats(0, np.zeros(n), np.zeros((n, n)))
    mean = X.mean(axis=0)
    D = X - mean
    S = D.T @ D
    return SufficientStats(m, mean, 0.5 * (S + S.T))


def posterior_update(p: NormalWishartPrior, s: SufficientStats) -> NormalWishartPrior:
    """Conjugate update of a normal-Wishart prior by the statistics of ``m`` observations."""
    if s.n != p.n:
        raise DimensionMismatch(f"prior has {p.n} coordinates, data has {s.n}")
    m = s.count
    if m == 0:
        return p
    a_mu = p.alpha_mu
    nu_post = (a_mu * p.nu + m * s.mean) / (a_mu + m)
    d = p.nu - s.mean
    R = p.T + s.scatter + (a_mu * m / (a_mu + m)) * np.outer(d, d)
    return NormalWishartPrior(nu_post, a_mu + m, p.alpha + m, R)


def marginal_prior(p: NormalWishartPrior, Y: Iterable[int]) -> NormalWishartPrior:
    """Normal-Wishart law of ``(mu_Y, ((W^{-1})_YY)^{-1})``.

    Degrees of freedom drop to ``alpha - n + |Y|`` and the parametric matrix
    is the principal submatrix ``T_YY``.
    """
    y = linalg.index_set(Y, p.n)
    if not y:
        raise EmptySubset("Y must contain at least one coordinate")
    if len(y) == p.n:
        return p
    return NormalWishartPrior(p.nu[list(y)], p.alpha_mu, p.alpha - p.n + len(y), p.T[np.ix_(y, y)])


@dataclass(frozen=True, eq=False)
class RegressionPrior:
    """Prior over ``(m, b, v)`` of one node's regression on its parents.

    * ``1/v`` is one-dimensional Wishart with ``precision_dof`` degrees of
      freedom and parametric value ``precision_param`` (a gamma law with
      shape ``precision_dof / 2`` and rate ``precision_param / 2``).
    * ``b | v`` is normal with mean ``coef_mean`` and precision ``coef_precision / v``.
    * ``m | b, v`` is normal with mean ``intercept_location - b . parent_locations``
      and precision ``intercept_precision / v``.
    """

    node: int
    parents: tuple[int, ...]
    precision_dof: float
    precision_param: float
    coef_mean: np.ndarray
    coef_precision: np.ndarray
    intercept_location: float
    parent_locations: np.ndarray
    intercept_precision: float

    def intercept_mean(self, b) -> np.ndarray:
        return self.intercept_location - np.asarray(b) @ self.parent_locations

    @property
    def mean_precision(self) -> float:
        """``E[1/v]``."""
        return self.precision_dof / self.precision_param


def local_regression_prior(p: NormalWishartPrior, node: int, parents: Iterable[int]) -> RegressionPrior:
    """Regression prior for ``node`` given ``parents`` implied by the complete-model prior.

    The prior is first marginalized to ``parents + [node]``; the parents form
    block 1 and the node block 2.
    """
    pa = linalg.index_set(parents, p.n)
    if node in pa:
        raise ValueError("node cannot be its own parent")
    Y = linalg.index_set(pa + (node,), p.n)
    q = marginal_prior(p, Y)
    local = {v: i for i, v in enumerate(Y)}
    ip = [local[v] for v in pa]
    inode = local[node]
    T = q.T
    if ip:
        T11 = T[np.ix_(ip, ip)]
        T12 = T[ip, inode]
        coef_mean = linalg.solve_spd(T11, T12)
    else:
        T11 = np.zeros((0, 0))
        coef_mean = np.zeros(0)
    scale = float(linalg.schur_complement(T, [inode])[0, 0])
    return RegressionPrior(
        node=node,
        parents=pa,
        precision_dof=q.alpha,
        precision_param=scale,
        coef_mean=coef_mean,
        coef_precision=T11,
        intercept_location=float(q.nu[inode]),
        parent_locations=q.nu[ip],
        intercept_precision=q.alpha_mu,
    )


PRIOR_KEYS = ("alpha_mu", "alpha", "nu", "T")


def parse_prior_config(text: str, n: int, base_dir=".") -> NormalWishartPrior:
    """Parse ``key = value`` prior settings for ``n`` coordinates.

    Missing keys take the values of :func:`default_prior`. ``T`` accepts
    ``identity``, ``scaled:<c>`` or ``file:<path>`` (relative to ``base_dir``).
    """
    base = default_prior(n)
    values: dict[str, object] = {
        "alpha_mu": base.alpha_mu,
        "alpha": base.alpha,
        "nu": base.nu,
        "T": base.T,
    }
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        if key not in PRIOR_KEYS:
            raise ParseError(f"unknown prior key {key!r}", lineno)
        if key in seen:
            raise ParseError(f"duplicate prior key {key!r}", lineno)
        seen.add(key)
        try:
            if key in ("alpha_mu", "alpha"):
                values[key] = float(value)
            elif key == "nu":
                if value == "zeros":
                    values[key] = np.zeros(n)
                else:
                    nu = np.array([float(v) for v in value.split(",")])
                    if nu.shape[0] != n:
                        raise ParseError(f"nu has {nu.shape[0]} entries, expected {n}", lineno)
                    values[key] = nu
            else:
                values[key] = _parse_T(value, n, base_dir)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad value for {key}: {exc}", lineno) from None
    return NormalWishartPrior(values["nu"], values["alpha_mu"], values["alpha"], values["T"])


def _parse_T(value: str, n: int, base_dir) -> np.ndarray:
    if value == "identity":
        return np.eye(n)
    if value.startswith("scaled:"):
        c = float(value[len("scaled:"):])
        if not c > 0:
            raise ValueError("scale must be positive")
        return c * np.eye(n)
    if value.startswith("file:"):
        path = Path(value[len("file:"):])
        if not path.is_absolute():
            path = Path(base_dir) / path
        M = linalg.read_matrix_csv(path)
        if M.shape[0] != n:
            raise ValueError(f"T has order {M.shape[0]}, expected {n}")
        return M
    raise ValueError(f"unrecognized T specification {value!r}")


def load_prior(path, n: int) -> NormalWishartPrior:
    path = Path(path)
    return parse_prior_config(path.read_text(encoding="utf-8"), n, base_dir=path.parent)
