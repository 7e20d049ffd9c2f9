"""Monotone transformation components.

Continuous nodes use a Bernstein-polynomial intercept on the unit
interval with linear tangent continuation outside it, so the
transformation stays a bijection of the real line.  Discrete nodes use
ordered cut-points.  Strict monotonicity comes from a cumulative
softplus reparametrization of the raw parameters.  Shift terms (linear
coefficients or small tanh networks) add to the intercept on the latent
scale; the latent reference distribution is the standard logistic.

Evaluation helpers here are written against plain numpy arrays; the
training code in :mod:`model` assembles the same formulas on a
:class:`~tramdag.diff.Tape`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diff import _np_sigmoid, _np_softplus
from .errors import NonFiniteInputError

__all__ = [
    "Scaler",
    "LatentLogistic",
    "monotone_params",
    "softplus_inverse",
    "bernstein_basis",
    "bernstein_slope_basis",
    "bernstein_eval",
    "bernstein_deriv",
    "transform_value",
    "transform_slope",
    "transform_inverse",
    "discrete_class_probs",
    "discrete_log_probs",
    "sample_discrete",
    "MlpWeights",
    "mlp_apply",
    "SimpleIntercept",
    "ComplexIntercept",
    "LinearShift",
    "ComplexShift",
    "MLP_HIDDEN",
]

MLP_HIDDEN = 16
BISECTION_ITERS = 48  # interval width 2**-48 < 1e-14 on the unit interval


@dataclass(frozen=True)
class Scaler:
    """Affine map of the training range onto [0, 1] with a 10% margin."""

    low: float
    high: float

    def __post_init__(self):
        if not (self.high > self.low):
            raise ValueError(f"degenerate scaler [{self.low}, {self.high}]")

    @classmethod
    def from_data(cls, x: np.ndarray, margin: float = 0.1) -> "Scaler":
        x = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(x)):
            raise NonFiniteInputError("scaler input contains non-finite values")
        lo, hi = float(np.min(x)), float(np.max(x))
        if hi == lo:
            # degenerate training column; give it unit width
            lo, hi = lo - 0.5, hi + 0.5
        span = hi - lo
        return cls(low=lo - margin * span, high=hi + margin * span)

    def standardize(self, x):
        return (np.asarray(x, dtype=np.float64) - self.low) / (self.high - self.low)

    def destandardize(self, z):
        return self.low + np.asarray(z, dtype=np.float64) * (self.high - self.low)

    @property
    def log_jacobian(self) -> float:
        """log d(standardize)/dx, a per-node constant."""
        return -math.log(self.high - self.low)


class LatentLogistic:
    """Standard logistic latent distribution."""

    @staticmethod
    def cdf(z):
        return _np_sigmoid(z)

    @staticmethod
    def quantile(p):
        p = np.asarray(p, dtype=np.float64)
        return np.log(p) - np.log1p(-p)

    @staticmethod
    def density(z):
        s = _np_sigmoid(z)
        return s * (1.0 - s)

    @staticmethod
    def log_density(z):
        z = np.asarray(z, dtype=np.float64)
        return -(_np_softplus(z) + _np_softplus(-z))


def softplus_inverse(y: float) -> float:
    """x with softplus(x) = y, for positive y."""
    if y <= 0:
        raise ValueError("softplus is positive")
    return float(y + np.log(-np.expm1(-y)))


def monotone_params(raw):
    """Strictly increasing parameters from unconstrained raw values.

    First entry passes through; every further entry adds softplus of the
    raw increment.  Works elementwise on floats, arrays or tape Vars.
    """
    from .diff import softplus  # local import to avoid a cycle at module load

    out = [raw[0]]
    for r in raw[1:]:
        out.append(out[-1] + softplus(r))
    return out


def _monotone_np(raw: np.ndarray) -> np.ndarray:
    raw = np.asarray(raw, dtype=np.float64)
    theta = np.empty_like(raw)
    theta[..., 0] = raw[..., 0]
    np.cumsum(_np_softplus(raw[..., 1:]), axis=-1, out=theta[..., 1:])
    theta[..., 1:] += raw[..., [0]]
    return theta


# -- Bernstein basis ---------------------------------------------------------


def _binom_row(order: int) -> np.ndarray:
    return np.array([math.comb(order, k) for k in range(order + 1)], dtype=np.float64)


def bernstein_basis(x, order: int) -> np.ndarray:
    """Basis values B_{k,order}(x) for k = 0..order; rows sum to one on [0,1]."""
    x = np.asarray(x, dtype=np.float64)
    ks = np.arange(order + 1)
    xp = x[..., None] ** ks
    op = (1.0 - x[..., None]) ** ks[::-1]
    return _binom_row(order) * xp * op


def bernstein_slope_basis(x, order: int) -> np.ndarray:
    """Basis of the derivative: order * B_{k,order-1}(x) for k = 0..order-1."""
    if order < 1:
        raise ValueError("order must be at least 1")
    return order * bernstein_basis(x, order - 1)


def bernstein_eval(theta, x):
    """Polynomial sum theta_k B_{k,M}(x); theta may be (M+1,) or (n, M+1)."""
    theta = np.asarray(theta, dtype=np.float64)
    order = theta.shape[-1] - 1
    return np.sum(theta * bernstein_basis(x, order), axis=-1)


def bernstein_deriv(theta, x):
    """Derivative of :func:`bernstein_eval` in x."""
    theta = np.asarray(theta, dtype=np.float64)
    order = theta.shape[-1] - 1
    diffs = theta[..., 1:] - theta[..., :-1]
    return np.sum(diffs * bernstein_slope_basis(x, order), axis=-1)


def _endpoints(theta: np.ndarray, order: int):
    """Value and slope of the Bernstein curve at 0 and 1."""
    v0 = theta[..., 0]
    v1 = theta[..., -1]
    d0 = order * (theta[..., 1] - theta[..., 0])
    d1 = order * (theta[..., -1] - theta[..., -2])
    return v0, v1, d0, d1


def transform_value(theta, scaler: Scaler, x, shift=0.0):
    """h(x | parents) on the latent scale, tangent-extended outside [0, 1]."""
    theta = np.asarray(theta, dtype=np.float64)
    order = theta.shape[-1] - 1
    z = scaler.standardize(x)
    v0, v1, d0, d1 = _endpoints(theta, order)
    inner = bernstein_eval(theta, np.clip(z, 0.0, 1.0))
    value = np.where(z < 0.0, v0 + d0 * z, np.where(z > 1.0, v1 + d1 * (z - 1.0), inner))
    return value + shift


def transform_slope(theta, scaler: Scaler, x):
    """dh/dz at standardized z, constant on the tangent branches."""
    theta = np.asarray(theta, dtype=np.float64)
    order = theta.shape[-1] - 1
    z = scaler.standardize(x)
    _, _, d0, d1 = _endpoints(theta, order)
    inner = bernstein_deriv(theta, np.clip(z, 0.0, 1.0))
    return np.where(z < 0.0, d0, np.where(z > 1.0, d1, inner))


def transform_inverse(theta, scaler: Scaler, u, shift=0.0):
    """x with transform_value(theta, scaler, x, shift) = u.

    Analytic on the tangent branches, bisection to machine-level
    precision on the unit interval inside.
    """
    theta = np.asarray(theta, dtype=np.float64)
    order = theta.shape[-1] - 1
    t = np.asarray(u, dtype=np.float64) - shift
    scalar_in = t.ndim == 0
    t = np.atleast_1d(t)
    if theta.ndim == 1:
        theta_b = np.broadcast_to(theta, (t.shape[0], order + 1))
    else:
        theta_b = theta
    v0, v1, d0, d1 = _endpoints(theta_b, order)
    z = np.empty_like(t)
    below = t < v0
    above = t > v1
    mid = ~(below | above)
    z[below] = (t[below] - v0[below]) / d0[below]
    z[above] = 1.0 + (t[above] - v1[above]) / d1[above]
    if np.any(mid):
        tm = t[mid]
        th = theta_b[mid]
        lo = np.zeros_like(tm)
        hi = np.ones_like(tm)
        for _ in range(BISECTION_ITERS):
            m = 0.5 * (lo + hi)
            too_high = bernstein_eval(th, m) >= tm
            hi = np.where(too_high, m, hi)
            lo = np.where(too_high, lo, m)
        z[mid] = 0.5 * (lo + hi)
    x = scaler.destandardize(z)
    return float(x[0]) if scalar_in else x


# -- discrete nodes -----------------------------------------------------------


def discrete_class_probs(cuts, shift=0.0) -> np.ndarray:
    """Probabilities of levels 1..K from K-1 ordered cut-points plus shift."""
    a = np.asarray(cuts, dtype=np.float64) + np.asarray(shift, dtype=np.float64)[..., None]
    cdf = _np_sigmoid(a)
    k = cdf.shape[-1]
    probs = np.empty(cdf.shape[:-1] + (k + 1,))
    probs[..., 0] = cdf[..., 0]
    probs[..., 1:-1] = cdf[..., 1:] - cdf[..., :-1]
    probs[..., -1] = 1.0 - cdf[..., -1]
    return probs


def discrete_log_probs(cuts, shift=0.0) -> np.ndarray:
    """log of :func:`discrete_class_probs`, stable far into both tails."""
    cuts = np.asarray(cuts, dtype=np.float64)
    a = cuts + np.asarray(shift, dtype=np.float64)[..., None]
    lo = _np_log_sig(a)
    hi = _np_log_sig(-a)
    k = a.shape[-1]
    out = np.empty(a.shape[:-1] + (k + 1,))
    out[..., 0] = lo[..., 0]
    out[..., -1] = hi[..., -1]
    if k > 1:
        gaps = cuts[..., 1:] - cuts[..., :-1]
        if isinstance(gaps, np.ndarray) and gaps.ndim < a.ndim:
            gaps = np.broadcast_to(gaps, a[..., 1:].shape)
        # sigma(a) - sigma(b) = sigma(a) sigma(-b) (1 - exp(b - a))
        out[..., 1:-1] = lo[..., 1:] + hi[..., :-1] + np.log(-np.expm1(-gaps))
    return out


def _np_log_sig(x):
    return np.minimum(x, 0.0) - np.log1p(np.exp(-np.abs(x)))


def sample_discrete(cuts, shift, u):
    """Smallest level k with cut_k + shift >= u; the top level catches the rest."""
    cuts = np.asarray(cuts, dtype=np.float64)
    a = cuts + np.asarray(shift, dtype=np.float64)[..., None]
    return 1 + np.sum(a < np.asarray(u, dtype=np.float64)[..., None], axis=-1)


# -- shift terms --------------------------------------------------------------


@dataclass
class MlpWeights:
    """Two tanh hidden layers of width 16 with a linear read-out."""

    w1: np.ndarray  # (hidden, n_in)
    b1: np.ndarray
    w2: np.ndarray  # (hidden, hidden)
    b2: np.ndarray
    w3: np.ndarray  # (n_out, hidden)
    b3: np.ndarray

    @classmethod
    def initialized(
        cls,
        rng: np.random.Generator,
        n_in: int,
        n_out: int,
        hidden: int = MLP_HIDDEN,
        out_bias: np.ndarray | None = None,
    ) -> "MlpWeights":
        def u(fan_in, shape):
            bound = 1.0 / math.sqrt(fan_in)
            return rng.uniform(-bound, bound, size=shape)

        return cls(
            w1=u(n_in, (hidden, n_in)),
            b1=np.zeros(hidden),
            w2=u(hidden, (hidden, hidden)),
            b2=np.zeros(hidden),
            w3=u(hidden, (n_out, hidden)),
            b3=np.zeros(n_out) if out_bias is None else np.asarray(out_bias, float).copy(),
        )

    def arrays(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w3, self.b3]


def mlp_apply(w: MlpWeights, x: np.ndarray) -> np.ndarray:
    """Forward pass on (n, n_in) inputs; returns (n, n_out)."""
    h1 = np.tanh(x @ w.w1.T + w.b1)
    h2 = np.tanh(h1 @ w.w2.T + w.b2)
    return h2 @ w.w3.T + w.b3


@dataclass
class SimpleIntercept:
    """Raw intercept parameters shared by all rows."""

    raw: np.ndarray  # (M+1,) continuous, (K-1,) discrete

    def theta(self) -> np.ndarray:
        return _monotone_np(self.raw)


@dataclass
class ComplexIntercept:
    """A network maps parent values to the raw intercept parameters."""

    mlp: MlpWeights
    parent_indices: tuple[int, ...]

    def theta(self, parent_values: np.ndarray) -> np.ndarray:
        return _monotone_np(mlp_apply(self.mlp, parent_values))


@dataclass
class LinearShift:
    parent_index: int
    beta: float = 0.0

    def value(self, x: np.ndarray) -> np.ndarray:
        return self.beta * np.asarray(x, dtype=np.float64)


@dataclass
class ComplexShift:
    """Shift network over one parent, centered on the training sample."""

    parent_index: int
    mlp: MlpWeights
    center: float = 0.0

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return mlp_apply(self.mlp, x[:, None])[:, 0] - self.center
