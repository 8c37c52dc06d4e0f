"""Epsilon ladders, sweep records and log-log order fitting."""

from dataclasses import dataclass, field
import csv
import io

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_consistent_length

from .errors import UsageError
from .numerics import Box

NOISE_FLOOR = 1e-13


@dataclass(frozen=True)
class EpsLadder:
    eps0: float = 0.5
    factor: float = 0.5
    count: int = 10

    def __post_init__(self):
        if not 0 < self.factor < 1:
            raise UsageError("ladder factor must lie in (0, 1)")
        if self.count < 3:
            raise UsageError("ladder needs at least 3 rungs")
        if not 0 < self.eps0:
            raise UsageError("eps0 must be positive")
        if self.eps0 * self.factor ** (self.count - 1) <= 1e-6:
            raise UsageError("smallest eps must stay above 1e-6")

    @classmethod
    def from_range(cls, eps_max, eps_min, factor=0.5):
        count = int(round(np.log(eps_min / eps_max) / np.log(factor))) + 1
        return cls(eps_max, factor, count)

    @property
    def values(self):
        return self.eps0 * self.factor ** np.arange(self.count)

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return self.count


class OrderEstimator(RegressorMixin, BaseEstimator):
    """Least-squares fit of log g = p log eps + c.

    The `drop_largest` largest eps are treated as pre-asymptotic and ignored.
    Values at or below `floor` are taken as vanished; if fewer than two
    points survive, the slope is the +inf sentinel.
    """

    def __init__(self, drop_largest=2, floor=NOISE_FLOOR):
        self.drop_largest = drop_largest
        self.floor = floor

    def fit(self, eps, g):
        eps = np.asarray(eps, float).ravel()
        g = np.abs(np.asarray(g)).astype(float).ravel()
        check_consistent_length(eps, g)
        if np.any(eps <= 0):
            raise UsageError("eps values must be positive")
        order = np.argsort(eps)[::-1]
        eps, g = eps[order][self.drop_largest:], g[order][self.drop_largest:]
        keep = g > self.floor
        self.n_used_ = int(keep.sum())
        if self.n_used_ < 2:
            self.slope_, self.intercept_, self.residual_ = np.inf, -np.inf, 0.0
            self.vanished_ = True
            return self
        le, lg = np.log(eps[keep]), np.log(g[keep])
        self.slope_, self.intercept_ = np.polyfit(le, lg, 1)
        self.residual_ = float(np.sqrt(np.mean((lg - self.slope_ * le - self.intercept_) ** 2)))
        self.vanished_ = False
        return self

    def predict(self, eps):
        if not hasattr(self, "slope_"):
            raise NotFittedError("OrderEstimator is not fitted yet")
        eps = np.asarray(eps, float)
        return np.exp(self.intercept_) * eps**self.slope_


@dataclass(frozen=True)
class SweepResult:
    eps: tuple
    g: tuple
    slope: float
    residual: float
    alpha: tuple = (0,)
    K: Box = None
    label: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.eps) != len(self.g):
            raise UsageError("eps and g lengths differ")

    @property
    def vanished(self):
        return self.slope == np.inf

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "g", "log_eps", "log_g"])
        for e, g in zip(self.eps, self.g):
            lg = np.log(g) if g > 0 else -np.inf
            w.writerow([repr(float(e)), repr(float(g)), repr(float(np.log(e))), repr(float(lg))])
        return buf.getvalue()


def fit_order(res_or_eps, g=None, drop_largest=2, floor=NOISE_FLOOR):
    """Fitted slope p of g ~ eps^p for a SweepResult or raw (eps, g)."""
    if g is None:
        eps, g = res_or_eps.eps, res_or_eps.g
    else:
        eps = res_or_eps
    est = OrderEstimator(drop_largest=drop_largest, floor=floor).fit(eps, g)
    return float(est.slope_)


def make_result(eps, g, alpha=(0,), K=None, label="", floor=NOISE_FLOOR, drop_largest=2, **extra):
    est = OrderEstimator(drop_largest=drop_largest, floor=floor).fit(eps, g)
    g = tuple(float(abs(v)) for v in g)
    return SweepResult(tuple(float(e) for e in eps), g, float(est.slope_), float(est.residual_),
                       tuple(alpha), K, label, dict(extra, n_used=est.n_used_))
