"""Admissible domains U_eps(Omega), representatives, and the C/J translation chart."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UsageError
from .numerics import Box
from .testobjects import translate


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Open set Omega given as a box, optionally cut down by a point predicate.

    `predicate` maps an (m, s) array of points to booleans; support boxes are
    tested on their corners and edge midpoints.  `omega=None` means R^s.
    """

    omega: Box = None
    margin: float = None
    predicate: object = None
    dim: int = 1

    def __post_init__(self):
        if self.omega is not None:
            if self.omega.is_degenerate:
                raise UsageError("domain box needs positive widths")
            object.__setattr__(self, "dim", self.omega.dim)
            margin = 1e-9 * self.omega.diam if self.margin is None else self.margin
            if margin < 0 or margin >= 0.5 * float(np.min(self.omega.width)):
                raise UsageError("margin must be nonnegative and below half the smallest side")
            object.__setattr__(self, "margin", margin)
        elif self.margin is None:
            object.__setattr__(self, "margin", 0.0)

    @classmethod
    def whole(cls, dim=1):
        return cls(None, 0.0, None, dim)

    def contains_box(self, box):
        if self.omega is not None and not self.omega.contains_box(box, self.margin):
            return False
        if self.predicate is not None:
            probe = box.corners()
            mids = 0.5 * (probe[:, None, :] + probe[None, :, :]).reshape(-1, box.dim)
            if not np.all(self.predicate(np.vstack([probe, mids]))):
                return False
        return True

    def contains_point(self, x):
        return self.contains_box(Box.point(x))

    def default_K(self, fraction=0.8):
        if self.omega is None:
            return Box.cube(1.0, self.dim)
        return self.omega.shrunk(fraction)


def in_U_eps(phi, x, domain, eps=1.0):
    """Interval test eps * supp(phi) + x inside Omega with the domain's clearance."""
    if domain is None:
        return True
    x = np.atleast_1d(np.asarray(x, float))
    return domain.contains_box(phi.box.scaled(eps).shifted(x))


@dataclass(frozen=True, eq=False)
class Representative:
    """Evaluatable R(phi, x) tagged with its formalism ('C' or 'J').

    If `domain` is set, arguments outside U(Omega) (C) resp. its image under
    the translation chart (J) raise DomainError before evaluation.
    """

    fn: object
    tag: str = "C"
    domain: DomainSpec = None
    provenance: str = ""
    operands: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in ("C", "J"):
            raise UsageError(f"formalism tag must be 'C' or 'J', got {self.tag!r}")

    def admissible(self, phi, x):
        if self.domain is None:
            return True
        if self.tag == "C":
            return in_U_eps(phi, x, self.domain)
        return self.domain.contains_box(phi.box) and self.domain.contains_point(x)

    def __call__(self, phi, x):
        x = np.atleast_1d(np.asarray(x, float))
        if not self.admissible(phi, x):
            raise DomainError(f"({phi.label or 'phi'}, x={x.tolist()}) lies outside U(Omega) "
                              f"for {self.provenance or 'representative'}")
        return self.fn(phi, x)

    def _binary(self, other, op):
        from .algebra import combine
        if isinstance(other, Representative):
            return combine(op, self, other)
        if op == "add":
            return combine("add", self, constant(other, self.tag, self.domain))
        if op == "mul":
            return combine("scalar", self, c=other)
        raise UsageError(f"unsupported operand for {op}")

    def __add__(self, other):
        return self._binary(other, "add")

    __radd__ = __add__

    def __mul__(self, other):
        return self._binary(other, "mul")

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other


def constant(c, tag="C", domain=None):
    return Representative(lambda phi, x, c=c: c, tag, domain, "constant", (), {"value": c})


def to_C(rep):
    """R^C(phi, x) = R^J(T_x phi, x)."""
    if rep.tag != "J":
        raise UsageError("to_C expects a J-formalism representative")
    return Representative(lambda phi, x: rep(translate(phi, x), x), "C", None, "to_C", (rep,), {"inner": rep})


def to_J(rep):
    """R^J(phi, x) = R^C(T_{-x} phi, x); inverse of to_C."""
    if rep.tag != "C":
        raise UsageError("to_J expects a C-formalism representative")
    return Representative(lambda phi, x: rep(translate(phi, -x), x), "J", None, "to_J", (rep,), {"inner": rep})


def insert(rep, phi, x):
    """Evaluate at a scaled test function: C uses (phi, x), J the translated (T_x phi, x)."""
    x = np.atleast_1d(np.asarray(x, float))
    if rep.tag == "C":
        return rep(phi, x)
    return rep(translate(phi, x), x)
