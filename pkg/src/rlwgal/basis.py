"""Exponential B-spline basis on a uniform mesh.

Each basis function B_i is supported on four mesh intervals around its
center knot x_i and is built from linear and exp(+-p x) pieces controlled
by a tension parameter p.  As p*h -> 0 the family degenerates to the
cubic B-spline (normalized so B_i(x_i) = 1).

The raw piece coefficients suffer catastrophic cancellation for small
p*h (the regime in which the tension parameter is actually useful), so
all evaluation goes through series-stabilized forms of sinh(y)-y,
y*cosh(y)-sinh(y) and cosh(y)-1.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DegenerateTensionError",
    "ExpBasis",
    "Mesh",
    "make_basis",
    "make_mesh",
    "eval_piece",
    "piece_eval",
    "knot_value",
]

DEGENERATE_TOL = 1e-14
_SERIES_CUTOFF = 0.5


class DegenerateTensionError(ArithmeticError):
    """p*h*cosh(p*h) - sinh(p*h) too close to zero for stable coefficients."""


def sinh_minus(y):
    """sinh(y) - y, accurate for all y (series below the cutoff)."""
    y = np.asarray(y, dtype=float)
    y2 = y * y
    ser = 1.0 + y2 / 272.0
    for d in (210.0, 156.0, 110.0, 72.0, 42.0, 20.0):
        ser = 1.0 + (y2 / d) * ser
    small = (y * y2 / 6.0) * ser
    with np.errstate(over="ignore"):
        direct = np.where(np.abs(y) < _SERIES_CUTOFF, 0.0, np.sinh(y) - y)
    out = np.where(np.abs(y) < _SERIES_CUTOFF, small, direct)
    return out if out.ndim else float(out)


def ycosh_minus_sinh(y):
    """y*cosh(y) - sinh(y), accurate for all y."""
    y = np.asarray(y, dtype=float)
    y2 = y * y
    ser = 1.0 + y2 / 238.0
    for d in (180.0, 130.0, 88.0, 54.0, 28.0, 10.0):
        ser = 1.0 + (y2 / d) * ser
    small = (y * y2 / 3.0) * ser
    with np.errstate(over="ignore"):
        direct = np.where(np.abs(y) < _SERIES_CUTOFF, 0.0,
                          y * np.cosh(y) - np.sinh(y))
    out = np.where(np.abs(y) < _SERIES_CUTOFF, small, direct)
    return out if out.ndim else float(out)


def cosh_minus_one(y):
    """cosh(y) - 1 = 2*sinh(y/2)**2, cancellation-free."""
    y = np.asarray(y, dtype=float)
    sh = np.sinh(y / 2.0)
    out = 2.0 * sh * sh
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ExpBasis:
    """Tension basis family: all constants derived from (p, h).

    b2, a1, b1, c1, d1 are the raw piece coefficients; alpha1..alpha3 are
    the knot values of B, B' and B''.  denom = p*h*cosh(p*h) - sinh(p*h)
    is the common denominator.  s1 = c1 + d1 and dd = c1 - d1 are the
    cancellation-free combinations used internally by the evaluators.
    """

    p: float
    h: float
    s: float
    c: float
    b2: float
    a1: float
    b1: float
    c1: float
    d1: float
    alpha1: float
    alpha2: float
    alpha3: float
    denom: float
    s1: float = field(repr=False)
    dd: float = field(repr=False)


def make_basis(p, h):
    """Build the exponential B-spline family for tension p and spacing h.

    Raises ValueError for nonpositive p or h, DegenerateTensionError when
    the coefficient denominator falls below 1e-14.
    """
    p = float(p)
    h = float(h)
    if not p > 0.0:
        raise ValueError(f"tension parameter must be positive, got {p}")
    if not h > 0.0:
        raise ValueError(f"mesh spacing must be positive, got {h}")
    y = p * h
    s = np.sinh(y)
    c = np.cosh(y)
    denom = ycosh_minus_sinh(y)
    if not np.isfinite(denom) or abs(denom) < DEGENERATE_TOL:
        raise DegenerateTensionError(
            f"p*h*cosh(p*h) - sinh(p*h) = {denom:.3e} with p={p}, h={h}")
    s1 = -s / denom                      # c1 + d1
    dd = (2.0 * c + 1.0) / (2.0 * denom)  # c1 - d1
    return ExpBasis(
        p=p,
        h=h,
        s=s,
        c=c,
        b2=p / (2.0 * denom),
        a1=y * c / denom,
        b1=-p * (2.0 * c + 1.0) / (2.0 * denom),
        c1=(s1 + dd) / 2.0,
        d1=(s1 - dd) / 2.0,
        alpha1=sinh_minus(y) / (2.0 * denom),
        alpha2=-p * cosh_minus_one(y) / (2.0 * denom),
        alpha3=p * p * s / (2.0 * denom),
        denom=denom,
        s1=s1,
        dd=dd,
    )


def _outer(basis, u, deriv, sign):
    # Outer piece, u = distance from the far-end knot of the support,
    # u in [0, h].  sign = +1 approaching from the left end of the
    # support, -1 from the right (orientation of d/dx).
    p = basis.p
    if deriv == 0:
        return sinh_minus(p * u) / (2.0 * basis.denom)
    if deriv == 1:
        return sign * basis.p * cosh_minus_one(p * u) / (2.0 * basis.denom)
    return p * p * np.sinh(p * u) / (2.0 * basis.denom)


def _inner(basis, u, deriv, sign):
    # Inner piece, u = |x - x_i| in [0, h]; sign = sign(x - x_i).
    p = basis.p
    if deriv == 0:
        return 1.0 + basis.s1 * cosh_minus_one(p * u) + basis.dd * sinh_minus(p * u)
    if deriv == 1:
        return sign * p * (basis.s1 * np.sinh(p * u)
                           + basis.dd * cosh_minus_one(p * u))
    return p * p * (basis.s1 * np.cosh(p * u) + basis.dd * np.sinh(p * u))


def piece_eval(basis, piece, t, deriv=0):
    """Evaluate one closed-form piece at signed offset t = x - x_i.

    piece 0: [x_{i-2}, x_{i-1}], 1: [x_{i-1}, x_i], 2: [x_i, x_{i+1}],
    3: [x_{i+1}, x_{i+2}].  No range check: evaluating adjacent pieces at
    a shared junction is how continuity is verified.
    """
    h = basis.h
    if piece == 0:
        return _outer(basis, t + 2.0 * h, deriv, +1.0)
    if piece == 1:
        return _inner(basis, -t, deriv, -1.0)
    if piece == 2:
        return _inner(basis, t, deriv, +1.0)
    if piece == 3:
        return _outer(basis, 2.0 * h - t, deriv, -1.0)
    raise ValueError(f"piece must be 0..3, got {piece}")


def eval_piece(basis, i, x, deriv=0, origin=0.0):
    """B_i (or a derivative) at x, with knots x_i = origin + i*h.

    Zero outside the support [x_{i-2}, x_{i+2}]; deriv in {0, 1, 2}.
    """
    if deriv not in (0, 1, 2):
        raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")
    h = basis.h
    t = x - (origin + i * h)
    a = abs(t)
    if a >= 2.0 * h:
        return 0.0
    sign = 1.0 if t > 0.0 else (-1.0 if t < 0.0 else 0.0)
    if a <= h:
        return _inner(basis, a, deriv, sign)
    return _outer(basis, 2.0 * h - a, deriv, -sign)


_KNOT_TABLE = {
    # (offset, deriv) -> coefficient on (1, alpha1, alpha2, alpha3)
    (0, 0): ("one", 1.0),
    (-1, 0): ("alpha1", 1.0),
    (1, 0): ("alpha1", 1.0),
    (0, 1): ("zero", 0.0),
    (-1, 1): ("alpha2", -1.0),
    (1, 1): ("alpha2", 1.0),
    (0, 2): ("alpha3", -2.0),
    (-1, 2): ("alpha3", 1.0),
    (1, 2): ("alpha3", 1.0),
}


def knot_value(basis, offset, deriv=0):
    """Closed-form value of B_i or a derivative at the knot x_{i+offset}.

    Consistent with eval_piece; note the first-derivative signs follow
    the piecewise definition (B rises to the left of its center), so
    knot_value(-1, 1) = -alpha2 and knot_value(+1, 1) = +alpha2 where
    alpha2 = p(1-c)/(2(phc-s)) < 0.
    """
    if offset not in (-2, -1, 0, 1, 2):
        raise ValueError(f"knot offset must be in -2..2, got {offset}")
    if deriv not in (0, 1, 2):
        raise ValueError(f"deriv must be 0, 1 or 2, got {deriv}")
    if abs(offset) == 2:
        return 0.0
    name, fac = _KNOT_TABLE[(offset, deriv)]
    if name == "one":
        return 1.0
    if name == "zero":
        return 0.0
    return fac * getattr(basis, name)


@dataclass(frozen=True)
class Mesh:
    """Uniform knot grid x_i = a + i*h, i = 0..N."""

    a: float
    b: float
    N: int
    h: float
    knots: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.N < 4:
            raise ValueError(f"need at least 4 elements, got N={self.N}")
        if abs(self.knots[-1] - self.b) > 1e-12 * (self.b - self.a):
            raise ValueError("mesh does not close: x_N != b")


def make_mesh(a, b, N):
    a = float(a)
    b = float(b)
    N = int(N)
    if not b > a:
        raise ValueError(f"empty interval [{a}, {b}]")
    h = (b - a) / N
    knots = a + h * np.arange(N + 1)
    return Mesh(a=a, b=b, N=N, h=h, knots=knots)
