"""Compactness certificates from Ricci lower bounds of the weighted metrics."""

import math
from dataclasses import asdict, dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .algebra import DimensionError
from .config import DEFAULT

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Verdict(str, Enum):
    COMPACT_CERTIFIED = "COMPACT_CERTIFIED"
    NOT_CERTIFIED = "NOT_CERTIFIED"


@dataclass(frozen=True)
class MyersBounds:
    h: int
    ua: float
    ub: float
    uc: float

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 4 or self.h % 4:
            raise DimensionError(f"h must be a positive multiple of 4, got {self.h!r}")
        for k in ("ua", "ub", "uc"):
            if not math.isfinite(getattr(self, k)):
                raise ValueError(f"{k} must be finite")
        if self.ua < 0:
            raise ValueError(f"ua must be non-negative, got {self.ua!r}")

    @property
    def x_min(self):
        """Left end of the feasible region {x > 0 : h x^2 - uc > 0}."""
        return math.sqrt(self.uc / self.h) if self.uc > 0 else 0.0


def bound_functional(x, b):
    x = float(x)
    if not x > 0:
        raise ValueError(f"x must be positive, got {x!r}")
    den = b.h * x * x - b.uc
    if den == 0:
        raise ZeroDivisionError(f"pole of the bound functional at x = {x!r}")
    return b.ub / x + 1.5 * x + 4.0 * b.ua ** 2 / den


@dataclass
class Minimum:
    infimum: float
    argmin: float | None
    attained: bool

    def to_dict(self):
        return asdict(self)


def _boundary_limit(b):
    """Limit of f as x approaches the left end of the feasible region."""
    x0 = b.x_min
    if x0 > 0:
        return math.inf if b.ua > 0 else b.ub / x0 + 1.5 * x0
    # x -> 0+
    if b.uc == 0 and b.ua > 0:
        return math.inf  # 4 ua^2 / (h x^2) dominates
    if b.ub > 0:
        return math.inf
    if b.ub < 0:
        return -math.inf
    return 4.0 * b.ua ** 2 / (-b.uc) if b.uc < 0 else 0.0


def _golden(f, lo, hi, tol):
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def minimize_bound(b, xtol=1e-10, grid=4001):
    """Infimum of the bound functional over the feasible region.

    A geometric grid from the feasibility boundary brackets the smallest
    sample; golden section then refines it. The result is compared with
    the boundary limit to decide whether the infimum is attained.
    """
    limit = _boundary_limit(b)
    if limit == -math.inf:
        return Minimum(-math.inf, None, False)
    x0 = b.x_min
    # beyond x_hi the 3x/2 term dominates every other contribution
    x_hi = x0 + 10.0 * (1.0 + abs(b.ub) + b.ua + abs(b.uc)) + 10.0
    s = np.geomspace(1e-9 * (1.0 + x0), x_hi, grid)
    xs = x0 + s
    f = lambda x: bound_functional(x, b)
    vals = b.ub / xs + 1.5 * xs + 4.0 * b.ua ** 2 / (b.h * xs * xs - b.uc)
    i = int(np.argmin(vals))
    lo = xs[i - 1] if i > 0 else x0 + 0.5 * s[0]
    hi = xs[i + 1] if i + 1 < len(xs) else xs[i]
    xm, fm = _golden(f, lo, hi, xtol)
    if vals[i] < fm:
        xm, fm = float(xs[i]), float(vals[i])
    interior = i > 0 or fm < limit
    if limit < fm - 1e-12 * max(1.0, abs(fm)) or not interior:
        return Minimum(float(limit), None, False)
    return Minimum(float(fm), float(xm), True)


@dataclass
class Certificate:
    verdict: Verdict
    rho0: float
    threshold: float
    argmin_x: float | None
    margin: float
    feasibility_note: str
    attained: bool = True
    # with ua = uc = 0 the infimum is sqrt(6 ub); half of it is kept for comparison
    half_threshold: float | None = None
    derived_threshold: float | None = None

    @property
    def certified(self):
        return self.verdict is Verdict.COMPACT_CERTIFIED

    def to_dict(self):
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


def _note(b):
    den = ("Denominator taken as h x^2 - uc; using 4 uc there instead would move the pole "
           "to sqrt(4 uc / h).")
    if b.uc > 0:
        return ("feasible region x > sqrt(uc/h) = %r where h x^2 - uc > 0; on 0 < x < sqrt(uc/h) "
                "the vertical coefficient is negative, so that interval is excluded. " % b.x_min) + den
    return "feasible region x > 0 (uc <= 0, so h x^2 - uc stays positive). " + den


def myers_certificate(rho0, b, tol=DEFAULT):
    rho0 = float(rho0)
    m = minimize_bound(b)
    margin = rho0 - m.infimum
    ok = m.infimum > -math.inf and margin > tol.certificate_margin
    if m.infimum == -math.inf:
        ok = True
        margin = math.inf
    half = derived = None
    if b.ub >= 0:
        half = math.sqrt(1.5 * b.ub)
        derived = math.sqrt(6.0 * b.ub)
    return Certificate(Verdict.COMPACT_CERTIFIED if ok else Verdict.NOT_CERTIFIED, rho0,
                       m.infimum, m.argmin, margin, _note(b), m.attained, half, derived)


def aqc_coefficients(h):
    """(scalar coefficient, T+ coefficient) of the aqc compactness margin, as exact fractions."""
    h = Fraction(h)
    horizontal = h / 4 + 2
    skew = (h + 10) / 2
    # the T+ coefficient is the skew Ricci coefficient times the top eigenvalue factor 3
    assert skew == 3 * ((h + 10) / 6)
    return horizontal, skew


def aqc_myers(h, tau, supTplus, tol=DEFAULT):
    if int(h) != h or h < 4 or h % 4:
        raise DimensionError(f"h must be a positive multiple of 4, got {h!r}")
    if supTplus < 0:
        raise ValueError(f"supTplus must be non-negative, got {supTplus!r}")
    ch, cs = aqc_coefficients(int(h))
    margin = float(ch) * float(tau) - float(cs) * float(supTplus)
    ok = margin > tol.certificate_margin
    note = "margin = (h/4+2) tau - ((h+10)/2) sup T+ with h = %d" % int(h)
    return Certificate(Verdict.COMPACT_CERTIFIED if ok else Verdict.NOT_CERTIFIED, float(tau),
                       float(cs) * float(supTplus) / float(ch) if ch else 0.0, None, margin, note)
