"""Data-level classification of torsion packets."""

from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import torsion as tl
from .algebra import PSIM1, norm, project
from .config import DEFAULT


def leaf_spaceform_exact(tau, lam):
    """Constant sectional curvature tau^2 / (4 lam^2) of a vertical leaf, in exact arithmetic."""
    tau, lam = Fraction(tau), Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return tau * tau / (4 * lam * lam)


@dataclass
class ClassifierReport:
    qc_einstein: bool
    aqc_einstein: bool
    tau_value: float
    nc1: bool
    psi3_residual: float
    sample_That_infimum: float
    leaf_spaceform_curvature: float | None
    lam: float
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def classify(p, lam=1.0, tol=DEFAULT):
    tl.require_admissible(p, tol.admissible)
    if not lam > 0:
        raise ValueError("lambda must be positive")
    sig = max(norm(S) for S in p.TSigma)
    skw = max(norm(O) for O in p.To)
    qc = sig < tol.admissible and skw < tol.admissible
    aqc = sig < tol.admissible and bool(p.vertical_integrable)
    Rc = tl.horizontal_ricci_from_torsion(p, tol)
    resid = norm(project(Rc, p.triple, PSIM1))
    notes = []
    leaf = None
    if qc:
        leaf = float(leaf_spaceform_exact(p.tau, lam))
        notes.append("vertical leaves are space forms of curvature tau^2/(4 lambda^2)")
    if sig < tol.admissible and not p.vertical_integrable:
        notes.append("symmetric torsion vanishes but the vertical distribution is not integrable")
    return ClassifierReport(qc, aqc, float(p.tau), abs(p.tau) < tol.admissible, resid,
                            norm(p.To[0]), leaf, float(lam), notes)


@dataclass
class FamilyStatistics:
    count: int
    tau_constant: bool
    tau_spread: float
    That_min: float
    That_max: float
    all_aqc: bool
    note: str = "T-bar extrema over supplied samples are an indicator only, not leaf infima"

    def to_dict(self):
        return asdict(self)


def family_statistics(packets, tol=DEFAULT):
    packets = list(packets)
    if not packets:
        raise ValueError("empty packet family")
    taus = np.array([p.tau for p in packets])
    tb = np.array([norm(p.To[0]) for p in packets])
    spread = float(taus.max() - taus.min())
    aqc = all(classify(p, 1.0, tol).aqc_einstein for p in packets)
    return FamilyStatistics(len(packets), spread < tol.admissible, spread,
                            float(tb.min()), float(tb.max()), aqc)
