"""Pointwise Biquard torsion data and the curvature formulas it determines."""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import algebra
from .algebra import (APLUS, AMINUS, PSIM1, TPERP, anticomm, comm, frobenius_inner,
                      norm, project, standard_triple)
from .config import DEFAULT
from .errors import InadmissiblePacket, IntegrabilityError

# epsilon_abc on 0-based indices
EPS = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPS[_a, _b, _c] = 1.0
    EPS[_b, _a, _c] = -1.0


@dataclass(frozen=True)
class TorsionPacket:
    """Torsion of the Biquard connection at a point.

    ``TSigma[a]`` and ``To[a]`` are the symmetric and skew parts of
    ``Tor(U_a, .)`` on H, ``tau = -tau^3_12``. ``vertical_torsion_H[a, b]``
    is the horizontal part of ``Tor(U_a, U_b)``; it vanishes when the vertical
    distribution is integrable.
    """

    triple: algebra.QuaternionicTriple
    TSigma: np.ndarray
    To: np.ndarray
    tau: float = 0.0
    vertical_integrable: bool = True
    dtau: np.ndarray = None
    vertical_torsion_H: np.ndarray = None

    def __post_init__(self):
        h = self.triple.h
        for name in ("TSigma", "To"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (3, h, h):
                raise algebra.DimensionError(f"{name} must have shape (3, {h}, {h}), got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, arr)
        dtau = np.zeros(3) if self.dtau is None else np.asarray(self.dtau, dtype=float)
        if dtau.shape != (3,):
            raise algebra.DimensionError("dtau must have 3 entries")
        object.__setattr__(self, "dtau", dtau)
        tvh = (np.zeros((3, 3, h)) if self.vertical_torsion_H is None
               else np.asarray(self.vertical_torsion_H, dtype=float))
        if tvh.shape != (3, 3, h):
            raise algebra.DimensionError(f"vertical_torsion_H must have shape (3, 3, {h})")
        object.__setattr__(self, "vertical_torsion_H", tvh)
        object.__setattr__(self, "tau", float(self.tau))
        if not np.isfinite(self.tau):
            raise ValueError("tau must be finite")

    @property
    def h(self):
        return self.triple.h

    @property
    def T(self):
        return self.TSigma + self.To

    @property
    def tau_abc(self):
        """tau^a_bc = eta^a Tor(U_b, U_c) = -tau * eps_abc."""
        return -self.tau * EPS

    @classmethod
    def zero(cls, n=1, tau=0.0):
        t = standard_triple(n)
        z = np.zeros((3, t.h, t.h))
        return cls(t, z, z.copy(), tau)


@dataclass
class TorsionDerivatives:
    """Covariant-derivative contractions of the torsion at a point (default zero).

    trH_gradT[a, x]      = sum_i <(nabla_{E_i} T)(U_a, E_x), E_i>
    trH_gradTS[a]        = sum_i (nabla_{E_i} T^Sigma)(U_a, E_i)
    mixed_VV[a]          = quadratic form X -> <(nabla_{U_a} T^Sigma)(U_a, X), X>
    trV_gradTS           = sum_a mixed_VV[a]
    dtauV[a, d, b, c]    = (d tau^d_bc)(U_a)
    """

    h: int
    trH_gradT: np.ndarray = None
    trH_gradTS: np.ndarray = None
    mixed_VV: np.ndarray = None
    trV_gradTS: np.ndarray = None
    dtauV: np.ndarray = None

    def __post_init__(self):
        h = self.h
        shapes = {"trH_gradT": (3, h), "trH_gradTS": (3, h), "mixed_VV": (3, h, h),
                  "trV_gradTS": (h, h), "dtauV": (3, 3, 3, 3)}
        for name, shape in shapes.items():
            val = getattr(self, name)
            val = np.zeros(shape) if val is None else np.asarray(val, dtype=float)
            if val.shape != shape:
                raise algebra.DimensionError(f"{name} must have shape {shape}, got {val.shape}")
            setattr(self, name, val)


@dataclass
class ValidationReport:
    residuals: dict
    tol: float

    @property
    def admissible(self):
        return all(v <= self.tol for v in self.residuals.values())

    @property
    def failures(self):
        return [k for k, v in self.residuals.items() if v > self.tol]

    @property
    def max_residual(self):
        return max(self.residuals.values())


def _mx(A):
    return float(np.abs(A).max())


def validate_packet(p, tol=DEFAULT.admissible):
    """Max residual of every torsion law, keyed by a readable name."""
    t, J, h = p.triple, p.triple.J, p.h
    S, O = p.TSigma, p.To
    r = {}
    for a in range(3):
        i = a + 1
        r[f"symmetry(TSigma_{i})"] = _mx(S[a] - S[a].T)
        r[f"tracefree(TSigma_{i})"] = abs(float(np.trace(S[a])))
        r[f"aminus(TSigma_{i})"] = _mx(S[a] - project(S[a], t, AMINUS(i)))
    for a in range(3):
        for b in range(a + 1, 3):
            r[f"sigma_law({a + 1},{b + 1})"] = _mx(anticomm(J[a], S[b]) + anticomm(J[b], S[a]))
    for a in range(3):
        i = a + 1
        r[f"skewness(To_{i})"] = _mx(O[a] + O[a].T)
        r[f"aplus(To_{i})"] = _mx(O[a] - project(O[a], t, APLUS(i)))
        r[f"tperp(To_{i})"] = _mx(O[a] - project(O[a], t, TPERP))
    for a in range(3):
        for b in range(a + 1, 3):
            pair = f"{a + 1},{b + 1}"
            r[f"skew_law({pair})"] = _mx(comm(J[a], O[b]) + comm(J[b], O[a]))
            r[f"anticomm(To_{a + 1},To_{b + 1})"] = _mx(anticomm(O[a], O[b]))
            r[f"norm_equality({pair})"] = abs(norm(O[a]) - norm(O[b]))
            r[f"jto_equality({pair})"] = _mx(J[a] @ O[a] - J[b] @ O[b])
    if p.vertical_integrable:
        r["vertical_torsion_H"] = _mx(p.vertical_torsion_H)
    return ValidationReport(r, tol)


def require_admissible(p, tol=DEFAULT.admissible):
    rep = validate_packet(p, tol)
    if not rep.admissible:
        raise InadmissiblePacket("torsion packet violates " + ", ".join(rep.failures))
    return rep


def require_integrable(p):
    if not p.vertical_integrable:
        raise IntegrabilityError("formula holds only for an integrable vertical distribution")


@dataclass
class TorsionScalars:
    Tbar: float
    Tplus: float
    sigma_norms: tuple
    JTSigma: np.ndarray
    JTo: np.ndarray
    JTo_norm_ratio_defect: float
    JTo_eig_defect: float


def torsion_scalars(p, tol=DEFAULT):
    require_admissible(p, tol.admissible)
    J = p.triple.J
    Tbar = norm(p.To[0])
    Tplus = float(np.linalg.eigvalsh(J[0] @ p.To[0]).max())
    JTS = sum(J[a] @ p.TSigma[a] for a in range(3))
    JTo = sum(J[a] @ p.To[a] for a in range(3))
    JTo = 0.5 * (JTo + JTo.T)
    norm_defect = abs(norm(JTo) - 3 * Tbar)
    eig_defect = abs(float(np.linalg.eigvalsh(JTo).max()) - 3 * Tplus)
    scale = max(1.0, Tbar)
    if norm_defect > tol.derived * scale or eig_defect > tol.derived * scale:
        raise InadmissiblePacket(
            f"[JTo] fails norm/eigenvalue identities ({norm_defect:.2e}, {eig_defect:.2e})")
    return TorsionScalars(Tbar, Tplus, tuple(norm(S) for S in p.TSigma),
                          0.5 * (JTS + JTS.T), JTo, norm_defect, eig_defect)


# --- sampling ---------------------------------------------------------------

def _linear_matrix(f, shape):
    size = int(np.prod(shape))
    cols = [f(e.reshape(shape)) for e in np.eye(size)]
    return np.array(cols).T


@lru_cache(maxsize=None)
def _sigma_basis(n):
    """Orthonormal basis of triples (TSigma_1..3) satisfying the symmetric laws."""
    t = standard_triple(n)
    J, h = t.J, t.h

    def laws(S):
        out = []
        for a in range(3):
            out += [(S[a] - S[a].T).ravel(), [np.trace(S[a])], anticomm(J[a], S[a]).ravel()]
        for a in range(3):
            for b in range(a + 1, 3):
                out.append((anticomm(J[a], S[b]) + anticomm(J[b], S[a])).ravel())
        return np.concatenate(out)

    L = _linear_matrix(laws, (3, h, h))
    _, s, Vt = np.linalg.svd(L)
    rank = int((s > 1e-10).sum())
    basis = Vt[rank:].reshape(-1, 3, h, h)
    basis.setflags(write=False)
    return basis


def sample_admissible(n, seed=0, sigma=1.0, skew=1.0, tau=0.0):
    """Deterministic random packet on H^n obeying all torsion laws.

    ``sigma`` and ``skew`` set the norms of TSigma_1 and To_1.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    t = standard_triple(n)
    J, h = t.J, t.h
    rng = np.random.default_rng(seed)

    basis = _sigma_basis(n)
    S = np.tensordot(rng.standard_normal(basis.shape[0]), basis, axes=1)
    s1 = norm(S[0])
    S = S * (sigma / s1) if (sigma and s1 > 1e-12) else np.zeros_like(S)

    A = rng.standard_normal((h, h))
    O1 = project(project(A - A.T, t, TPERP), t, APLUS(1))
    o1 = norm(O1)
    O1 = O1 * (skew / o1) if (skew and o1 > 1e-12) else np.zeros_like(O1)
    To = np.stack([O1, -J[1] @ J[0] @ O1, -J[2] @ J[0] @ O1])

    p = TorsionPacket(t, S, To, tau)
    require_admissible(p)
    return p


# --- curvature from torsion -------------------------------------------------

def vertical_riemann(p, tol=DEFAULT):
    """Table <R(U_a, U_b) U_c, U_d> = (2/h) <[T_a, T_b], J_d J_c>."""
    require_admissible(p, tol.admissible)
    J, T, h = p.triple.J, p.T, p.h
    out = np.zeros((3, 3, 3, 3))
    for a in range(3):
        for b in range(a + 1, 3):
            C = comm(T[a], T[b])
            for c in range(3):
                for d in range(3):
                    out[a, b, c, d] = (2.0 / h) * frobenius_inner(C, J[d] @ J[c])
            out[b, a] = -out[a, b]
    return out


def vertical_sectional_forms(p):
    """Both expressions of K(U_a, U_b), keyed by 1-based pairs a < b.

    K(U_a, U_b) = (4/h)(Tbar^2 - |(TS_a)^{b+}|^2), and the same with a, b
    exchanged on the right.
    """
    t, h = p.triple, p.h
    Tbar2 = norm(p.To[0]) ** 2
    out = {}
    for a, b in ((0, 1), (0, 2), (1, 2)):
        k1 = (4.0 / h) * (Tbar2 - norm(project(p.TSigma[a], t, APLUS(b + 1))) ** 2)
        k2 = (4.0 / h) * (Tbar2 - norm(project(p.TSigma[b], t, APLUS(a + 1))) ** 2)
        out[(a + 1, b + 1)] = (k1, k2)
    return out


def vertical_sectional(p, tol=DEFAULT):
    """K(U_a, U_b) for (a, b) in ((1,2), (1,3), (2,3)), via both dual forms."""
    require_admissible(p, tol.admissible)
    require_integrable(p)
    out = {}
    for key, (k1, k2) in vertical_sectional_forms(p).items():
        if abs(k1 - k2) > tol.derived * max(1.0, abs(k1)):
            raise InadmissiblePacket(f"dual sectional forms disagree on {key}: {k1} vs {k2}")
        out[key] = k1
    return out


def vertical_ricci(p, tol=DEFAULT):
    """3x3 table Rc^V(U_a, U_b) = (4/h)(2<To_a, To_b> - <TS_a, TS_b>) plus the skew d tau part."""
    require_admissible(p, tol.admissible)
    require_integrable(p)
    h = p.h
    G = np.array([[2.0 * frobenius_inner(p.To[a], p.To[b]) - frobenius_inner(p.TSigma[a], p.TSigma[b])
                   for b in range(3)] for a in range(3)])
    return (4.0 / h) * G + 0.5 * np.einsum("abc,c->ab", EPS, p.dtau)


def jtsigma(p):
    """Symmetrized sum_a J_a TS_a."""
    JTS = sum(p.triple.J[a] @ p.TSigma[a] for a in range(3))
    return 0.5 * (JTS + JTS.T)


def horizontal_ricci_from_torsion(p, tol=DEFAULT):
    s = torsion_scalars(p, tol)
    h = p.h
    Rc = ((h / 4 + 2) * p.tau * np.eye(h) - (h / 4 + 1) * s.JTSigma
          - ((h + 10) / 6) * s.JTo)
    return 0.5 * (Rc + Rc.T)


def mixed_ricci(p, d=None, tol=DEFAULT):
    """Rc^H(U_a, E_x) and Rc^V(E_x, U_a) as (3, h) arrays."""
    require_admissible(p, tol.admissible)
    h = p.h
    d = TorsionDerivatives(h) if d is None else d
    J = p.triple.J
    RcH = d.trH_gradT.copy()
    RcV = np.zeros((3, h))
    if not p.vertical_integrable:
        # sum_b <Tor(U_a, U_b), J_b X>: only the horizontal part of Tor(U_a, U_b) pairs with J_b X
        pair = np.einsum("abk,bkx->ax", p.vertical_torsion_H, J)
        RcH = RcH + pair
        RcV = RcV - pair
    return RcH, RcV
