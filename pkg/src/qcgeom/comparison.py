"""Weighted Riemannian metrics g^lam = g_H + lam^2 g_V on Lie models.

Two independent routes to the Levi-Civita geometry: a Koszul evaluation on
structure constants, and closed-form predictions assembled from the Biquard
connection, its torsion and nabla T. ``cross_validate`` compares them.
Frame components use the model frame E_i, U_a (U_a of g^lam-length lam);
residuals are reported in the g^lam-orthonormal frame.
"""

from dataclasses import dataclass, field

import numpy as np

from . import torsion as tl
from .config import DEFAULT
from .curvature import (CurvatureTensor, _nabla_12_tensor, curvature_operator,
                        sigma_tensor, torsion_derivatives)
from .errors import IntegrabilityError, JacobiError
from .lie import extract_packet, jacobi_residual, torsion_tensor


@dataclass(frozen=True)
class WeightedMetric:
    lam: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lambda must be positive, got %r" % (self.lam,))

    def diag(self, h):
        return np.concatenate([np.ones(h), np.full(3, self.lam ** 2)])

    def scales(self, h):
        """Length of each frame vector in g^lam."""
        return np.concatenate([np.ones(h), np.full(3, self.lam)])


def _metric(lam):
    return lam if isinstance(lam, WeightedMetric) else WeightedMetric(float(lam))


def koszul_connection(m, lam, tol=DEFAULT):
    """Gamma[k, i, j] of the g^lam Levi-Civita connection on left-invariant fields."""
    g = _metric(lam).diag(m.h)
    if jacobi_residual(m.c) > tol.algebraic * max(1.0, np.abs(m.c).max() ** 2):
        raise JacobiError("structure constants violate the Jacobi identity")
    cl = g[:, None, None] * m.c  # cl[k, i, j] = <[F_i, F_j], F_k>
    # L[i, j, k] = <nabla_{F_i} F_j, F_k>
    L = 0.5 * (np.einsum("kij->ijk", cl) - cl + np.einsum("jki->ijk", cl))
    G = np.einsum("ijk->kij", L) / g[:, None, None]
    tf = np.abs(G - G.transpose(0, 2, 1) - m.c).max()
    met = np.abs(g[:, None, None] * G + (g[:, None, None] * G).transpose(2, 1, 0)).max()
    scale = max(1.0, np.abs(m.c).max() * max(g.max(), 1.0 / g.min()))
    if tf > tol.algebraic * scale or met > tol.algebraic * scale:
        raise AssertionError("Koszul post-check failed: torsion %.3e, metric %.3e" % (tf, met))
    return G


def _lowered(Rop, g):
    return np.einsum("abdc,d->abcd", Rop, g)


def riemann_symmetry_residuals(R):
    """Antisymmetry in both pairs, pair symmetry and the first Bianchi identity."""
    return {
        "antisym_12": float(np.abs(R + R.transpose(1, 0, 2, 3)).max()),
        "antisym_34": float(np.abs(R + R.transpose(0, 1, 3, 2)).max()),
        "pair_symmetry": float(np.abs(R - R.transpose(2, 3, 0, 1)).max()),
        "first_bianchi": float(np.abs(R + R.transpose(1, 2, 0, 3) + R.transpose(2, 0, 1, 3)).max()),
    }


def levi_civita_curvature(m, lam, tol=DEFAULT):
    wm = _metric(lam)
    G = koszul_connection(m, wm, tol)
    R = _lowered(curvature_operator(G, m.c), wm.diag(m.h))
    sym = riemann_symmetry_residuals(R)
    bad = {k: v for k, v in sym.items() if v > 1e-10 * max(1.0, np.abs(R).max())}
    if bad:
        raise AssertionError("Levi-Civita curvature symmetry check failed: %s" % bad)
    return CurvatureTensor(R, m.h, wm.lam)


def _require_integrable(m, p=None):
    if not m.vertical_integrable() or (p is not None and not p.vertical_integrable):
        raise IntegrabilityError("vertical distribution is not integrable; comparison formulas do not apply")


def conncomp_predicted(m, conn, lam, packet=None):
    """Levi-Civita coefficients rebuilt from the Biquard connection and its torsion."""
    wm = _metric(lam)
    p = extract_packet(m, conn) if packet is None else packet
    _require_integrable(m, p)
    h, n, L2 = m.h, m.n, wm.lam ** 2
    J, TS, To = p.triple.J, p.TSigma, p.To
    H, V = slice(0, h), slice(h, n)
    G = conn.gamma
    out = np.zeros((n, n, n))
    out[H, H, H] = G[H, H, H]
    out[H, V, H] = G[H, V, H]
    out[V, H, V] = G[V, H, V]
    out[V, V, V] = G[V, V, V]
    for a in range(3):
        u = h + a
        # nabla_X Y picks up -1/2 <J_a X, Y> - lam^-2 <TS_a X, Y> along U_a
        out[u, H, H] += -0.5 * J[a].T - TS[a].T / L2
        out[H, u, H] += 0.5 * L2 * J[a] - To[a]
        out[H, H, u] += 0.5 * L2 * J[a] + TS[a]
    tau = p.tau_abc  # tau[c, a, b] = tau^c_ab
    out[V, V, V] -= 0.5 * tau.transpose(0, 1, 2)
    return out


def nabla_slot_last(dT):
    """Re-index [A, B, C, k] = (nabla_A S)(B, C) into the derivative-last ordering."""
    return dT.transpose(1, 2, 0, 3)


def rm_lambda_predicted(m, conn, lam, packet=None):
    """The five curvature blocks of g^lam predicted from Biquard data.

    Returns a dict of arrays: ``HHHH[x,y,z,w]``, ``HHVH[x,y,a,z]``,
    ``HVVH[a,x,y]`` (polarized), ``VHVV[b,y,a,c]``, ``VVVV[a,b,c,d]``.
    """
    wm = _metric(lam)
    p = extract_packet(m, conn) if packet is None else packet
    _require_integrable(m, p)
    h, L2 = m.h, wm.lam ** 2
    H, V = slice(0, h), slice(h, h + 3)
    J, TS, To, T = p.triple.J, p.TSigma, p.To, p.T
    G = conn.gamma
    Rop = curvature_operator(G, m.c)
    Rm = Rop.transpose(0, 1, 3, 2)  # Biquard, metric g
    Tor = torsion_tensor(G, m.c)
    nT = nabla_slot_last(_nabla_12_tensor(G, Tor))  # nT[A, B, C] = (nabla_C T)(A, B)
    nS = nabla_slot_last(_nabla_12_tensor(G, sigma_tensor(p, m.n)))

    # <P_a X, Y> with P_a = lam^2/2 J_a + TS_a; P[a, x, y]
    P = np.stack([(0.5 * L2 * J[a] + TS[a]).T for a in range(3)])
    JJ = np.stack([J[a].T for a in range(3)])
    hhhh = (Rm[H, H, H, H]
            - np.einsum("ayz,axw->xyzw", P, P) / L2
            + np.einsum("axz,ayw->xyzw", P, P) / L2
            + 0.5 * L2 * np.einsum("axy,azw->xyzw", JJ, JJ))

    hhvh = np.zeros((h, h, 3, h))
    for a in range(3):
        # <nabla TS(U_a, Y, X), Z> - <nabla TS(U_a, X, Y), Z>
        A = nS[h + a, H, H, H]  # [Y, X, z]
        hhvh[:, :, a, :] = A - A.transpose(1, 0, 2)

    hvvh = np.zeros((3, h, h))
    for a in range(3):
        D = nT[H, h + a, h + a, H]  # [X, z] = <(nabla_{U_a} T)(X, U_a), z>
        Q = (D + D.T) / 2 + 0.25 * L2 * L2 * np.eye(h)
        JTa = J[a] @ TS[a]
        Q -= L2 * 0.5 * (JTa + JTa.T)
        Q += To[a].T @ To[a] - T[a].T @ T[a]
        hvvh[a] = Q

    vhvv = L2 * (Rm[V, H, V, V] - nT[V, V, H, V].transpose(0, 2, 1, 3))

    tau = p.tau_abc  # tau[e, a, b] = tau^e_ab
    quad = (np.einsum("eac,ebd->abcd", tau, tau) - np.einsum("ebc,ead->abcd", tau, tau)
            - 2 * np.einsum("eab,ecd->abcd", tau, tau))
    vvvv = L2 * Rm[V, V, V, V] + 0.25 * L2 * quad  # d tau vanishes for constant torsion
    return {"HHHH": hhhh, "HHVH": hhvh, "HVVH": hvvh, "VHVV": vhvv, "VVVV": vvvv}


def oracle_blocks(Rbar):
    h = Rbar.h
    H, V = slice(0, h), slice(h, h + 3)
    R = Rbar.R
    return {
        "HHHH": R[H, H, H, H],
        "HHVH": R[H, H, V, H],
        "HVVH": np.stack([R[H, h + a, h + a, H] for a in range(3)]),
        "VHVV": R[V, H, V, V],
        "VVVV": R[V, V, V, V],
    }


# number of vertical slots in each block, for rescaling into orthonormal frames
_VSLOTS = {"HHHH": 0, "HHVH": 1, "HVVH": 2, "VHVV": 3, "VVVV": 4}


@dataclass
class ComparisonReport:
    lambdas: list
    connection: dict = field(default_factory=dict)
    blocks: dict = field(default_factory=dict)
    oracle_checks: dict = field(default_factory=dict)

    @property
    def max_residual(self):
        vals = list(self.connection.values())
        for b in self.blocks.values():
            vals += list(b.values())
        return max(vals) if vals else 0.0

    def failures(self, tol):
        out = []
        for lam, r in self.connection.items():
            if r > tol:
                out.append("connection(lambda=%s)" % lam)
        for lam, b in self.blocks.items():
            out += ["%s(lambda=%s)" % (k, lam) for k, v in b.items() if v > tol]
        return out

    def to_dict(self):
        return {"lambdas": self.lambdas, "connection": {str(k): v for k, v in self.connection.items()},
                "blocks": {str(k): v for k, v in self.blocks.items()},
                "oracle_checks": {str(k): v for k, v in self.oracle_checks.items()}}


def orthonormal_connection(G, scales):
    s = scales
    return G * s[None, :, None] * s[None, None, :] / s[:, None, None]


def cross_validate(m, conn, lambdas=(0.5, 1.0, 2.0), packet=None, tol=DEFAULT):
    rep = ComparisonReport([float(x) for x in lambdas])
    for lam in rep.lambdas:
        wm = WeightedMetric(lam)
        s = wm.scales(m.h)
        Gk = koszul_connection(m, wm, tol)
        Gp = conncomp_predicted(m, conn, wm, packet)
        rep.connection[lam] = float(np.abs(orthonormal_connection(Gk - Gp, s)).max())
        Rbar = levi_civita_curvature(m, wm, tol)
        rep.oracle_checks[lam] = riemann_symmetry_residuals(Rbar.R)
        pred = rm_lambda_predicted(m, conn, wm, packet)
        orc = oracle_blocks(Rbar)
        rep.blocks[lam] = {k: float(np.abs(pred[k] - orc[k]).max()) / lam ** _VSLOTS[k] for k in pred}
    return rep


def sectional_ricci_lambda(p, lam, d, K_H=None, RcH=None, tol=DEFAULT):
    """Sectional and Ricci curvatures of g^lam from torsion data.

    ``K_H[x, y]`` are Biquard sectional curvatures of frame planes and
    ``RcH`` the horizontal Biquard Ricci operator; the corresponding outputs
    are omitted when they are not supplied. Sectional curvatures are
    normalized; Ricci entries are evaluated on the frame vectors, so a
    vertical slot carries U_a of g^lam-length lam.
    """
    wm = _metric(lam)
    L2 = wm.lam ** 2
    h = p.h
    J, TS, To, T = p.triple.J, p.TSigma, p.To, p.T
    out = {}
    if K_H is not None:
        kh = np.array(K_H, dtype=float)
        S = sum(np.outer(np.diag(TS[a]), np.diag(TS[a])) - TS[a] ** 2 for a in range(3))
        Jq = sum(J[a] ** 2 for a in range(3))
        kbar = kh - S / L2 - 0.75 * L2 * Jq
        np.fill_diagonal(kbar, 0.0)
        out["K_HH"] = kbar
    kxu = np.zeros((3, h))
    for a in range(3):
        JTa = J[a] @ TS[a]
        kxu[a] = (0.25 * L2 - np.diag(JTa)
                  + (np.sum(To[a] ** 2, axis=0) - np.sum(T[a] ** 2, axis=0) - np.diag(d.mixed_VV[a])) / L2)
    out["K_HV"] = kxu
    KV = tl.vertical_sectional(p, tol)
    out["K_VV"] = {k: (v + p.tau ** 2 / 4) / L2 for k, v in KV.items()}
    if RcH is not None:
        cross = sum(To[a].T @ TS[a] for a in range(3))
        out["Rc_HH"] = (np.asarray(RcH, dtype=float) - tl.jtsigma(p) - 1.5 * L2 * np.eye(h)
                        - (d.trV_gradTS + (cross + cross.T)) / L2)
    out["Rc_HV"] = d.trH_gradTS.copy()
    RcV = tl.vertical_ricci(p, tol)
    Tb2 = float(np.sum(To[0] ** 2))
    out["Rc_VV_from_ricci_V"] = np.array([RcV[a, a] + p.tau ** 2 / 2 + h * L2 ** 2 / 4
                                      + np.sum(To[a] ** 2) - np.sum(T[a] ** 2) for a in range(3)])
    out["Rc_VV_closed"] = np.array([p.tau ** 2 / 2 + h * L2 ** 2 / 4 + 8.0 * Tb2 / h
                                    - (h + 4) / h * np.sum(TS[a] ** 2) for a in range(3)])
    return out


def leaf_curvature(p, lam, tol=DEFAULT):
    """Ricci and sectional curvature of a vertical leaf with the induced g^lam."""
    if not p.vertical_integrable:
        raise IntegrabilityError("leaf curvature requires an integrable vertical distribution")
    wm = _metric(lam)
    h = p.h
    Tb2 = float(np.sum(p.To[0] ** 2))
    KV = tl.vertical_sectional(p, tol)
    rcv = tl.vertical_ricci(p, tol)
    out = {
        "ricci_leaf": np.array([p.tau ** 2 / 2 + rcv[a, a] for a in range(3)]),
        "KL": {k: (v + p.tau ** 2 / 4) / wm.lam ** 2 for k, v in KV.items()},
    }
    if np.abs(p.TSigma).max() == 0 and np.abs(p.To).max() == 0:
        out["space_form"] = p.tau ** 2 / (4 * wm.lam ** 2)
    return out


def leaf_oracle(m, lam, tol=DEFAULT):
    """Koszul curvature of the vertical subalgebra with metric lam^2 g_V."""
    if not m.vertical_integrable(tol.algebraic):
        raise IntegrabilityError("vertical distribution is not integrable")
    h = m.h
    cv = m.c[h:, h:, h:]
    g = np.full(3, float(lam) ** 2)
    cl = g[:, None, None] * cv
    L = 0.5 * (np.einsum("kij->ijk", cl) - cl + np.einsum("jki->ijk", cl))
    G = np.einsum("ijk->kij", L) / g[:, None, None]
    R = _lowered(curvature_operator(G, cv), g)
    Ric = np.einsum("bacb->ac", R) / g[0]
    K = {(a + 1, b + 1): R[a, b, b, a] / (g[a] * g[b]) for a in range(3) for b in range(3) if a != b}
    return {"ricci_leaf": np.diag(Ric).copy(), "KL": K, "R": R}


def synthetic_identity_residuals(p, tol=DEFAULT):
    """Internal consistency of the torsion-side formulas on one packet.

    Covers the two dual forms of the vertical sectional curvature, the
    diagonal of the vertical Ricci table against sectional sums, the
    sectional curvature read off the vertical Riemann table, and the two
    forms of the weighted vertical Ricci curvature.
    """
    out = {}
    forms = tl.vertical_sectional_forms(p)
    out["sectional_V_dual"] = max(abs(k1 - k2) for k1, k2 in forms.values())
    K = {k: v[0] for k, v in forms.items()}
    rcv = tl.vertical_ricci(p, tol)
    sums = [sum(K[tuple(sorted((a, b)))] for b in (1, 2, 3) if b != a) for a in (1, 2, 3)]
    out["ricci_V_vs_sectional"] = max(abs(rcv[a - 1, a - 1] - sums[a - 1]) for a in (1, 2, 3))
    rm = tl.vertical_riemann(p, tol)
    out["riemann_V_vs_sectional"] = max(abs(rm[a - 1, b - 1, b - 1, a - 1] - K[(a, b)]) for a, b in K)
    d = tl.TorsionDerivatives(p.h)
    srl = sectional_ricci_lambda(p, 1.0, d, tol=tol)
    out["vertical_ricci_forms"] = float(np.abs(srl["Rc_VV_from_ricci_V"] - srl["Rc_VV_closed"]).max())
    return out
