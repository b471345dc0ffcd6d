"""Curvature of the Biquard connection on Lie models and the identity suite.

Tensor components are taken in the model frame: ``R[A, B, C, D] =
<R(F_A, F_B) F_C, F_D>`` and ``dT[A, B, C, k]`` is the k-th component of
``(nabla_{F_A} Tor)(F_B, F_C)``.
"""

from dataclasses import dataclass

import numpy as np

from . import torsion as tl
from .algebra import T as T_TAG
from .algebra import anticomm, comm, frobenius_inner, project
from .config import DEFAULT
from .errors import ModelMismatch
from .lie import extract_packet, torsion_tensor


@dataclass
class CurvatureTensor:
    R: np.ndarray
    h: int
    lam: float = 1.0

    @property
    def n(self):
        return self.h + 3

    def mixed_block_norm(self):
        """Largest <R(., .) X, U> or <R(., .) U, X> component."""
        H, V = slice(0, self.h), slice(self.h, self.n)
        return float(max(np.abs(self.R[:, :, H, V]).max(), np.abs(self.R[:, :, V, H]).max()))


def _check_pair(m, conn):
    if conn.gamma.shape != (m.n, m.n, m.n) or conn.h != m.h:
        raise ModelMismatch("connection does not belong to this model")


def curvature_operator(G, c):
    """Rop[A, B, k, C]: k-th component of R(F_A, F_B) F_C for constant coefficients."""
    M = G.transpose(1, 0, 2)  # M[A] acts on frame coordinates
    MM = np.einsum("akl,blm->abkm", M, M)
    return MM - MM.transpose(1, 0, 2, 3) - np.einsum("pab,pkm->abkm", c, M)


def biquard_curvature(m, conn):
    _check_pair(m, conn)
    Rop = curvature_operator(conn.gamma, m.c)
    return CurvatureTensor(Rop.transpose(0, 1, 3, 2).copy(), m.h, 1.0)


def covariant_torsion_derivative(m, conn):
    _check_pair(m, conn)
    G = conn.gamma
    T = torsion_tensor(G, m.c)
    return _nabla_12_tensor(G, T)


def _nabla_12_tensor(G, S):
    """(nabla_A S)(B, C)^m for a constant (1,2)-tensor S[k, B, C]; returned as [A, B, C, m]."""
    out = (np.einsum("mak,kbc->abcm", G, S)
           - np.einsum("kab,mkc->abcm", G, S)
           - np.einsum("kac,mbk->abcm", G, S))
    return out


def sigma_tensor(p, n):
    """TS as a (1,2)-tensor: TS(U_a, X) = TS_a X and zero on every other slot pair."""
    h = p.h
    S = np.zeros((n, n, n))
    for a in range(3):
        S[:h, h + a, :h] = p.TSigma[a]
    return S


def torsion_derivatives(m, conn):
    """Contractions of nabla T and nabla T^Sigma needed by the torsion-side formulas."""
    _check_pair(m, conn)
    h, n = m.h, m.n
    G = conn.gamma
    T = torsion_tensor(G, m.c)
    dT = _nabla_12_tensor(G, T)
    S = sigma_tensor(extract_packet(m, conn), n)
    dS = _nabla_12_tensor(G, S)
    i = np.arange(h)
    trH_gradT = np.stack([dT[i, h + a, :h, i].sum(axis=0) for a in range(3)])
    trH_gradTS = np.stack([dS[i, h + a, i, :h].sum(axis=0) for a in range(3)])
    mixed = np.stack([dS[h + a, h + a, :h, :h] for a in range(3)])  # [a, x, y]
    mixed = 0.5 * (mixed + mixed.transpose(0, 2, 1))
    return tl.TorsionDerivatives(h, trH_gradT=trH_gradT, trH_gradTS=trH_gradTS,
                                 mixed_VV=mixed, trV_gradTS=mixed.sum(axis=0))


def ricci_blocks(Rt):
    """RcH(A, B) = sum_i R(E_i, A, B, E_i) and RcV(A, B) = sum_a R(U_a, A, B, U_a)."""
    h = Rt.h
    R = Rt.R
    i = np.arange(h)
    a = np.arange(h, h + 3)
    RcH = R[i, :, :, i].sum(axis=0)
    RcV = R[a, :, :, a].sum(axis=0)
    return RcH, RcV


def bianchi_residual(Rt, T, dT):
    """Max cyclic defect of R(A,B)C - (nabla_A T)(B,C) - T(T(A,B),C).

    Also returns the horizontal form and the vertical part of the
    (X, Y, U_b) form as separate entries.
    """
    n = Rt.n
    h = Rt.h
    Rvec = Rt.R  # metric is the identity in the frame used for Biquard data
    TT = np.einsum("pab,kpc->abck", T, T)
    term = Rvec - dT - TT
    cyc = term + term.transpose(1, 2, 0, 3) + term.transpose(2, 0, 1, 3)
    full = float(np.abs(cyc).max())
    H = slice(0, h)
    eqB = Rvec[H, H, H] - TT[H, H, H]
    eqB = eqB + eqB.transpose(1, 2, 0, 3) + eqB.transpose(2, 0, 1, 3)
    # (X, Y, U_b): vertical part of cyclic R against the three torsion terms
    rv = np.zeros(1)
    V = slice(h, n)
    R3 = Rvec[H, H, V] + Rvec[H, V, H].transpose(2, 0, 1, 3) + Rvec[V, H, H].transpose(1, 2, 0, 3)
    T3 = TT[H, H, V] + TT[H, V, H].transpose(2, 0, 1, 3) + TT[V, H, H].transpose(1, 2, 0, 3)
    rv = (R3 - T3)[..., V]
    return {"bianchi": full,
            "bianchi_horizontal": float(np.abs(eqB).max()),
            "bianchi_vertical": float(np.abs(rv).max())}


def verify_biquard_axioms(m, conn):
    """Re-check each defining property of the Biquard connection directly."""
    G, c, h, n = conn.gamma, m.c, m.h, m.n
    H, V = slice(0, h), slice(h, n)
    J = m.triple.J
    T = torsion_tensor(G, c)
    out = {}
    out["metric"] = float(np.abs(G + G.transpose(2, 1, 0)).max())
    out["preserves_H_V"] = float(max(np.abs(G[V, :, H]).max(), np.abs(G[H, :, V]).max()))
    # nabla_A J_a = sum_b G[U_b, A, U_a] J_b
    par = 0.0
    for A in range(n):
        MA = G[H, A, H]
        for a in range(3):
            lhs = comm(MA, J[a])
            rhs = sum(G[h + b, A, h + a] * J[b] for b in range(3))
            par = max(par, float(np.abs(lhs - rhs).max()))
    out["J_parallel"] = par
    out["tor_HH_in_V"] = float(np.abs(T[H, H, H]).max())
    out["tor_HV_in_H"] = float(np.abs(T[V, H, V]).max())
    sk = 0.0
    for a in range(3):
        Ta = T[H, h + a, H]
        sk = max(sk, float(np.abs(project(0.5 * (Ta - Ta.T), m.triple, T_TAG)).max()))
    out["tor_U_in_tperp_plus_sym"] = sk
    return out


@dataclass
class IdentityReport:
    residuals: dict
    skipped: list
    tol: float

    @property
    def passed(self):
        return all(v <= self.tol for v in self.residuals.values())

    @property
    def failures(self):
        return [k for k, v in self.residuals.items() if v > self.tol]

    def to_dict(self):
        return {"residuals": self.residuals, "skipped": self.skipped, "passed": self.passed}


def raw_identity_residual(p, Rt):
    """{J_a, TS_b} + [J_a, To_b] - sum_c tau^a_bc J_c - R^a_b with <R^a_b X, Y> = eta^a R(X, Y) U_b."""
    h = p.h
    J = p.triple.J
    tab = p.tau_abc
    res = 0.0
    for a in range(3):
        for b in range(3):
            Rab = Rt.R[:h, :h, h + b, h + a].T  # entry [y, x] = R(E_x, E_y, U_b, U_a)
            lhs = anticomm(J[a], p.TSigma[b]) + comm(J[a], p.To[b])
            rhs = sum(tab[a, b, c] * J[c] for c in range(3)) + Rab
            res = max(res, float(np.abs(lhs - rhs).max()))
    return res


def identity_suite(m, conn, packet=None, tol=DEFAULT):
    """Direct curvature of the Biquard connection against the torsion-side formulas."""
    h = m.h
    p = extract_packet(m, conn) if packet is None else packet
    if p.h != h:
        raise ModelMismatch("packet and model have different horizontal dimension")
    Rt = biquard_curvature(m, conn)
    T = torsion_tensor(conn.gamma, m.c)
    dT = covariant_torsion_derivative(m, conn)
    d = torsion_derivatives(m, conn)
    RcH, RcV = ricci_blocks(Rt)
    J = p.triple.J
    H = slice(0, h)
    r, skipped = {}, []

    r.update(bianchi_residual(Rt, T, dT))
    r["mixed_blocks"] = Rt.mixed_block_norm()
    for k, v in verify_biquard_axioms(m, conn).items():
        r["axiom_" + k] = v

    r["ricci_H"] = float(np.abs(RcH[H, H] - tl.horizontal_ricci_from_torsion(p, tol)).max())
    RmV_direct = Rt.R[h:, h:, h:, h:]
    r["riemann_V"] = float(np.abs(RmV_direct - tl.vertical_riemann(p, tol)).max())
    op = np.zeros((3, 3, 3, 3))
    for a in range(3):
        for b in range(3):
            Rab = Rt.R[h + a, h + b, :h, :h].T  # operator R(U_a, U_b) on H
            for c in range(3):
                for dd in range(3):
                    op[a, b, c, dd] = -(2.0 / h) * frobenius_inner(Rab, J[dd] @ J[c])
    r["riemann_V_operator"] = float(np.abs(RmV_direct - op).max())
    r["curvature_split"] = raw_identity_residual(p, Rt)

    RcH_mixed, RcV_mixed = tl.mixed_ricci(p, d, tol)
    r["mixed_ricci_H"] = float(np.abs(RcH[h:, :h] - RcH_mixed).max())
    if p.vertical_integrable:
        K = tl.vertical_sectional(p, tol)
        r["sectional_V"] = max(abs(Rt.R[h + a - 1, h + b - 1, h + b - 1, h + a - 1] - k)
                      for (a, b), k in K.items())
        r["ricci_V"] = float(np.abs(RcV[h:, h:] - tl.vertical_ricci(p, tol)).max())
        r["mixed_ricci_V"] = float(np.abs(RcV[:h, h:].T - RcV_mixed).max())
    else:
        skipped += ["sectional_V", "ricci_V", "mixed_ricci_V"]
    return IdentityReport(r, skipped, tol.derived)
