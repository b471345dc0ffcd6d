"""Search for qc Lie algebras whose Biquard connection has torsion.

Unknowns are a connection table in ``connection_basis`` and the structure
constants not fixed by the qc structure: the bracket H x H -> V is pinned
to the quaternionic Heisenberg one and V x V -> H is zero, so the
vertical distribution is integrable. With those pinned, the Biquard rows
are affine in the unknowns; one extra affine row fixes a torsion
component to 1 to exclude the torsion-free solution. The Jacobi identity
is then solved by Levenberg-Marquardt on the null space.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .algebra import standard_triple
from .lie import (LieQCModel, biquard_constraints, connection_basis, jacobi_residual, jacobi_tensor,
                  qh_structure_constants, torsion_tensor)

MODES = ("sigma", "skew", "tau")


def _free_bracket_basis(h):
    """Unit antisymmetric tables for every structure constant left free."""
    n = h + 3
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            both_h = j < h
            both_v = i >= h
            for k in range(n):
                if both_h and k >= h:
                    continue  # pinned qc bracket
                if both_v and k < h:
                    continue  # integrable vertical distribution
                e = np.zeros((n, n, n))
                e[k, i, j], e[k, j, i] = 1.0, -1.0
                out.append(e)
    return np.array(out)


def _normalization(mode, h, rng):
    D = rng.standard_normal((h, h))
    if mode == "sigma":
        D = D + D.T
    elif mode == "skew":
        D = D - D.T

    def row(Tor):
        if mode == "tau":
            return -Tor[..., h + 2, h, h + 1]
        return np.einsum("...ki,ki->...", Tor[..., :h, h, :h], D)
    return row


@dataclass
class SearchResult:
    model: LieQCModel
    jacobi: float
    trial: int


@dataclass
class SearchOutcome:
    found: list
    null_dim: int
    residuals: list  # final Jacobi residual of every trial

    def __iter__(self):
        return iter(self.found)

    def __len__(self):
        return len(self.found)


def search_torsion_models(n, mode="sigma", seed=0, trials=5, max_nfev=200, jacobi_tol=1e-12,
                          pure=False):
    """Candidate models on H^n with a pinned nonzero torsion component.

    With ``pure`` the other torsion component is forced to vanish: TSigma = 0
    in "skew" mode, To = 0 in "sigma" mode.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    t = standard_triple(n)
    h = t.h
    N = h + 3
    cq = qh_structure_constants(t)
    Gb = connection_basis(h)
    Cb = _free_bracket_basis(h)
    pg, pc = len(Gb), len(Cb)
    rng = np.random.default_rng(seed)
    norm_row = _normalization(mode, h, rng)

    def rows(G, c):
        out = [biquard_constraints(G, c, t), norm_row(torsion_tensor(G, c))[..., None]]
        if pure and mode in ("sigma", "skew"):
            Ta = torsion_tensor(G, c)[..., :h, h:, :h]
            other = Ta - Ta.swapaxes(-1, -3) if mode == "sigma" else Ta + Ta.swapaxes(-1, -3)
            out.append(other.reshape(*c.shape[:-3], -1))
        if h == 4:
            cv = c[..., h:, h:, :h]
            out.append((cv + cv.swapaxes(-2, -3)).reshape(*c.shape[:-3], -1))
        return np.concatenate(out, axis=-1)

    off = rows(np.zeros((N, N, N)), cq)
    Gs = np.concatenate([Gb, np.zeros((pc, N, N, N))])
    Cs = np.concatenate([np.broadcast_to(cq, (pg, N, N, N)), cq + Cb])
    A = (rows(Gs, Cs) - off).T
    b = -off
    b[len(biquard_constraints(np.zeros((N, N, N)), cq, t))] += 1.0
    x0 = np.linalg.lstsq(A, b, rcond=None)[0]
    if np.abs(A @ x0 - b).max() > 1e-9:
        return SearchOutcome([], 0, [])  # the pinned torsion component is forced to vanish
    _, s, Vt = np.linalg.svd(A)
    r = int((s > 1e-10 * s[0]).sum())
    Nb = Vt[r:].T
    Cw = np.tensordot(Nb[pg:].T, Cb, axes=1)  # null directions in c
    c0 = cq + np.tensordot(x0[pg:], Cb, axes=1)

    def cof(w):
        return c0 + np.tensordot(w, Cw, axes=1)

    def fun(w):
        return jacobi_tensor(cof(w)).ravel()

    def jac(w):
        c = cof(w)
        t1 = np.einsum("wpij,kpl->ijlkw", Cw, c) + np.einsum("pij,wkpl->ijlkw", c, Cw)
        tt = t1 + t1.transpose(1, 2, 0, 3, 4) + t1.transpose(2, 0, 1, 3, 4)
        return tt.reshape(-1, Cw.shape[0])

    found, resids = [], []
    for trial in range(trials):
        w0 = rng.standard_normal(Nb.shape[1]) * rng.uniform(0.1, 2.0)
        sol = least_squares(fun, w0, jac=jac, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
        c = cof(sol.x)
        c = 0.5 * (c - c.swapaxes(1, 2))
        res = jacobi_residual(c)
        resids.append(res)
        if res < jacobi_tol:
            found.append(SearchResult(LieQCModel(c, t, f"search-{mode}-{seed}-{trial}"), res, trial))
    return SearchOutcome(found, Nb.shape[1], resids)
