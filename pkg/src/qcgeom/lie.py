"""Left-invariant qc structures on Lie groups.

The frame is ``F_0..F_{h-1} = E_1..E_h`` followed by ``F_h..F_{h+2} = U_1..U_3``.
Structure constants ``c[k, i, j]`` mean ``[F_i, F_j] = sum_k c[k, i, j] F_k`` and
connection coefficients ``G[k, i, j]`` mean ``nabla_{F_i} F_j = sum_k G[k, i, j] F_k``.
Left-invariant forms use ``d eta(X, Y) = -eta([X, Y])``.
"""

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import algebra
from .algebra import QuaternionicTriple, standard_triple
from .config import DEFAULT
from .errors import AdmissibilityError, JacobiError, NoBiquardConnection
from .torsion import TorsionPacket


@dataclass(frozen=True)
class LieQCModel:
    c: np.ndarray
    triple: QuaternionicTriple
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        n = self.triple.h + 3
        if c.shape != (n, n, n):
            raise ValueError(f"structure constants must have shape {(n, n, n)}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("structure constants must be finite")
        if np.abs(c + c.transpose(0, 2, 1)).max() > 0:
            raise ValueError("structure constants must be antisymmetric in the lower indices")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def h(self):
        return self.triple.h

    @property
    def n(self):
        return self.h + 3

    @property
    def H(self):
        return slice(0, self.h)

    @property
    def V(self):
        return slice(self.h, self.h + 3)

    def bracket(self, x, y):
        """Lie bracket of two frame-coordinate vectors."""
        return np.einsum("kij,i,j->k", self.c, x, y)

    def vertical_integrable(self, tol=DEFAULT.admissible):
        return float(np.abs(self.c[self.H, self.V, self.V]).max()) <= tol


def antisymmetrize(c):
    return 0.5 * (c - c.transpose(0, 2, 1))


def jacobi_tensor(c):
    """Cyclic sum of [[F_i, F_j], F_l], component k, as an array [i, j, l, k]."""
    # [[F_i, F_j], F_l]^k = sum_p c[p, i, j] c[k, p, l]
    t = np.einsum("pij,kpl->ijlk", c, c)
    return t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)


def jacobi_residual(m):
    """Max entry of the Jacobi tensor."""
    c = m.c if isinstance(m, LieQCModel) else np.asarray(m, dtype=float)
    cyc = jacobi_tensor(c)
    return float(np.abs(cyc).max()) if cyc.size else 0.0


def qh_structure_constants(triple):
    h = triple.h
    n = h + 3
    c = np.zeros((n, n, n))
    for a in range(3):
        # [E_i, E_j] = -sum_a <J_a E_i, E_j> U_a and <J_a E_i, E_j> = J_a[j, i]
        c[h + a, :h, :h] = -triple.J[a].T
    return c


def qh_model(n):
    """The quaternionic Heisenberg algebra of dimension 4n + 3."""
    t = standard_triple(n)
    return LieQCModel(qh_structure_constants(t), t, name=f"qh({n})")


def induced_J(m, xi):
    """The operator J(xi) on H with <J(xi) E_i, E_j> = d xi(E_i, E_j)."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (3,):
        raise ValueError(f"vertical covector needs 3 coefficients, got shape {xi.shape}")
    # d xi(E_i, E_j) = -sum_a xi_a c[U_a, i, j]; the operator entry [j, i] is that value
    dxi = -np.einsum("a,aij->ij", xi, m.c[m.V, m.H, m.H])
    return dxi.T


def vstar_gram(m):
    Js = [induced_J(m, e) for e in np.eye(3)]
    return np.array([[algebra.frobenius_inner(A, B) / m.h for B in Js] for A in Js])


@dataclass
class AdmissibilityReport:
    jacobi: float
    bracket_generating: bool
    closure: float
    squares: tuple
    square_residual: float
    gram: np.ndarray
    gram_defect: float
    triple_mismatch: float
    duchemin: float = None
    vertical_integrability: float = 0.0
    tol: float = DEFAULT.admissible

    @property
    def quaternionic(self):
        """J(V*) closes into an sp(1) with J_a^2 = -s_a."""
        return (self.bracket_generating and self.closure <= self.tol
                and self.square_residual <= self.tol and min(self.squares) > 0
                and (self.duchemin is None or self.duchemin <= self.tol))

    @property
    def admissible(self):
        """Quaternionic with an orthonormal coframe realising the model's triple."""
        return self.quaternionic and self.gram_defect <= self.tol and self.triple_mismatch <= self.tol

    @property
    def needs_renormalization(self):
        return self.quaternionic and self.gram_defect > self.tol

    @property
    def vertical_integrable(self):
        return self.vertical_integrability <= self.tol

    def to_dict(self):
        return {
            "jacobi": self.jacobi,
            "bracket_generating": self.bracket_generating,
            "closure": self.closure,
            "squares": list(self.squares),
            "square_residual": self.square_residual,
            "gram": self.gram.tolist(),
            "gram_defect": self.gram_defect,
            "triple_mismatch": self.triple_mismatch,
            "duchemin": self.duchemin,
            "vertical_integrability": self.vertical_integrability,
            "quaternionic": self.quaternionic,
            "admissible": self.admissible,
            "needs_renormalization": self.needs_renormalization,
            "vertical_integrable": self.vertical_integrable,
        }


def qc_admissibility(m, tol=DEFAULT.admissible):
    jac = jacobi_residual(m)
    if jac > tol:
        raise JacobiError(f"Jacobi identity fails for {m.name or 'model'}: residual {jac:.3e}")
    h = m.h
    Js = np.stack([induced_J(m, e) for e in np.eye(3)])
    span = Js.reshape(3, -1).T
    rank = np.linalg.matrix_rank(m.c[m.V, m.H, m.H].reshape(3, -1), tol=tol)

    # commutators must stay in span{J(eta^a)}
    closure = 0.0
    for a in range(3):
        for b in range(a + 1, 3):
            C = algebra.comm(Js[a], Js[b]).ravel()
            coef = np.linalg.lstsq(span, C, rcond=None)[0]
            closure = max(closure, float(np.abs(span @ coef - C).max()))

    squares, sq_res = [], 0.0
    for a in range(3):
        S = Js[a] @ Js[a]
        s = -np.trace(S) / h
        squares.append(float(s))
        sq_res = max(sq_res, float(np.abs(S + s * np.eye(h)).max()))

    gram = vstar_gram(m)
    duchemin = None
    if h == 4:
        # d eta^a(U_b, X) + d eta^b(U_a, X) = -c[a, b, X] - c[b, a, X]
        cVVH = m.c[m.V, m.V, m.H]
        duchemin = float(np.abs(cVVH + cVVH.transpose(1, 0, 2)).max())
    return AdmissibilityReport(
        jacobi=jac,
        bracket_generating=bool(rank == 3),
        closure=closure,
        squares=tuple(squares),
        square_residual=sq_res,
        gram=gram,
        gram_defect=float(np.abs(gram - np.eye(3)).max()),
        triple_mismatch=float(np.abs(Js - m.triple.J).max()),
        duchemin=duchemin,
        vertical_integrability=float(np.abs(m.c[m.H, m.V, m.V]).max()),
        tol=tol,
    )


# --- Biquard connection -----------------------------------------------------

def torsion_tensor(G, c):
    """T[k, i, j] of the frame: nabla_i F_j - nabla_j F_i - [F_i, F_j]."""
    return G - G.swapaxes(-1, -2) - c


@lru_cache(maxsize=None)
def _t_basis(n_quat):
    t = standard_triple(n_quat)
    return algebra.basis_of(t, algebra.T)


def _constraint_basis(triple):
    if np.array_equal(triple.J, standard_triple(triple.h // 4).J):
        return _t_basis(triple.h // 4)
    return algebra.basis_of(triple, algebra.T)


def biquard_constraints(G, c, triple):
    """Stacked defects of the Biquard axioms, affine in (G, c).

    ``G`` and ``c`` may carry a common leading batch axis. The horizontal
    torsion ``Tor(E_i, E_j) = -[E_i, E_j]_V`` entering the parallelism rows
    is read off ``c``; it is fixed by the qc structure itself.
    """
    h = triple.h
    H, V = slice(0, h), slice(h, h + 3)
    Tor = torsion_tensor(G, c)
    rows = []
    # metric: G[k, i, j] + G[j, i, k] = 0
    rows.append((G + G.swapaxes(-1, -3)).reshape(*G.shape[:-3], -1))
    # H and V preserved
    rows.append(G[..., V, :, H].reshape(*G.shape[:-3], -1))
    rows.append(G[..., H, :, V].reshape(*G.shape[:-3], -1))
    # Tor(H, H) in V and Tor(H, V) in H
    rows.append(Tor[..., H, H, H].reshape(*G.shape[:-3], -1))
    rows.append(Tor[..., V, H, V].reshape(*G.shape[:-3], -1))
    # Tor(U_a, .) has no skew component in t = t0 + sp1
    basis = _constraint_basis(triple)
    Ta = Tor[..., H, V, H].swapaxes(-2, -3)  # [..., a, k, i]
    rows.append(np.einsum("...akl,bkl->...ab", Ta, basis).reshape(*G.shape[:-3], -1))
    # J parallel: (nabla_A Tor)(X, Y) = 0 for X, Y in H
    t0 = np.zeros_like(c)
    t0[..., V, H, H] = -c[..., V, H, H]
    dT = (np.einsum("...mak,...kxy->...amxy", G, t0)
          - np.einsum("...kax,...mky->...amxy", G, t0)
          - np.einsum("...kay,...mxk->...amxy", G, t0))
    rows.append(dT[..., :, :, H, H].reshape(*G.shape[:-3], -1))
    return np.concatenate(rows, axis=-1)


def biquard_system(m):
    """Matrix A and right-hand side b with A @ vec(G) = b."""
    n = m.n
    c = np.asarray(m.c)
    offset = biquard_constraints(np.zeros((n, n, n)), c, m.triple)
    # the rows are affine in G for fixed c: columns are images of unit vectors
    eye = np.eye(n ** 3).reshape(n ** 3, n, n, n)
    A = biquard_constraints(eye, c, m.triple) - offset
    return A.T, -offset


@lru_cache(maxsize=None)
def connection_basis(h):
    """Orthonormal basis of coefficient tables with each G[:, A, :] in so(H) + so(V).

    Metric compatibility and preservation of H and V hold identically on
    this subspace, which shrinks the linear system roughly fourfold.
    """
    n = h + 3
    out = []
    for blk in (range(h), range(h, n)):
        blk = list(blk)
        for p in range(len(blk)):
            for q in range(p + 1, len(blk)):
                k, j = blk[p], blk[q]
                for A in range(n):
                    e = np.zeros((n, n, n))
                    e[k, A, j] = 2 ** -0.5
                    e[j, A, k] = -(2 ** -0.5)
                    out.append(e)
    B = np.array(out)
    B.setflags(write=False)
    return B


def reduced_biquard_system(m):
    """Biquard rows restricted to ``connection_basis``: (A, b, basis)."""
    n = m.n
    c = np.asarray(m.c)
    basis = connection_basis(m.h)
    offset = biquard_constraints(np.zeros((n, n, n)), c, m.triple)
    A = biquard_constraints(basis, c, m.triple) - offset
    return A.T, -offset, basis


@dataclass
class BiquardConnection:
    gamma: np.ndarray
    solve_residual: float
    uniqueness_gap: float
    h: int
    model_name: str = ""

    def to_dict(self):
        return {"h": self.h, "model": self.model_name,
                "solve_residual": self.solve_residual,
                "uniqueness_gap": self.uniqueness_gap,
                "gamma": self.gamma.tolist()}


def _lstsq(A, b, cutoff):
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    keep = s > cutoff * s[0] if s.size and s[0] > 0 else np.zeros_like(s, dtype=bool)
    x = Vt[keep].T @ ((U[:, keep].T @ b) / s[keep])
    rank = int(keep.sum())
    gap = float(s[-1]) if rank == A.shape[1] else 0.0
    return x, gap, rank


def solve_biquard(m, tol=DEFAULT, check=True):
    """Solve for the Biquard connection of the model's frame.

    Returns the connection and the pointwise torsion packet at the identity.
    """
    if check:
        report = qc_admissibility(m, tol.admissible)
        if not report.admissible:
            raise AdmissibilityError(
                "model is not qc-admissible with an orthonormal coframe: "
                + ", ".join(f"{k}={v}" for k, v in report.to_dict().items()
                            if k in ("closure", "square_residual", "gram_defect",
                                     "triple_mismatch", "duchemin", "bracket_generating")))
    A, b, basis = reduced_biquard_system(m)
    x, gap, rank = _lstsq(A, b, tol.solver)
    residual = float(np.abs(A @ x - b).max())
    if residual > tol.solver * max(1.0, float(np.abs(b).max())):
        raise NoBiquardConnection(
            f"model admits no Biquard-compatible connection for the given complement "
            f"(residual {residual:.3e})")
    if rank < A.shape[1]:
        warnings.warn(f"underdetermined Biquard system: rank {rank} < {A.shape[1]}",
                      stacklevel=2)
    G = np.tensordot(x, basis, axes=1)
    G[np.abs(G) < 1e-15] = 0.0
    conn = BiquardConnection(G, residual, gap, m.h, m.name)
    return conn, extract_packet(m, conn)


def extract_packet(m, conn, tol=DEFAULT.admissible):
    h = m.h
    Tor = torsion_tensor(conn.gamma, m.c)
    Ta = np.stack([Tor[:h, h + a, :h] for a in range(3)])
    TS = 0.5 * (Ta + Ta.transpose(0, 2, 1))
    To = 0.5 * (Ta - Ta.transpose(0, 2, 1))
    tau = -float(Tor[h + 2, h, h + 1]) + 0.0  # normalize -0.0
    return TorsionPacket(m.triple, TS, To, tau, vertical_integrable=m.vertical_integrable(tol))
