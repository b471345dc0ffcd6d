"""Quaternionic linear algebra on the horizontal space.

Operators on H are real ``h x h`` numpy arrays acting on column vectors,
so ``A @ E_i`` has components ``A[:, i]`` and ``<A E_i, E_j> = A[j, i]``.
The quaternionic triple is stacked as an array of shape ``(3, h, h)``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np


class DimensionError(ValueError):
    """Operator shapes do not match the horizontal dimension."""


def check_operator(A, h=None):
    """Validate an operator on H and return it as a float array."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n < 4 or n % 4:
        raise DimensionError(f"horizontal dimension must be a positive multiple of 4, got {n}")
    if h is not None and n != h:
        raise DimensionError(f"expected dimension {h}, got {n}")
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")
    return A


@dataclass(frozen=True)
class QuaternionicTriple:
    J: np.ndarray  # (3, h, h)

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        if J.ndim != 3 or J.shape[0] != 3:
            raise DimensionError(f"triple must have shape (3, h, h), got {J.shape}")
        for a in range(3):
            check_operator(J[a])
        J.setflags(write=False)
        object.__setattr__(self, "J", J)

    @property
    def h(self):
        return self.J.shape[1]

    def __getitem__(self, a):
        return self.J[a]

    def residuals(self):
        """Max-norm defects of the defining identities of the triple."""
        I = np.eye(self.h)
        J1, J2, J3 = self.J
        out = {}
        out["orthogonal"] = max(np.abs(Ja.T @ Ja - I).max() for Ja in self.J)
        out["skew"] = max(np.abs(Ja.T + Ja).max() for Ja in self.J)
        out["square"] = max(np.abs(Ja @ Ja + I).max() for Ja in self.J)
        out["orientation"] = np.abs(J1 @ J2 @ J3 + I).max()
        return out

    def is_valid(self, tol=1e-12):
        return all(v <= tol for v in self.residuals().values())


# Right multiplication by i and j on H = R^4 in the basis (1, i, j, k);
# J3 := J1 J2 is then right multiplication by -k.
_RI = np.array([[0, -1, 0, 0],
                [1, 0, 0, 0],
                [0, 0, 0, 1],
                [0, 0, -1, 0]])
_RJ = np.array([[0, 0, -1, 0],
                [0, 0, 0, -1],
                [1, 0, 0, 0],
                [0, 1, 0, 0]])


def standard_triple(n):
    """J_1, J_2, J_3 on H^n = R^{4n}, block-diagonal with J1 J2 = J3."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    blocks = [_RI, _RJ, _RI @ _RJ]
    J = np.stack([np.kron(np.eye(n, dtype=int), B) for B in blocks]).astype(float)
    return QuaternionicTriple(J)


def frobenius_inner(A, B):
    """<A, B> = tr(B^T A)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.sum(A * B))


def norm(A):
    return float(np.sqrt(np.sum(np.asarray(A) ** 2)))


def anticomm(A, B):
    return A @ B + B @ A


def comm(A, B):
    return A @ B - B @ A


def casimir(A, t):
    """The invariant Casimir operator A -> -sum_a J_a A J_a."""
    A = check_operator(A, t.h)
    return -sum(Ja @ A @ Ja for Ja in t.J)


class Subspace(Enum):
    SP1 = "sp1"
    T0 = "t0"
    T = "t"
    TPERP = "tperp"
    APLUS = "a+"
    AMINUS = "a-"
    PSI3 = "psi3"
    PSIM1 = "psi-1"
    SYM = "sym"
    SKEW = "skew"
    TRACEFREE_SYM = "tracefree_sym"


@dataclass(frozen=True)
class SubspaceTag:
    kind: Subspace
    a: int = None

    def __post_init__(self):
        needs_index = self.kind in (Subspace.APLUS, Subspace.AMINUS)
        if needs_index and self.a not in (1, 2, 3):
            raise ValueError(f"{self.kind.name} needs a in {{1,2,3}}, got {self.a!r}")
        if not needs_index and self.a is not None:
            raise ValueError(f"{self.kind.name} takes no index")

    @classmethod
    def parse(cls, text):
        """Parse tags such as ``"tperp"`` or ``"a+(2)"``."""
        text = text.strip()
        for kind in (Subspace.APLUS, Subspace.AMINUS):
            prefix = kind.value + "("
            if text.startswith(prefix) and text.endswith(")"):
                return cls(kind, int(text[len(prefix):-1]))
        try:
            return cls(Subspace(text))
        except ValueError:
            raise ValueError(f"unknown subspace tag {text!r}") from None

    def __str__(self):
        if self.a is None:
            return self.kind.value
        return f"{self.kind.value}({self.a})"


SP1, T0, T, TPERP = (SubspaceTag(Subspace.SP1), SubspaceTag(Subspace.T0),
                     SubspaceTag(Subspace.T), SubspaceTag(Subspace.TPERP))
PSI3, PSIM1 = SubspaceTag(Subspace.PSI3), SubspaceTag(Subspace.PSIM1)
SYM, SKEW = SubspaceTag(Subspace.SYM), SubspaceTag(Subspace.SKEW)
TRACEFREE_SYM = SubspaceTag(Subspace.TRACEFREE_SYM)


def APLUS(a):
    return SubspaceTag(Subspace.APLUS, a)


def AMINUS(a):
    return SubspaceTag(Subspace.AMINUS, a)


def _sp1_part(A, t):
    h = t.h
    return sum((np.sum(A * Ja) / h) * Ja for Ja in t.J)


def project(A, t, tag):
    """Orthogonal projection of A onto the subspace named by ``tag``.

    The Casimir eigenprojections use its spectrum {3, -1} directly:
    Psi[3] = (C + 1)/4 and Psi[-1] = (3 - C)/4.
    """
    if isinstance(tag, str):
        tag = SubspaceTag.parse(tag)
    if not isinstance(tag, SubspaceTag):
        raise ValueError(f"invalid subspace tag {tag!r}")
    A = check_operator(A, t.h)
    kind = tag.kind
    if kind is Subspace.SYM:
        return 0.5 * (A + A.T)
    if kind is Subspace.SKEW:
        return 0.5 * (A - A.T)
    if kind is Subspace.TRACEFREE_SYM:
        S = 0.5 * (A + A.T)
        return S - (np.trace(S) / t.h) * np.eye(t.h)
    if kind is Subspace.APLUS:
        Ja = t.J[tag.a - 1]
        return 0.5 * (A - Ja @ A @ Ja)
    if kind is Subspace.AMINUS:
        Ja = t.J[tag.a - 1]
        return 0.5 * (A + Ja @ A @ Ja)
    if kind is Subspace.PSI3:
        return 0.25 * (casimir(A, t) + A)
    if kind is Subspace.PSIM1:
        return 0.25 * (3 * A - casimir(A, t))
    if kind is Subspace.SP1:
        return _sp1_part(A, t)
    if kind is Subspace.T0:
        return project(project(A, t, PSI3), t, SKEW)
    if kind is Subspace.TPERP:
        S = project(project(A, t, PSIM1), t, SKEW)
        return S - _sp1_part(S, t)
    if kind is Subspace.T:
        return _sp1_part(A, t) + project(A, t, T0)
    raise ValueError(f"invalid subspace tag {tag!r}")


ALL_TAGS = (SP1, T0, T, TPERP, PSI3, PSIM1, SYM, SKEW, TRACEFREE_SYM,
            APLUS(1), APLUS(2), APLUS(3), AMINUS(1), AMINUS(2), AMINUS(3))


def basis_of(t, tag):
    """Orthonormal basis (k, h, h) of the image of a projector, via its matrix."""
    h = t.h
    P = np.empty((h * h, h * h))
    for col in range(h * h):
        E = np.zeros(h * h)
        E[col] = 1.0
        P[:, col] = project(E.reshape(h, h), t, tag).ravel()
    # P is an orthogonal projector: its range is spanned by eigenvectors with eigenvalue 1
    w, V = np.linalg.eigh(0.5 * (P + P.T))
    keep = w > 0.5
    return V[:, keep].T.reshape(-1, h, h)
