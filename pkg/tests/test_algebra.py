import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qcgeom.algebra import (ALL_TAGS, AMINUS, APLUS, PSI3, PSIM1, SKEW, SP1, SYM, T, T0, TPERP,
                            DimensionError, QuaternionicTriple, SubspaceTag, anticomm, basis_of,
                            casimir, comm, project, standard_triple)

TRIPLES = {h: standard_triple(h // 4) for h in (4, 8)}

EXPECTED_DIMS = {
    4: {"t0": 3, "t": 6, "tperp": 0, "psi3": 4, "sym": 10},
    8: {"t0": 10, "t": 13, "tperp": 15, "psi3": 16, "sym": 36},
}


def operators(h):
    return arrays(np.float64, (h, h), elements=st.floats(-10, 10, allow_nan=False))


@pytest.mark.parametrize("h", [4, 8])
def test_standard_triple_is_exact(h):
    t = TRIPLES[h]
    assert all(v == 0.0 for v in t.residuals().values())
    J1, J2, J3 = t.J
    assert np.array_equal(J1 @ J2, J3)
    assert np.array_equal(J1 @ J2 @ J3, -np.eye(h))


def test_triple_is_read_only():
    with pytest.raises(ValueError):
        TRIPLES[4].J[0, 0, 0] = 1.0


def test_bad_shapes_rejected():
    with pytest.raises(DimensionError):
        casimir(np.eye(6), TRIPLES[4])
    with pytest.raises(DimensionError):
        project(np.eye(5), TRIPLES[4], SYM)
    with pytest.raises((DimensionError, ValueError)):
        QuaternionicTriple(np.zeros((3, 6, 6)))


def test_invalid_tags():
    with pytest.raises(ValueError):
        SubspaceTag.parse("a+(4)")
    with pytest.raises(ValueError):
        project(np.eye(4), TRIPLES[4], "nonsense")
    assert SubspaceTag.parse("a-(2)") == AMINUS(2)
    assert str(APLUS(3)) == "a+(3)"


@pytest.mark.parametrize("h", [4, 8])
def test_image_dimensions(h):
    t = TRIPLES[h]
    for name, dim in EXPECTED_DIMS[h].items():
        assert basis_of(t, name).shape[0] == dim, name
    assert basis_of(t, SP1).shape[0] == 3


@pytest.mark.parametrize("h", [4, 8])
def test_casimir_spectrum(h):
    t = TRIPLES[h]
    for B in basis_of(t, PSI3):
        assert np.allclose(casimir(B, t), 3 * B, atol=1e-12)
    for B in basis_of(t, PSIM1)[:10]:
        assert np.allclose(casimir(B, t), -B, atol=1e-12)


@pytest.mark.parametrize("h", [4, 8])
def test_identity_commutes_with_triple(h):
    assert np.allclose(project(np.eye(h), TRIPLES[h], PSI3), np.eye(h))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([4, 8]).flatmap(lambda h: st.tuples(st.just(h), operators(h), operators(h))))
def test_projector_axioms(case):
    h, A, B = case
    t = TRIPLES[h]
    scale = max(1.0, np.abs(A).max(), np.abs(B).max()) ** 2
    for tag in ALL_TAGS:
        PA = project(A, t, tag)
        assert np.abs(project(PA, t, tag) - PA).max() <= 1e-12 * np.sqrt(scale) * h
        lhs = np.sum(PA * B)
        rhs = np.sum(A * project(B, t, tag))
        assert abs(lhs - rhs) <= 1e-12 * scale * h * h


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([4, 8]).flatmap(lambda h: st.tuples(st.just(h), operators(h))))
def test_complementary_pairs(case):
    h, A = case
    t = TRIPLES[h]
    tol = 1e-12 * max(1.0, np.abs(A).max()) * h
    for P, Q in [(PSI3, PSIM1), (SYM, SKEW), (APLUS(1), AMINUS(1)), (APLUS(2), AMINUS(2))]:
        assert np.abs(project(A, t, P) + project(A, t, Q) - A).max() <= tol
        assert np.abs(project(project(A, t, P), t, Q)).max() <= tol
    S = project(A, t, SKEW)
    assert np.abs(project(S, t, T) + project(S, t, TPERP) - S).max() <= tol
    assert np.abs(project(project(A, t, T0), t, SP1)).max() <= tol
    assert np.abs(project(project(A, t, TPERP), t, T)).max() <= tol


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([4, 8]).flatmap(lambda h: st.tuples(st.just(h), operators(h))))
def test_commutators_land_in_eigenspaces(case):
    h, A = case
    t = TRIPLES[h]
    tol = 1e-12 * max(1.0, np.abs(A).max()) * h
    for a in range(3):
        X = anticomm(t.J[a], A)
        Y = comm(t.J[a], A)
        assert np.abs(project(X, t, APLUS(a + 1)) - X).max() <= tol
        assert np.abs(project(Y, t, AMINUS(a + 1)) - Y).max() <= tol


def test_sp1_projection_of_triple():
    t = TRIPLES[8]
    for a in range(3):
        assert np.allclose(project(t.J[a], t, SP1), t.J[a])
        assert np.allclose(project(t.J[a], t, TPERP), 0)
