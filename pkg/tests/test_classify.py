from fractions import Fraction

import numpy as np
import pytest

from qcgeom import classify as cls
from qcgeom import torsion as tl
from qcgeom.algebra import PSIM1, norm, project
from qcgeom.errors import InadmissiblePacket


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.5, 3.0])
@pytest.mark.parametrize("lam", [1, 2])
def test_zero_torsion_is_qc_einstein(tau, lam):
    r = cls.classify(tl.TorsionPacket.zero(2, tau=tau), lam)
    assert r.qc_einstein and r.aqc_einstein
    assert r.psi3_residual == 0.0
    exact = Fraction(tau) ** 2 / (4 * Fraction(lam) ** 2)
    assert cls.leaf_spaceform_exact(tau, lam) == exact
    assert Fraction(r.leaf_spaceform_curvature) == exact
    assert r.nc1 == (tau == 0.0)


@pytest.mark.parametrize("seed", range(5))
def test_skew_only_is_aqc(seed):
    p = tl.sample_admissible(2, seed=seed, sigma=0.0, skew=1.0, tau=0.7)
    r = cls.classify(p)
    assert r.aqc_einstein and not r.qc_einstein
    assert r.leaf_spaceform_curvature is None
    JTo = tl.torsion_scalars(p).JTo
    # JTo commutes with the triple, so the horizontal Ricci tensor does too
    assert abs(r.psi3_residual - (p.h + 10) / 6 * norm(project(JTo, p.triple, PSIM1))) < 1e-9
    assert r.psi3_residual < 1e-12


def test_symmetric_torsion_is_neither():
    p = tl.sample_admissible(1, seed=0, sigma=1.0)
    r = cls.classify(p)
    assert not r.qc_einstein and not r.aqc_einstein
    assert r.psi3_residual > 1e-3  # TSigma lives in Psi[-1]


def test_non_integrable_note():
    p = tl.TorsionPacket.zero(1)
    q = tl.TorsionPacket(p.triple, p.TSigma, p.To, vertical_integrable=False)
    r = cls.classify(q)
    assert not r.aqc_einstein
    assert any("integrable" in n for n in r.notes)


def test_classify_rejects_bad_input():
    p = tl.TorsionPacket.zero(1)
    with pytest.raises(ValueError):
        cls.classify(p, lam=0)
    with pytest.raises(ValueError):
        cls.leaf_spaceform_exact(1, -1)
    O = np.zeros((3, 4, 4))
    O[0] = np.eye(4)
    with pytest.raises(InadmissiblePacket, match=r"skewness\(To_1\)"):
        cls.classify(tl.TorsionPacket(p.triple, O * 0, O))


def test_family_statistics():
    ps = [tl.sample_admissible(2, seed=s, sigma=0.0, skew=1.0 + s, tau=0.3) for s in range(4)]
    st = cls.family_statistics(ps)
    assert st.count == 4 and st.tau_constant and st.all_aqc
    assert st.That_min == pytest.approx(1.0) and st.That_max == pytest.approx(4.0)
    ps.append(tl.TorsionPacket.zero(2, tau=1.0))
    assert not cls.family_statistics(ps).tau_constant
    with pytest.raises(ValueError):
        cls.family_statistics([])
