"""Numerical toolkit for quaternionic contact structures on Lie groups."""

__version__ = "0.1.0"

from .algebra import QuaternionicTriple, project, standard_triple  # noqa: E402
from .config import DEFAULT, Tolerances  # noqa: E402
from .lie import LieQCModel, qh_model, solve_biquard  # noqa: E402
from .torsion import TorsionPacket, sample_admissible, validate_packet  # noqa: E402

__all__ = [
    "__version__", "DEFAULT", "Tolerances", "QuaternionicTriple", "standard_triple", "project",
    "TorsionPacket", "sample_admissible", "validate_packet", "LieQCModel", "qh_model", "solve_biquard",
]
