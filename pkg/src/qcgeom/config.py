"""Comparison tolerances shared by every module."""

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    # purely algebraic identities (exact up to rounding)
    algebraic: float = 1e-12
    # quantities assembled from several derived pieces
    derived: float = 1e-9
    # torsion-law admissibility of a packet
    admissible: float = 1e-10
    # least-squares cutoff and residual gate of the Biquard solve
    solver: float = 1e-10
    # strict-inequality margin for compactness certificates
    certificate_margin: float = 1e-12

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"tolerance {name} must be positive, got {value!r}")

    def to_dict(self):
        return asdict(self)


DEFAULT = Tolerances()
