"""Spectra of one-periodic non-self-adjoint Dirac-type operators.

The toolkit integrates the period map of the first-order system
h Y' = A(x; z) Y, traces the set where the Floquet discriminant is real in
[-1, 1] (that set is the L2 spectrum of the operator), and certifies the
traced spectrum against strip/hyperbola enclosure bounds and the small-h
confinement threshold.  A closed-form constant-potential model serves as the
reference oracle for all of it.
"""

from .bounds import (ConfinementReport, EnclosureParams, certify,
                     cross_distance, enclosure_params, h_threshold,
                     in_enclosure)
from .oracle import ConstantModel
from .potentials import (PeriodicPotential, PotentialNorms, SymmetryFlags,
                         detect_symmetries, sup_norms)
from .spectrum import (BlochEigenvalue, BlochWave, DiscriminantField,
                       ImagIdentityCheck, SpectrumArcs, band_edges,
                       bloch_eigenfunction, bloch_eigenvalues,
                       discriminant_field, trace_spectrum,
                       verify_imag_identity)
from .symmetry import (SymmetryCheckResult, SymmetryRelation,
                       check_monodromy_symmetry, check_spectrum_symmetry)
from .transfer import (IntegratorConfig, MonodromyResult, batch_monodromy,
                       discriminant, floquet_multipliers, integrate_monodromy)

__all__ = [
    "PeriodicPotential", "PotentialNorms", "SymmetryFlags",
    "detect_symmetries", "sup_norms",
    "IntegratorConfig", "MonodromyResult", "batch_monodromy",
    "discriminant", "floquet_multipliers", "integrate_monodromy",
    "DiscriminantField", "SpectrumArcs", "BlochEigenvalue", "BlochWave",
    "ImagIdentityCheck", "discriminant_field", "trace_spectrum",
    "band_edges", "bloch_eigenvalues", "bloch_eigenfunction",
    "verify_imag_identity",
    "EnclosureParams", "ConfinementReport", "enclosure_params",
    "in_enclosure", "cross_distance", "h_threshold", "certify",
    "ConstantModel",
    "SymmetryRelation", "SymmetryCheckResult",
    "check_monodromy_symmetry", "check_spectrum_symmetry",
]

__version__ = "0.1.0"
