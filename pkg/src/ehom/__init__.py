"""Photon-number statistics of a lossless two-port beam splitter.

Computes joint output distributions for Fock, coherent, thermal and
general bipartite inputs, exact coincidence sums for dual Fock inputs, and
detector-efficiency corrections.
"""

__version__ = "0.1.0"

from .errors import CapacityError, DomainError, EhomError, NumericValidationError  # noqa: E402
from .splitter import ScatteringMatrix, balanced, from_convention, transition_amplitude  # noqa: E402
from .combinatorics import cancellation_certificate, coincidence_sum, enumerate_diagrams, split_sum  # noqa: E402
from .states import make_coherent, make_fock, make_thermal, product  # noqa: E402
from .engine import JointDistribution, cnl_metric, coincidence_profile, output_distribution  # noqa: E402
from .detector import EfficiencyModel, apply_joint, apply_single  # noqa: E402

__all__ = [
    "CapacityError",
    "DomainError",
    "EfficiencyModel",
    "EhomError",
    "JointDistribution",
    "NumericValidationError",
    "ScatteringMatrix",
    "apply_joint",
    "apply_single",
    "balanced",
    "cancellation_certificate",
    "cnl_metric",
    "coincidence_profile",
    "coincidence_sum",
    "enumerate_diagrams",
    "from_convention",
    "make_coherent",
    "make_fock",
    "make_thermal",
    "output_distribution",
    "product",
    "split_sum",
    "transition_amplitude",
]
