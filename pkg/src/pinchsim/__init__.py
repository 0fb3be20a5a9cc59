"""pinchsim: stochastic simulation of pinched vacuum states.

Builds rank-n symmetric pinching tensors, expands the Bogoliubov-transformed
mode operators through the commutator recursion, samples statistically
equivalent complex-Gaussian realizations, and reproduces threshold-detector
tomography fidelities and Mermin-inequality statistics for multiphoton GHZ
and W states.
"""

__version__ = "0.1.0"

from .tensor import SymmetricTensor, ghz_tensor, qubit_state_tensor, w_tensor
from .sampling import SampleStream, transform_generic, transform_ghz, transform_w
from .tomography import fidelity, reconstruct, run_tomography
from .mermin import classical_bound, mermin_statistic, mermin_terms, quantum_bound

__all__ = [
    "__version__",
    "SymmetricTensor",
    "ghz_tensor",
    "w_tensor",
    "qubit_state_tensor",
    "SampleStream",
    "transform_generic",
    "transform_ghz",
    "transform_w",
    "run_tomography",
    "reconstruct",
    "fidelity",
    "mermin_terms",
    "mermin_statistic",
    "classical_bound",
    "quantum_bound",
]
