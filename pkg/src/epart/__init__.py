"""Entanglement of particles for bosons and fermions in lattice models."""

__version__ = "0.1.0"

from .entmeasures import (EPReport, TwoQubitState, WernerDecomposition, binary_entropy,  # noqa: E402
                          concurrence, entanglement_of_modes, entanglement_of_particles,
                          eof_two_qubit, negativity, qubit_reduce, twirl, von_neumann_entropy,
                          werner_decompose)
from .fock import (BOSON, FERMION, BipartitionSpec, DensityMatrix, FockBasis,  # noqa: E402
                   build_operator, enumerate_basis, project_local_number, reduce_two_site)
from .freefermion import (CorrelationPair, correlations, entanglement_length,  # noqa: E402
                          entanglement_length_sweep, full_two_site_matrix, projected_two_site,
                          spin_correlation_matrix)
from .models import ModelSpec  # noqa: E402
from .thermal import (ThermalSpec, canonical_state, chemical_potential_for_filling,  # noqa: E402
                      fermi_occupations, grand_canonical_state, ground_state)
