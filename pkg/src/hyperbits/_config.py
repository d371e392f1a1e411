"""Module-level tolerances and resource limits shared by every submodule."""

# structural validation of states, observables, vectors
STRUCT_TOL = 1e-10
# agreement between two independently computed quantities
EQUIV_TOL = 1e-9
# width of Monte-Carlo acceptance bands, in standard deviations
MC_SIGMAS = 4.0

# eigenvalues below this are treated as zero when purifying
RANK_CUTOFF = 1e-12

MAX_TOTAL_DIM = 4096
MAX_CLIFFORD_GENERATORS = 12
MAX_HADAMARD_ORDER = 10
