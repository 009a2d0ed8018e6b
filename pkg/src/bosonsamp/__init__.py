"""Classical boson-sampling simulation toolkit.

Exact permanent kernels (compiled core with a pure-Python fallback),
brute-force / rejection / Metropolis-Hastings samplers including the
cache-reordering variants, decorrelation diagnostics, and a
quantum-vs-classical runtime model.
"""

from .bosonic import (
    DistributionTable,
    ProblemInstance,
    assign_value,
    enumerate_all,
    enumerate_collision_free,
    full_distribution,
    haar_random_unitary,
    pattern_probability,
    random_instance,
    read_unitary,
    write_unitary,
)
from .permanent import (
    BACKEND,
    permanent_glynn,
    permanent_naive,
    permanent_ryser,
    submatrix,
)
from .samplers import (
    SampleRun,
    brute_force_sample,
    improved_sc_mcmc_sample,
    mcmc_sample,
    mcmc_step,
    mis_sample,
    rejection_sample,
    sc_mcmc_sample,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DistributionTable",
    "ProblemInstance",
    "SampleRun",
    "assign_value",
    "brute_force_sample",
    "enumerate_all",
    "enumerate_collision_free",
    "full_distribution",
    "haar_random_unitary",
    "improved_sc_mcmc_sample",
    "mcmc_sample",
    "mcmc_step",
    "mis_sample",
    "pattern_probability",
    "permanent_glynn",
    "permanent_naive",
    "permanent_ryser",
    "random_instance",
    "read_unitary",
    "rejection_sample",
    "sc_mcmc_sample",
    "submatrix",
    "write_unitary",
    "__version__",
]
