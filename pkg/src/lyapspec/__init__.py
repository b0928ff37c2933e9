"""Thermodynamic formalism for one-step matrix cocycles.

Finite-depth pressure, Lyapunov exponent vectors, entropy spectrum via
Legendre transform, exponent-range estimates, and homoclinic
typicality / domination certificates. Every logarithm in this package
is natural base.
"""

from .matrices import (
    NumericError,
    ScaledMatrix,
    exterior_power,
    log_psi,
    scaled_multiply,
    scaled_singular_values,
    singular_values,
)
from .words import (
    BudgetError,
    OneStepCocycle,
    Word,
    default_budget,
    word_product,
)
from .enumeration import LeafBlock, leaf_table, map_reduce
from .pressure import (
    PressureEstimate,
    pressure,
    pressure_bracket,
    pressure_grid,
)
from .measures import (
    BernoulliMeasure,
    CrosscheckResult,
    MarkovMeasure,
    bowen_check,
    entropy,
    lyapunov_vector,
    variational_crosscheck,
)
from .spectrum import (
    OmegaEstimate,
    SpectrumPoint,
    estimate_omega,
    spectrum_curve,
    spectrum_point,
)
from .typicality import (
    DominationReport,
    HomoclinicSpec,
    SearchResult,
    TypicalityReport,
    check_dominated,
    check_one_typical,
    check_typical,
    holonomy_loop,
    search_homoclinic,
)
from .cocycle_io import load_cocycle

__version__ = "0.1.0"

__all__ = [
    "BernoulliMeasure",
    "BudgetError",
    "CrosscheckResult",
    "DominationReport",
    "HomoclinicSpec",
    "LeafBlock",
    "MarkovMeasure",
    "NumericError",
    "OmegaEstimate",
    "OneStepCocycle",
    "PressureEstimate",
    "ScaledMatrix",
    "SearchResult",
    "SpectrumPoint",
    "TypicalityReport",
    "Word",
    "bowen_check",
    "check_dominated",
    "check_one_typical",
    "check_typical",
    "default_budget",
    "entropy",
    "estimate_omega",
    "exterior_power",
    "holonomy_loop",
    "leaf_table",
    "load_cocycle",
    "log_psi",
    "lyapunov_vector",
    "map_reduce",
    "pressure",
    "pressure_bracket",
    "pressure_grid",
    "scaled_multiply",
    "scaled_singular_values",
    "search_homoclinic",
    "singular_values",
    "spectrum_curve",
    "spectrum_point",
    "variational_crosscheck",
    "word_product",
    "__version__",
]
