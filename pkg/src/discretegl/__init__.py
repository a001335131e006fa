"""Classification of finitely generated matrix groups: wild (defines Z) or tame.

The public API re-exports the main entry point of each module.
"""

__version__ = "0.1.0"

from .cayley import (  # noqa: E402
    Ball,
    DiscretenessReport,
    GrowthClass,
    SeparationStats,
    assouad_lower_bound,
    discreteness_probe,
    enumerate_ball,
    growth_profile,
    separation_stats,
)
from .classify import (  # noqa: E402
    Config,
    LambdaResult,
    VAWitness,
    Verdict,
    classify,
    extract_lambda,
    virtually_abelian_probe,
)
from .exactcore import (  # noqa: E402
    EXACT,
    FLOAT,
    GaussianRational,
    GroupSpec,
    Polynomial,
    mat_inverse,
    matrix,
    operator_norm,
    poly_gcd,
)
from .intlattice import IntLattice, hnf, lattice_member, mixed_subgroup_lift, multiplicative_rank  # noqa: E402
from .spectral import (  # noqa: E402
    JordanStructure,
    eigen_chain_verify,
    is_diagonalizable,
    jordan_basis,
    jordan_block_power,
    minimal_polynomial,
    root_of_unity_order,
    simultaneous_diagonalize,
)
from .structure import (  # noqa: E402
    HeisenbergTriple,
    RatioFunction,
    build_ratio_function,
    commutator,
    density_statistic,
    find_heisenberg_triple,
    sample_ratio_image,
)
from .verify import verify_certificate  # noqa: E402

__all__ = [
    "assouad_lower_bound",
    "Ball",
    "build_ratio_function",
    "classify",
    "commutator",
    "Config",
    "density_statistic",
    "discreteness_probe",
    "DiscretenessReport",
    "eigen_chain_verify",
    "enumerate_ball",
    "EXACT",
    "extract_lambda",
    "find_heisenberg_triple",
    "FLOAT",
    "GaussianRational",
    "GroupSpec",
    "growth_profile",
    "GrowthClass",
    "HeisenbergTriple",
    "hnf",
    "IntLattice",
    "is_diagonalizable",
    "jordan_basis",
    "jordan_block_power",
    "JordanStructure",
    "LambdaResult",
    "lattice_member",
    "mat_inverse",
    "matrix",
    "minimal_polynomial",
    "mixed_subgroup_lift",
    "multiplicative_rank",
    "operator_norm",
    "poly_gcd",
    "Polynomial",
    "RatioFunction",
    "root_of_unity_order",
    "sample_ratio_image",
    "separation_stats",
    "SeparationStats",
    "simultaneous_diagonalize",
    "VAWitness",
    "Verdict",
    "verify_certificate",
    "virtually_abelian_probe",
]
