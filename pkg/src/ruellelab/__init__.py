"""Numerical laboratory for the pushforward operator of rational maps."""

from .dual import DualComplex
from .errors import ConvergenceError, DomainError, InputError, RuelleLabError, exit_code
from .hermanmodel import (
    GOLDEN_LAMBDA,
    AnnulusModel,
    AnnulusRotationMap,
    HardyReport,
    LaurentField,
    Part2Report,
    hardy_estimate,
    hardy_ladder,
    laurent_coefficients,
    model_fixed_field,
    plemelj_measure,
    rotation_eigenspace,
    verify_part2,
)
from .measure import (
    CurveMeasure,
    DiscreteMeasure,
    Moments,
    SampledCurve,
    cauchy,
    cauchy_curve,
    cauchy_discrete,
    moments,
    truncate_orbit_measure,
)
from .critdiag import OmegaReport, SummabilityReport, decay_rate, omega_limit_sample, summability
from .poly import Poly, RootSet, find_roots
from .ratmap import (
    InfinityForm,
    Moebius,
    Orbit,
    RationalMap,
    critical_points,
    infinity_form,
    moebius_conjugate,
    orbit,
    preimages,
)
from .transfer import (
    AnnularSector,
    EvaluableField,
    FixedPointReport,
    apply,
    cauchy_field,
    constant_field,
    fixed_point_residual,
    invariant_mass,
    line_field_defect,
    multiplier_relation,
    power_field,
)
from .transversal import (
    FamilySpec,
    LMatrix,
    TransversalityReport,
    l_matrix,
    orbit_derivative,
    track_critical_point,
    transversality,
)

__version__ = "0.1.0"
