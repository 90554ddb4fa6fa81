"""Unambiguous-state-discrimination attack on weak-pulse BB84."""

__version__ = "0.1.0"

from .attacks import (
    AttackComparison,
    BeamsplitReport,
    beamsplit_report,
    compare_attacks,
    two_photon_split,
)
from .click_model import (
    ClickPoint,
    ResendDistribution,
    joint_click_matrix,
    kappa,
    mixture_point,
    n_curve_y,
    number_state_point,
    working_curve_y,
    working_point,
)
from .errors import DomainError, StructureError
from .security_region import (
    CriteriaMode,
    InsecurityPolygon,
    SecurityVerdict,
    Verdict,
    build_insecurity_polygon,
    classify,
    critical_eta,
    f_criterion,
    mu2_threshold,
    necessary_threshold,
    security_map,
    small_etab_f,
)
from .simulator import SimConfig, SimReport, UsdAttack, predicted_point, run_simulation
from .usd_core import (
    SourceModel,
    coherent_coefficients,
    fock_conditional_coefficients,
    symmetric_usd_from_overlaps,
    usd_probability,
    usd_probability_n,
    usd_probability_series,
)
