# Norms Module
from .norms import (
    PhiFunction,
    PhiKind,
    NormReport,
    lp_w_ball,
    weak_lp_w_ball,
    morrey_norm,
    morrey_report,
    tail_integral,
)
from .bmo import (
    bmo_norm,
    bmo_norm_weighted,
    bmo_report,
    bmo_lp_equivalence,
    bmo_log_pair_check,
    john_nirenberg_probe,
    level_distribution,
)

__all__ = [
    "PhiFunction",
    "PhiKind",
    "NormReport",
    "lp_w_ball",
    "weak_lp_w_ball",
    "morrey_norm",
    "morrey_report",
    "tail_integral",
    "bmo_norm",
    "bmo_norm_weighted",
    "bmo_report",
    "bmo_lp_equivalence",
    "bmo_log_pair_check",
    "john_nirenberg_probe",
    "level_distribution",
]
