"""Heat and Feynman-Kac semigroups and the mild-form residual."""

from .feynman_kac import feynman_kac_const, semigroup_bound_field
from .mild import WINDOW_STEPS, MildResidual, mild_residual

__all__ = [
    "feynman_kac_const",
    "semigroup_bound_field",
    "WINDOW_STEPS",
    "MildResidual",
    "mild_residual",
]
