"""Sharp constants of the divergence-free Hardy-Leray inequality, with
closed-form, spectral and field-level verification routes."""

from .constants import (Branch, ConstantBreakdown, ForbiddenGammaError,
                        NearForbiddenGammaWarning, Params, classical_constant,
                        improvement_ratio, sharp_constant, sharp_constant_3d)
from .operators import (AxisymFieldV, LogRadialGrid, QuotientReport, SpectralField, ThetaGrid,
                        d_op, divergence_residual, gradient_energy, rayleigh_quotient,
                        solve_v_rho, t_op, weight_energy)
from .spectral import (ReducedQuotient, SpectralPoint, azimuthal_infimum, brute_force_infimum,
                       f_2d, f_axisym, poloidal_infimum, reduced_quotient, total_infimum)
from .verify import (MinimizingSequenceSpec, Route, SequenceKind, StreamField2D,
                     build_minimizing_field, check_corollary2, check_inequality_2d,
                     random_divfree_2d, sweep_report)

__version__ = "0.1.0"
