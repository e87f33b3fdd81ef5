"""Magnetic NLS laboratory.

Pseudo-spectral solver and diagnostics for ``u_t = i(Δ_A u - A0 u - μ|u|^{2p} u)``
in three dimensions: gauge-condition auditor, stress-energy balance laws,
virial and interaction Morawetz functionals, smoothing and scattering monitors.
"""

from .config import ConfigError, RunConfig, from_dict, load_config
from .evolve import (NonlinearitySpec, PicardConfig, Trajectory, evolve, linear_propagate,
                     picard_iterate)
from .gauge import GaugePotential, audit, coulomb_project, curvature, kato_norm, make_potential
from .grid import Grid
from .kernels import eta_convolve, eta_pairing, riesz_convolve, x_operator
from .morawetz import (MorawetzWeight, appendix_sign_demo, interaction_inequality_check,
                       p_terms, spacetime_l4_ratio, virial_check)
from .norms import NormSpec, scattering_monitor, smoothing_functionals, spacetime_norm
from .stress import energy, mass, stress_tensor

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "GaugePotential", "Grid", "MorawetzWeight", "NonlinearitySpec",
    "NormSpec", "PicardConfig", "RunConfig", "Trajectory", "appendix_sign_demo", "audit",
    "coulomb_project", "curvature", "energy", "eta_convolve", "eta_pairing", "evolve",
    "from_dict", "interaction_inequality_check", "kato_norm", "linear_propagate",
    "load_config", "make_potential", "mass", "p_terms", "picard_iterate", "riesz_convolve",
    "scattering_monitor", "smoothing_functionals", "spacetime_norm", "stress_tensor",
    "spacetime_l4_ratio", "virial_check", "x_operator",
]
