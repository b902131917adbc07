"""Simulation and analysis toolkit for a counterpropagating
photon-pair source with hybrid polarization-frequency entanglement.

Core modules:

- dispersion: linear modal-index model and group velocity
- phasematch: emission-frequency solver and tunability curves
- jsa: joint spectral amplitudes on frequency grids
- hom: ideal two-photon interferograms (closed form and quadrature)
- cavity: facet-reflection (Fabry-Perot) perturbation of the interferogram
- tomography: restricted density-matrix reconstruction and metrics
- fitting: weighted least-squares interferogram fits
- config: INI run configuration with explicit-unit keys
- cli / service: command-line and HTTP front ends
"""

from .cavity import (
    CavityKernel,
    WaveguideConfig,
    average_fast_oscillation,
    averaged_cavity_interferogram,
    cavity_coincidence,
    cavity_grid,
    effective_visibility,
    facet_amplitudes,
    fast_delay_grid,
    free_spectral_range,
    paper_waveguide,
    scan_cavity_interferogram,
)
from .config import RunConfig, default_config, load_config, parse_config
from .dispersion import C, DispersionModel, group_velocity, modal_index, paper_device
from .errors import (
    BiphotonError,
    ConfigError,
    DegenerateFitError,
    FitNonConvergenceError,
    PhaseMatchError,
    PhysicalityError,
    ResolutionError,
)
from .fitting import FitResult, fit_hom_interferogram, initial_guess
from .hom import (
    HomFitParams,
    Interferogram,
    coincidence_closed_form,
    coincidence_quadrature,
    fit_model,
    scan_interferogram,
)
from .jsa import (
    GridSpec,
    JointSpectrum,
    build_joint_spectrum,
    extract_population_p,
    marginal_spectra,
    sigma_plus,
)
from .phasematch import (
    PumpConfig,
    TunabilityPoint,
    coincidence_envelope_width,
    intra_mode_width,
    paper_pump,
    solve_central_frequencies,
    spectral_separation_mu,
    tunability_curve,
    vacuum_wavelength,
)
from .tomography import (
    RestrictedDensityMatrix,
    build_density_matrix,
    concurrence,
    fidelity_to_ideal,
    metric_uncertainties,
    purity,
    wootters_concurrence,
)

__version__ = "0.1.0"

__all__ = [
    "BiphotonError",
    "C",
    "CavityKernel",
    "ConfigError",
    "DegenerateFitError",
    "DispersionModel",
    "FitNonConvergenceError",
    "FitResult",
    "GridSpec",
    "HomFitParams",
    "Interferogram",
    "JointSpectrum",
    "PhaseMatchError",
    "PhysicalityError",
    "PumpConfig",
    "ResolutionError",
    "RestrictedDensityMatrix",
    "RunConfig",
    "TunabilityPoint",
    "WaveguideConfig",
    "average_fast_oscillation",
    "averaged_cavity_interferogram",
    "build_density_matrix",
    "build_joint_spectrum",
    "cavity_coincidence",
    "cavity_grid",
    "coincidence_closed_form",
    "coincidence_envelope_width",
    "coincidence_quadrature",
    "concurrence",
    "default_config",
    "effective_visibility",
    "extract_population_p",
    "facet_amplitudes",
    "fast_delay_grid",
    "fidelity_to_ideal",
    "fit_hom_interferogram",
    "fit_model",
    "free_spectral_range",
    "group_velocity",
    "initial_guess",
    "intra_mode_width",
    "load_config",
    "marginal_spectra",
    "metric_uncertainties",
    "modal_index",
    "paper_device",
    "paper_pump",
    "paper_waveguide",
    "parse_config",
    "purity",
    "scan_cavity_interferogram",
    "scan_interferogram",
    "sigma_plus",
    "solve_central_frequencies",
    "spectral_separation_mu",
    "tunability_curve",
    "vacuum_wavelength",
    "wootters_concurrence",
]
