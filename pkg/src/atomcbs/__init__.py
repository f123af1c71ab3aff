"""Backscattering interference of intense laser light from two driven atoms.

Layers, bottom up:

``params``     parameter records, spectral-distribution container, line algebra
``bloch``      driven-atom Bloch dynamics with a graded bichromatic probe
``kernels``    single-atom emission and rescattering kernels
``transport``  double-scattering ladder/crossed assembly and totals
``oracle``     independent coupled two-atom master-equation cross-check
``cli``        configuration files, output tables, command line
"""

__version__ = "0.1.0"

from .params import (AtomFieldParams, ProbeAmplitude, SpectralDistribution,
                     merge_lines, saturation)
from .bloch import (BlochSystem, GradedState, build_bloch, steady_state,
                    excited_population, harmonic_response,
                    correlation_transform, resolvent_apply)
from .kernels import KernelSet, kernel_set, p0_spectrum, p1_kernel, p2_kernel
from .transport import (FrequencyGrid, CbsResult, default_grid,
                        ladder_spectrum, crossed_spectrum, integrate_total,
                        compute_cbs)
from .oracle import (TwoAtomLiouvillian, OracleSpectra, build_two_atom,
                     steady_density, pair_spectra, single_atom_background,
                     extract_ladder_crossed)
from .config import RunConfig, parse_config

__all__ = [
    "__version__",
    "AtomFieldParams", "ProbeAmplitude", "SpectralDistribution",
    "merge_lines", "saturation",
    "BlochSystem", "GradedState", "build_bloch", "steady_state",
    "excited_population", "harmonic_response", "correlation_transform",
    "resolvent_apply",
    "KernelSet", "kernel_set", "p0_spectrum", "p1_kernel", "p2_kernel",
    "FrequencyGrid", "CbsResult", "default_grid", "ladder_spectrum",
    "crossed_spectrum", "integrate_total", "compute_cbs",
    "TwoAtomLiouvillian", "OracleSpectra", "build_two_atom", "steady_density",
    "pair_spectra", "single_atom_background", "extract_ladder_crossed",
    "RunConfig", "parse_config",
]
