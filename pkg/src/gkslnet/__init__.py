"""Global, local and perturbed-local GKSL master equations for weakly
coupled quantum networks, with steady-state heat-flux analysis.

Submodules:

- ``opalg``: ladder operators, tensor embedding, basic functionals.
- ``spectral``: diagonalization, Bohr frequencies, perturbation series.
- ``lindblad``: bath models, jump operators and generator assembly.
- ``dynamics``: propagation and steady states.
- ``thermo``: heat fluxes and entropy production.
- ``twosite``: closed-form two-site reference model.
- ``cli``: JSON-configured sweeps writing CSV.
"""
from .opalg import (HilbertSpace, Operator, SitePrimitive, TWO_LEVEL, OSCILLATOR,
                    ladder, embed, commutator, anticommutator, dagger, expectation)
from .spectral import (SpectralDecomposition, BohrFrequencySet, PerturbationSeries,
                       DegeneracyError, diagonalize, bohr_frequencies, rs_perturbation,
                       approximate_spectrum)
from .lindblad import (BathSpec, FrequencyComponent, Liouvillian, flat, ohmic, piecewise,
                       frequency_decompose, dissipator, lamb_shift, build_generator)
from .dynamics import (DensityMatrix, SteadyStateResult, propagate, steady_state,
                       gibbs_state, trace_distance)
from .thermo import FluxReport, heat_flux, entropy_production, flux_report
from . import twosite

__version__ = "0.1.0"
