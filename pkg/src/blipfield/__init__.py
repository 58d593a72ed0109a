"""Position-space quantisation of the one-dimensional electromagnetic field.

Localised photon packets on a periodic lattice, their dispersion-free
transport, the non-local field observables and the energy observable, with
dense truncated-Fock and classical Maxwell oracles for cross-checking.
"""

from .core import (
    DIRECTIONS,
    NATURAL_UNITS,
    POLARIZATIONS,
    Direction,
    Grid,
    PhysicalConstants,
    Polarization,
    from_momentum,
    make_grid,
    to_momentum,
)
from .dynamics import (
    EvolutionReport,
    apply_h_dyn,
    schrodinger_residual,
    shift_evolve,
    spectral_evolve,
)
from .energy import EnergyBreakdown, classical_energy, conservation_probe, energy_expectation
from .fields import (
    FieldProfile,
    Kernel,
    build_kernel,
    field_profile,
    intensity_profile,
    poynting_profile,
    regularize,
)
from .wavepacket import (
    SpectralPacket,
    WavePacket,
    detection_probability,
    inner_product,
    make_blip,
    make_gaussian,
    normalize,
)

__version__ = "0.1.0"
