"""Two-photon interference of spatially entangled photon pairs behind
far-field phase distortions: biphoton source model, Zernike/parity phase
masks, correlation maps, and a photon-counting camera Monte Carlo."""

from .grid import (
    ComplexField,
    Grid1D,
    Grid2D,
    RealImage,
    fourier_transform,
    pair_histogram,
    pearson_correlation,
    point_reflect,
    reflect_array,
)
from .spdc import (
    SigmaPair,
    SpdcParams,
    TwoPhotonAmplitude,
    build_two_photon_amplitude,
    derive_sigmas,
    marginal,
    schmidt_number,
    sigma_ratio_for_schmidt,
    sum_projection,
)
from .zernike import (
    DmConfig,
    Parity,
    ParityFilter,
    PhaseMask,
    filtered_noise_mask,
    mask_from_coeffs,
    parity_decompose,
    parity_of,
    random_mask,
    uniform_phase_mask,
    zernike_eval,
)
from .correlation import (
    CorrelationMap,
    PumpPattern,
    apply_mask_pair,
    aux_pump_intensity,
    compare_patterns,
    delta_approx_correlation,
    difference_projection,
    full_correlation,
)
from .emccd import (
    AnticorrelatedPairSampler,
    CoincidenceMap,
    DetectorModel,
    DifferencePairSampler,
    FrameStack,
    coincidence_correlation,
    estimate_schmidt,
    speckle_contrast,
    sum_coincidence_correlation,
    synthesize_frames,
    threshold_frame,
)

__version__ = "0.1.0"
