"""Expected distortion of a Gaussian source over a block-fading channel
with block-fading receiver side information.

The library computes encoder-side-information lower bounds, the expected
distortion of four transmission schemes (uncoded, separate source/channel
coding, joint decoding, superposed hybrid digital-analog), their optimized
parameters, Monte Carlo cross-checks, and the full high-SNR distortion
exponent calculus for gamma-shaped fading gains.
"""

__version__ = "0.1.0"

from .fading import GammaLaw, SystemConfig, make_normalized
from .numerics import DEFAULT_TOL, Tolerances

__all__ = [
    "GammaLaw",
    "SystemConfig",
    "make_normalized",
    "Tolerances",
    "DEFAULT_TOL",
    "__version__",
]
