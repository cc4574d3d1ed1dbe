"""GGP hyperparameters and reproducible random streams."""

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveAlphaError, OutOfRegionError


@dataclass(frozen=True)
class GgpParams:
    """Hyperparameters of the restricted generalized gamma process.

    alpha > 0 is the restriction size, sigma < 1 controls sparsity and the
    power-law exponent, tau >= 0 is the exponential tilt. The admissible
    region is (sigma <= 0 and tau > 0) or (0 < sigma < 1 and tau >= 0).
    """

    alpha: float
    sigma: float
    tau: float

    def __post_init__(self):
        a, s, t = float(self.alpha), float(self.sigma), float(self.tau)
        if not np.isfinite(a) or a <= 0:
            raise NonPositiveAlphaError(f"alpha must be positive, got {self.alpha}")
        if not (np.isfinite(s) and s < 1):
            raise OutOfRegionError(f"sigma must be finite and < 1, got {self.sigma}")
        if not (np.isfinite(t) and t >= 0):
            raise OutOfRegionError(f"tau must be finite and >= 0, got {self.tau}")
        if s <= 0 and t <= 0:
            raise OutOfRegionError(
                f"sigma <= 0 requires tau > 0, got sigma={self.sigma}, tau={self.tau}"
            )

    @property
    def finite_activity(self):
        return self.sigma < 0

    def with_tilt(self, c):
        """Parameters of the exponentially tilted process (tau -> tau + c)."""
        return GgpParams(self.alpha, self.sigma, self.tau + c)


def validate_params(alpha, sigma, tau):
    """Validate (alpha, sigma, tau) and return a GgpParams instance."""
    return GgpParams(float(alpha), float(sigma), float(tau))


@dataclass(frozen=True)
class TiltedStableSpec:
    """Total-mass law of `base` tilted by exp(-tilt * w)."""

    base: GgpParams
    tilt: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.tilt) and self.tilt >= 0):
            raise OutOfRegionError(f"tilt must be >= 0, got {self.tilt}")


def rng_stream(seed, stream=0):
    """Counter-based generator keyed by (seed, stream id).

    Identical (seed, stream) pairs yield identical draw sequences; distinct
    stream ids give statistically independent streams, so replicate-level
    work can be farmed out without coordination.
    """
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) + int(stream)))
