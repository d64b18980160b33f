"""Synthetic linear-mixture scene generation.

Scenes are built as cube = M @ A: smooth Legendre-combination endmember
spectra M, flat-Dirichlet abundance columns A (optionally with one
guaranteed pure pixel per endmember), plus additive Gaussian noise at a
target SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numpy.polynomial import legendre

from .core import AbundanceMap, EndmemberSet, SpectralCube, sam
from .seeds import mix64

#: Number of Legendre polynomials combined into one endmember spectrum.
_LEGENDRE_TERMS = 6
#: Minimum pairwise spectral angle between generated endmembers, radians.
_MIN_SEPARATION = 0.1
_MAX_ATTEMPTS = 1000

# Substream tags for deriving independent RNG streams from a scene seed.
_TAG_ENDMEMBERS = 1
_TAG_NOISE = 2

NOISELESS = math.inf


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of one synthetic scene; side is the image edge length, so
    the scene has side**2 pixels. snr_db may be the NOISELESS sentinel
    (math.inf) to skip the noise stage."""

    endmember_count: int
    bands: int
    side: int
    snr_db: float = NOISELESS
    pure_pixel_guarantee: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.endmember_count < 2:
            raise ValueError("p >= 2 required")
        if self.bands < self.endmember_count:
            raise ValueError("bands must be >= endmember count")
        if self.side < 2:
            raise ValueError("side must be >= 2")
        if math.isnan(self.snr_db):
            raise ValueError("snr_db must be a number or the noiseless sentinel")

    @property
    def pixels(self) -> int:
        return self.side * self.side


def generate_endmembers(p: int, bands: int, seed: int) -> EndmemberSet:
    """Draw p smooth, distinct, non-negative spectra with peak exactly 1.

    Each spectrum is a positive random combination of the first 6 Legendre
    polynomials on [-1, 1], shifted to be non-negative and scaled to unit
    peak. Candidates closer than 0.1 rad (spectral angle) to an accepted
    spectrum are rejected and redrawn.

    Raises:
        ValueError: if separation cannot be met within 1000 draws.
    """
    if p < 2:
        raise ValueError("p >= 2 required")
    if bands < p:
        raise ValueError("bands must be >= p")
    rng = np.random.default_rng(seed)
    x = np.linspace(-1.0, 1.0, bands)
    accepted = []
    attempts = 0
    while len(accepted) < p:
        if attempts >= _MAX_ATTEMPTS:
            raise ValueError("endmembers too similar: separation not met after %d draws" % attempts)
        attempts += 1
        coeffs = rng.uniform(0.0, 1.0, _LEGENDRE_TERMS)
        spectrum = legendre.legval(x, coeffs)
        lo = spectrum.min()
        if lo < 0:
            spectrum = spectrum - lo
        peak = spectrum.max()
        if peak <= 0:
            continue
        spectrum = spectrum / peak
        if all(sam(spectrum, other) >= _MIN_SEPARATION for other in accepted):
            accepted.append(spectrum)
    return EndmemberSet(spectra=np.column_stack(accepted))


def generate_scene(spec: SceneSpec, endmembers: EndmemberSet) -> Tuple[SpectralCube, AbundanceMap]:
    """Mix endmembers into a noiseless scene.

    Abundance columns are flat-Dirichlet draws (deterministic from
    spec.seed). With pure_pixel_guarantee the first p pixels carry the p
    unit abundances, so each endmember appears verbatim in the scene.
    """
    if endmembers.count != spec.endmember_count:
        raise ValueError(
            "endmember count %d does not match spec (%d)"
            % (endmembers.count, spec.endmember_count)
        )
    if endmembers.bands != spec.bands:
        raise ValueError("endmember bands %d do not match spec (%d)" % (endmembers.bands, spec.bands))
    p = spec.endmember_count
    n = spec.pixels
    rng = np.random.default_rng(spec.seed)
    fractions = rng.dirichlet(np.ones(p), size=n).T
    if spec.pure_pixel_guarantee:
        fractions[:, :p] = np.eye(p)
    abundances = AbundanceMap(fractions=fractions)
    cube = SpectralCube(data=endmembers.spectra @ abundances.fractions)
    return cube, abundances


def add_noise(cube: SpectralCube, snr_db: float, seed: int) -> SpectralCube:
    """Add i.i.d. zero-mean Gaussian noise sized for the target SNR.

    Noise variance is mean(cube**2) / 10**(snr_db/10). The noiseless
    sentinel (snr_db == inf) returns the input unchanged. Negative values
    appearing after noise are preserved, not clipped.
    """
    if math.isnan(snr_db):
        raise ValueError("snr_db must be a number or the noiseless sentinel")
    if math.isinf(snr_db) and snr_db > 0:
        return cube
    rng = np.random.default_rng(seed)
    signal_power = float(np.mean(cube.data * cube.data))
    sigma = math.sqrt(signal_power / (10.0 ** (snr_db / 10.0)))
    return SpectralCube(data=cube.data + rng.normal(0.0, sigma, size=cube.data.shape))


def synthesize(spec: SceneSpec) -> Tuple[SpectralCube, EndmemberSet, AbundanceMap]:
    """Build a full scene from one seed: endmembers, mixed cube, noise.

    Endmember and noise draws use substreams mixed from spec.seed so the
    three stages are independently reproducible.
    """
    truth = generate_endmembers(spec.endmember_count, spec.bands, mix64(spec.seed, _TAG_ENDMEMBERS))
    cube, abundances = generate_scene(spec, truth)
    cube = add_noise(cube, spec.snr_db, mix64(spec.seed, _TAG_NOISE))
    return cube, truth, abundances


def parse_snr(text: Union[str, float]) -> float:
    """Parse an SNR flag value: a dB number, or 'noiseless'/'inf' for none."""
    if isinstance(text, (int, float)):
        return float(text)
    t = text.strip().lower()
    if t in ("noiseless", "inf", "none"):
        return NOISELESS
    try:
        return float(t)
    except ValueError:
        raise ValueError("invalid SNR %r (expected a dB value or 'noiseless')" % (text,))
