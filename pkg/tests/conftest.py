"""Shared fixtures: small deterministic cubes built once per session."""

import numpy as np
import pytest

from unmix import SceneSpec, SpectralCube, generate_endmembers, mix64, synthesize


@pytest.fixture(scope="session")
def tiny_scene():
    """Noiseless pure-pixel scene, p=3, 12 bands, 5x5 pixels."""
    spec = SceneSpec(endmember_count=3, bands=12, side=5, seed=11)
    cube, truth, abund = synthesize(spec)
    return spec, cube, truth, abund


@pytest.fixture(scope="session")
def mixed_cube():
    """15-pixel cube with no pure pixels; p=3 mixtures of Legendre spectra."""
    rng = np.random.default_rng(mix64(77, 0))
    m = generate_endmembers(3, 20, seed=mix64(77, 1)).spectra
    a = rng.dirichlet(np.ones(3), size=15).T
    return SpectralCube(m @ a)
