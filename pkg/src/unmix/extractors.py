"""Endmember extractors behind one interface: PPI, N-FINDR, VCA, GAEE.

All four return the original L-band spectra of p distinct pixels together
with those pixels' indices. The geometric search happens in a PCA-reduced
space (d = p-1 for simplex-volume methods, d = p for VCA); the returned
spectra are always taken from the unreduced cube.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .core import EndmemberSet, SpectralCube
from .evolution import GaConfig, evolve
from .geometry import chromosome_volumes, pca_reduce
from .seeds import mix64

ALGORITHM_NAMES = (
    "ppi",
    "nfindr",
    "vca",
    "gaee",
    "gaee-ivfm",
    "gaee-vca",
    "gaee-ivfm-vca",
)

_LABELS = {"ppi": "PPI", "nfindr": "N-FINDR", "vca": "VCA"}

# Per-variant GA operator defaults: name -> (mutation_prob, crossover_prob).
_GA_DEFAULTS = {
    "gaee": (0.1, 1.0),
    "gaee-ivfm": (0.3, 0.7),
    "gaee-vca": (0.05, 0.5),
    "gaee-ivfm-vca": (0.1, 1.0),
}

_PPI_CHUNK = 1024  # skewers per projection batch; bounds the N x chunk scratch
_VCA_MAX_REDRAWS = 100


def label_for(name: str) -> str:
    """Reporting label for a variant name, e.g. "gaee-ivfm" -> "GAEE-IVFm"."""
    key = name.strip().lower()
    if key not in ALGORITHM_NAMES:
        raise ValueError("unknown algorithm '%s'" % name)
    if not key.startswith("gaee"):
        return _LABELS[key]
    label = "GAEE"
    if "ivfm" in key:
        label += "-IVFm"
    if key.endswith("-vca"):
        label += "-VCA"
    return label


@dataclass(frozen=True)
class ExtractorSpec:
    """One extractor invocation: algorithm, endmember count, and knobs.

    ga must be present exactly when algorithm == "gaee"; the GA's own
    rng_seed drives GAEE runs, so with_seed keeps the two in sync.
    """

    algorithm: str
    p: int
    ga: Optional[GaConfig] = None
    ppi_skewers: int = 10000
    nfindr_max_sweeps: int = 20
    rng_seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("ppi", "nfindr", "vca", "gaee"):
            raise ValueError("unknown algorithm '%s'" % self.algorithm)
        if self.p < 2:
            raise ValueError("p >= 2 required")
        if (self.ga is not None) != (self.algorithm == "gaee"):
            raise ValueError("ga config must be present exactly for gaee")
        if self.ppi_skewers < 1:
            raise ValueError("no skewers")
        if self.nfindr_max_sweeps < 1:
            raise ValueError("nfindr_max_sweeps must be >= 1")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be non-negative")

    @property
    def label(self) -> str:
        """Reporting name; GAEE variants encode their module flags."""
        if self.algorithm != "gaee":
            return _LABELS[self.algorithm]
        name = "GAEE"
        if self.ga.ivfm_enabled:
            name += "-IVFm"
        if self.ga.vca_seed_enabled:
            name += "-VCA"
        return name

    def with_seed(self, seed: int) -> "ExtractorSpec":
        """Copy of this spec reseeded (GA config included)."""
        ga = None if self.ga is None else replace(self.ga, rng_seed=seed)
        return replace(self, rng_seed=seed, ga=ga)

    @classmethod
    def from_name(
        cls,
        name: str,
        p: int,
        *,
        seed: int = 0,
        npop: int = 100,
        ngen: int = 200,
        pm: Optional[float] = None,
        pc: Optional[float] = None,
        skewers: int = 10000,
        max_sweeps: int = 20,
    ) -> "ExtractorSpec":
        """Build a spec from a variant name such as "vca" or "gaee-ivfm".

        For GAEE variants, omitted pm/pc fall back to the per-variant
        defaults in _GA_DEFAULTS.
        """
        key = name.strip().lower()
        if key not in ALGORITHM_NAMES:
            raise ValueError("unknown algorithm '%s'" % name)
        if not key.startswith("gaee"):
            return cls(
                algorithm=key,
                p=p,
                ppi_skewers=skewers,
                nfindr_max_sweeps=max_sweeps,
                rng_seed=seed,
            )
        default_pm, default_pc = _GA_DEFAULTS[key]
        ga = GaConfig(
            population_size=npop,
            generations=ngen,
            mutation_prob=default_pm if pm is None else pm,
            crossover_prob=default_pc if pc is None else pc,
            ivfm_enabled="ivfm" in key,
            vca_seed_enabled=key.endswith("-vca"),
            rng_seed=seed,
        )
        return cls(algorithm="gaee", p=p, ga=ga, rng_seed=seed)


@dataclass(frozen=True)
class ExtractionResult:
    """Extractor output plus, for GAEE, the convergence record."""

    endmembers: EndmemberSet
    label: str
    fitness_history: Optional[Tuple[float, ...]] = None
    mean_history: Optional[Tuple[float, ...]] = None


def _check_p(cube: SpectralCube, p: int) -> None:
    if p < 2:
        raise ValueError("p >= 2 required")
    if p > cube.pixels:
        raise ValueError("p exceeds pixel count (%d > %d)" % (p, cube.pixels))


def _pick(cube: SpectralCube, indices) -> EndmemberSet:
    genes = tuple(int(i) for i in indices)
    return EndmemberSet(cube.data[:, genes], source_indices=genes)


def ppi(cube: SpectralCube, p: int, num_skewers: int = 10000, seed: int = 0) -> EndmemberSet:
    """Pixel purity index.

    Projects every pixel onto num_skewers random unit vectors (Gaussian
    draws, normalized); the pixels attaining each projection's maximum and
    minimum collect purity counts. Returns the p pixels with the highest
    counts, ties broken by lower pixel index.
    """
    _check_p(cube, p)
    if num_skewers < 1:
        raise ValueError("no skewers")
    rng = np.random.default_rng(seed)
    skewers = rng.standard_normal((cube.bands, num_skewers))
    norms = np.linalg.norm(skewers, axis=0)
    while (bad := np.flatnonzero(norms == 0.0)).size:
        skewers[:, bad] = rng.standard_normal((cube.bands, bad.size))
        norms[bad] = np.linalg.norm(skewers[:, bad], axis=0)
    skewers /= norms

    counts = np.zeros(cube.pixels, dtype=np.int64)
    pixels_t = cube.data.T
    for start in range(0, num_skewers, _PPI_CHUNK):
        proj = pixels_t @ skewers[:, start : start + _PPI_CHUNK]
        np.add.at(counts, proj.argmax(axis=0), 1)
        np.add.at(counts, proj.argmin(axis=0), 1)
    order = np.argsort(-counts, kind="stable")
    return _pick(cube, order[:p])


def nfindr(cube: SpectralCube, p: int, max_sweeps: int = 20, seed: int = 0) -> EndmemberSet:
    """N-FINDR simplex-volume maximization.

    Starts from p random distinct pixels in the (p-1)-dimensional reduced
    space and sweeps vertex-major over all (vertex, pixel) replacements,
    keeping any that strictly grows the volume, until a sweep changes
    nothing or max_sweeps is hit.
    """
    _check_p(cube, p)
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    reduced = pca_reduce(cube, p - 1)
    rng = np.random.default_rng(seed)
    idx = rng.choice(cube.pixels, size=p, replace=False).astype(np.intp)
    current = float(chromosome_volumes(reduced.data, idx[None, :])[0])

    all_pixels = np.arange(cube.pixels, dtype=np.intp)
    for _ in range(max_sweeps):
        changed = False
        for k in range(p):
            # Candidate volumes for vertex k do not depend on its current
            # value, so the ascending first-improvement scan lands on the
            # first pixel attaining the maximum: argmax is exact here.
            cand = np.tile(idx, (cube.pixels, 1))
            cand[:, k] = all_pixels
            vols = chromosome_volumes(reduced.data, cand)
            best_pix = int(vols.argmax())
            if vols[best_pix] > current:
                idx[k] = best_pix
                current = float(vols[best_pix])
                changed = True
        if not changed:
            break
    return _pick(cube, idx)


def vca(cube: SpectralCube, p: int, seed: int = 0) -> EndmemberSet:
    """Vertex component analysis, geometric core form.

    Works on the p-dimensional reduction with an appended constant-1
    coordinate. Each of the p iterations projects a random direction onto
    the orthogonal complement of the endmembers found so far and takes the
    pixel extremizing that projection; a repeated pick triggers a redraw
    (at most 100 per iteration).
    """
    _check_p(cube, p)
    reduced = pca_reduce(cube, p)
    y = np.vstack([reduced.data, np.ones((1, cube.pixels))])
    rng = np.random.default_rng(seed)
    basis = np.zeros((p + 1, p))
    chosen: List[int] = []
    for i in range(p):
        for _ in range(_VCA_MAX_REDRAWS + 1):
            w = rng.standard_normal(p + 1)
            if i == 0:
                f = w
            else:
                found = basis[:, :i]
                f = w - found @ (np.linalg.pinv(found) @ w)
            norm = float(np.linalg.norm(f))
            if norm == 0.0:
                continue
            k = int(np.abs((f / norm) @ y).argmax())
            if k not in chosen:
                break
        else:
            raise RuntimeError("VCA stalled")
        chosen.append(k)
        basis[:, i] = y[:, k]
    return _pick(cube, chosen)


def _run_gaee(cube: SpectralCube, p: int, config: GaConfig):
    _check_p(cube, p)
    reduced = pca_reduce(cube, p - 1)

    def batch(genes: np.ndarray) -> np.ndarray:
        return chromosome_volumes(reduced.data, genes)

    def single(genes) -> float:
        return float(batch(np.asarray([genes], dtype=np.intp))[0])

    seed_genes = None
    if config.vca_seed_enabled:
        seed_genes = vca(cube, p, seed=mix64(config.rng_seed, 1)).source_indices
    population = evolve(
        cube.pixels, p, config, single, batch_fitness=batch, seed_genes=seed_genes
    )
    return _pick(cube, population.best_ever.genes), population


def gaee(cube: SpectralCube, p: int, config: GaConfig) -> EndmemberSet:
    """GAEE: evolve pixel-index chromosomes whose fitness is the simplex
    volume spanned in the (p-1)-dimensional reduction; IVFm and VCA seeding
    are switched by the config flags."""
    return _run_gaee(cube, p, config)[0]


def extract(cube: SpectralCube, spec: ExtractorSpec) -> EndmemberSet:
    """Dispatch to the algorithm named by spec; see extract_detailed."""
    return extract_detailed(cube, spec).endmembers


def extract_detailed(cube: SpectralCube, spec: ExtractorSpec) -> ExtractionResult:
    """Run one extractor and keep the GAEE convergence history when present.

    Deterministic per (cube, spec): every stochastic choice flows from
    spec.rng_seed (or spec.ga.rng_seed for GAEE).
    """
    _check_p(cube, spec.p)
    if spec.algorithm == "ppi":
        ems = ppi(cube, spec.p, spec.ppi_skewers, spec.rng_seed)
    elif spec.algorithm == "nfindr":
        ems = nfindr(cube, spec.p, spec.nfindr_max_sweeps, spec.rng_seed)
    elif spec.algorithm == "vca":
        ems = vca(cube, spec.p, spec.rng_seed)
    else:
        ems, population = _run_gaee(cube, spec.p, spec.ga)
        return ExtractionResult(
            endmembers=ems,
            label=spec.label,
            fitness_history=tuple(population.fitness_history),
            mean_history=tuple(population.mean_history),
        )
    return ExtractionResult(endmembers=ems, label=spec.label)
