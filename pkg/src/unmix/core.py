"""Domain types for linear-mixture hyperspectral data and spectral similarity metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

NDArrayF = npt.NDArray[np.floating]

#: Floor applied to spectral entries before probability normalisation in sid().
SID_EPS = 1e-12


@dataclass(frozen=True)
class SpectralCube:
    """Dense reflectance matrix, one column per pixel.

    data is bands x pixels (an L x N matrix); a column is one pixel's
    measured spectrum.
    """

    data: NDArrayF

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("cube data must be a 2-D bands x pixels matrix")
        if arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError("cube needs at least 2 bands and 2 pixels")
        if not np.all(np.isfinite(arr)):
            raise ValueError("cube data contains non-finite entries")
        object.__setattr__(self, "data", arr)
        # Memo for PCA reductions keyed by target dimension; see geometry.pca_reduce.
        object.__setattr__(self, "_reduced_cache", {})

    @property
    def bands(self) -> int:
        return int(self.data.shape[0])

    @property
    def pixels(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class EndmemberSet:
    """A set of p endmember spectra as an L x p matrix, optionally with the
    pixel indices they were taken from."""

    spectra: NDArrayF
    source_indices: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        arr = np.asarray(self.spectra, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("spectra must be a 2-D bands x count matrix")
        if arr.shape[1] < 2:
            raise ValueError("p >= 2 required")
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectra contain non-finite entries")
        object.__setattr__(self, "spectra", arr)
        if self.source_indices is not None:
            idx = tuple(int(i) for i in self.source_indices)
            if len(idx) != arr.shape[1]:
                raise ValueError("source_indices length must equal endmember count")
            if len(set(idx)) != len(idx):
                raise ValueError("source_indices must be distinct")
            if any(i < 0 for i in idx):
                raise ValueError("source_indices must be non-negative")
            object.__setattr__(self, "source_indices", idx)

    @property
    def count(self) -> int:
        return int(self.spectra.shape[1])

    @property
    def bands(self) -> int:
        return int(self.spectra.shape[0])


@dataclass(frozen=True)
class AbundanceMap:
    """Per-pixel endmember fractions, p x N. Columns are non-negative and sum to one."""

    fractions: NDArrayF

    def __post_init__(self):
        arr = np.asarray(self.fractions, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("fractions must be a 2-D count x pixels matrix")
        if np.any(arr < 0):
            raise ValueError("abundance fractions must be non-negative")
        sums = arr.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > 1e-12):
            raise ValueError("abundance columns must sum to 1 within 1e-12")
        object.__setattr__(self, "fractions", arr)

    @property
    def count(self) -> int:
        return int(self.fractions.shape[0])

    @property
    def pixels(self) -> int:
        return int(self.fractions.shape[1])


@dataclass(slots=True)
class Chromosome:
    """One GA individual: an ordered set of distinct pixel indices with a
    cached simplex-volume fitness (None until evaluated)."""

    genes: Tuple[int, ...]
    fitness: Optional[float] = None

    def __post_init__(self):
        self.genes = tuple(int(g) for g in self.genes)
        if len(set(self.genes)) != len(self.genes):
            raise ValueError("chromosome genes must be distinct")
        if any(g < 0 for g in self.genes):
            raise ValueError("chromosome genes must be non-negative pixel indices")

    def copy(self) -> "Chromosome":
        return Chromosome(self.genes, self.fitness)


def sam(t: Sequence[float], r: Sequence[float]) -> float:
    """Spectral angle between two spectra, in radians.

    Scale-invariant; 0 for parallel spectra, pi/2 for orthogonal ones.

    Raises:
        ValueError: on length mismatch or a zero-norm input.
    """
    tv = np.asarray(t, dtype=np.float64).ravel()
    rv = np.asarray(r, dtype=np.float64).ravel()
    if tv.size != rv.size:
        raise ValueError("spectra length mismatch: %d vs %d" % (tv.size, rv.size))
    if tv.size < 1:
        raise ValueError("spectra must have at least one band")
    nt = float(np.linalg.norm(tv))
    nr = float(np.linalg.norm(rv))
    if nt == 0.0 or nr == 0.0:
        raise ValueError("degenerate spectrum: zero norm")
    # arccos of the normalized dot product loses ~1e-8 of precision at small
    # angles (acos(1 - ulp) != 0), which would blur exact recoveries; the
    # half-angle arcsin form computes the same angle but is exact at 0.
    ut = tv / nt
    ur = rv / nr
    if float(np.dot(ut, ur)) >= 0.0:
        half = min(1.0, float(np.linalg.norm(ut - ur)) / 2.0)
        return 2.0 * math.asin(half)
    half = min(1.0, float(np.linalg.norm(ut + ur)) / 2.0)
    return math.pi - 2.0 * math.asin(half)


def sid(x: Sequence[float], r: Sequence[float]) -> float:
    """Spectral information divergence: symmetrised relative entropy between
    the band-probability vectors of two non-negative spectra.

    Entries are floored at SID_EPS before normalisation so zero bands do not
    blow up the logarithms. Natural log; result is >= 0 and symmetric.

    Raises:
        ValueError: on length mismatch, negative entries, or a zero-sum spectrum.
    """
    xv = np.asarray(x, dtype=np.float64).ravel()
    rv = np.asarray(r, dtype=np.float64).ravel()
    if xv.size != rv.size:
        raise ValueError("spectra length mismatch: %d vs %d" % (xv.size, rv.size))
    if xv.size < 1:
        raise ValueError("spectra must have at least one band")
    if np.any(xv < 0) or np.any(rv < 0):
        raise ValueError("negative reflectance")
    if xv.sum() <= 0 or rv.sum() <= 0:
        raise ValueError("zero-sum spectrum")
    p = np.maximum(xv, SID_EPS)
    q = np.maximum(rv, SID_EPS)
    p = p / p.sum()
    q = q / q.sum()
    return float(np.sum(p * np.log(p / q)) + np.sum(q * np.log(q / p)))


def rms(values: Sequence[float]) -> float:
    """Root mean square of a non-empty list of finite values."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("rms of an empty list")
    if not np.all(np.isfinite(arr)):
        raise ValueError("rms input contains non-finite values")
    return float(np.sqrt(np.mean(arr * arr)))


_METRICS = {"sam": sam, "sid": sid}


def match_endmembers(
    extracted: EndmemberSet,
    reference: EndmemberSet,
    metric: str = "sam",
) -> List[Tuple[int, int, float]]:
    """Greedily pair extracted endmembers with reference ones.

    Repeatedly picks the unassigned (reference, extracted) pair with the
    smallest metric value until all are paired. Returns (reference_idx,
    extracted_idx, score) triples sorted by reference index; the pairing is a
    bijection.

    Raises:
        ValueError: on count/band mismatch or unknown metric.
    """
    key = metric.lower()
    if key not in _METRICS:
        raise ValueError("unknown metric %r (expected 'sam' or 'sid')" % (metric,))
    if extracted.count != reference.count:
        raise ValueError(
            "endmember count mismatch: %d vs %d" % (extracted.count, reference.count)
        )
    if extracted.bands != reference.bands:
        raise ValueError(
            "band count mismatch: %d vs %d" % (extracted.bands, reference.bands)
        )
    fn = _METRICS[key]
    p = reference.count
    cost = np.empty((p, p), dtype=np.float64)
    for i in range(p):
        for j in range(p):
            cost[i, j] = fn(reference.spectra[:, i], extracted.spectra[:, j])

    free_ref = set(range(p))
    free_ext = set(range(p))
    pairs: List[Tuple[int, int, float]] = []
    for _ in range(p):
        best = None
        for i in sorted(free_ref):
            for j in sorted(free_ext):
                c = cost[i, j]
                if best is None or c < best[0]:
                    best = (c, i, j)
        c, i, j = best
        pairs.append((i, j, float(c)))
        free_ref.remove(i)
        free_ext.remove(j)
    pairs.sort(key=lambda t: t[0])
    return pairs
