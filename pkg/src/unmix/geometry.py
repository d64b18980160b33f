"""PCA dimensionality reduction and simplex-volume computation.

The volume of the simplex spanned by p candidate pixels, computed in a
(p-1)-dimensional PCA projection, is the fitness every volume-maximising
extractor in this package optimises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import NDArrayF, SpectralCube


@dataclass(frozen=True)
class ReducedCube:
    """PCA projection of a cube: data is dim x pixels, basis is the L x dim
    orthonormal projection matrix and mean the per-band average removed
    before projecting."""

    data: NDArrayF
    mean: NDArrayF
    basis: NDArrayF

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    @property
    def pixels(self) -> int:
        return int(self.data.shape[1])


def pca_reduce(cube: SpectralCube, target_dim: int) -> ReducedCube:
    """Project a cube onto its top target_dim principal directions.

    Columns are mean-centred; directions are ordered by descending variance.
    Each basis column's sign is fixed so its largest-magnitude entry is
    positive, which makes repeated runs reproducible. Results are memoised on
    the cube per target dimension.

    Raises:
        ValueError: if target_dim is outside [1, min(bands, pixels)].
    """
    d = int(target_dim)
    if d < 1 or d > min(cube.bands, cube.pixels):
        raise ValueError(
            "target dimension %d out of range [1, %d]" % (d, min(cube.bands, cube.pixels))
        )
    cache = getattr(cube, "_reduced_cache", None)
    if cache is not None and d in cache:
        return cache[d]

    mean = cube.data.mean(axis=1)
    centered = cube.data - mean[:, None]
    u, _, _ = np.linalg.svd(centered, full_matrices=False)
    basis = u[:, :d].copy()
    for j in range(d):
        k = int(np.argmax(np.abs(basis[:, j])))
        if basis[k, j] < 0:
            basis[:, j] = -basis[:, j]
    reduced = ReducedCube(data=basis.T @ centered, mean=mean, basis=basis)
    if cache is not None:
        cache[d] = reduced
    return reduced


def determinant(matrix) -> float:
    """Determinant via LU decomposition with partial pivoting.

    Singular matrices return 0.0 rather than raising; the row-swap sign is
    tracked explicitly.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("determinant requires a square matrix")
    if a.shape[0] == 0:
        raise ValueError("determinant of an empty matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    n = a.shape[0]
    sign = 1.0
    for k in range(n - 1):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0.0:
            return 0.0
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            sign = -sign
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(factors, a[k, k:])
    return float(sign * np.prod(np.diag(a)))


def simplex_volume(vertices) -> float:
    """Volume of the d-simplex with the given d x (d+1) vertex matrix.

    Uses the augmented determinant form: a row of ones is stacked on top of
    the vertex columns and the volume is |det| / d!. Degenerate (affinely
    dependent) vertex sets yield 0.0.
    """
    v = np.asarray(vertices, dtype=np.float64)
    if v.ndim != 2 or v.shape[1] != v.shape[0] + 1:
        raise ValueError("vertices must be a d x (d+1) matrix")
    if not np.all(np.isfinite(v)):
        raise ValueError("vertices contain non-finite entries")
    d = v.shape[0]
    aug = np.vstack([np.ones((1, d + 1)), v])
    return abs(determinant(aug)) / math.factorial(d)


def chromosome_volumes(reduced_data: NDArrayF, gene_sets) -> NDArrayF:
    """Simplex volumes for many pixel-index sets at once.

    reduced_data is a d x N projection; gene_sets is a (k, d+1) integer
    array of pixel indices. Equivalent to calling simplex_volume on each
    column selection but evaluated with one batched determinant over the
    edge-vector form (columns minus the first column), which agrees with the
    augmented form up to rounding.
    """
    idx = np.asarray(gene_sets, dtype=np.intp)
    if idx.ndim != 2:
        raise ValueError("gene_sets must be a 2-D index array")
    d = reduced_data.shape[0]
    if idx.shape[1] != d + 1:
        raise ValueError(
            "gene sets of size %d do not match reduced dimension %d" % (idx.shape[1], d)
        )
    pts = np.moveaxis(reduced_data[:, idx], 1, 0)  # (k, d, d+1)
    edges = pts[:, :, 1:] - pts[:, :, :1]
    return np.abs(np.linalg.det(edges)) / math.factorial(d)
