"""Bit-exact file formats: binary cubes and spectral-library CSVs.

Cube files carry a 12-byte header (magic "HSC1", band and pixel counts as
little-endian uint32) followed by the matrix as IEEE-754 binary64
little-endian, band-major. Library CSVs store one row per band with 17
significant digits, which round-trips binary64 exactly.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import List

import numpy as np

from .core import EndmemberSet, SpectralCube

MAGIC = b"HSC1"
_HEADER_LEN = 12


class FormatError(ValueError):
    """A file does not conform to one of the formats above."""


def save_cube(cube: SpectralCube, path) -> None:
    """Write the cube; see load_cube for the exact inverse."""
    payload = np.ascontiguousarray(cube.data, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", cube.bands, cube.pixels))
        fh.write(payload.tobytes())


def load_cube(path) -> SpectralCube:
    """Read a cube file, validating before any size-dependent allocation.

    Raises:
        FormatError: bad magic, bad counts, truncated/oversized payload, or
            non-finite values; messages carry the offending byte offset.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER_LEN:
        raise FormatError(
            "truncated header at byte %d: need %d bytes, file has %d"
            % (len(raw), _HEADER_LEN, len(raw))
        )
    if raw[:4] != MAGIC:
        raise FormatError(
            "bad magic %r at byte 0: expected %r" % (bytes(raw[:4]), MAGIC)
        )
    bands, pixels = struct.unpack_from("<II", raw, 4)
    if bands < 2 or pixels < 2:
        raise FormatError(
            "bad header at byte 4: bands and pixels must be >= 2, got %d x %d"
            % (bands, pixels)
        )
    expected = bands * pixels * 8
    actual = len(raw) - _HEADER_LEN
    if actual != expected:
        raise FormatError(
            "bad payload at byte %d: expected %d bytes (%d x %d x 8), found %d"
            % (_HEADER_LEN, expected, bands, pixels, actual)
        )
    data = np.frombuffer(raw, dtype="<f8", count=bands * pixels, offset=_HEADER_LEN)
    bad = np.flatnonzero(~np.isfinite(data))
    if bad.size:
        raise FormatError(
            "non-finite value at byte %d" % (_HEADER_LEN + int(bad[0]) * 8)
        )
    return SpectralCube(data.reshape(bands, pixels).astype(np.float64))


def save_spectra_csv(endmembers: EndmemberSet, path) -> None:
    """Write a library as `band,e1,...,ep` rows, 17 significant digits."""
    spectra = endmembers.spectra
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("band," + ",".join("e%d" % (j + 1) for j in range(endmembers.count)))
        fh.write("\n")
        for i in range(spectra.shape[0]):
            cells = ",".join("%.17g" % v for v in spectra[i])
            fh.write("%d,%s\n" % (i, cells))


def load_spectra_csv(path) -> EndmemberSet:
    """Read a library CSV written by save_spectra_csv.

    Raises:
        FormatError: bad header, ragged rows, or non-numeric/non-finite
            cells; messages carry the 1-based line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError("line 1: empty file")
    header = rows[0]
    p = len(header) - 1
    if p < 2:
        raise FormatError("line 1: p >= 2 required, header has %d columns" % len(header))
    expected = ["band"] + ["e%d" % (j + 1) for j in range(p)]
    if header != expected:
        raise FormatError(
            "line 1: bad header %s, expected %s" % (",".join(header), ",".join(expected))
        )
    values: List[List[float]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != p + 1:
            raise FormatError(
                "line %d: expected %d cells, found %d" % (lineno, p + 1, len(row))
            )
        parsed = []
        for cell in row:
            try:
                v = float(cell)
            except ValueError:
                raise FormatError("line %d: non-numeric cell '%s'" % (lineno, cell)) from None
            if not np.isfinite(v):
                raise FormatError("line %d: non-finite cell '%s'" % (lineno, cell))
            parsed.append(v)
        values.append(parsed[1:])
    if len(values) < 2:
        raise FormatError("line %d: at least 2 band rows required" % (len(rows) + 1))
    return EndmemberSet(np.array(values, dtype=np.float64))
