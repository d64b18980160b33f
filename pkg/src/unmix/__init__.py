"""Hyperspectral endmember extraction under the linear mixing model.

Extractors (PPI, N-FINDR, VCA, and the GAEE genetic-algorithm family with
its in-vitro-fertilisation module), spectral metrics (SAM, SID), a
synthetic scene generator, and a deterministic Monte Carlo benchmark
harness with CSV/JSON reports.
"""

from .core import (
    AbundanceMap,
    Chromosome,
    EndmemberSet,
    SpectralCube,
    match_endmembers,
    rms,
    sam,
    sid,
)
from .evolution import (
    GaConfig,
    Population,
    evolve,
    init_population,
    ivfm_step,
    mutate,
    tournament_select,
    two_point_crossover,
)
from .extractors import (
    ALGORITHM_NAMES,
    ExtractionResult,
    ExtractorSpec,
    extract,
    extract_detailed,
    gaee,
    label_for,
    nfindr,
    ppi,
    vca,
)
from .geometry import (
    ReducedCube,
    chromosome_volumes,
    determinant,
    pca_reduce,
    simplex_volume,
)
from .harness import (
    BenchReport,
    BenchSpec,
    gain_percent,
    run_bench,
    welch_t,
    write_report_csvs,
    write_report_json,
)
from .io import (
    FormatError,
    load_cube,
    load_spectra_csv,
    save_cube,
    save_spectra_csv,
)
from .seeds import mix64
from .synth import (
    NOISELESS,
    SceneSpec,
    add_noise,
    generate_endmembers,
    generate_scene,
    parse_snr,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHM_NAMES",
    "AbundanceMap",
    "BenchReport",
    "BenchSpec",
    "Chromosome",
    "EndmemberSet",
    "ExtractionResult",
    "ExtractorSpec",
    "FormatError",
    "GaConfig",
    "NOISELESS",
    "Population",
    "ReducedCube",
    "SceneSpec",
    "SpectralCube",
    "add_noise",
    "chromosome_volumes",
    "determinant",
    "evolve",
    "extract",
    "extract_detailed",
    "gaee",
    "gain_percent",
    "generate_endmembers",
    "generate_scene",
    "init_population",
    "ivfm_step",
    "label_for",
    "load_cube",
    "load_spectra_csv",
    "match_endmembers",
    "mix64",
    "mutate",
    "nfindr",
    "parse_snr",
    "pca_reduce",
    "ppi",
    "rms",
    "run_bench",
    "sam",
    "save_cube",
    "save_spectra_csv",
    "sid",
    "simplex_volume",
    "synthesize",
    "tournament_select",
    "two_point_crossover",
    "vca",
    "welch_t",
    "write_report_csvs",
    "write_report_json",
]
