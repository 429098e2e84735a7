"""Training-data sampling and line-oriented dataset serialization.

Randomness is counter-based: every sample draws from its own Philox4x64
stream keyed by (seed, sample_index), so a dataset is reproducible regardless
of worker layout, and retries after a simulation failure stay inside the
failing sample's stream. Split seeds are derived by XOR with fixed tags so
train/dev/validation draws never collide.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .materials import MaterialDb, N_MATERIALS, WavelengthGrid, default_grid
from .tmm import DEFAULT_SUBSTRATE_UM, Design, simulate_batch

FORMAT_MAGIC = "#filmds"
FORMAT_VERSION = 1

# fixed split tags (64-bit), XORed into the seed
SPLIT_TAGS = {
    "train": 0x0000000000000000,
    "dev": 0x9E3779B97F4A7C15,
    "val": 0xC2B2AE3D27D4EB4F,
}

_MASK64 = (1 << 64) - 1


class DatasetFormatError(ValueError):
    """Raised for malformed dataset files or records."""


def philox_rng(*key: int) -> np.random.Generator:
    """Philox4x64 generator keyed by up to two 64-bit integers."""
    k = [key[i] & _MASK64 if i < len(key) else 0 for i in range(2)]
    return np.random.Generator(np.random.Philox(key=np.array(k, dtype=np.uint64)))


def split_seed(seed: int, split: str) -> int:
    """Derive the seed for a named split (disjoint stream namespaces)."""
    if split not in SPLIT_TAGS:
        raise ValueError(f"unknown split {split!r}; choose from {sorted(SPLIT_TAGS)}")
    return (seed ^ SPLIT_TAGS[split]) & _MASK64


@dataclass(frozen=True)
class SamplerConfig:
    """Design sampling distribution: P(L) proportional to L, uniform layers."""

    min_layers: int = 1
    max_layers: int = 20
    thickness_min: float = 10.0
    thickness_max: float = 500.0
    thickness_step: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.min_layers <= self.max_layers:
            raise ValueError("need 1 <= min_layers <= max_layers")
        if self.thickness_min <= 0:
            raise ValueError("thickness_min must be > 0")
        n_steps = (self.thickness_max - self.thickness_min) / self.thickness_step
        if abs(n_steps - round(n_steps)) > 1e-9:
            raise ValueError("thickness_step must divide thickness_max - thickness_min")

    @property
    def n_thickness_values(self) -> int:
        return int(round((self.thickness_max - self.thickness_min) / self.thickness_step)) + 1


@dataclass(frozen=True)
class Sample:
    design: Design
    spectrum: np.ndarray

    def __eq__(self, other):
        return (isinstance(other, Sample) and self.design == other.design
                and np.array_equal(self.spectrum, other.spectrum))


def sample_design(rng: np.random.Generator, config: SamplerConfig) -> Design:
    """Draw one design: L ~ P(L) propto L, then i.i.d. materials/thicknesses.

    All draws reduce to ``rng.random()`` uniforms so the mapping from raw
    Philox output to designs is fixed arithmetic, stable across platforms.
    """
    lo, hi = config.min_layers, config.max_layers
    weights = np.arange(lo, hi + 1, dtype=np.float64)
    cdf = np.cumsum(weights / weights.sum())
    u = rng.random()
    n_layers = lo + int(np.searchsorted(cdf, u, side="right"))
    n_layers = min(n_layers, hi)  # guard u == 1.0 edge (cannot occur, but cheap)

    mats = np.floor(rng.random(n_layers) * N_MATERIALS).astype(np.int64)
    steps = np.floor(rng.random(n_layers) * config.n_thickness_values)
    thicknesses = config.thickness_min + steps * config.thickness_step
    return Design(tuple(int(m) for m in mats), tuple(float(t) for t in thicknesses))


def keyed_design(seed: int, index: int, config: SamplerConfig) -> Design:
    """Design number ``index`` of the stream defined by ``seed``."""
    return sample_design(philox_rng(seed, index), config)


@dataclass(frozen=True)
class DatasetHeader:
    version: int
    grid: WavelengthGrid
    db_hash: str
    substrate_um: float


@dataclass(frozen=True)
class GenSummary:
    count: int
    failures: int


def _header_line(grid: WavelengthGrid, db: MaterialDb, substrate_um: float) -> str:
    pts = ",".join(repr(float(p)) for p in grid.points)
    return (f"{FORMAT_MAGIC} v{FORMAT_VERSION} grid={pts} db={db.manifest_hash} "
            f"sub_um={substrate_um!r}")


def _parse_header(line: str, path) -> DatasetHeader:
    parts = line.strip().split(" ")
    if not parts or parts[0] != FORMAT_MAGIC:
        raise DatasetFormatError(f"{path}: not a filmstack dataset (bad magic)")
    if len(parts) < 2 or not parts[1].startswith("v"):
        raise DatasetFormatError(f"{path}: missing version field")
    version = int(parts[1][1:])
    if version != FORMAT_VERSION:
        raise DatasetFormatError(f"{path}: version mismatch (file v{version}, reader v{FORMAT_VERSION})")
    fields = dict(p.split("=", 1) for p in parts[2:])
    grid = WavelengthGrid(tuple(float(x) for x in fields["grid"].split(",")))
    return DatasetHeader(version, grid, fields["db"], float(fields["sub_um"]))


def format_record(sample: Sample) -> str:
    mats = ",".join(str(m) for m in sample.design.materials)
    thk = ",".join(repr(t) for t in sample.design.thicknesses)
    spec = ",".join(repr(float(v)) for v in sample.spectrum)
    return f"{mats}|{thk}|{spec}"


def parse_record(line: str, n_spectrum: int, record_index: int) -> Sample:
    parts = line.rstrip("\n").split("|")
    if len(parts) != 3:
        raise DatasetFormatError(f"malformed record {record_index}: expected 3 '|'-separated fields")
    mats_s, thk_s, spec_s = parts
    try:
        mats = tuple(int(m) for m in mats_s.split(",")) if mats_s else ()
        thk = tuple(float(t) for t in thk_s.split(",")) if thk_s else ()
        spec = np.array([float(v) for v in spec_s.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise DatasetFormatError(f"malformed record {record_index}: {exc}") from exc
    if len(mats) != len(thk):
        raise DatasetFormatError(f"malformed record {record_index}: "
                                 f"{len(mats)} materials vs {len(thk)} thicknesses")
    if spec.shape[0] != n_spectrum:
        raise DatasetFormatError(f"malformed record {record_index}: "
                                 f"{spec.shape[0]} spectrum values, expected {n_spectrum}")
    design = Design(mats, thk)
    design.validate()
    return Sample(design, spec)


_GEN_CHUNK = 4096
_MAX_RETRIES = 100


def generate_dataset(n: int, config: SamplerConfig, db: MaterialDb,
                     grid: WavelengthGrid | None = None,
                     output_path: str | os.PathLike | None = None,
                     substrate_um: float = DEFAULT_SUBSTRATE_UM) -> GenSummary:
    """Sample ``n`` designs, simulate them, and write the dataset file.

    Deterministic for a given config seed: sample i always comes from the
    Philox stream keyed (seed, i). A failed simulation is recorded and the
    sample is redrawn from later draws of the same stream, so failures do not
    shift any other sample.
    """
    grid = grid or default_grid()
    if output_path is None:
        raise ValueError("output_path is required")
    output_path = Path(output_path)
    failures = 0
    tmp_path = output_path.with_name(output_path.name + ".tmp")
    with open(tmp_path, "w", encoding="utf-8") as fh:
        fh.write(_header_line(grid, db, substrate_um) + "\n")
        for start in range(0, n, _GEN_CHUNK):
            count = min(_GEN_CHUNK, n - start)
            rngs = [philox_rng(config.seed, start + i) for i in range(count)]
            designs = [sample_design(rng, config) for rng in rngs]
            result = simulate_batch(designs, db, grid, substrate_um)
            spectra = list(result.spectra)
            retry_idx = [f.index for f in result.failures]
            for idx in retry_idx:
                for _ in range(_MAX_RETRIES):
                    failures += 1
                    redraw = sample_design(rngs[idx], config)
                    retry = simulate_batch([redraw], db, grid, substrate_um)
                    if not retry.failures:
                        designs[idx] = redraw
                        spectra[idx] = retry.spectra[0]
                        break
                else:
                    raise DatasetFormatError(f"sample {start + idx}: still failing after "
                                             f"{_MAX_RETRIES} redraws")
            for design, spec in zip(designs, spectra):
                fh.write(format_record(Sample(design, spec)) + "\n")
    os.replace(tmp_path, output_path)
    return GenSummary(count=n, failures=failures)


def read_header(path: str | os.PathLike) -> DatasetHeader:
    with open(path, "r", encoding="utf-8") as fh:
        return _parse_header(fh.readline(), path)


def read_dataset(path: str | os.PathLike,
                 expected_db: MaterialDb | None = None) -> Iterator[Sample]:
    """Stream samples from a dataset file.

    Raises DatasetFormatError at the first malformed record (records before it
    have already been yielded). If ``expected_db`` is given, its manifest hash
    must match the file header.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = _parse_header(fh.readline(), path)
        if expected_db is not None and header.db_hash != expected_db.manifest_hash:
            raise DatasetFormatError(
                f"{path}: material manifest hash mismatch "
                f"(file {header.db_hash}, db {expected_db.manifest_hash})")
        n_spectrum = 2 * len(header.grid)
        for i, line in enumerate(fh):
            if not line.strip():
                continue
            yield parse_record(line, n_spectrum, i)


def load_samples(path: str | os.PathLike,
                 expected_db: MaterialDb | None = None) -> tuple[DatasetHeader, list[Sample]]:
    header = read_header(path)
    return header, list(read_dataset(path, expected_db))
