"""Material dispersion handling: tabulated n/k data and grid interpolation.

A material database holds one dispersion table per design material plus a
substrate table. Token ids are assigned by lexicographic material name so the
id map is reproducible from the file set alone; two special ids (PAD, EOS)
follow the materials.
"""

from __future__ import annotations

import hashlib
import os

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

N_MATERIALS = 17
PAD_ID = 17
EOS_ID = 18
VOCAB_SIZE = 19

DEFAULT_GRID_START_NM = 400.0
DEFAULT_GRID_STOP_NM = 1100.0
DEFAULT_GRID_STEP_NM = 10.0

DEFAULT_SUBSTRATE_INDEX = 1.52 + 0.0j  # crown glass, lossless

MANIFEST_NAME = "materials.toml"

ENV_MATERIALS_DIR = "FILMSTACK_MATERIALS"


class MaterialError(ValueError):
    """Raised for invalid dispersion data or an inconsistent database."""


@dataclass(frozen=True)
class WavelengthGrid:
    """Strictly increasing wavelength sample points in nm."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size == 0:
            raise MaterialError("wavelength grid must be a non-empty 1-D sequence")
        if not np.all(np.diff(pts) > 0):
            raise MaterialError("wavelength grid must be strictly increasing")

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def lo(self) -> float:
        return self.points[0]

    @property
    def hi(self) -> float:
        return self.points[-1]


def default_grid() -> WavelengthGrid:
    """71 points, 400-1100 nm inclusive at 10 nm spacing."""
    pts = np.arange(DEFAULT_GRID_START_NM, DEFAULT_GRID_STOP_NM + 0.5 * DEFAULT_GRID_STEP_NM,
                    DEFAULT_GRID_STEP_NM)
    return WavelengthGrid(tuple(float(p) for p in pts))


@dataclass(frozen=True)
class DispersionTable:
    """Tabulated complex refractive index (n + ik) of one material."""

    material_name: str
    wavelengths_nm: np.ndarray
    n: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelengths_nm, dtype=np.float64)
        n = np.asarray(self.n, dtype=np.float64)
        k = np.asarray(self.k, dtype=np.float64)
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        if wl.ndim != 1 or n.shape != wl.shape or k.shape != wl.shape:
            raise MaterialError(f"{self.material_name}: wavelength/n/k columns must be 1-D and equal length")
        if wl.size < 4:
            raise MaterialError(f"{self.material_name}: need at least 4 samples for cubic splines, got {wl.size}")
        if not np.all(np.diff(wl) > 0):
            raise MaterialError(f"{self.material_name}: non-monotone wavelengths")
        if not np.all(np.isfinite(n)) or not np.all(np.isfinite(k)):
            raise MaterialError(f"{self.material_name}: non-finite n/k sample")
        if np.any(n < 0) or np.any(k < 0):
            raise MaterialError(f"{self.material_name}: n and k samples must be >= 0")

    def covers(self, grid: WavelengthGrid) -> bool:
        return self.wavelengths_nm[0] <= grid.lo and self.wavelengths_nm[-1] >= grid.hi

    def require_coverage(self, grid: WavelengthGrid) -> None:
        if not self.covers(grid):
            raise MaterialError(
                f"{self.material_name}: coverage gap, table spans "
                f"[{self.wavelengths_nm[0]:g}, {self.wavelengths_nm[-1]:g}] nm but the grid needs "
                f"[{grid.lo:g}, {grid.hi:g}] nm")


def index_on_grid(table: DispersionTable, grid: WavelengthGrid) -> np.ndarray:
    """Interpolate a dispersion table onto a wavelength grid.

    Natural cubic splines are fit to n and k independently. Grid points that
    coincide with table knots reproduce the tabulated values exactly, and the
    interpolated k is clamped to >= 0 (absorption cannot be negative).

    Returns a complex128 array of n + ik per grid point.
    """
    table.require_coverage(grid)
    wl = grid.array
    n_spline = CubicSpline(table.wavelengths_nm, table.n, bc_type="natural")
    k_spline = CubicSpline(table.wavelengths_nm, table.k, bc_type="natural")
    n = n_spline(wl)
    k = k_spline(wl)
    # Snap exact knot hits to the tabulated values so knots are bit-for-bit.
    knot_pos = np.searchsorted(table.wavelengths_nm, wl)
    knot_pos = np.clip(knot_pos, 0, table.wavelengths_nm.size - 1)
    exact = table.wavelengths_nm[knot_pos] == wl
    n[exact] = table.n[knot_pos[exact]]
    k[exact] = table.k[knot_pos[exact]]
    k = np.maximum(k, 0.0)
    return n + 1j * k


@dataclass(frozen=True)
class MaterialDb:
    """Immutable set of 17 design materials plus a substrate.

    Token ids 0..16 follow the lexicographic order of material names; the
    reserved ids PAD=17 and EOS=18 complete a 19-entry vocabulary.
    """

    materials: tuple[DispersionTable, ...]
    substrate: DispersionTable
    _grid_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.materials) != N_MATERIALS:
            raise MaterialError(f"need exactly {N_MATERIALS} design materials, got {len(self.materials)}")
        names = [t.material_name for t in self.materials]
        if names != sorted(names):
            ordered = tuple(sorted(self.materials, key=lambda t: t.material_name))
            object.__setattr__(self, "materials", ordered)
            names = [t.material_name for t in ordered]
        if len(set(names)) != N_MATERIALS:
            raise MaterialError("duplicate material names")

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(t.material_name for t in self.materials)

    @cached_property
    def name_to_id(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    @cached_property
    def manifest_hash(self) -> str:
        """Short digest pinning the id assignment and substrate identity."""
        text = "materials:" + ",".join(self.names) + ";substrate:" + self.substrate.material_name
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    @property
    def vocab_size(self) -> int:
        return VOCAB_SIZE

    def id_of(self, name: str) -> int:
        return self.name_to_id[name]

    def name_of(self, material_id: int) -> str:
        return self.names[material_id]

    def index_matrix(self, grid: WavelengthGrid) -> np.ndarray:
        """(17, n_wavelengths) complex index table, memoized per grid."""
        key = ("mat", grid.points)
        cached = self._grid_cache.get(key)
        if cached is None:
            cached = np.stack([index_on_grid(t, grid) for t in self.materials])
            self._grid_cache[key] = cached
        return cached

    def substrate_index(self, grid: WavelengthGrid) -> np.ndarray:
        """(n_wavelengths,) complex substrate index, memoized per grid."""
        key = ("sub", grid.points)
        cached = self._grid_cache.get(key)
        if cached is None:
            cached = index_on_grid(self.substrate, grid)
            self._grid_cache[key] = cached
        return cached


def _read_dispersion_csv(path: Path) -> DispersionTable:
    if not path.is_file():
        raise MaterialError(f"missing dispersion file: {path}")
    text = path.read_text(encoding="utf-8").strip().splitlines()
    if not text:
        raise MaterialError(f"{path}: empty dispersion file")
    header = [c.strip() for c in text[0].split(",")]
    if header != ["wavelength_nm", "n", "k"]:
        raise MaterialError(f"{path}: expected header 'wavelength_nm,n,k', got {text[0]!r}")
    rows = []
    for i, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise MaterialError(f"{path}:{i}: expected 3 columns")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise MaterialError(f"{path}:{i}: non-numeric value") from exc
    data = np.asarray(rows, dtype=np.float64)
    return DispersionTable(path.stem, data[:, 0], data[:, 1], data[:, 2])


def _constant_table(name: str, index: complex, lo: float = 380.0, hi: float = 1120.0) -> DispersionTable:
    wl = np.array([lo, lo + (hi - lo) / 3, lo + 2 * (hi - lo) / 3, hi])
    n = np.full(4, float(np.real(index)))
    k = np.full(4, float(np.imag(index)))
    return DispersionTable(name, wl, n, k)


def load_material_db(directory: str | os.PathLike) -> MaterialDb:
    """Load a material database from a directory of dispersion CSVs.

    The directory must contain a ``materials.toml`` manifest naming the
    material files and (optionally) a substrate file. Validation is atomic:
    any bad file fails the whole load. When no substrate file is named, a
    constant lossless glass substrate (n = 1.52) is used.
    """
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        raise MaterialError(f"missing manifest: {manifest_path}")
    manifest = tomllib.loads(manifest_path.read_text(encoding="utf-8"))
    names = manifest.get("materials")
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise MaterialError(f"{manifest_path}: 'materials' must be a list of names")
    if len(names) < N_MATERIALS:
        raise MaterialError(f"fewer than {N_MATERIALS} materials listed in manifest ({len(names)})")
    if len(names) > N_MATERIALS:
        raise MaterialError(f"more than {N_MATERIALS} materials listed in manifest ({len(names)})")

    grid = default_grid()
    tables = []
    for name in names:
        table = _read_dispersion_csv(directory / f"{name}.csv")
        table.require_coverage(grid)
        tables.append(table)

    substrate_file = manifest.get("substrate")
    if substrate_file is None:
        substrate = _constant_table("glass", DEFAULT_SUBSTRATE_INDEX)
    else:
        substrate = _read_dispersion_csv(directory / substrate_file)
        substrate.require_coverage(grid)
    return MaterialDb(tuple(sorted(tables, key=lambda t: t.material_name)), substrate)


def constant_index_db(indices: Sequence[complex],
                      substrate_index: complex = DEFAULT_SUBSTRATE_INDEX) -> MaterialDb:
    """Build an in-memory database of constant-index materials.

    Intended for tests and benchmarks where closed-form oracles need exactly
    known, dispersion-free indices. ``indices`` must have 17 entries; names
    C00..C16 keep the id order equal to the input order.
    """
    if len(indices) != N_MATERIALS:
        raise MaterialError(f"need {N_MATERIALS} indices, got {len(indices)}")
    tables = tuple(_constant_table(f"C{i:02d}", complex(idx)) for i, idx in enumerate(indices))
    return MaterialDb(tables, _constant_table("glass", complex(substrate_index)))


def builtin_db_path() -> Path:
    """Directory of the dispersion tables shipped with the package."""
    return Path(__file__).parent / "data" / "materials"


def resolve_db_path(path: str | os.PathLike | None = None) -> Path:
    """Pick the material directory: explicit arg, env var, or builtin data."""
    if path is not None:
        return Path(path)
    env = os.environ.get(ENV_MATERIALS_DIR)
    if env:
        return Path(env)
    return builtin_db_path()


@lru_cache(maxsize=4)
def _load_cached(directory: str) -> MaterialDb:
    return load_material_db(directory)


def load_default_db(path: str | os.PathLike | None = None) -> MaterialDb:
    """Load (and memoize) the builtin or overridden material database."""
    return _load_cached(str(resolve_db_path(path)))
