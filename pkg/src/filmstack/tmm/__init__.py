"""Forward optical model: multilayer reflectance/transmittance via TMM.

The coating is treated coherently (characteristic 2x2 matrices at normal
incidence, s-polarization) on top of an incoherently treated thick glass
substrate with a bare back face. Spectra are length-2W vectors: W reflectance
values followed by W transmittance values on the wavelength grid.

A compiled kernel is preferred at import time; the pure-numpy kernel is the
fallback. Set ``FILMSTACK_TMM_BACKEND=pure`` (or ``compiled``) to force one.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..materials import MaterialDb, N_MATERIALS, WavelengthGrid, default_grid
from . import _pure

_requested = os.environ.get("FILMSTACK_TMM_BACKEND", "").strip().lower()
if _requested not in ("", "pure", "compiled"):
    raise ImportError(f"FILMSTACK_TMM_BACKEND must be 'pure' or 'compiled', got {_requested!r}")

if _requested == "pure":
    _kernel = _pure
else:
    try:
        from . import _core as _kernel
    except ImportError:
        if _requested == "compiled":
            raise
        _kernel = _pure

BACKEND = _kernel.BACKEND_NAME

MAX_LAYERS = 64
MAX_MATERIAL_ID = N_MATERIALS - 1
DEFAULT_SUBSTRATE_UM = 500.0


class SimulationError(ValueError):
    """Raised for invalid designs or failed material lookups."""


@dataclass(frozen=True)
class Design:
    """A multilayer stack: per-layer material ids and thicknesses in nm.

    Layer 0 is the outermost (air-side) layer. Designs may be empty (bare
    substrate). The simulator accepts up to 64 layers so decoders can be
    stress-tested beyond the 1-20 layers seen in training data.
    """

    materials: tuple[int, ...]
    thicknesses: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "materials", tuple(int(m) for m in self.materials))
        object.__setattr__(self, "thicknesses", tuple(float(t) for t in self.thicknesses))

    @property
    def n_layers(self) -> int:
        return len(self.materials)

    def validate(self) -> None:
        if len(self.materials) != len(self.thicknesses):
            raise SimulationError("materials and thicknesses must have equal length")
        if self.n_layers > MAX_LAYERS:
            raise SimulationError(f"too many layers ({self.n_layers} > {MAX_LAYERS})")
        for m in self.materials:
            if not 0 <= m <= MAX_MATERIAL_ID:
                raise SimulationError(f"material id {m} out of range 0..{MAX_MATERIAL_ID}")
        for t in self.thicknesses:
            if not (t > 0.0 and np.isfinite(t)):
                raise SimulationError(f"non-positive or non-finite thickness {t}")


@dataclass(frozen=True)
class StackCoefficients:
    """Coherent coating coefficients per wavelength (intensity, in [0, 1])."""

    r_front: np.ndarray
    t_front: np.ndarray
    r_back: np.ndarray
    t_back: np.ndarray


def spectrum_size(grid: WavelengthGrid) -> int:
    return 2 * len(grid)


def split_spectrum(spectrum: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a spectrum vector into its (reflectance, transmittance) halves."""
    w = spectrum.shape[-1] // 2
    return spectrum[..., :w], spectrum[..., w:]


def layer_matrix(n: complex, d: float, wavelength: float) -> np.ndarray:
    """Characteristic matrix of one homogeneous layer at normal incidence.

    Phase thickness delta = 2*pi*n*d/wavelength with the n + ik convention
    (k >= 0 absorbs). The matrix is unimodular for any complex n.
    """
    if d < 0:
        raise SimulationError("negative thickness")
    if wavelength <= 0:
        raise SimulationError("non-positive wavelength")
    n = complex(n)
    delta = 2.0 * np.pi * n * d / wavelength
    c, s = np.cos(delta), np.sin(delta)
    return np.array([[c, 1j * s / n], [1j * n * s, c]], dtype=np.complex128)


def _design_arrays(design: Design) -> tuple[np.ndarray, np.ndarray]:
    design.validate()
    mats = np.asarray(design.materials, dtype=np.int64)
    d = np.asarray(design.thicknesses, dtype=np.float64)
    return mats, d


def _grid_tables(db: MaterialDb, grid: WavelengthGrid):
    nk = np.ascontiguousarray(db.index_matrix(grid))
    nsub = np.ascontiguousarray(db.substrate_index(grid))
    return nk, nsub, grid.array


def coherent_stack(design: Design, db: MaterialDb,
                   grid: WavelengthGrid | None = None) -> StackCoefficients:
    """Front- and back-incidence intensity coefficients of the coating alone."""
    grid = grid or default_grid()
    mats, d = _design_arrays(design)
    nk, nsub, wl = _grid_tables(db, grid)
    rf, tf, rb, tb = _kernel.stack_coeffs(mats, d, nk, nsub, wl)
    return StackCoefficients(rf, tf, rb, tb)


def simulate(design: Design, db: MaterialDb, grid: WavelengthGrid | None = None,
             substrate_thickness_um: float = DEFAULT_SUBSTRATE_UM) -> np.ndarray:
    """Simulate the full spectrum of a design on the incoherent substrate.

    Returns a float64 vector of length 2W: reflectance block then
    transmittance block, aligned to the grid.
    """
    grid = grid or default_grid()
    mats, d = _design_arrays(design)
    nk, nsub, wl = _grid_tables(db, grid)
    r, t = _kernel.simulate_rt(mats, d, nk, nsub, wl, substrate_thickness_um * 1000.0)
    return np.concatenate([r, t])


@dataclass(frozen=True)
class BatchFailure:
    index: int
    message: str


@dataclass(frozen=True)
class BatchResult:
    """Order-preserving batch simulation output; failed items are None."""

    spectra: list
    failures: tuple[BatchFailure, ...]


def simulate_batch(designs, db: MaterialDb, grid: WavelengthGrid | None = None,
                   substrate_thickness_um: float = DEFAULT_SUBSTRATE_UM) -> BatchResult:
    """Simulate many designs; one bad design does not abort the batch."""
    grid = grid or default_grid()
    nk, nsub, wl = _grid_tables(db, grid)
    sub_nm = substrate_thickness_um * 1000.0

    failures = []
    valid_idx = []
    mats_parts, d_parts, lengths = [], [], []
    for i, design in enumerate(designs):
        try:
            mats, d = _design_arrays(design)
        except SimulationError as exc:
            failures.append(BatchFailure(i, str(exc)))
            continue
        valid_idx.append(i)
        mats_parts.append(mats)
        d_parts.append(d)
        lengths.append(mats.shape[0])

    spectra = [None] * (len(valid_idx) + len(failures))
    if valid_idx:
        mats_flat = np.concatenate(mats_parts) if mats_parts else np.empty(0, np.int64)
        d_flat = np.concatenate(d_parts) if d_parts else np.empty(0, np.float64)
        offsets = np.zeros(len(valid_idx) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        r, t = _kernel.simulate_rt_batch(mats_flat, d_flat, offsets, nk, nsub, wl, sub_nm)
        for row, i in enumerate(valid_idx):
            spectra[i] = np.concatenate([r[row], t[row]])
    return BatchResult(spectra, tuple(failures))


def thickness_jacobian(design: Design, db: MaterialDb, grid: WavelengthGrid | None = None,
                       substrate_thickness_um: float = DEFAULT_SUBSTRATE_UM) -> np.ndarray:
    """Exact d(spectrum)/d(thickness) matrix, shape (2W, n_layers).

    Analytic chain rule through the layer-matrix products; always computed by
    the numpy path (it is not on the sampling hot loop).
    """
    grid = grid or default_grid()
    mats, d = _design_arrays(design)
    nk, nsub, wl = _grid_tables(db, grid)
    dr, dt = _pure.thickness_jacobian_rt(mats, d, nk, nsub, wl, substrate_thickness_um * 1000.0)
    return np.concatenate([dr, dt], axis=0)
