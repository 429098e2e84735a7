"""filmstack: multilayer thin-film simulation and inverse design toolkit."""

__version__ = "0.1.0"

from .materials import (
    EOS_ID,
    MaterialDb,
    N_MATERIALS,
    PAD_ID,
    VOCAB_SIZE,
    WavelengthGrid,
    constant_index_db,
    default_grid,
    load_default_db,
    load_material_db,
)
from .tmm import BACKEND as TMM_BACKEND
from .tmm import Design, simulate, simulate_batch

__all__ = [
    "Design",
    "EOS_ID",
    "MaterialDb",
    "N_MATERIALS",
    "PAD_ID",
    "TMM_BACKEND",
    "VOCAB_SIZE",
    "WavelengthGrid",
    "constant_index_db",
    "default_grid",
    "load_default_db",
    "load_material_db",
    "simulate",
    "simulate_batch",
    "__version__",
]
