"""Build hooks for the optional compiled TMM kernel.

The package works without the extension (a pure-numpy kernel is selected at
import time), so a missing compiler or Cython only costs throughput.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "filmstack.tmm._core",
                ["src/filmstack/tmm/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    print("filmstack: Cython/numpy unavailable at build time; "
          "building without the compiled TMM kernel")

setup(ext_modules=ext_modules)
