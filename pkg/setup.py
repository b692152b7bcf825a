"""Build script: compiles the optional Cython kernel core.

The package installs and runs without the extension (a pure numpy backend is
selected at import time); the extension accelerates the ensemble propagation
and hydrodynamic stepping hot loops.  -ffp-contract=off keeps the C arithmetic
bit-compatible with the elementwise numpy fallback where the operation
sequences match.
"""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "entrofield._kernels._core",
        ["src/entrofield/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)
except Exception as exc:  # pragma: no cover - build environment fallback
    sys.stderr.write(f"entrofield: skipping compiled kernels ({exc}); "
                     "pure-python backend will be used\n")
    ext_modules = []

setup(ext_modules=ext_modules)
