"""Build script: compiles the optional Cython kernel extension.

The extension accelerates the hot inner loops (median/phantom rule
evaluation inside search sweeps).  If Cython or a C compiler is missing
the install still succeeds and the package falls back to the pure-numpy
kernels at import time.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build-time only
    cythonize = None


def extensions():
    if cythonize is None:
        return []
    ext = Extension(
        "tokenvote._kernels._speedups",
        ["src/tokenvote/_kernels/_speedups.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
