"""Build script wiring the optional compiled corruption kernels.

The package is fully functional without the extension: perturbench.corrupt
falls back to the NumPy reference kernels when the compiled module is
missing.  Floating-point contraction is disabled so the compiled kernels
round exactly like the reference implementation.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "perturbench.corrupt._kernels",
        ["src/perturbench/corrupt/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
