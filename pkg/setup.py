"""Build script: compiles the optional raster/shading kernel extension.

The compiled module is a pure accelerator; if the toolchain is missing the
package still installs and falls back to the NumPy kernels at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("RADVIS_NO_EXTENSION") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "radvis._kernels",
                    ["src/radvis/_kernels.pyx"],
                    # -ffp-contract=off keeps double arithmetic IEEE-exact
                    # expression by expression, so the compiled shader chain
                    # stays bit-compatible with the scalar reference path.
                    extra_compile_args=["-O3", "-fopenmp", "-ffp-contract=off"],
                    extra_link_args=["-fopenmp"],
                    include_dirs=[numpy.get_include()],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
