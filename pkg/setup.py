"""Builds the optional native consensus kernel.

The extension is marked optional: on a machine without a C toolchain the
build degrades to the pure-numpy kernel twin and the package still works.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "rockloc._consensus",
                ["src/rockloc/_consensus.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -ffp-contract=off: no FMA contraction, so the compiled kernel
                # matches the numpy twin bit for bit.
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
