"""Build script for the optional C extension holding the training hot loops.

The package works without the extension (a numpy fallback is selected at
import time); set WEBTRIAGE_SKIP_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("WEBTRIAGE_SKIP_EXT"):
    from Cython.Build import cythonize
    import numpy as np

    directives = {
        "language_level": "3",
        "boundscheck": False,
        "wraparound": False,
        "cdivision": True,
        "initializedcheck": False,
    }
    ext_modules = cythonize(
        [
            Extension(
                "webtriage.kernels._ckernels",
                ["src/webtriage/kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives=directives,
    )

setup(ext_modules=ext_modules)
