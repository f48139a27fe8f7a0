"""Build script: compiles the optional Monte-Carlo sampling kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any build failure here downgrades to a
pure-Python install instead of aborting.
"""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "complimits._kernels._cymc",
                ["src/complimits/_kernels/_cymc.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # noqa: BLE001 - degrade to pure python on any build issue
    sys.stderr.write(f"complimits: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
