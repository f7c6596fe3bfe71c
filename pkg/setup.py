"""Build script for the optional Cython kernels.

Without Cython or a C compiler the package still installs and runs on the
pure-Python fallback.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("LIFEINDEX_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "lifeindex._kernels",
                    ["src/lifeindex/_kernels.pyx"],
                    # no contraction into FMA: keeps results bit-identical to the fallback
                    extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
