"""Build script: compiles the optional Gibbs-sampling extension when Cython
and a C compiler are available. The package works without it (a pure-Python
kernel is selected at import time), so any build failure here is non-fatal:
set FUSETEXT_NO_EXT=1 to skip the extension entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FUSETEXT_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "fusetext._gibbs",
                    ["src/fusetext/_gibbs.pyx"],
                    include_dirs=[numpy.get_include()],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
