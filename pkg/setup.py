"""Build script for the compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so failure to cythonize is tolerated rather than fatal.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("srw._kernels", ["src/srw/_kernels.pyx"])],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
