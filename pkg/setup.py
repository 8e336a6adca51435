"""Build script for the optional compiled query kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes the entropy sweep faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "gapfill._ckernel",
                ["src/gapfill/_ckernel.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=extensions)
