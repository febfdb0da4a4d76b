"""Builds the optional compiled resampling kernel.

The package works without it: ``tvcp._kernels`` falls back to a pure
numpy implementation when the extension is missing.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "tvcp._kernels._bootstrap_cy",
    sources=["src/tvcp/_kernels/_bootstrap_cy.pyx"],
    include_dirs=[numpy.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)
ext.optional = True

setup(ext_modules=cythonize([ext], language_level="3"))
