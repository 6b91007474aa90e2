"""Build script for the optional compiled search kernels.

If Cython (or a C compiler) is unavailable the install still succeeds and
the package falls back to the pure-Python kernels at import time.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "vapep._kernels._core",
                ["src/vapep/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
