"""Build script for the optional compiled kernels.

The Cython extension is skipped when Cython is unavailable or when
``QFA_LAB_NO_EXT`` is set; the package then runs on the numpy fallback.
"""
import os

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("QFA_LAB_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "qfa_lab._ckernels",
        sources=["src/qfa_lab/_ckernels.pyx"],
        extra_compile_args=["-O3"],
        libraries=["m"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
