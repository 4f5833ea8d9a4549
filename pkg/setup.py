"""Build the optional Cython kernels; the package works without them."""
import os

from setuptools import setup


def _extensions():
    if os.environ.get("FEDMECH_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "fedmech._ckernels",
        ["src/fedmech/_ckernels.pyx"],
        # no fast-math / contraction: the fallback must round identically
        extra_compile_args=["-O2", "-ffp-contract=off", "-fno-fast-math"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
