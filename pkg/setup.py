"""Build script: compiles the optional C extension for the hot kernels.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the build therefore never hard-fails on a missing
compiler or Cython.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "photonmesh._kernels._core",
                ["src/photonmesh/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
