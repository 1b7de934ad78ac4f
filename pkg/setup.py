"""Build the optional Cython kernels.

The package imports fine without them; ``tsdr._backend`` falls back to the
numpy implementations in ``tsdr._fallback``.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("TSDR_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "tsdr._kernels",
                    ["src/tsdr/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
