# python setup.py build_ext --inplace
#
# The compiled kernel is optional: without Cython (or a C compiler) the
# package installs as pure Python and closedtraj.integrator falls back to
# closedtraj.integrator._kernels_py at import time.
import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    USE_CYTHON = os.environ.get("CLOSEDTRAJ_NO_EXT") is None
except ImportError:
    USE_CYTHON = False

ext_modules = []
if USE_CYTHON:
    ext_modules = cythonize(
        [
            Extension(
                "closedtraj.integrator._kernels",
                ["src/closedtraj/integrator/_kernels.pyx"],
                extra_compile_args=["-O3"],
                libraries=["m"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
