"""Build the optional compiled kernels.

The package imports ``mzcalc._ckernels`` when it is available and falls
back to ``mzcalc._pykernels`` otherwise, so a failed or skipped compile
still yields a working install.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # no Cython: pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "mzcalc._ckernels",
                ["src/mzcalc/_ckernels.pyx"],
                extra_compile_args=["-O3"],
                libraries=["m"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
