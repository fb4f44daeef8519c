"""Build script. The compiled kernel extension is optional: if Cython or a C
toolchain is unavailable the package installs anyway and selects the numpy
fallback at import time."""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/latstep/_kernels/_core.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
except Exception as exc:  # noqa: BLE001 - any build-chain gap means fallback-only install
    import sys

    print(f"latstep: compiled kernels skipped ({exc}); numpy fallback will be used",
          file=sys.stderr)

setup(ext_modules=ext_modules)
