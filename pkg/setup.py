"""Build script: compiles the chain-simulation kernels when Cython and a C
compiler are available. If the extension cannot be built the package still
installs and falls back to the pure-Python kernels at import time."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        "src/mixlab/_kernels/_core.pyx",
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
    for ext in ext_modules:
        ext.include_dirs.append(np.get_include())
        ext.extra_compile_args.append("-O3")
except ImportError:
    pass

setup(ext_modules=ext_modules)
