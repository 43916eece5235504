"""Build the optional compiled kernel core.

The package works without the extension (a pure-numpy fallback is selected
at import time), so a failed compile only costs speed.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "gaitsense._kernels",
                sources=["src/gaitsense/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
