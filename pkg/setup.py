"""Build script for the optional compiled kernels.

The package is fully functional without the extension; ``nvtrap.backend``
falls back to the pure-Python kernels when the compiled module is absent.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "nvtrap._kernels_cy",
                ["src/nvtrap/_kernels_cy.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython available: install with the pure-Python kernels only.
    pass

setup(ext_modules=ext_modules)
