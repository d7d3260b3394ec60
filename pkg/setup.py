import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "permsolve._sweep_cy",
                ["src/permsolve/_sweep_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython at build time: install pure-python only, the package falls
    # back to the numpy sweep kernel at import.
    ext_modules = []

setup(ext_modules=ext_modules)
