from setuptools import Extension, setup

import numpy

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "tsscrub.kernels._ckernels",
                ["src/tsscrub/kernels/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
else:
    # No Cython: the package still works through the pure-numpy kernel backend.
    ext_modules = []

setup(ext_modules=ext_modules)
