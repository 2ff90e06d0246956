"""Build script for the compiled kernels.

The extension is optional: if Cython or a C compiler is missing the package
installs without it and falls back to the NumPy kernels at import time.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SPARSE_SMOOTH_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("sparse_smooth._kernels", ["src/sparse_smooth/_kernels.pyx"],
                       include_dirs=[numpy.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                       extra_compile_args=["-O3"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
