import os

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # build the pure-Python package only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "efdphantoms._ckernels",
                ["src/efdphantoms/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

if os.environ.get("EFDPHANTOMS_NO_EXT"):
    ext_modules = []

setup(ext_modules=ext_modules)
