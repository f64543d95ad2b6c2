import os

from setuptools import Extension, setup

# The compiled LSAP kernel is optional: without Cython or a compiler the
# package falls back to the numpy implementation at import time.
ext_modules = []
if os.environ.get("GEDKIT_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        extensions = [
            Extension(
                "gedkit.lsap._lsap",
                ["src/gedkit/lsap/_lsap.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ]
        ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
