import os

from setuptools import setup

# The compiled kernel is an optional accelerator: if Cython or a compiler is
# missing the package falls back to the pure-Python event loop at import time.
ext_modules = []
if os.environ.get("PRIOPRICING_PURE_PYTHON") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "priopricing._kernel_c",
                    ["src/priopricing/_kernel_c.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
