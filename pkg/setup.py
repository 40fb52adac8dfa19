import os

from setuptools import Extension, setup

# The compiled kernels are optional: herdwatch._kernels falls back to the
# pure-Python implementations when the extension is absent.
PYX = "src/herdwatch/_kernels/_fastcore.pyx"

ext_modules = []
if os.environ.get("HERDWATCH_NO_EXT") != "1" and os.path.exists(PYX):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "herdwatch._kernels._fastcore",
                    [PYX],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
