"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension: ``multiphon.kernels``
falls back to vectorised numpy implementations when the compiled module is
absent (see ``benchmarks/bench_kernels.py`` for the speed comparison).
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    pass
else:
    ext_modules = cythonize(
        [
            Extension(
                "multiphon.kernels._native",
                ["src/multiphon/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
