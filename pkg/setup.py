"""Build script: compiles the native convolution kernel when a toolchain is
available.  The package works without it (a numpy fallback is selected at
import time), so the extension is marked optional."""

from setuptools import Extension, setup


def get_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []

    ext = Extension(
        "carosegd.kernels._conv",
        ["src/carosegd/kernels/_conv.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    return cythonize(
        [ext],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=get_extensions())
