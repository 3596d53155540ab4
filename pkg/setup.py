import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qkdrate.kernels._pairing_cy",
                ["src/qkdrate/kernels/_pairing_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback in qkdrate.kernels still works without the extension.
    ext_modules = []

setup(ext_modules=ext_modules)
