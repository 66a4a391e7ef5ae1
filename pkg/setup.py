"""Build the optional Cython Crank-Nicolson kernel.

If Cython or a C compiler is missing the package still installs and the
LAPACK fallback is used at runtime.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "endscat._kernels._cn_cy",
                ["src/endscat/_kernels/_cn_cy.pyx"],
                extra_compile_args=["-O3", "-fcx-limited-range"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
