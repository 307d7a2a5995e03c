"""Build script: compiles the optional accelerator extension when Cython and a
C compiler are available; the package falls back to the pure NumPy kernels
otherwise, so a failed extension build is not fatal."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "gridveil._kernels._core",
                ["src/gridveil/_kernels/_core.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
