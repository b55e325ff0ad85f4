from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("augburgers._kernels", ["src/augburgers/_kernels.pyx"])],
        language_level="3",
    )
except ImportError:
    # No Cython at build time: install pure-Python only, the package falls
    # back to the NumPy kernels at import.
    ext_modules = []

setup(ext_modules=ext_modules)
