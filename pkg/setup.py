"""Build script for the optional compiled kernel core.

The extension is marked optional: if it cannot be built the package
installs anyway and falls back to the NumPy kernel implementation.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    ext = Extension(
        "drr._kernel_core",
        sources=["src/drr/_kernel_core.pyx"],
        extra_compile_args=["-O3", "-fopenmp"],
        extra_link_args=["-fopenmp"],
        optional=True,
    )
    extensions = cythonize([ext], language_level=3)

setup(ext_modules=extensions)
