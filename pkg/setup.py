"""Build script: compiles the optional lattice stepping extension.

The package is fully functional without the extension; a numpy fallback is
selected at import time.  Building requires Cython and a C compiler:

    pip install -e . --no-build-isolation
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "wavenf.lattice._kernels",
                ["src/wavenf/lattice/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
