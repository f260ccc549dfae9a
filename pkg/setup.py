"""Build the optional compiled kernel.

The package is fully functional without it (a pure-Python fallback is
selected at import time); building the extension speeds up the tiling
walk and coset enumeration by an order of magnitude or more.

Build in place with:  python setup.py build_ext --inplace
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/coneflow/_kernels/_fast.pyx",
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("Cython not available; installing with the pure-Python kernels only")
    ext_modules = []

setup(ext_modules=ext_modules)
