"""Build script for the compiled orbit-enumeration kernel.

The package works without the extension (a pure Python kernel is used as a
fallback), so failures here only cost speed.  ``pip install -e . --no-build-isolation``
builds the extension in place.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the compiler from fusing multiply-adds; the kernel
# relies on exact IEEE rounding of individual products (Dekker two-products)
# and on matching the pure-Python kernel bit for bit.
extensions = [
    Extension(
        "loopcensus._kernel",
        ["src/loopcensus/_kernel.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
