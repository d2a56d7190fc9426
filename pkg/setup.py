"""Build script for the optional compiled trajectory kernel.

The package is fully functional without the extension (a pure-NumPy
fallback is selected at import time); the build therefore degrades
gracefully when Cython or a C compiler is unavailable.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "nmr_squeeze._kernel",
                ["src/nmr_squeeze/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    import sys

    print(f"nmr-squeeze: compiled kernel skipped ({exc}); using pure-NumPy fallback",
          file=sys.stderr)

setup(ext_modules=ext_modules)
