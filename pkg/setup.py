import os

from setuptools import setup

# The compiled kernel core is optional: when Cython or a C compiler is not
# available the package falls back to the numpy implementation at import time.
ext_modules = []
if os.environ.get("OSCMAX_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("oscmax._core", ["src/oscmax/_core.pyx"])],
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "language_level": "3",
            },
        )
    except Exception:
        ext_modules = []

setup(ext_modules=ext_modules)
