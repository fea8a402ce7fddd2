import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("BHTN_SKIP_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "bhtn._sa_cy",
                    sources=["src/bhtn/_sa_cy.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,  # fall back to bhtn._sa_py if the compile fails
                )
            ],
            language_level="3",
        )
    except ImportError:
        # No Cython available: install pure-Python only.
        ext_modules = []

setup(ext_modules=ext_modules)
