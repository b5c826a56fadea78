import os

from setuptools import setup

ext_modules = []
if os.environ.get("CONSLAW_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            ["src/conslaw/_ckernels.pyx"],
            compiler_directives={"language_level": 3},
            quiet=True,
        )

setup(ext_modules=ext_modules)
