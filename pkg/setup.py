"""Optional compiled kernels; the package works without them."""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("FAB_NO_EXT"):
    try:
        from Cython.Build import cythonize
        ext_modules = cythonize(["src/fab/_kernels/_ckernels.pyx"], language_level=3, quiet=True)
    except Exception as exc:          # no Cython or no compiler: pure-Python fallback
        print(f"fab: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
