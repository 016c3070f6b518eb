"""Build script for the optional compiled kernel.

The package works without the extension (a pure-Python fallback with the
same semantics is selected at import time), so a failed Cython build only
costs speed.  -ffp-contract=off keeps the C arithmetic bit-identical to
the Python fallback: no fused multiply-adds may be introduced.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "klbounds._kernels._ckern",
                ["src/klbounds/_kernels/_ckern.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
