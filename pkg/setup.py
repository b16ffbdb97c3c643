"""Build script for the compiled simulation kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the Monte Carlo round pipeline faster.
"""

import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off keeps the C arithmetic bit-identical to the numpy
# fallback (no fused multiply-add), so both backends agree exactly on
# integer outputs (histograms, clip counts).
extensions = [
    Extension(
        "cvqkdsec._kernels._simcore",
        ["src/cvqkdsec/_kernels/_simcore.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
