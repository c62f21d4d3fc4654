"""Build hook for the optional compiled kernels.

The package is fully functional as pure Python; when Cython and a C
compiler are available the hot per-item decision loops are compiled as
okp._kernels and picked up automatically at import time.
"""

from setuptools import setup

kwargs = {}
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = [
        Extension(
            "okp._kernels",
            ["src/okp/_kernels.pyx"],
            include_dirs=[np.get_include()],
            # no -ffast-math, no FMA contraction: the compiled path must
            # match the pure Python fallback bit for bit
            extra_compile_args=["-O3", "-ffp-contract=off"],
        )
    ]
    kwargs["ext_modules"] = cythonize(
        extensions, compiler_directives={"language_level": "3"}
    )
except ImportError:
    pass

setup(**kwargs)
