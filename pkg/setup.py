"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-Python
fallback is selected at import), so build failures degrade to a warning
instead of aborting the install.
"""

import warnings

from setuptools import Extension, setup


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        warnings.warn(f"skipping compiled kernels ({exc}); pure-Python fallback will be used")
        return []
    return cythonize(
        [
            Extension(
                "bllrec._kernels._core",
                ["src/bllrec/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=_extensions())
