"""Build the optional compiled kernels.

The package falls back to numpy kernels when the extension is missing, so a
failed compile leaves a working install.
"""

from setuptools import Extension, setup


def _extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "eightvertex._ckernels",
        ["src/eightvertex/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        optional=True,
    )
    try:
        return cythonize([ext], compiler_directives={"language_level": "3"})
    except Exception as exc:  # any cythonize failure means "no extension"
        print(f"skipping compiled kernels: {exc}")
        return []


setup(ext_modules=_extensions())
