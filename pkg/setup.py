import os

from setuptools import Extension, setup

# CTSMOOTH_NO_EXT=1 skips the compiled core; the numpy fallback is used instead.
ext_modules = []
if not os.environ.get("CTSMOOTH_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "ctsmooth._ckernels",
                    ["src/ctsmooth/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
