import os
import platform
import sys

from setuptools import setup

ext_modules = []
# glibc's libmvec gives vectorized tanh under -ffast-math
VECTOR_MATH = sys.platform == "linux" and platform.machine() == "x86_64"
if not os.environ.get("TASHKEEL_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "tashkeel.nn._lstm_ext",
                    sources=["src/tashkeel/nn/_lstm_ext.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffast-math"] if VECTOR_MATH else ["-O3"],
                    libraries=["mvec", "m"] if VECTOR_MATH else [],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
