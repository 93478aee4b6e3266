import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("SWFLOOD_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        sys.stderr.write("Cython not available; installing the numpy backend only\n")
    else:
        # no FMA contraction and no fast-math: results must match the numpy backend
        flags = ["-O3", "-ffp-contract=off", "-fno-math-errno", "-fno-trapping-math"]
        march = os.environ.get("SWFLOOD_MARCH", "native")
        if march:
            flags.append(f"-march={march}")
        omp = [] if sys.platform == "darwin" else ["-fopenmp"]
        ext_modules = cythonize(
            [Extension("swflood._kernels", ["src/swflood/_kernels.pyx"],
                       include_dirs=["src/swflood"], depends=["src/swflood/_blockops.h"],
                       extra_compile_args=flags + omp, extra_link_args=omp)],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
