"""Extension build: the whole C++ core compiles into patchvote._core."""

import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "patchvote._core",
    sources=sorted(glob.glob("src/*.cpp")) + ["bindings/module.cpp"],
    include_dirs=["include"],
    libraries=["png", "jpeg"],
    cxx_std=20,
    # Match the CMake build: vectorized but with strict FP semantics so
    # results stay bit-reproducible (no -ffast-math).
    extra_compile_args=["-O3", "-march=native"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
