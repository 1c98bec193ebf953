from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

# The extension compiles the core sources directly; the kvs service and CLI
# are CMake-only targets.
ext = Pybind11Extension(
    "cbcast._core",
    sources=[
        "bindings/module.cpp",
        "src/vector_clock.cpp",
        "src/trace.cpp",
        "src/simulator.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
