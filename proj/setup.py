"""CMake-driven build of the worldbench._core extension.

The extension is produced by the project's CMake tree (which also builds the
CLI and the C++ core); this shim points setuptools at it so that
`pip install -e . --no-build-isolation` and wheel builds work.
"""

import subprocess
import sys
from pathlib import Path

import pybind11
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve()
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve()
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DWORLDBENCH_BUILD_TESTS=OFF",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
                f"-DPYTHON_EXECUTABLE={sys.executable}",
                "-DCMAKE_BUILD_TYPE=Release",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core", "-j"],
            check=True,
        )
        out_dir.mkdir(parents=True, exist_ok=True)
        built = list((build_dir / "python" / "worldbench").glob("_core.*"))
        if not built:
            raise RuntimeError("CMake did not produce the _core extension")
        self.copy_file(str(built[0]), str(Path(self.get_ext_fullpath(ext.name))))


setup(
    ext_modules=[CMakeExtension("worldbench._core")],
    cmdclass={"build_ext": CMakeBuild},
)
