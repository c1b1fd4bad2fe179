"""CMake-driven extension build: compiles the C++ core and the pybind11
module in one configure/build pass and drops `simcache._core` into the
package."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        target = Path(self.get_ext_fullpath(ext.name)).resolve()
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        configure = [
            "cmake",
            str(source_dir),
            f"-DPython_EXECUTABLE={sys.executable}",
            "-DCMAKE_BUILD_TYPE=Release",
            "-DSIMCACHE_PYTHON=ON",
        ]
        subprocess.run(configure, cwd=build_dir, check=True)
        jobs = str(os.cpu_count() or 2)
        subprocess.run(["cmake", "--build", str(build_dir), "--target", "_core", "-j", jobs],
                       cwd=build_dir, check=True)

        built = sorted((build_dir / "python" / "simcache").glob("_core*"))
        if not built:
            raise RuntimeError("CMake build produced no _core module")
        target.parent.mkdir(parents=True, exist_ok=True)
        self.copy_file(built[0], target)


setup(
    packages=["simcache"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("simcache._core")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
