import platform

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:  # no Cython: ship the numpy fallback only
    cythonize = None


class optional_build_ext(build_ext):
    """Let the install succeed without a compiler; kernels fall back to numpy."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: compiled kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using numpy fallback")


ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "wedgemix._core",
                ["src/wedgemix/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"] + (["-mpopcnt"] if platform.machine() in ("x86_64", "AMD64") else []),
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
