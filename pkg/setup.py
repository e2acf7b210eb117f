"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed, not functionality.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the native kernels if possible, otherwise install pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: native kernel build skipped ({exc!r})")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: building {ext.name} failed ({exc!r}); "
                  "falling back to the numpy kernels")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    import sys
    flags = [] if sys.platform.startswith("win") else ["-O3"]
    ext = Extension(
        "fedmlfs.kernels._native",
        ["src/fedmlfs/kernels/_native.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=flags,
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
