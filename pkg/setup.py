"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (pure-numpy fallback is selected at
import time), so a failed compile degrades to a pure build instead of
aborting the install.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            print(f"warning: skipping compiled kernels ({exc}); "
                  "pure-python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure-python fallback will be used")


def ext_modules():
    try:
        import numpy
        from setuptools import Extension
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "rbmnet._kernels._core",
        sources=["src/rbmnet/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=ext_modules(), cmdclass={"build_ext": optional_build_ext})
