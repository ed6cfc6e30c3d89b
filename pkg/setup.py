"""Build script for the optional compiled kernel extension.

The extension is best-effort: if Cython or a C compiler is unavailable the
install still succeeds and the package falls back to the pure NumPy kernels
at import time (see topdots.backends).
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, otherwise continue without it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping compiled kernels ({exc}); "
                  "pure NumPy backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure NumPy backend will be used")


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "topdots.backends._core",
            sources=["src/topdots/backends/_core.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )
        return cythonize([ext], language_level=3)
    except Exception as exc:
        print(f"warning: compiled kernels disabled ({exc}); "
              "pure NumPy backend will be used")
        return []


setup(ext_modules=make_extensions(), cmdclass={"build_ext": OptionalBuildExt})
