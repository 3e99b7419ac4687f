"""Build script for the optional compiled Gibbs kernel.

The extension is a pure speedup: if Cython or a C compiler is missing the
build degrades to the pure-Python kernel and the package stays fully
functional (`isingtrack.kernels.active_backend()` reports which one loaded).
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Swallow compiler failures so the extension stays optional."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: compiled gibbs kernel not built ({exc!r}); "
            "falling back to the pure-Python kernel",
            file=sys.stderr,
        )


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"WARNING: {exc!r}; skipping compiled kernel", file=sys.stderr)
        return []
    ext = Extension(
        "isingtrack.kernels._gibbs",
        ["src/isingtrack/kernels/_gibbs.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
