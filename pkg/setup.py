"""Build script for the compiled Monte Carlo kernels.

The extension is optional: if the C toolchain or Cython is unavailable the
install still succeeds and the package falls back to the pure-numpy kernels
(selected at import in exchopt.mc.backend).
"""
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        sys.stderr.write(
            f"warning: compiled kernels not built ({exc!r}); "
            "exchopt will use the pure-numpy fallback\n"
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "exchopt.mc._kernels",
        ["src/exchopt/mc/_kernels.pyx"],
        # -ffp-contract=off keeps scalar arithmetic bit-compatible with the
        # numpy kernels (no FMA fusion differences).
        extra_compile_args=["-O3", "-ffp-contract=off", "-fopenmp"],
        extra_link_args=["-fopenmp"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
