"""Build script for the optional compiled Airy kernels.

    pip install -e . --no-build-isolation        # builds anharmonic._airy_c when possible
    python setup.py build_ext --inplace          # rebuild in place after editing the .pyx

When Cython or a C compiler is missing the package installs without the
extension and falls back to anharmonic._airy_py at import.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled Airy kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: could not build {ext.name} ({exc}); using numpy fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    return cythonize(
        [
            Extension(
                "anharmonic._airy_c",
                ["src/anharmonic/_airy_c.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
