from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernel is an optional speedup; the package falls back to the
# pure-Python loop when the extension is missing.
extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "welfareopt._kernels._fastloop",
                ["src/welfareopt/_kernels/_fastloop.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
