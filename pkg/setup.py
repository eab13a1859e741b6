"""Build script: compiles the optional C speedup for the edit-distance kernel.

The extension is best-effort. If Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-Python implementation in
vulnmatch.textdist.pure.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "vulnmatch.textdist._speedups",
                ["src/vulnmatch/textdist/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
