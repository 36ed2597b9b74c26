"""Build script: compiles the optional Grünwald-Letnikov kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time); a failed compile therefore only costs speed, not features.
"""

import sys

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("fracsym._glkernel", ["src/fracsym/_glkernel.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: skipping compiled kernel ({exc}); pure-python fallback "
          "will be used", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
