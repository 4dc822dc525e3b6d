from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("oplaxkit._rowred", ["src/oplaxkit/_rowred.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except Exception:
    # the package falls back to oplaxkit._rowred_py at import time
    ext_modules = []

setup(ext_modules=ext_modules)
