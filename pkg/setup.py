from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the numpy kernel is used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "cellquant._dpcore",
                ["src/cellquant/_dpcore.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
