import re

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

with open("opconvex/cli.py", "r") as fh:
    __version__ = re.search(r"^__version__ = '(.+)'", fh.read(), re.M).group(1)

with open("README.md", "r") as fh:
    long_description = fh.read()


def main():
    setup(
        name='opconvex',
        version=__version__,
        description='opconvex: numerical checks of operator convexity for '
        'multivariate matrix functions',
        long_description=long_description,
        long_description_content_type='text/markdown',
        license='http://www.opensource.org/licenses/mit-license.php',
        platforms=['unix', 'linux', 'osx', 'cygwin', 'win32'],
        keywords='operator convexity matrix means divided differences',
        classifiers=['Development Status :: 4 - Beta',
                     'Intended Audience :: Science/Research',
                     'License :: OSI Approved :: MIT License',
                     'Operating System :: OS Independent',
                     'Topic :: Scientific/Engineering :: Mathematics',
                     'Programming Language :: Python',
                     'Programming Language :: Python :: 3'],
        packages=['opconvex', 'opconvex.certify'],
        python_requires='>=3.8',
        install_requires=['numpy'],
        extras_require={'tests': ['pytest', 'hypothesis']},
        entry_points={
            'console_scripts': [
                'opconvex = opconvex.cli:main'],
        },
        zip_safe=True,
        )


if __name__ == '__main__':
    main()
