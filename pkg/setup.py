#!/usr/bin/env python3

import sys

from setuptools import find_packages, setup


if sys.version_info.major >= 3 and sys.version_info.minor >= 8:
    import rhopriv
else:
    raise RuntimeError(
        "Unsupported Python version, please upgrade to 3.8 and above")


with open('README.rst', 'r', encoding='utf-8') as readme_file:
    RHOPRIV_README = readme_file.read().strip()


setup(
    name=rhopriv.__name__,
    version=rhopriv.__version__,
    license=rhopriv.__license__,
    description=(
        'Exact privacy of rho-recoverable function queries: optimal '
        'mechanisms, bounds and verification oracles'
    ),
    long_description=RHOPRIV_README,
    packages=find_packages(exclude=('tests',)),
    package_data={'rhopriv': ['schema/*.json']},
    include_package_data=True,
    python_requires='>=3.8',
    keywords='privacy recoverability map-estimation chernoff mechanism',
    zip_safe=False,
    platforms='any',
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.8',
    ],
    extras_require={
        'test': ['pytest>=6.0', 'pytest-cov>=2.10'],
    },
    entry_points={
        'console_scripts': ['rhopriv=rhopriv.cli:main'],
    },
    classifiers=[
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Intended Audience :: Science/Research',
    ],
)
