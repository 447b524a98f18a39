#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""pathwave: proper-time path integrals for weakly anisotropic wave media
Green functions of the damped, weakly anisotropic elastic wave equation
from proper-time path integrals: Monte Carlo and semiclassical kernels,
two-point rays with Van Vleck prefactors, a spectral Galerkin reference
solver and first-Born scalar tomography.
"""

from setuptools import setup, find_packages
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.rst'), encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='pathwave',
    version='0.3.0',
    description='Proper-time path integrals for weakly anisotropic wave media',
    long_description=long_description,
    author='Ran Aroussi',
    author_email='ran@aroussi.com',
    license='Apache',
    classifiers=[
        'License :: OSI Approved :: Apache Software License',
        'Development Status :: 4 - Beta',

        'Operating System :: OS Independent',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Physics',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Software Development :: Libraries :: Python Modules',

        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
    platforms=['any'],
    keywords='wave propagation path integral green function anisotropy '
             'monte carlo ray tracing van vleck born tomography',
    packages=find_packages(exclude=['contrib', 'docs', 'tests', 'examples']),
    python_requires='>=3.7',
    install_requires=[
        'numpy>=1.17.0', 'pandas>=0.25.0', 'scipy>=1.10.0', 'pytz>=2016.6.1',
    ],
    extras_require={
        'test': ['pynose>=1.4.8'],
    },
    entry_points={
        'console_scripts': [
            'pathwave=pathwave.cli:main',
        ],
    },

    include_package_data=True,
    data_files=[('scenarios', ['scenarios/default.ini'])],
)
