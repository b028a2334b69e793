import os
import re

from setuptools import setup


def get_version():
    """Extract and return version number from the packages '__init__.py'."""
    init_path = os.path.join('msibim', '__init__.py')
    content = read_file(init_path)
    match = re.search(r"__version__ = '([^']+)'", content, re.M)
    version = match.group(1)
    return version


def read_file(filename):
    """Open and a file, read it and return its contents."""
    path = os.path.join(os.path.dirname(__file__), filename)
    with open(path) as f:
        return f.read()


install_requires = [
    'numpy>=1.22',
    'scipy>=1.12',
    'numba>=0.57',
]
tests_require = [
    'hypothesis',
    'pytest',
    'pytest-cov',
]

setup(
    name='msibim',
    version=get_version(),
    description=(
        'Mullins-Sekerka interface dynamics with implicit boundary '
        'integrals and level sets.'
    ),
    long_description=read_file('README.rst'),
    long_description_content_type='text/x-rst',
    install_requires=install_requires,
    tests_require=tests_require,
    extras_require={'test': tests_require},
    python_requires='>=3.8',
    classifiers=[
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Operating System :: Unix',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    packages=['msibim'],
    include_package_data=True,
    zip_safe=False,
    entry_points={
        'console_scripts': [
            'msibim = msibim.commands:main',
        ],
    }
)
