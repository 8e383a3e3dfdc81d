#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""The setup script."""

from setuptools import setup, find_packages

with open('README.md', encoding='utf-8') as readme_file:
    readme = readme_file.read()

with open('HISTORY.md', encoding='utf-8') as history_file:
    history = history_file.read()

requirements = [
    'Click >= 7.0',
    'dynaconf ~= 3.0',
    'funcy >= 1.14',
    'joblib >= 1.0',
    'matplotlib >= 3.5',
    'numpy >= 1.22',
    'pandas >= 2.2',
    'python-slugify >= 4.0',
    'pyyaml',
    'scikit_learn >= 1.0',
    'scipy >= 1.8',
    'stacklog',
    'statsmodels >= 0.13',
    'tqdm',
]

test_requirements = [
    'coverage >= 4.5.1',
    'pytest >= 6',
    'pytest-cov >= 2.6',
    'tox >= 2.9.1',
]

development_requirements = [
    # typing
    'types-python-slugify',
    'types-PyYAML',

    # general
    'bump2version >= 1',
    'pip >= 9.0.1',
    'mypy >= 0.812',

    # docs
    'm2r2 >= 0.2.5',
    'sphinx >= 4.0',
    'sphinx_rtd_theme >= 0.2.4',
    'sphinx-click >= 2.2',
    'sphinx-autodoc-typehints >= 1.11',
    'rstcheck',

    # style check
    'flake8 >= 3.5.0',
    'isort >= 5.0',

    # fix style issues
    'autopep8 >= 1.3.5',

    # distribute on PyPI
    'twine >= 1.10.0',
    'wheel >= 0.30.0',
]

setup(
    author='loadscope developers',
    author_email='loadscope@users.noreply.github.com',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
    description='Multi-horizon probabilistic forecasting of regional '
                'electricity demand with textual and economic features',
    entry_points={
        'console_scripts': [
            'loadscope=loadscope.cli:cli',
        ],
    },
    extras_require={
        'test': test_requirements,
        'dev': development_requirements + test_requirements,
    },
    install_requires=requirements,
    license='MIT license',
    long_description=readme + '\n\n' + history,
    long_description_content_type='text/markdown',
    include_package_data=True,
    keywords='loadscope',
    name='loadscope',
    packages=find_packages(include=['loadscope', 'loadscope.*']),
    python_requires='>=3.9',
    test_suite='tests',
    tests_require=test_requirements,
    url='https://github.com/loadscope/loadscope',
    version='0.1.0',
    zip_safe=False,
)
