import re

from setuptools import setup


def read(path):
    with open(path) as fp:
        content = fp.read()
    return content


def find_version(path):
    match = re.search(r'__version__ = [\'"](?P<version>[^\'"]*)[\'"]', read(path))
    if match:
        return match.group('version')
    raise RuntimeError("Cannot find version information")


setup(
    name='perpetua',
    version=find_version('perpetua/__init__.py'),
    description="Criteria and Monte Carlo for Lévy-type perpetuities and branching Lévy processes.",
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    author="Fosssen",
    author_email="fossen@fossen.cn",
    license="MIT",
    packages=['perpetua', 'perpetua.fields'],
    include_package_data=False,
    zip_safe=False,
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.3',
        'daiquiri>=2.0',
    ],
    entry_points={
        'console_scripts': ['perpetua = perpetua.cli:main'],
    },
    python_requires=">=3.7",
)
