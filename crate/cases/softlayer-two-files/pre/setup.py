import codecs
import os

from setuptools import setup, find_packages

DESCRIPTION = "A library for SoftLayer's API"

if os.path.exists('README.rst'):
    with codecs.open('README.rst', 'r', 'utf-8') as readme_file:
        LONG_DESCRIPTION = readme_file.read()
else:
    LONG_DESCRIPTION = DESCRIPTION

setup(
    name='SoftLayer',
    version='v6.0.2',
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    author='SoftLayer, Inc.',
    packages=find_packages(exclude=['tests']),
    license='MIT',
    zip_safe=False,
    url='http://github.com/softlayer/softlayer-python',
    entry_points={
        'console_scripts': [
            'slcli = SoftLayer.CLI.core:main',
        ],
    },
    python_requires='>=3.7',
    install_requires=[
        'prettytable >= 2.5.0',
        'click >= 8.0.4',
        'requests >= 2.20.0',
        'prompt_toolkit >= 2',
        'pygments >= 2.0.0',
        'urllib3 >= 1.24',
        'rich == 12.3.0'
    ],
    keywords=['softlayer', 'cloud', 'slcli'],
)
