import os

from setuptools import setup

here = os.path.join(os.path.dirname(__file__))

with open(os.path.join(here, 'reqs/core.txt')) as f:
    REQUIREMENTS = f.read().splitlines()

setup(
    name='optimizely-sdk',
    version='5.0.0',
    packages=['optimizely'],
    install_requires=REQUIREMENTS,
)
