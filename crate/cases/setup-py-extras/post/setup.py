from setuptools import setup

setup(
    name="geofence",
    version="0.2.0",
    packages=["geofence"],
    install_requires=[
        "shapely>=2.0",
        "numpy",
    ],
    extras_require={
        "plot": ["matplotlib>=3.5"],
        "dev": ["pytest", "mypy"],
    },
)
