from setuptools import setup, find_packages

setup(
    name="ppsi",
    version="0.3.0",
    packages=find_packages(exclude=("tests", "examples", "examples.*")),
    python_requires=">=3.9",
    install_requires=[
        "numpy",
        "scipy",
        "pyyaml",
        "Pillow>=10.1",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["ppsi=ppsi.cli:main"]},
)
