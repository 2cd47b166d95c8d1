from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="pt-ising-fidelity",
    version="1.0.0",
    author="PT-Ising Fidelity Team",
    description="Exakte Lösung und Mischzustands-Fidelity der nicht-hermiteschen PT-symmetrischen Ising-Kette",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["docs", "docs.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    entry_points={
        "console_scripts": [
            "pt-ising-fidelity=src.main:main",
        ],
    },
    include_package_data=True,
    package_data={
        "": ["*.ini", "docs/recipes/*.cfg"],
    },
)
