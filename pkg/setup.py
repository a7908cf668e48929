from setuptools import setup, find_packages
from pathlib import Path

readme_file = Path(__file__).parent / "README.md"
long_description = readme_file.read_text() if readme_file.exists() else ""

setup(
    name="rydberg-recoil-fidelity",
    version="1.0.0",
    description="Photon-recoil and motional error estimates for Rydberg blockade gates",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["scripts", "examples", "examples.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24.3",
        "scipy>=1.12.0",
        "pandas>=2.1.3",
        "pydantic>=2.5.0",
        "pyyaml>=6.0.1",
        "python-dotenv>=1.0.0",
        "jinja2>=3.1.2",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.3",
            "hypothesis>=6.90.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "rydfid=backend.main:main",
        ],
    },
    package_data={"": ["*.yaml", "*.j2"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Physics",
    ],
)
