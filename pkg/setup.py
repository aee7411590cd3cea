"""
Setup configuration for the thin-film SPDC toolkit.
Enables installation via: pip install -e .
"""

from setuptools import setup
from pathlib import Path

# Read README for long description
readme_path = Path(__file__).parent / "README.md"
long_description = readme_path.read_text(encoding="utf-8") if readme_path.exists() else ""

# Read requirements
requirements_path = Path(__file__).parent / "requirements.txt"
requirements = []
if requirements_path.exists():
    requirements = [line.strip() for line in requirements_path.read_text().split('\n')
                   if line.strip() and not line.startswith('#')]

setup(
    name="spdc-film",
    version="1.0.0",
    description="Simulation and analysis of photon-pair emission from subwavelength nonlinear films",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    py_modules=[
        "cli",
        "dispersion",
        "export_reporting",
        "photon_stats",
        "polarization",
        "run_config",
        "shared_utils",
        "spdc_model",
        "tomography",
    ],
    data_files=[("", ["config.json", "gase_dispersion.json"])],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={
        "dev": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "spdc-film=cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    keywords="spdc photon-pairs nonlinear-optics quantum-optics tomography g2 thin-film",
)
