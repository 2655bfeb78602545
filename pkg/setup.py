from setuptools import setup

setup(
    name="mfsim",
    version="0.1.0",
    description="Simulation and verification toolkit for McKean-Vlasov systems with common noise",
    package_dir={"": "src"},
    packages=["measures", "coeffs", "simulate", "mckv", "fpe", "duality", "chaos",
              "experiments", "utils", "utils.constants", "utils.logger"],
    py_modules=["main"],
    python_requires=">=3.10",
    install_requires=[
        "numpy>=2.1",
        "scipy>=1.14",
        "pydantic>=2.9",
        "python-dotenv>=1.0",
        "tqdm>=4.66",
    ],
    extras_require={"test": ["pytest>=8.3", "pytest-asyncio>=0.25"]},
    entry_points={"console_scripts": ["mfsim=main:main"]},
)
