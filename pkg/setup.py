import setuptools

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setuptools.setup(
    name="intervention-games",
    version="0.1.0",
    author="Intervention Games contributors",
    description="Solvers for resource sharing games where a manager steers users with an intervention device",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    package_dir={"": "src"},
    packages=setuptools.find_packages(where="src"),
    package_data={"intervention_games": ["test_data/*.json"]},
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "openpyxl",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points = {
        'console_scripts': ['intervention-games=intervention_games.cli:main'],
    }
)
