from setuptools import setup, find_packages

setup(
    name="qocsim",
    version="0.1.0",
    description="Quality of Control simulator for networked robot arms",
    author="qocsim Team",
    author_email="qocsim@example.com",
    packages=find_packages(exclude=["examples", "examples.*"]),
    py_modules=["main"],
    package_data={
        "qocsim.arm": ["data/*.arm"],
    },
    install_requires=[
        "numpy>=1.24.0",
        "psutil>=5.9.0",
        "python-dotenv>=0.20.0",
    ],
    entry_points={
        "console_scripts": [
            "qocsim=main:main_cli",
        ],
    },
    python_requires=">=3.9",
)
