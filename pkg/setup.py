from setuptools import setup, find_packages

setup(
    name="sparc-mod",
    version="1.0.0",
    description="PSK-modulated sparse superposition codes with AMP decoding for the complex AWGN channel",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    author="sparc-mod developers",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.8.0",
        "pandas>=1.5.0",
        "tomli>=2.0.0; python_version<'3.11'",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "pylint>=2.15.0",
            "hypothesis>=6.50.0",
        ]
    },
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "sparc-mod=sparcmod.main:main",
        ],
    },
)
