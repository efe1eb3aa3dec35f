from setuptools import find_packages, setup

_TEST_REQUIRE = [
    "pytest==7.4.4",
    "pytest-cov==4.1.0",
    "pytest-asyncio==0.21.1",
    "pylint==2.17.7",
    "xenon==0.9.1",
    "black==23.12.1",
    "isort==5.13.2",
]

_VERSION = "0.1.0"

_PACKAGES = find_packages(exclude=["tests*"])

setup(
    name="tcopula-bayes",
    version=_VERSION,
    description=(
        "Bayesian calibration and model choice of standard, grouped and "
        "generalized t-copulas"
    ),
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    license="MIT",
    classifiers=[
        "Intended Audience :: Financial and Insurance Industry",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: Implementation :: CPython",
    ],
    keywords="copula t-copula mcmc bayes-factor dic garch cvar",
    packages=_PACKAGES,
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.21,<3.0",
        "scipy>=1.8,<2.0",
        "pandas>=1.3,<3.0",
    ],
    tests_require=_TEST_REQUIRE,
    extras_require={"test": _TEST_REQUIRE},
    entry_points={
        "console_scripts": ["tcopula-bayes = tcopula_bayes._cli:main"]
    },
    include_package_data=True,
)
