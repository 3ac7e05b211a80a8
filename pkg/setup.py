import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="dynnet",
    version="24.10.17",
    description="Neural networks trained through ODE integrators for dynamics discovery and parameter estimation.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    keywords = ['neural ODE', 'parameter estimation', 'linear multistep methods', 'automatic differentiation'],
    packages=setuptools.find_packages(exclude=['tests']),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.8',
    install_requires=[
        'numpy',
        'PyYAML',
        'omegaconf',
        'safetensors',
        'tqdm',
        'colorama',
        'matplotlib',
    ],
    extras_require={
        'test': ['pytest', 'torch'],
    },
    package_data={'dynnet': ['presets/*.cfg']},
    include_package_data=True,
    entry_points = {
        'console_scripts' : [
            'dynnet=dynnet.cli:main',
        ],
    },
)
