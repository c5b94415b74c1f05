from setuptools import setup, find_packages

setup(
    name='spikeslab',
    version='0.1',
    packages=find_packages(exclude=['examples*', 'exps*', 'benchmark*']),
    install_requires=[
        'python-dotenv==1.0.1',
        'termcolor==2.4.0',
        'pydantic==2.9.2',
        'pyyaml==6.0.2',
        'numpy>=1.26',
        'scipy>=1.11',
        'tqdm>=4.66'
    ],
    extras_require={
        'test': ['pytest>=8.0'],
    },
    entry_points={
        'console_scripts': ['spikeslab = spikeslab.cli:main'],
    },
    include_package_data=True,
)
