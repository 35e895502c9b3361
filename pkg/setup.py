from setuptools import setup, find_packages

setup(name='setpointlib',
        version='1.0.0',
        description='Setpoint holding algorithms, closed-loop maps and bifurcation analysis',
        packages=find_packages(include=[
            'setpointlib',
            'setpointlib.*',
            'src',
            'utils',
            'config'
        ]),
        python_requires=">=3.8",
        install_requires=[
            'numpy>=1.20',
            'scipy>=1.6'
        ],
        extras_require={
            'test': ['pytest>=7', 'hypothesis>=6']
        },
        entry_points={
            'console_scripts': ['setpoint-lab=src.cli:main']
        }
)
