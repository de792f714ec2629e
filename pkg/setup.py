from setuptools import setup, find_packages

setup(
    name='subspace-qsl',
    version='0.1.0',
    description='Quantum speed limits for subspaces',
    packages=find_packages('src'),  # Set the 'src' directory as the base for package discovery
    package_dir={'': 'src'},  # Map the root package to the 'src' directory
    install_requires=['numpy>=1.26', 'pydantic>=2.5'],
    extras_require={'scipy': ['scipy>=1.11']},
    entry_points={'console_scripts': ['subspace-qsl=subspace_qsl.cli:main']},
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
    ],
)
