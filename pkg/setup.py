from setuptools import setup, find_namespace_packages

setup(
  name = 'polar_multigrid',
  packages = find_namespace_packages(include=['polar_multigrid*']),
  package_data = {'polar_multigrid': ['config/*.yaml', 'config/*/*.yaml']},
  install_requires = [
    'numpy',
    'numba',
    'scipy',
    'pandas',
    'hydra-core',
    'omegaconf',
    'tqdm',
    'wandb',
    'threadpoolctl',
    'psutil',
    'click',
  ],
)
