from setuptools import setup
import os
import re


def read_version():
    path = os.path.join(os.path.abspath(os.path.dirname(__file__)), 'scilandau/__init__.py')
    with open(path, 'r') as fh:
        return re.search(r'__version__\s?=\s?[\'"](.+)[\'"]', fh.read()).group(1)


def readme():
    with open('README.md') as f:
        return f.read()


setup(name='scilandau',
      version=read_version(),
      description='Velocity-space kinetic simulator for a memory-kernel equation and its Landau limit.',
      long_description=readme(),
      long_description_content_type='text/markdown',
      author='Ariane Mora',
      author_email='ariane.n.mora@gmail.com',
      url='https://github.com/ArianeMora/scilandau',
      license='GPL3',
      project_urls={
          "Bug Tracker": "https://github.com/ArianeMora/scilandau/issues",
          "Documentation": "https://github.com/ArianeMora/scilandau",
          "Source Code": "https://github.com/ArianeMora/scilandau",
      },
      classifiers=[
          'Development Status :: 4 - Beta',
          'Intended Audience :: Science/Research',
          'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
          'Natural Language :: English',
          'Operating System :: OS Independent',
          'Programming Language :: Python :: 3.8',
          'Programming Language :: Python :: 3.9',
          'Programming Language :: Python :: 3.10',
          'Topic :: Scientific/Engineering :: Physics',
      ],
      keywords='kinetic landau spectral memory-kernel',
      packages=['scilandau'],
      entry_points={
          'console_scripts': [
              'scilandau = scilandau.__main__:main'
          ]
      },
      install_requires=['pandas', 'numpy>=1.20', 'scipy>=1.6', 'sciutil', 'xmltodict'],
      python_requires='>=3.8',
      )
