"""Package version, read from ``_static_version.py`` or from git.

``setup.py`` loads this module without importing the package and uses
``cmdclass`` to freeze the version into built distributions.
"""
import os
import subprocess

from setuptools.command.build_py import build_py as build_py_orig
from setuptools.command.sdist import sdist as sdist_orig

__all__ = []

package_root = os.path.dirname(os.path.realpath(__file__))
package_name = os.path.basename(package_root)
distr_root = os.path.dirname(package_root)

STATIC_VERSION_FILE = '_static_version.py'


def get_static_version(version_file=STATIC_VERSION_FILE):
    info = {}
    with open(os.path.join(package_root, version_file), 'rb') as f:
        exec(f.read(), {}, info)
    return info['version']


def get_version_from_git():
    """``release[.devN+gHASH]`` from ``git describe``, or None."""
    try:
        result = subprocess.run(['git', 'describe', '--long', '--always'],
                                cwd=distr_root, capture_output=True,
                                text=True)
    except OSError:
        return None
    if result.returncode != 0:
        return None
    parts = result.stdout.strip().lstrip('v').rsplit('-', 2)
    if len(parts) != 3:
        return 'unknown+g{}'.format(parts[0])
    release, dev, git = parts
    if dev == '0':
        return release
    return '{}.dev{}+{}'.format(release, dev, git)


def get_version():
    version = get_static_version()
    if version == '__use_git__':
        version = get_version_from_git() or 'unknown'
    return version


__version__ = get_version()


def _write_version(fname):
    try:
        os.remove(fname)
    except OSError:
        pass
    with open(fname, 'w') as f:
        f.write("# This file has been created by setup.py.\n"
                "version = '{}'\n".format(__version__))


class _build_py(build_py_orig):
    def run(self):
        super().run()
        _write_version(os.path.join(self.build_lib, package_name,
                                    STATIC_VERSION_FILE))


class _sdist(sdist_orig):
    def make_release_tree(self, base_dir, files):
        super().make_release_tree(base_dir, files)
        _write_version(os.path.join(base_dir, package_name,
                                    STATIC_VERSION_FILE))


cmdclass = dict(sdist=_sdist, build_py=_build_py)
