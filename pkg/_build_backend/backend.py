"""In-tree PEP 517 backend.

The repository's root ``setup.py`` is an interactive environment-setup helper,
not a setuptools script, so setuptools must not execute it while building.
Metadata comes from ``pyproject.toml`` instead.
"""
from setuptools import build_meta as _orig


class _Backend(_orig._BuildMetaBackend):
    def run_setup(self, setup_script="setup.py"):
        # A non-existent path makes setuptools use its default ``setup()`` stub.
        super().run_setup(setup_script="__pyproject_only_setup__.py")


_BACKEND = _Backend()

get_requires_for_build_wheel = _BACKEND.get_requires_for_build_wheel
get_requires_for_build_sdist = _BACKEND.get_requires_for_build_sdist
prepare_metadata_for_build_wheel = _BACKEND.prepare_metadata_for_build_wheel
build_wheel = _BACKEND.build_wheel
build_sdist = _BACKEND.build_sdist
get_requires_for_build_editable = _BACKEND.get_requires_for_build_editable
prepare_metadata_for_build_editable = _BACKEND.prepare_metadata_for_build_editable
build_editable = _BACKEND.build_editable
