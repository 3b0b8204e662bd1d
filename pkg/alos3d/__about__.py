"""Single source of truth for the package version.

hatchling reads the version straight from this file via `[tool.hatch.version]
path = "alos3d/__about__.py"` in pyproject.toml, and __init__.py imports it
from here. Bump only this file (scripts/bump_version.sh does).

Reads: (nothing internal)
"""

__version__ = "0.4.0"
