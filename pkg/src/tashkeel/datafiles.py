"""Lookup of data files, overridable through the TASHKEEL_RESOURCES directory."""

from __future__ import annotations

import os
from functools import lru_cache
from importlib import resources as _res

ENV_VAR = "TASHKEEL_RESOURCES"


def read_resource(name: str) -> str:
    """Text of resource ``name``: from $TASHKEEL_RESOURCES when it has the file, else the packaged copy."""
    return _read(os.environ.get(ENV_VAR) or "", name)


@lru_cache(maxsize=32)
def _read(root: str, name: str) -> str:
    if root:
        path = os.path.join(root, name)
        if os.path.isfile(path):
            with open(path, encoding="utf-8") as fh:
                return fh.read()
    return _res.files("tashkeel").joinpath(f"resources/{name}").read_text(encoding="utf-8")
