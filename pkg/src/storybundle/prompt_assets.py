"""Loading and filling of the versioned prompt templates.

Templates are plain text files with ``{{placeholder}}`` slots, shipped with
the package. The filled prompt (template text included) is what gets hashed
into the oracle cache key, so editing a template invalidates its cache
entries for free.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")


@lru_cache(maxsize=None)
def load_template(template_id: str) -> str:
    ref = resources.files("storybundle").joinpath(f"prompts/{template_id}.txt")
    return ref.read_text(encoding="utf-8")


def fill_template(template_id: str, **slots: str) -> str:
    text = load_template(template_id)

    def substitute(match: re.Match) -> str:
        name = match.group(1)
        if name not in slots:
            raise KeyError(f"template {template_id!r} needs placeholder {name!r}")
        return str(slots[name])

    return _PLACEHOLDER.sub(substitute, text)
