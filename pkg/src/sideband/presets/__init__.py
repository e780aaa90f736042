"""Bundled example networks (.net files)."""

from importlib import resources


def available() -> list[str]:
    pkg = resources.files(__name__)
    return sorted(p.name[:-4] for p in pkg.iterdir() if p.name.endswith(".net"))


def load(name: str) -> str:
    """Return the text of a bundled preset, e.g. load('mz_phase')."""
    try:
        return (resources.files(__name__) / f"{name}.net").read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(f"no preset named {name!r}; have {available()}")
