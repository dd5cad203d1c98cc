from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stella.errors import StellaTypeError  # noqa: E402
from stella.parser import parse_program  # noqa: E402
from stella.typer import Checker  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
LISTINGS = CORPUS / "well-typed" / "listings"


def program(body: str, *extensions: str) -> str:
    """Wrap declarations in a ``language core;`` header with the given extensions."""
    head = "language core;\n"
    if extensions:
        head += f"extend with {', '.join(extensions)};\n"
    return head + body


def tag_of(source: str, permissive: bool = False) -> str | None:
    """Error tag reported for ``source`` or None when it typechecks."""
    try:
        Checker(permissive=permissive).check_program(parse_program(source))
    except StellaTypeError as err:
        return err.tag.value
    return None


@pytest.fixture
def listing():
    def load(name: str) -> str:
        return (LISTINGS / f"{name}.stella").read_text()

    return load
