"""Family files.

Text form::

    # comment
    n=4
    1 2 3 4
    2 1 4 3

Structured form: a JSON object ``{"n": 4, "members": [[1, 2, 3, 4], ...]}``.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError
from .perm_core import PermFamily


def parse_family_text(text: str) -> PermFamily:
    if text.lstrip().startswith("{"):
        return _parse_structured(text)
    n = None
    rows = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            if not line.startswith("n="):
                raise ParseError("expected header 'n=<n>'", lineno)
            try:
                n = int(line[2:])
            except ValueError:
                raise ParseError(f"bad header {line!r}", lineno) from None
            if n < 1:
                raise ParseError("n must be positive", lineno)
            continue
        try:
            images = tuple(int(tok) for tok in line.split())
        except ValueError:
            raise ParseError(f"non-integer image in {line!r}", lineno) from None
        if len(images) != n:
            raise ParseError(f"expected {n} images, got {len(images)}", lineno)
        if sorted(images) != list(range(1, n + 1)):
            raise ParseError(f"{line!r} is not a bijection on 1..{n}", lineno)
        if images in seen:
            raise ParseError(f"duplicate member {line!r}", lineno)
        seen.add(images)
        rows.append(images)
    if n is None:
        raise ParseError("missing header 'n=<n>'")
    return PermFamily(n, frozenset(rows))


def _parse_structured(text: str) -> PermFamily:
    try:
        obj = json.loads(text)
        n = int(obj["n"])
        members = obj["members"]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"bad structured family: {exc}") from None
    rows = set()
    for k, m in enumerate(members):
        images = tuple(int(v) for v in m)
        if len(images) != n or sorted(images) != list(range(1, n + 1)):
            raise ParseError(f"member {k} is not a permutation of 1..{n}")
        rows.add(images)
    return PermFamily(n, frozenset(rows))


def parse_family(path) -> PermFamily:
    return parse_family_text(Path(path).read_text())


def family_text(F: PermFamily) -> str:
    lines = [f"n={F.n}"]
    lines += [" ".join(map(str, m)) for m in F]
    return "\n".join(lines) + "\n"


def family_object(F: PermFamily) -> dict:
    return {"n": F.n, "members": [list(m) for m in F]}


def emit_family(F: PermFamily, path, structured: bool = False) -> None:
    path = Path(path)
    if structured:
        path.write_text(json.dumps(family_object(F)) + "\n")
    else:
        path.write_text(family_text(F))
