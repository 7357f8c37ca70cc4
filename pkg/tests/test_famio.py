import json
from math import factorial

import numpy as np
import pytest

from permfree.errors import ParseError
from permfree.famio import emit_family, family_object, family_text, parse_family, parse_family_text
from permfree.perm_core import PermFamily


def random_families(count, seed=0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(3, 7))
        size = int(rng.integers(0, min(factorial(n), 40) + 1))
        yield PermFamily.from_ranks(n, rng.choice(factorial(n), size, replace=False).tolist())


def test_text_round_trip():
    for F in random_families(100):
        assert parse_family_text(family_text(F)).members == F.members


def test_structured_round_trip(tmp_path):
    for k, F in enumerate(random_families(100, seed=1)):
        path = tmp_path / f"f{k}.json"
        emit_family(F, path, structured=True)
        G = parse_family(path)
        assert (G.n, G.members) == (F.n, F.members)


def test_comments_and_blank_lines():
    F = parse_family_text("# two members\n\nn=3\n1 2 3\n# mid\n3 1 2\n")
    assert F.members == {(1, 2, 3), (3, 1, 2)}


def test_output_is_sorted():
    F = PermFamily.from_images(3, [(3, 2, 1), (1, 2, 3)])
    assert family_text(F) == "n=3\n1 2 3\n3 2 1\n"
    assert family_object(F) == {"n": 3, "members": [[1, 2, 3], [3, 2, 1]]}


@pytest.mark.parametrize("text,line", [
    ("n=3\n1 1 3\n", 2),
    ("n=3\n1 2 3\n1 2\n", 3),
    ("n=3\n1 2 x\n", 2),
    ("1 2 3\n", 1),
    ("n=3\n1 2 3\n1 2 3\n", 3),
    ("# c\nn=3\n2 3 4\n", 3),
])
def test_parse_errors_report_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_family_text(text)
    assert info.value.line == line


def test_structured_errors():
    with pytest.raises(ParseError):
        parse_family_text(json.dumps({"n": 3, "members": [[1, 2, 2]]}))
    with pytest.raises(ParseError):
        parse_family_text("{not json")
