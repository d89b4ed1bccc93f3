import re
from pathlib import Path

import pytest

import slprove
from slprove import pure
from slprove import syntax as S
from slprove.parser import parse_program

CORPUS = Path(slprove.__file__).parent / "corpus"
CORPUS_FILES = sorted(CORPUS.glob("*.sl"))

_QUERY = re.compile(r"name\s+(\w+)\s*:")


def expected_invalid(path: Path) -> set:
    """Query names preceded by an ``// expect invalid`` comment line."""
    out, flag = set(), False
    for line in path.read_text().splitlines():
        s = line.strip()
        if s.startswith("// expect invalid"):
            flag = True
            continue
        m = _QUERY.match(s)
        if m:
            if flag:
                out.add(m.group(1))
            flag = False
    return out


def load(path: Path):
    S.restart_ids()
    pure.clear_cache()
    return parse_program(path.read_text())


def corpus_queries():
    """``(file stem, name, program, entailment, expect_valid)`` for every corpus query."""
    rows = []
    for f in CORPUS_FILES:
        bad = expected_invalid(f)
        prog = load(f)
        for name, ent in prog.queries:
            rows.append((f.stem, name, prog, ent, name not in bad))
    return rows


MOTIVATING = """\
sort node {addr next};
pred ls(x,y) := emp & x=y \\/ exists w. x->node{w} * ls(w,y);
pred tmp(x) := emp \\/ exists u. x->node{u} * tmp(u) \\/ exists u,v. x->node{u} * u->node{v} * tmp(v);
pred lseven(x,y) := emp & x=y \\/ exists u,v. x->node{u} * u->node{v} * lseven(v,y);
"""


@pytest.fixture
def lists():
    S.restart_ids()
    return parse_program(MOTIVATING)
