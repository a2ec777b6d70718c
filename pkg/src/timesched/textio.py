"""Line-oriented text formats for instances and schedules.

Instance layout (``#`` starts a comment, blank lines ignored)::

    <model> <n> <m> <T>
    <id> <weight> <size>            # identical / related, one line per job
    speeds <num/den> ... <num/den>  # related only, m entries
    <id> <weight>                   # unrelated, one line per job
    <machine> <p_0> ... <p_n-1>     # unrelated, m lines, '-' = not processable
    edges
    <j> <k>                         # one precedence pair per line

Schedule layout::

    schedule <n>
    <job> <machine> <start> <end>

Rationals are written as ``num/den``; integers as plain digits.
"""
from __future__ import annotations

from fractions import Fraction

from .instance import Instance, Job, Model, PrecedenceDag, Schedule


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


def _int(tok: str, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(no, f"expected integer, got {tok!r}") from None


def _rational(tok: str, no: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(no, f"expected rational num/den, got {tok!r}") from None


def format_rational(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(int(v))


def write_instance(inst: Instance) -> str:
    out = [f"{inst.model.value} {inst.n} {inst.m} {inst.T}"]
    if inst.model is Model.UNRELATED:
        out += [f"{job.id} {job.weight}" for job in inst.jobs]
        for i, row in enumerate(inst.pmatrix):
            out.append(" ".join([str(i)] + ["-" if v is None else str(v) for v in row]))
    else:
        out += [f"{job.id} {job.weight} {job.size}" for job in inst.jobs]
        if inst.model is Model.RELATED:
            out.append(" ".join(["speeds"] + [format_rational(Fraction(s)) for s in inst.speeds]))
    out.append("edges")
    out += [f"{a} {b}" for a, b in inst.dag.edges]
    return "\n".join(out) + "\n"


def read_instance(text: str) -> Instance:
    lines = list(_lines(text))
    if not lines:
        raise ParseError(1, "empty instance file")
    no, head = lines[0]
    if len(head) != 4 or head[0] not in {m.value for m in Model}:
        raise ParseError(no, "malformed header, expected '<model> <n> <m> <T>'")
    model = Model(head[0])
    n, m, T = (_int(t, no) for t in head[1:])
    if n < 0 or m < 1:
        raise ParseError(no, "malformed header: need n >= 0 and m >= 1")
    pos = 1

    def take(what):
        nonlocal pos
        if pos >= len(lines):
            last = lines[-1][0] if lines else 1
            raise ParseError(last + 1, f"unexpected end of file, expected {what}")
        item = lines[pos]
        pos += 1
        return item

    jobs = []
    width = 2 if model is Model.UNRELATED else 3
    for j in range(n):
        no, toks = take(f"job line {j}")
        if len(toks) != width:
            raise ParseError(no, f"job line needs {width} fields")
        if _int(toks[0], no) != j:
            raise ParseError(no, f"expected job id {j}")
        size = _int(toks[2], no) if width == 3 else None
        jobs.append(Job(j, _int(toks[1], no), size))

    speeds = pmatrix = None
    if model is Model.RELATED:
        no, toks = take("speeds line")
        if toks[0] != "speeds" or len(toks) != m + 1:
            raise ParseError(no, f"expected 'speeds' followed by {m} rationals")
        speeds = tuple(_rational(t, no) for t in toks[1:])
    elif model is Model.UNRELATED:
        rows = []
        for i in range(m):
            no, toks = take(f"processing row for machine {i}")
            if len(toks) != n + 1 or _int(toks[0], no) != i:
                raise ParseError(no, f"expected machine {i} followed by {n} entries")
            rows.append(tuple(None if t == "-" else _int(t, no) for t in toks[1:]))
        pmatrix = tuple(rows)

    edges = []
    if pos < len(lines):
        no, toks = take("edges")
        if toks != ["edges"]:
            raise ParseError(no, "expected 'edges' section")
        while pos < len(lines):
            no, toks = take("edge")
            if len(toks) != 2:
                raise ParseError(no, "edge line needs two job ids")
            a, b = _int(toks[0], no), _int(toks[1], no)
            if not (0 <= a < n and 0 <= b < n):
                raise ParseError(no, f"edge ({a}, {b}): index out of range")
            edges.append((a, b))
    return Instance(model, tuple(jobs), m, T, PrecedenceDag(n, tuple(edges)), speeds, pmatrix)


def write_schedule(sched: Schedule) -> str:
    out = [f"schedule {sched.n}"]
    for j, (i, s, e) in enumerate(sched.rows()):
        out.append(f"{j} {i} {format_rational(s)} {format_rational(e)}")
    return "\n".join(out) + "\n"


def _time(tok: str, no: int):
    v = _rational(tok, no)
    return v if "/" in tok else int(v)


def read_schedule(text: str) -> Schedule:
    lines = list(_lines(text))
    if not lines or lines[0][1][0] != "schedule" or len(lines[0][1]) != 2:
        raise ParseError(lines[0][0] if lines else 1, "malformed header, expected 'schedule <n>'")
    n = _int(lines[0][1][1], lines[0][0])
    if len(lines) - 1 != n:
        raise ParseError(lines[-1][0], f"expected {n} job lines, found {len(lines) - 1}")
    rows = []
    for j, (no, toks) in enumerate(lines[1:]):
        if len(toks) != 4 or _int(toks[0], no) != j:
            raise ParseError(no, f"expected '{j} <machine> <start> <end>'")
        rows.append((_int(toks[1], no), _time(toks[2], no), _time(toks[3], no)))
    return Schedule.from_rows(rows)
