"""SPMF-style text formats for sequence databases and pattern collections.

Sequences: space separated item labels, ``-1`` closes an element, ``-2``
closes the sequence. Patterns use the same layout; a ``!`` token (or prefix)
in front of an element's first item negates that element. Pattern files
carry a ``# min_sup=<f>`` header and a trailing ``# sup=<f>`` per line.
"""
from __future__ import annotations

import re
from pathlib import Path

from .core import Element, Pattern, SequenceDatabase
from .miner import PatternCollection

_SUP_RE = re.compile(r"#\s*sup\s*=\s*([0-9.eE+-]+)")
_MINSUP_RE = re.compile(r"min_sup\s*=\s*([0-9.eE+-]+)")


class FormatError(ValueError):
    pass


def _label_key(label: str):
    try:
        return (0, int(label), label)
    except ValueError:
        return (1, 0, label)


def _tokenize_elements(line: str, allow_negation: bool):
    """Yield ``(labels, negative)`` per element of one line; stops at ``-2``."""
    current: list[str] = []
    negative = False
    for tok in line.split():
        if tok == "-2":
            break
        if tok == "-1":
            if not current:
                raise FormatError(f"empty element in line: {line!r}")
            yield current, negative
            current, negative = [], False
            continue
        if tok.startswith("!"):
            if not allow_negation:
                raise FormatError("negation is not allowed in data sequences")
            if current:
                raise FormatError("'!' must precede the first item of an element")
            negative = True
            tok = tok[1:]
            if not tok:
                continue
        current.append(tok)
    if current:
        yield current, negative


def _data_lines(text: str):
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line[0] in "#%@":
            continue
        yield line


def parse_sequences(text: str) -> SequenceDatabase:
    raw = []
    labels: set[str] = set()
    for line in _data_lines(text):
        seq = [el for el, _ in _tokenize_elements(line, allow_negation=False)]
        if seq:
            raw.append(seq)
            for el in seq:
                labels.update(el)
    if not raw:
        raise FormatError("no sequences found")
    ordered = sorted(labels, key=_label_key)
    ids = {lab: i for i, lab in enumerate(ordered, start=1)}
    seqs = tuple(tuple(tuple(sorted({ids[t] for t in el})) for el in s) for s in raw)
    return SequenceDatabase(seqs, len(ordered), tuple(ordered))


def read_sequences(path) -> SequenceDatabase:
    return parse_sequences(Path(path).read_text())


def format_sequences(db: SequenceDatabase) -> str:
    lines = []
    for s in db.sequences:
        toks = []
        for el in s:
            toks.extend(db.labels[i - 1] for i in el)
            toks.append("-1")
        toks.append("-2")
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def write_sequences(db: SequenceDatabase, path) -> None:
    Path(path).write_text(format_sequences(db))


def format_pattern(p: Pattern, labels) -> str:
    toks = []
    for e in p.elements:
        if e.negative:
            toks.append("!")
        toks.extend(labels[i - 1] for i in e.items)
        toks.append("-1")
    toks.append("-2")
    return " ".join(toks)


def parse_pattern(line: str, db: SequenceDatabase) -> Pattern:
    ids = {lab: i for i, lab in enumerate(db.labels, start=1)}
    elements = []
    for labs, negative in _tokenize_elements(line.split("#", 1)[0], allow_negation=True):
        try:
            items = sorted({ids[t] for t in labs})
        except KeyError as exc:
            raise FormatError(f"item {exc.args[0]!r} not in the sequence database") from None
        elements.append(Element(tuple(items), negative))
    return Pattern(tuple(elements))


def format_patterns(coll: PatternCollection, labels) -> str:
    lines = [f"# min_sup={coll.source_min_sup!r} patterns={len(coll)}"]
    for pid, p in enumerate(coll.patterns):
        lines.append(f"{format_pattern(p, labels)} # sup={coll.supports[pid]!r}")
    return "\n".join(lines) + "\n"


def write_patterns(coll: PatternCollection, path, labels) -> None:
    Path(path).write_text(format_patterns(coll, labels))


def parse_patterns(text: str, db: SequenceDatabase) -> PatternCollection:
    """Parse a pattern file against ``db``'s item dictionary.

    Missing ``# sup=`` annotations are recomputed from ``db``.
    """
    min_sup = 0.0
    patterns, sups = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _MINSUP_RE.search(line)
            if m:
                min_sup = float(m.group(1))
            continue
        patterns.append(parse_pattern(line, db))
        m = _SUP_RE.search(line)
        sups.append(float(m.group(1)) if m else None)
    return PatternCollection.build(patterns, db, min_sup, known=sups)


def read_patterns(path, db: SequenceDatabase) -> PatternCollection:
    return parse_patterns(Path(path).read_text(), db)
