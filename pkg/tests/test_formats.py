import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nspdpp.core import Element, Pattern, SequenceDatabase
from nspdpp.formats import (FormatError, format_pattern, format_sequences, parse_pattern,
                            parse_patterns, parse_sequences, read_patterns, write_patterns)
from nspdpp.miner import mine_nsp


def test_parse_sequences_basic():
    db = parse_sequences("1 2 -1 3 -1 -2\n# comment\n\n3 -1 -2\n")
    assert db.sequences == (((1, 2), (3,)), ((3,),))
    assert db.labels == ("1", "2", "3")


def test_labels_are_densely_renumbered_in_numeric_order():
    db = parse_sequences("10 -1 9 -1 -2\n100 -1 -2\n")
    assert db.labels == ("9", "10", "100")
    assert db.sequences == (((2,), (1,)), ((3,),))
    assert format_sequences(db) == "10 -1 9 -1 -2\n100 -1 -2\n"


def test_negated_pattern_token_forms():
    db = parse_sequences("1 -1 2 -1 3 -1 -2\n")
    want = Pattern.of(Element.of(1), Element.of(2, negative=True), Element.of(3))
    assert parse_pattern("1 -1 ! 2 -1 3 -1 -2", db) == want
    assert parse_pattern("1 -1 !2 -1 3 -1 -2", db) == want
    assert format_pattern(want, db.labels) == "1 -1 ! 2 -1 3 -1 -2"


@pytest.mark.parametrize("text", ["", "# only comments\n", "1 -1 -1 -2\n", "! 1 -1 -2\n"])
def test_bad_sequence_files(text):
    with pytest.raises(FormatError):
        parse_sequences(text)


def test_pattern_errors():
    db = parse_sequences("1 -1 2 -1 -2\n")
    with pytest.raises(FormatError):
        parse_pattern("7 -1 -2", db)
    with pytest.raises(FormatError):
        parse_pattern("1 ! 2 -1 -2", db)


def test_pattern_file_round_trip(tmp_path):
    db = parse_sequences("1 -1 3 -1 -2\n1 -1 2 -1 3 -1 -2\n")
    coll = mine_nsp(db, 0.5)
    path = tmp_path / "p.txt"
    write_patterns(coll, path, db.labels)
    text = path.read_text()
    assert text.startswith("# min_sup=0.5")
    assert "# sup=" in text.splitlines()[1]
    back = read_patterns(path, db)
    assert back.patterns == coll.patterns
    assert back.supports == coll.supports
    assert back.source_min_sup == 0.5


def test_missing_support_annotations_are_recomputed():
    db = parse_sequences("1 -1 -2\n2 -1 -2\n")
    coll = parse_patterns("1 -1 -2\n", db)
    assert coll.supports == [0.5]


seqs = st.lists(st.lists(st.sets(st.integers(1, 9), min_size=1, max_size=3),
                         min_size=1, max_size=4), min_size=1, max_size=5)


@settings(max_examples=100, deadline=None)
@given(seqs)
def test_sequence_text_round_trip(raw):
    db = SequenceDatabase.from_lists(raw, 9)
    again = parse_sequences(format_sequences(db))
    relabel = [[tuple(sorted(int(again.labels[i - 1]) for i in el)) for el in s]
               for s in again.sequences]
    assert relabel == [list(s) for s in db.sequences]
