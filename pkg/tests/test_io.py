import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_nonneg_product
from exactnmf import io
from exactnmf.exceptions import ParseError
from exactnmf.geometry import Simplex
from exactnmf.reductions import NmfInstance, nmf_to_p1, p1_to_restricted
from exactnmf.sat_gadget import Cnf3, encode, lemma_gadget

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=finite))
def test_matrix_round_trip_is_lossless(M):
    np.testing.assert_array_equal(io.parse_matrix(io.format_matrix(M)), M)


def test_matrix_parse_errors():
    for text in ["", "2 2\n1 2\n", "1 2\n1 x\n", "1 2\n1 2 3\n", "0 3\n", "1 1\n1\n2\n", "1 1\nnan\n", "a b\n"]:
        with pytest.raises(ParseError):
            io.parse_matrix(text)


def test_matrix_comments_and_blank_lines():
    assert io.parse_matrix("# header\n2 1\n\n1 # first\n2\n").tolist() == [[1.0], [2.0]]


def test_instance_and_simplex_round_trip():
    inst, T0, _ = lemma_gadget()
    back = io.parse_instance(io.format_instance(inst))
    np.testing.assert_array_equal(back.P.A, inst.P.A)
    np.testing.assert_array_equal(back.P.b, inst.P.b)
    np.testing.assert_array_equal(back.S, inst.S)
    np.testing.assert_array_equal(io.parse_simplex(io.format_simplex(T0)).vertices, T0.vertices)
    assert io.file_tag(io.format_instance(inst)) == "intermediate-simplex"
    assert io.file_tag("2 2\n1 0\n0 1\n") is None


def test_typed_parse_errors():
    _, T0, _ = lemma_gadget()
    with pytest.raises(ParseError):
        io.parse_instance(io.format_simplex(T0))
    with pytest.raises(ParseError):
        io.parse_simplex("simplex\n2 2\n0 0\n1 1\n")
    with pytest.raises(ParseError):
        io.parse_simplex("simplex\n")


def test_layout_and_nmf_instance_round_trip():
    _, lay = encode(Cnf3.from_ints(4, [(1, -2, 3), (-4, 2, 1)]))
    back = io.parse_layout(io.format_layout(lay))
    assert back == lay and back.formula.q == 2
    with pytest.raises(ParseError):
        io.parse_layout("gadget-layout\n3 1\n1 1 2\n")
    inst = NmfInstance(np.array([[1.0, 2.0], [3.0, 5.0]]), 2)
    again = io.parse_nmf_instance(io.format_nmf_instance(inst))
    np.testing.assert_array_equal(again.A, inst.A)
    assert again.k == 2


def test_transcript_round_trip(rng):
    A, _, _ = random_nonneg_product(rng, 4, 4, 2)
    A = np.vstack([A, np.zeros((1, 4))])
    _, tr = p1_to_restricted(nmf_to_p1(NmfInstance(A, 2)))
    back = io.parse_transcript(io.format_transcript(tr))
    assert back.deleted_rows == tr.deleted_rows == (4,)
    np.testing.assert_array_equal(back.Qhat, tr.Qhat)
    np.testing.assert_array_equal(back.D_diag, tr.D_diag)
    np.testing.assert_array_equal(back.original_instance.W0, tr.original_instance.W0)


def test_assignment_format():
    assert io.parse_assignment("0110\n") == (False, True, True, False)
    assert io.format_assignment((True, False)) == "10\n"
    for bad in ["", "012", "1 a"]:
        with pytest.raises(ParseError):
            io.parse_assignment(bad)


def test_negative_zero_is_written_as_zero():
    assert io.fmt(-0.0) == "0"
    assert io.fmt(0.1) == "0.10000000000000001"


def test_read_missing_file(tmp_path):
    with pytest.raises(ParseError):
        io.read_text(tmp_path / "nope.txt")


def test_simplex_requires_d_plus_one_vertices():
    with pytest.raises(ParseError):
        io.parse_simplex(io.format_simplex(Simplex([[0.0], [1.0]])).replace("2 1", "3 1"))
