import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from analogtraj.errors import CapacityError, DimensionError
from analogtraj.pauli import (
    PauliString,
    anticommutant,
    anticommutation_table,
    commutes,
    enumerate_strings,
    string_index,
)

labels = st.integers(1, 3).flatmap(
    lambda m: st.tuples(st.text("IXYZ", min_size=m, max_size=m), st.text("IXYZ", min_size=m, max_size=m))
)


def test_label_roundtrip():
    for lab in ("I", "X", "Y", "Z", "XYZI", "IIZX"):
        assert PauliString.from_label(lab).label == lab


def test_encoding_per_qubit():
    assert (PauliString.from_label("X").x_bits, PauliString.from_label("X").z_bits) == (1, 0)
    assert (PauliString.from_label("Z").x_bits, PauliString.from_label("Z").z_bits) == (0, 1)
    assert (PauliString.from_label("Y").x_bits, PauliString.from_label("Y").z_bits) == (1, 1)
    assert PauliString.from_label("II").is_identity


def test_commutes_examples():
    assert commutes(PauliString.from_label("XI"), PauliString.from_label("XX"))
    assert not commutes(PauliString.from_label("X"), PauliString.from_label("Y"))
    assert commutes(PauliString.from_label("XX"), PauliString.from_label("ZZ"))
    assert not commutes(PauliString.from_label("XI"), PauliString.from_label("ZZ"))


def test_commutes_size_mismatch():
    with pytest.raises(DimensionError):
        commutes(PauliString.from_label("X"), PauliString.from_label("XX"))


@given(labels)
def test_commutes_matches_matrices(pair):
    a, b = (PauliString.from_label(x) for x in pair)
    ma, mb = a.matrix(), b.matrix()
    assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)


def test_enumeration_order_and_size():
    assert [s.label for s in enumerate_strings(1)] == ["I", "Z", "X", "Y"]
    for m in (1, 2, 3):
        strings = enumerate_strings(m)
        assert len(strings) == 4**m
        assert len(set(strings)) == 4**m
        assert strings[0].is_identity
        assert [string_index(s) for s in strings] == list(range(4**m))


def test_enumeration_bounds():
    with pytest.raises(CapacityError):
        enumerate_strings(0)
    with pytest.raises(CapacityError):
        enumerate_strings(9)


def test_anticommutant_sizes():
    # a(S) of any non-identity string has exactly half the strings
    for m in (1, 2):
        for s in enumerate_strings(m)[1:]:
            assert len(anticommutant(s)) == 4**m // 2
    assert anticommutant(PauliString.identity(2)) == []
    assert {s.label for s in anticommutant(PauliString.from_label("X"))} == {"Z", "Y"}


def test_anticommutation_table_matches_pairs():
    strings = enumerate_strings(2)
    table = anticommutation_table(2)
    for i, j in itertools.product(range(16), repeat=2):
        assert table[i, j] == (not commutes(strings[i], strings[j]))


def test_matrix_kron_order():
    m = PauliString.from_label("XZ").matrix()
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    assert np.array_equal(m, np.kron(x, z))
