import json

import pytest
from hypothesis import given, strategies as st

from kurinum.forms import (DataGap, NewformDescriptor, QuadraticCharacter, is_fundamental,
                           load_descriptor)
from oracles import eta_product


def test_bundled_labels_load():
    for lab in ("11.a1", "14.a1", "37.a1", "43.a1", "389.a1", "5.4.a.a", "5.4.a.a-chi61",
                "17.4.a.b", "17.4.a.b-chi13", "15675.ba", "20787.e"):
        f = load_descriptor(lab)
        assert f.level > 0 and f.weight in (2, 4)


def test_5_4_a_a_eigenvalues_match_eta_product():
    f = load_descriptor("5.4.a.a")
    q = eta_product([(1, 4), (5, 4)], 200)
    for ell in (2, 3, 7, 11, 13, 17, 19, 23, 97, 101, 199):
        assert f.a(ell) == q[ell]
    assert f.a(5) == q[5]


def test_twist_data():
    f0 = load_descriptor("5.4.a.a")
    f = load_descriptor("5.4.a.a-chi61")
    chi = QuadraticCharacter(61)
    assert f.level == 5 * 61 ** 2
    assert f.w == f0.w * chi(-5)
    for ell in (2, 3, 7, 43, 97):
        assert f.a(ell) == chi(ell) * f0.a(ell)
    assert f.to_dict()["twist_of"] == "5.4.a.a"


def test_cubic_field_descriptor():
    f = load_descriptor("17.4.a.b")
    assert f.field is not None and f.field.degree == 3
    a2 = f.a(2)
    # a_2 is a root of the Hecke polynomial
    h = f.hecke_poly
    acc = f.field.zero()
    for i, c in enumerate(h):
        acc = acc + a2 ** i * c
    assert acc.is_zero()


@given(st.integers(-400, 400))
def test_fundamental_discriminants(d):
    import sympy
    if d in (0, 1):
        return
    sf = all(e == 1 for e in sympy.factorint(abs(d)).values())
    want = (d % 4 == 1 and sf) or (d % 4 == 0 and (d // 4) % 4 in (2, 3)
                                    and all(e == 1 for e in sympy.factorint(abs(d // 4)).values()))
    assert is_fundamental(d) == want


def test_character_parity():
    assert QuadraticCharacter(61).parity() == 1
    assert QuadraticCharacter(-4).parity() == -1
    assert QuadraticCharacter(-4)(-1) == -1
    with pytest.raises(ValueError):
        QuadraticCharacter(9)
    with pytest.raises(ValueError):
        QuadraticCharacter(-1)


def test_parse_error_has_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"level": 11,\n "weight": 2,\n "eigenvalues": {2: 1}}')
    with pytest.raises(ValueError) as exc:
        load_descriptor(str(p))
    assert "line 3 column" in str(exc.value)


def test_missing_fields_and_gaps(tmp_path):
    with pytest.raises(ValueError):
        NewformDescriptor.from_dict({"level": 11, "weight": 2})
    f = NewformDescriptor.from_dict({"level": 11, "weight": 2, "eigenvalues": {"2": "-2"}})
    assert f.a(2) == -2
    with pytest.raises(DataGap):
        f.a(3)
    with pytest.raises(FileNotFoundError):
        load_descriptor("no-such-form")


def test_round_trip(tmp_path):
    f = load_descriptor("17.4.a.b")
    p = tmp_path / "f.json"
    p.write_text(json.dumps(f.to_dict()))
    g = load_descriptor(str(p))
    assert g.eigenvalues == f.eigenvalues and g.w == f.w
