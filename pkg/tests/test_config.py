import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maglattice.config import (
    RB87,
    TABLE1_DOCUMENT,
    BiasField,
    ConfigError,
    GeometryError,
    LatticeSpec,
    WallCondition,
    classify_wall,
    parse_kv,
    parse_spec,
    render_spec,
    spec_from_dict,
    spec_hash,
    spec_to_dict,
)


def test_reference_document_parses_to_table_values():
    spec = parse_spec(TABLE1_DOCUMENT)
    assert spec.holes_n == 11 and spec.blocks_m == 1
    assert spec.remanence_Mz == 2000.0
    assert (spec.tau_btm, spec.tau_wall) == (2.0, 1.0)
    assert (spec.alpha_h, spec.alpha_s) == (1.0, 1.0)
    assert spec.pitch == 2.0
    assert spec.block_gap == spec.alpha_s


def test_missing_bias_defaults_to_zero():
    assert parse_spec(TABLE1_DOCUMENT).bias == BiasField(0.0, 0.0, 0.0)


def test_negative_length_rejected():
    doc = TABLE1_DOCUMENT.replace("alpha_h_um  = 1", "alpha_h_um  = -1")
    with pytest.raises(ConfigError, match="non-positive length"):
        parse_spec(doc)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_spec(TABLE1_DOCUMENT + "alpha_hh_um = 2\n")


def test_missing_required_key():
    doc = "\n".join(l for l in TABLE1_DOCUMENT.splitlines() if not l.startswith("Mz_gauss"))
    with pytest.raises(ConfigError, match="Mz_gauss"):
        parse_spec(doc)


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError):
        parse_kv("holes_n = 3\nholes_n = 4\n")


@pytest.mark.parametrize("raw", ["holes_n = 2.5", "holes_n = 0", "holes_n = x"])
def test_bad_counts(raw):
    doc = TABLE1_DOCUMENT.replace("holes_n     = 11", raw)
    with pytest.raises(ConfigError):
        parse_spec(doc)


def test_block_gap_smaller_than_spacing_is_geometry_error():
    with pytest.raises(GeometryError):
        parse_spec(TABLE1_DOCUMENT + "block_gap_um = 0.5\n")


def test_non_finite_bias_rejected():
    with pytest.raises(ConfigError):
        BiasField(math.nan, 0, 0)


@pytest.mark.parametrize("tw,tb,cond", [
    (1.0, 2.0, WallCondition.NEGATIVE),
    (2.0, 2.0, WallCondition.SURFACE_EQUAL),
    (2.5, 2.0, WallCondition.POSITIVE),
])
def test_classify_wall(tw, tb, cond):
    spec = parse_spec(TABLE1_DOCUMENT).replace(tau_wall=tw, tau_btm=tb)
    assert classify_wall(spec) is cond


def test_rb87_is_low_field_seeker():
    assert RB87.gF_mF == 1.0 and RB87.is_low_field_seeker
    assert RB87.mass == pytest.approx(1.443e-25, rel=1e-3)


def test_render_is_canonical_and_hash_stable():
    a = parse_spec(TABLE1_DOCUMENT)
    b = parse_spec("\n".join(reversed(TABLE1_DOCUMENT.splitlines())))
    assert render_spec(a) == render_spec(b)
    assert spec_hash(a) == spec_hash(b)
    assert spec_hash(a) != spec_hash(a.replace(tau_wall=1.5))


lengths = st.floats(0.05, 50.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 200), m=st.integers(1, 5), ah=lengths, as_=lengths, tb=lengths, tw=lengths,
       mz=st.floats(1.0, 2e4), bx=st.floats(-100, 100), bz=st.floats(-100, 100))
def test_round_trip(n, m, ah, as_, tb, tw, mz, bx, bz):
    spec = LatticeSpec(n, ah, as_, tb, tw, mz, blocks_m=m, bias=BiasField(bx, 0.0, bz))
    again = parse_spec(render_spec(spec))
    assert again == spec
    assert spec_from_dict(spec_to_dict(spec)) == spec
    assert spec_hash(again) == spec_hash(spec)
