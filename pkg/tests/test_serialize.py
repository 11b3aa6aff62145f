"""Round trips through the JSON and CSV on-disk formats."""

import numpy as np
import pytest

from mapgroups.atlas import circle_two_charts, torus_four_charts
from mapgroups.errors import InputError
from mapgroups.fields import GridDomain, random_field, sample
from mapgroups.groups import exp_section, random_algebra_section, so3
from mapgroups.limits import TimeSampledCurve
from mapgroups.sections import random_section
from mapgroups.serialize import (
    atlas_hash,
    canonical_json,
    dump_bandlimited,
    dump_curve,
    dump_field,
    dump_group_section,
    dump_sampled,
    dump_section,
    load_bandlimited,
    load_curve,
    load_field,
    load_group_section,
    load_sampled,
    load_section,
    read_spectrum_csv,
    write_spectrum_csv,
)
from mapgroups.sobolev import rellich_spectrum


def test_canonical_json_is_key_sorted_with_newline():
    s = canonical_json({"b": 1, "a": [2, 3]})
    assert s == '{"a":[2,3],"b":1}\n'


def test_bandlimited_round_trip_bitwise():
    rng = np.random.default_rng(3)
    for m in (1, 2):
        f = random_field(m, 4, 2, rng)
        doc = dump_bandlimited(f)
        assert doc["weight_exponent_convention"] == "paper-s/2"
        back = load_bandlimited(doc)
        assert np.array_equal(back.coeffs, f.coeffs)
        assert back.modes == f.modes and back.m == f.m


def test_sampled_round_trip_keeps_parent_modes():
    rng = np.random.default_rng(5)
    f = random_field(1, 6, 2, rng)
    v = sample(f, GridDomain.box(((0.5, 3.0),), 65))
    doc = dump_sampled(v, convention="standard")
    assert doc["weight_exponent_convention"] == "standard-s"
    back = load_sampled(doc)
    assert np.array_equal(back.values, v.values)
    assert back.parent_modes == 6
    assert back.domain.window == v.domain.window


def test_dump_field_dispatches_on_type():
    rng = np.random.default_rng(7)
    f = random_field(1, 3, 1, rng)
    v = sample(f, GridDomain.full_torus(1, 33))
    assert dump_field(f)["kind"] == "bandlimited"
    assert dump_field(v)["kind"] == "sampled"
    assert np.array_equal(load_field(dump_field(f)).coeffs, f.coeffs)
    with pytest.raises(InputError):
        load_field({"kind": "mystery"})


def test_atlas_hashes_are_stable():
    assert atlas_hash(circle_two_charts()) == "6eb0321ad086"
    assert atlas_hash(torus_four_charts()) == "98595f68aa76"
    # different parameters give a different fingerprint
    assert atlas_hash(circle_two_charts(resolution=129)) != "6eb0321ad086"


def test_section_round_trip():
    rng = np.random.default_rng(9)
    a = circle_two_charts()
    sec = random_section(a, 2, rng)
    doc = dump_section(sec)
    assert doc["atlas"] == "circle2"
    assert doc["atlas_hash"] == atlas_hash(a)
    assert doc["interpolation"] == "local-poly-10"
    back = load_section(doc)
    for p, q in zip(back.pieces, sec.pieces):
        assert np.array_equal(p.values, q.values)
    assert back.tolerance == sec.tolerance


def test_section_load_rejects_stale_hash():
    rng = np.random.default_rng(11)
    doc = dump_section(random_section(circle_two_charts(), 1, rng))
    doc["atlas_hash"] = "000000000000"
    with pytest.raises(InputError):
        load_section(doc)


def test_group_section_round_trip():
    rng = np.random.default_rng(13)
    a = circle_two_charts()
    gs = exp_section(random_algebra_section(a, so3(), rng))
    back = load_group_section(dump_group_section(gs))
    assert back.group.name == "SO3"
    for p, q in zip(back.pieces, gs.pieces):
        assert np.array_equal(p, q)


def test_curve_round_trip():
    rng = np.random.default_rng(17)
    a = circle_two_charts()
    xi = random_algebra_section(a, so3(), rng)
    times = np.linspace(0.0, 1.0, 3)
    curve = TimeSampledCurve(times, tuple(xi.scaled(float(t)) for t in times))
    back = load_curve(dump_curve(curve))
    assert np.array_equal(back.times, curve.times)
    assert back.group.name == "SO3"
    for s, t in zip(back.sections, curve.sections):
        assert (s - t).sup_coord_norm() == 0.0


def test_spectrum_csv_round_trip(tmp_path):
    sig = rellich_spectrum(2.0, 1.0, 16)
    path = tmp_path / "spec.csv"
    write_spectrum_csv(path, sig, convention="paper")
    text = path.read_text()
    assert text.startswith("# weight_exponent_convention=paper-s/2\n")
    assert text.splitlines()[1] == "k_index,sigma"
    back = read_spectrum_csv(path)
    assert np.array_equal(back, sig)
