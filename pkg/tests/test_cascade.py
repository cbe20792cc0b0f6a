import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzcalc.cascade import (
    TABLE_I,
    CascadeNode,
    CascadeSpec,
    accumulate,
    build_fig2,
    build_front_section,
    dark_port_delay,
    observation_step,
    path_probability,
    spec_from_json,
    spec_to_json,
    step_distribution,
    table1_report,
)
from mzcalc.errors import CascadeConfigError, OrderingViolation, UnknownDetector

FIG2_NS = (2, 3, 4, 5, 6, 10, 12)


def naive_port(n, j, sign):
    return 0.5 * (1 + sign * math.cos(2 * math.pi * j / n))


def naive_path_sum(ns, signs, N, offset, K):
    total = 0.0
    for k in range(1, K + 1):
        j = offset + k * N
        p = 1.0
        for n, s in zip(ns, signs):
            p *= naive_port(n, j, s)
        total += p
    return total


@st.composite
def trees(draw, max_depth=3):
    counter = itertools.count()

    def make(depth):
        i = next(counter)
        kids = []
        for _ in range(2):
            if depth < max_depth and draw(st.booleans()):
                kids.append(make(depth + 1))
            else:
                kids.append(f"d{next(counter)}")
        return CascadeNode(f"L{i}", draw(st.integers(1, 30)), kids[0], kids[1],
                           draw(st.integers(0, 20)))

    return make(1)


# -- paths and probabilities ---------------------------------------------------

def test_single_loop_paths():
    spec = CascadeSpec(CascadeNode("a", 3, "X", "Y"), N=15)
    assert spec.detectors == ["X", "Y"]
    assert path_probability(spec, "X", 1) == pytest.approx(1.0)
    assert path_probability(spec, "Y", 1) == pytest.approx(0.0, abs=1e-15)
    spec4 = CascadeSpec(CascadeNode("a", 4, "X", "Y"), N=15)
    assert path_probability(spec4, "X", 1) == pytest.approx(0.5)
    assert path_probability(spec4, "X", 2) == pytest.approx(0.0, abs=1e-15)


def test_unknown_detector():
    spec = build_fig2(60, FIG2_NS)
    with pytest.raises(UnknownDetector):
        spec.path("Z")
    with pytest.raises(UnknownDetector):
        accumulate(spec, "Z")


def test_observation_index_must_be_positive():
    spec = build_fig2(60, FIG2_NS)
    with pytest.raises(ValueError):
        path_probability(spec, "A", 0)


@given(trees(), st.integers(1, 500), st.integers(0, 2000))
@settings(max_examples=200)
def test_conservation_per_step(root, N, j):
    spec = CascadeSpec(root, N)
    dist = step_distribution(spec, j)
    assert set(dist) == set(spec.detectors)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
    assert all(p >= -1e-15 for p in dist.values())


@given(trees(), st.integers(1, 500), st.integers(1, 50))
@settings(max_examples=100)
def test_conservation_without_delays(root, N, k):
    for node in CascadeSpec(root, N).nodes():
        node.start_delay = 0
    spec = CascadeSpec(root, N)
    total = sum(path_probability(spec, d, k) for d in spec.detectors)
    assert total == pytest.approx(1.0, abs=1e-12)


@given(trees(), st.integers(1, 300), st.integers(1, 40))
@settings(max_examples=100)
def test_factorized_matches_monolithic(root, N, K):
    spec = CascadeSpec(root, N)
    for det in spec.detectors:
        path = spec.path(det)
        want = naive_path_sum(path.ns, path.signs, N, path.offset, K)
        assert accumulate(spec, det, horizon=K).expected_intensity == pytest.approx(want, abs=1e-9)
        assert sum(path_probability(spec, det, k) for k in range(1, K + 1)) == pytest.approx(want, abs=1e-9)
        j = observation_step(spec, det, K)
        assert step_distribution(spec, j)[det] == pytest.approx(path_probability(spec, det, K), abs=1e-12)


def test_accumulate_uses_all_backends(backend):
    from mzcalc import kernels

    spec = build_fig2(60, FIG2_NS)
    for det in spec.detectors:
        p = spec.path(det)
        got = kernels.path_sum(p.ns, p.signs, 60, p.offset, 12, impl=backend)
        assert got == pytest.approx(naive_path_sum(p.ns, p.signs, 60, p.offset, 12), abs=1e-9)


# -- delays and the seven-loop tree --------------------------------------------

@pytest.mark.parametrize("ns, delay", [([6], 3), ([5, 7], 6), ([], 0), ([5], 3)])
def test_dark_port_delay(ns, delay):
    assert dark_port_delay(ns) == delay


def test_fig2_structure_and_delays():
    n1, n2, n3, n4, n5, n6, n7 = ns = (3, 5, 7, 9, 11, 13, 17)
    spec = build_fig2(1000, ns)
    assert spec.detectors == list("ABCDEFGH")
    want = {"A": (n1, n2, n4), "C": (n1, n2, n5), "E": (n1, n3, n6), "G": (n1, n3, n7)}
    for det, path_ns in want.items():
        assert tuple(spec.path(det).ns) == path_ns
    offsets = {d: spec.path(d).offset for d in spec.detectors}
    assert offsets["A"] == offsets["B"] == 0
    assert offsets["C"] == offsets["D"] == math.ceil(n2 / 2)
    assert offsets["E"] == offsets["H"] == math.ceil((n1 + n3) / 2)
    assert spec.path("B").signs == [1, 1, -1]
    assert spec.path("H").signs == [-1, -1, -1]


def test_fig2_all_factors():
    spec = build_fig2(60, FIG2_NS)
    a = accumulate(spec, "A")
    b = accumulate(spec, "B")
    assert a.in_units == pytest.approx(8.0)
    assert b.in_units == pytest.approx(0.0, abs=1e-12)
    assert a.units_of == a.horizon / 8


@pytest.mark.parametrize("ns", [(2, 2, 3, 4, 5, 6, 7), (7, 6, 5, 4, 3, 2, 1), (0, 1, 2, 3, 4, 5, 6)])
def test_fig2_ordering(ns):
    with pytest.raises(OrderingViolation):
        build_fig2(60, ns)


def test_fig2_needs_seven():
    with pytest.raises(ValueError):
        build_fig2(60, (2, 3, 4))


# -- front-section truth table ---------------------------------------------------

TABLE_ROWS = [
    ((2, 3, 4), (True, True, True)),
    ((2, 3, 7), (True, True, False)),
    ((2, 7, 10), (True, False, True)),
    ((2, 7, 11), (True, False, False)),
    ((7, 10, 12), (False, True, True)),
    ((7, 10, 11), (False, True, False)),
    ((7, 11, 12), (False, False, True)),
    ((7, 11, 13), (False, False, False)),
]


def test_table_has_eight_rows():
    assert sorted(TABLE_I) == sorted(flags for _, flags in TABLE_ROWS)
    for a, b, cd in TABLE_I.values():
        assert a + b + cd <= 8


@pytest.mark.parametrize("ns, flags", TABLE_ROWS)
def test_table1_lcm_horizon(ns, flags):
    rep = table1_report(60, *ns, K="lcm")
    assert rep.predicted_row == flags
    assert rep.horizon == math.lcm(*ns)
    for det, dev in rep.deviation.items():
        assert abs(dev) <= 0.5, (det, rep.in_units)
    # brute force with the same horizon
    spec = build_front_section(60, *ns)
    for det in ("A", "B", "C+D"):
        p = spec.path(det)
        want = naive_path_sum(p.ns, p.signs, 60, 0, rep.horizon)
        assert rep.intensities[det] == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("ns", [(2, 3, 4), (2, 3, 7)])
def test_table1_exact_rows_on_short_horizon(ns):
    rep = table1_report(60, *ns)
    assert rep.horizon == ns[2]
    for dev in rep.deviation.values():
        assert dev == pytest.approx(0.0, abs=1e-9)


def test_table1_all_nonfactor_exact_row():
    rep = table1_report(60, 7, 11, 13, K="lcm")
    assert rep.in_units == pytest.approx({"A": 1.0, "B": 1.0, "C+D": 2.0}, abs=1e-9)


def test_front_section_conservation():
    spec = build_front_section(60, 7, 11, 13)
    for j in range(200):
        assert sum(step_distribution(spec, j).values()) == pytest.approx(1.0, abs=1e-12)


# -- JSON ---------------------------------------------------------------------------

def test_json_round_trip():
    spec = build_fig2(60, FIG2_NS, "lcm")
    back = spec_from_json(spec_to_json(spec))
    assert back.N == 60 and back.sum_horizon == "lcm"
    assert back.detectors == spec.detectors
    for d in spec.detectors:
        assert back.path(d).ns == spec.path(d).ns
        assert back.path(d).offset == spec.path(d).offset


def test_bare_node_needs_N():
    doc = json.dumps({"label": "a", "n": 3, "bright": "X", "dark": "Y"})
    with pytest.raises(CascadeConfigError) as e:
        spec_from_json(doc)
    assert e.value.where == "N"
    assert spec_from_json(doc, N=15).N == 15


def test_cli_N_overrides_file():
    doc = json.dumps({"N": 10, "root": {"label": "a", "n": 3, "bright": "X", "dark": "Y"}})
    assert spec_from_json(doc, N=15).N == 15


@pytest.mark.parametrize(
    "root, where",
    [
        ({"label": "a", "n": 0, "bright": "X", "dark": "Y"}, "root.n"),
        ({"label": "a", "n": 3, "bright": "X"}, "root"),
        ({"label": "a", "n": 3, "bright": {"label": "b", "n": -2, "bright": "P", "dark": "Q"}, "dark": "Y"},
         "root.bright.n"),
        ({"label": "a", "n": 3, "bright": "X", "dark": "Y", "delay": -1}, "root.delay"),
        ({"label": "a", "n": 3, "bright": "X", "dark": "X"}, "root.dark"),
        ({"label": "a", "n": 3, "bright": {"label": "a", "n": 2, "bright": "P", "dark": "Q"}, "dark": "Y"},
         "root.bright"),
        ({"label": "a", "n": 3, "bright": "X", "dark": "Y", "colour": 1}, "root"),
        ({"label": "a", "n": 2.5, "bright": "X", "dark": "Y"}, "root.n"),
    ],
)
def test_config_errors_name_the_field(root, where):
    with pytest.raises(CascadeConfigError) as e:
        spec_from_json(json.dumps({"N": 15, "root": root}))
    assert e.value.where == where
    assert where in str(e.value)


def test_config_syntax_error_reports_line():
    text = '{\n  "N": 15,\n  "root": {"label": "a",, }\n}'
    with pytest.raises(CascadeConfigError) as e:
        spec_from_json(text)
    assert e.value.where.startswith("line 3 column")


@pytest.mark.parametrize("horizon", ["min", 0, -3])
def test_bad_horizon(horizon):
    with pytest.raises(CascadeConfigError):
        CascadeSpec(CascadeNode("a", 3, "X", "Y"), 15, horizon)


def test_shared_subtree_rejected():
    leaf = CascadeNode("b", 2, "P", "Q")
    with pytest.raises(CascadeConfigError):
        CascadeSpec(CascadeNode("a", 3, leaf, leaf), 15)


def test_template_parses():
    from importlib.resources import files

    text = files("mzcalc").joinpath("data/fig2_template.json").read_text()
    spec = spec_from_json(text)
    assert spec.detectors == list("ABCDEFGH")
    ref = build_fig2(60, FIG2_NS)
    assert {d: spec.path(d).offset for d in "ABCDEFGH"} == {d: ref.path(d).offset for d in "ABCDEFGH"}


def test_horizons():
    spec = build_fig2(60, (9, 13, 16, 17, 18, 19, 23))
    assert spec.horizon_for("A") == 17
    assert CascadeSpec(spec.root, 60, "lcm").horizon_for("A") == math.lcm(9, 13, 17)
    assert CascadeSpec(spec.root, 60, 40).horizon_for("H") == 40
    assert np.isclose(accumulate(spec, "A", horizon=5).units_of, 5 / 8)
