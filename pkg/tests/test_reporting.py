import copy
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import REPORTS, SYSTEMS
from nistab import fixtures as F
from nistab.errors import SchemaError
from nistab.reporting import (
    SystemFile,
    certificate_to_dict,
    dump_report,
    dump_system_file,
    load_system_file,
    options_from_file,
    parse_system_text,
    replay_report,
    system_from_dict,
    system_to_dict,
)
from nistab.tf_core import DelayedRationalTerm, ScalarTF, TransferMatrix
from nistab.verdict import AnalysisOptions, analyze

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def terms(draw):
    den = draw(st.lists(finite, min_size=1, max_size=4))
    den[-1] = draw(st.floats(0.1, 10)) if den[-1] == 0 else den[-1]
    num = draw(st.lists(finite, min_size=1, max_size=len(den)))
    delay = draw(st.one_of(st.just(0.0), st.floats(0, 20)))
    return DelayedRationalTerm(tuple(num), tuple(den), delay)


@st.composite
def systems(draw):
    n = draw(st.integers(1, 3))
    rows = []
    for _ in range(n):
        row = []
        for _ in range(n):
            ts = draw(st.lists(terms(), min_size=0, max_size=2))
            row.append(ScalarTF(tuple(ts)) if ts else ScalarTF.zero())
        rows.append(tuple(row))
    return TransferMatrix(tuple(rows))


@settings(max_examples=80, deadline=None)
@given(systems(), systems())
def test_round_trip_is_bit_exact(G, Gb):
    text = dump_system_file(SystemFile(G, Gb))
    back = parse_system_text(text)
    assert back.G == G and back.Gbar == Gb
    assert dump_system_file(back) == text


def test_missing_entries_are_zero():
    M = system_from_dict({"rows": 2, "cols": 2, "entries": []})
    assert M == TransferMatrix.zeros(2)


def test_zero_entries_not_serialized():
    assert system_to_dict(TransferMatrix.zeros(2))["entries"] == []


def test_decode_error_has_position():
    with pytest.raises(SchemaError, match="line 1, column"):
        parse_system_text("{")


def test_schema_error_has_path():
    doc = json.loads((SYSTEMS / "delay_T1.json").read_text())
    doc["G"]["entries"][0]["terms"][0]["den"] = "x"
    with pytest.raises(SchemaError, match="G/entries/0/terms/0/den"):
        parse_system_text(json.dumps(doc))


def test_improper_entry_is_schema_error():
    doc = json.loads((SYSTEMS / "delay_T1.json").read_text())
    doc["G"]["entries"][0]["terms"][0]["num"] = [0, 0, 0, 1]
    with pytest.raises(SchemaError):
        parse_system_text(json.dumps(doc))


def test_entry_outside_shape():
    with pytest.raises(SchemaError):
        system_from_dict({"rows": 1, "cols": 1, "entries": [{"row": 1, "col": 0, "terms": [{"num": [1], "den": [1]}]}]})


def test_options_parsed():
    sf = load_system_file(SYSTEMS / "arm_delta2_passivity.json")
    o = options_from_file(sf.options, tau_points=11)
    assert o.user_multipliers is not None
    assert o.tau_points == 11
    assert np.allclose(o.user_multipliers.pi0.matrix[:2, 2:], np.eye(2))


def test_report_floats_round_trip():
    G, Gb = F.delay_pair(1.0)
    opts = AnalysisOptions()
    doc = certificate_to_dict(analyze(G, Gb, opts), G, Gb, opts)
    again = json.loads(dump_report(doc))
    assert again["reports"][0]["upper_margin"] == doc["reports"][0]["upper_margin"]
    assert again["grid"]["frequencies"] == doc["grid"]["frequencies"]


def test_report_records_provenance():
    doc = json.loads((REPORTS / "arm_delta1.report.json").read_text())
    assert doc["tool"]["name"] == "nistab"
    for r in doc["reports"]:
        assert r["multiplier"]["label"] in ("Pi0", "PiInf")
        assert r["multiplier"]["construction"]
    assert doc["classification"]["G"]["axis_poles"]


@pytest.mark.parametrize("path", sorted(REPORTS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_reports_replay(path):
    res = replay_report(json.loads(path.read_text()))
    assert res.ok, res.messages
    assert res.max_margin_diff <= 1e-12


def test_tampered_report_detected():
    doc = json.loads((REPORTS / "delay_T1.report.json").read_text())
    bad = copy.deepcopy(doc)
    bad["reports"][0]["upper_margin"] += 1e-6
    assert not replay_report(bad).ok
    bad = copy.deepcopy(doc)
    bad["verdict"] = "Inconclusive"
    assert not replay_report(bad).ok
