import json
import math

import numpy as np
import pytest

from hardyring import claims
from hardyring.claims import (
    CLAIM_IDS, ClaimReport, k3_half_quantities, k4_chain_constants, k4_chain_lhs,
    margin_ok, run_claim, scan_k3_threshold, verify_k3_largeN_inequalities,
)
from hardyring.errors import DomainError
from hardyring.green import coefficient


@pytest.fixture(scope="module")
def reports():
    return {cid: run_claim(cid, 7) for cid in CLAIM_IDS}


@pytest.mark.parametrize("cid", ["k2-two-points", "k3-threshold", "k3-inequalities",
                                 "k4-nonexistence", "k5-existence"])
def test_verdicts_n7(reports, cid):
    assert reports[cid].verdict == "verified"


def test_second_root_probe_is_not_falsified(reports):
    assert reports["k5-second-root"].verdict in ("verified", "inconclusive")


def test_report_schema(reports):
    for cid, rep in reports.items():
        d = json.loads(rep.to_json())
        assert set(d) == {"claim_id", "dim", "verdict", "evidence", "tolerances"}
        assert d["claim_id"] == cid
        assert d["tolerances"]["margin_factor"] == 10.0
        for e in d["evidence"]:
            assert set(e) == {"param", "quantity", "value"}


def test_reports_reproducible(reports):
    again = run_claim("k5-existence", 7)
    assert again.to_json() == reports["k5-existence"].to_json()
    assert run_claim("k4-nonexistence", 9).to_json() == run_claim("k4-nonexistence", 9).to_json()


def test_invalid_verdict_and_claim():
    with pytest.raises(ValueError):
        ClaimReport("x", 7, "probably")
    with pytest.raises(ValueError):
        run_claim("k9", 7)
    with pytest.raises(DomainError):
        run_claim("k2-two-points", 6)


def test_margin_rule():
    u = np.finfo(float).eps / 2
    assert margin_ok(11 * u, 1.0)
    assert not margin_ok(9 * u, 1.0)


def test_k3_threshold_recorded(reports):
    rep = reports["k3-threshold"]
    assert rep.lookup("N_min") == [13]
    assert rep.lookup("N_min_refined") == [13]
    assert rep.lookup("two_roots_for_all_N_from_N_min") == [True]
    assert rep.lookup("iota1_sign_changes")[0] == 0
    roots = [e.value for e in rep.evidence if e.quantity == "iota1_root"]
    assert np.allclose(roots, [0.540023, 0.562987], atol=1e-6)


def test_k3_threshold_short_range_inconclusive():
    rep = scan_k3_threshold(12, n=2000, refine=2)
    assert rep.verdict == "inconclusive"
    assert rep.lookup("N_min") == ["none"]


def test_dtau_exact_at_half():
    for N in range(7, 61):
        q = k3_half_quantities(N)
        assert abs(q["dtau1"] / q["dtau1_exact"] - 1) <= 1e-14


def test_k3_inequality_thresholds():
    rep = verify_k3_largeN_inequalities(7, 200)
    got = {e.quantity: e.value for e in rep.evidence if e.quantity.startswith("threshold_")}
    assert got == {
        "threshold_dgamma1_bound": 26, "threshold_ratio_bound": 25,
        "threshold_premise": 7, "threshold_iota1_half_negative": 20,
    }


@pytest.mark.parametrize("N", [7, 12, 20, 30])
def test_k4_verified_and_gamma2_negative(N):
    assert run_claim("k4-nonexistence", N).verdict == "verified"
    assert coefficient("gamma2", claims.T_A, N)[0] < 0


def test_k4_constants():
    c = k4_chain_constants()
    assert c["equ4"] == pytest.approx(1.356, abs=5e-4)
    assert c["equ5"] == pytest.approx(1.818, abs=5e-4)
    assert c["equ6"] == pytest.approx(1.018, abs=5e-4)
    assert c["fprime_bound"] == pytest.approx(0.435, abs=5e-4)
    assert 1 - claims.T_A**2 == pytest.approx(math.sqrt(2) * claims.T_A, rel=1e-15)


def test_k4_chain_minimum_n7():
    t = np.linspace(claims.T_A, claims.T_B, 20001)[1:-1]
    assert np.min(k4_chain_lhs(t, 7)) == pytest.approx(1.0189, abs=1e-4)


def test_k5_existence_evidence(reports):
    rep = reports["k5-existence"]
    assert rep.lookup("iota3_sign_changes") == [1]
    t1 = rep.lookup("t1")[0]
    assert 0 < t1 < rep.lookup("t1_star")[0]
    assert rep.lookup("det_sign") == rep.lookup("gamma3_sign") == [-1]
    assert rep.lookup("stationarity_residual")[0] <= 1e-10
    assert rep.lookup("hessian_degenerate") == [False]
    assert rep.lookup("polished_grad_norm")[0] <= 1e-10


@pytest.mark.parametrize("N", [8, 10, 15])
def test_k5_existence_other_dimensions(N):
    assert run_claim("k5-existence", N).verdict == "verified"
