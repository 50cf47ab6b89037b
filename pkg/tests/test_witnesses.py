import math

import numpy as np
import pytest

from anisotl.errors import InvalidInput, NotFound
from anisotl.matrices import ExpansiveMatrix
from anisotl.norms import norm_infty_q
from anisotl.spaces import SpaceParams
from anisotl.witnesses import (
    MCConfig, _ell0, case1_audit, case1_witness, case2_witness, delta_witness, family_builder,
    find_separating_points, manifest, multiscale_witness, single_scale_witness, verify_norm_law,
)
from anisotl.geometry import cubes_meeting_region, Box
from conftest import FROZEN, diag, rot2
from fractions import Fraction

A, B = diag(2, 2), rot2()


@pytest.fixture(scope="module")
def sep3():
    return find_separating_points(A, B, 3)


def test_separation_example(sep3):
    assert sep3.js == (1, 2, 3) and sep3.x0 == (1.0, 0.0)
    assert sep3.min_distance == pytest.approx(FROZEN["sep_min_distance"], abs=1e-12)
    assert sep3.delta <= 0.4794255386
    assert sep3.r_prime == pytest.approx(1 + 1e-6)
    assert sep3.eps == pytest.approx(FROZEN["sep_eps"], rel=1e-8)
    assert sep3.check(A, B)["ok"]
    assert sep3.disjoint_for(A, B, 1000.0)


def test_separation_not_found_for_equal_matrices():
    with pytest.raises(NotFound):
        find_separating_points(B, B, 3)


def test_delta_witness_predictions():
    assert delta_witness(2, SpaceParams(A, 0, 1, 2)).predicted == pytest.approx(4.0)
    assert delta_witness(0, SpaceParams(ExpansiveMatrix.diag(3, 5), "1/2", "1/2", 2)).predicted == pytest.approx(1.0)
    assert delta_witness(1, SpaceParams(A, 0, "inf", 2)).predicted == pytest.approx(0.5)


def test_single_scale_witness():
    s = SpaceParams(A, 0, 2, 1)
    assert single_scale_witness({(0, 0): 3, (5, 0): 4}, s).predicted == pytest.approx(5)
    assert single_scale_witness({(0, 0): 1}, SpaceParams(A, 0, "1/2", 1)).predicted == 1
    fam = single_scale_witness({(2 * i, 0): 1 for i in range(7)}, SpaceParams(A, 0, 3, 1))
    assert fam.predicted == pytest.approx(7 ** (1 / 3))
    assert fam.measure().value == pytest.approx(7 ** (1 / 3), abs=1e-9)


def test_case1_geometry(sep3):
    sep2 = find_separating_points(A, B, 2)
    pair = case1_witness(A, B, sep2, [1, 1], 1, 0, q1=2)
    assert pair.a.params["r1"] == pytest.approx(FROZEN["case1_r1_N2"])
    assert pair.a.params["R"] == pytest.approx(2 * FROZEN["case1_r1_N2"] / sep2.eps)
    audit = case1_audit(case1_witness(A, B, sep3, [1, 1, 1], 1, 0, q1=2), A, B)
    assert audit["ok"], audit
    assert pair.a.sequence.spot_check()


def test_case1_single_active_scale(sep3):
    pair = case1_witness(A, B, sep3, [1, 0, 0], 1, 0, q1=2)
    ra, rb = pair.a.measure("mc", 400_000, 0), pair.b.measure("mc", 400_000, 0)
    assert pair.a.predicted == pytest.approx(pair.b.predicted)
    assert rb.value / ra.value == pytest.approx(1, abs=4 * math.hypot(ra.error / ra.value, rb.error / rb.value))


def test_case2_parameters(sep3):
    assert _ell0(A, Fraction(1, 10)) == FROZEN["ell0_2I"]
    pair = case2_witness(A, B, sep3, [1, 1, 1], 0, q1=1)
    assert pair.a.params["j0"] == 7 and pair.a.audits == {"Omega_in_Q": True, "Lambda_disjoint": True}
    with pytest.raises(InvalidInput):
        case2_witness(A, B, sep3, [1, 1, 1], 0, delta=0.2)


def test_case2_single_scale_ratio_one():
    sep = find_separating_points(A, B, 1)
    pair = case2_witness(A, B, sep, [1], 0, q1=1)
    ra = norm_infty_q(pair.a.sequence, pair.a.space).value
    rb = norm_infty_q(pair.b.sequence, pair.b.space).value
    assert ra == pytest.approx(1.0, abs=1e-9) and rb == pytest.approx(1.0, abs=1e-9)


def test_multiscale_index_sets():
    fam = multiscale_witness([1], SpaceParams(A, 0, 1, 2))
    lo, hi = fam.sequence.index_box(0)
    got = sorted((x, y) for x in range(lo[0], hi[0] + 1) for y in range(lo[1], hi[1] + 1))
    assert got == sorted(tuple(k) for k in FROZEN["multiscale_I0"])
    assert got == cubes_meeting_region(A, 0, Box((0, 0), (1, 1)), closed=True)
    assert fam.measure().value >= 1.0
    assert multiscale_witness([0, 0], SpaceParams(A, 0, 1, 2)).measure().value == 0


def test_multiscale_general_matrix_materializes():
    M = ExpansiveMatrix([[1, 1], [-1, 1]])
    fam = multiscale_witness([1, 1, 1], SpaceParams(M, 0, 1, 1))
    assert not fam.params["boxed"]
    r = fam.measure()
    assert r.exact and r.value >= 3.0


def test_verify_delta_family_exact_slope():
    s = SpaceParams(A, 0, 1, 2)
    law = verify_norm_law(lambda j0: delta_witness(j0, s), [-2, -1, 0, 1, 2], axis="linear")
    assert law.slope == pytest.approx(-math.log(4) * (0 + 0.5 - 1), abs=1e-9)
    assert law.ratio_min == pytest.approx(1) and law.ratio_max == pytest.approx(1)
    assert not law.inconclusive


def test_verify_multiscale_infinity():
    build = family_builder("multiscale", A, p="inf", q="2")
    law = verify_norm_law(build, [2, 4, 8])
    assert law.slope == pytest.approx(0.5, abs=1e-9)


def test_manifest_regenerates_bitwise():
    cfg = MCConfig(50_000, 3, "mc")
    m = manifest("case1", A, B, [2, 3], cfg, p="1", q1="2", alpha="0")
    assert m["seed"] == 3 and m["A"]["mode"] == "rational" and m["B"]["mode"] == "float"
    from anisotl.io import matrix_from_json
    A2, B2 = matrix_from_json(m["A"]), matrix_from_json(m["B"])
    b1 = family_builder("case1", A, B, p="1", q="2")
    b2 = family_builder(m["family"], A2, B2, p=m["params"]["p"], q=m["params"]["q1"])
    r1 = b1(2).a.measure("mc", cfg.samples, cfg.seed)
    r2 = b2(2).a.measure("mc", cfg.samples, cfg.seed)
    assert (r1.value, r1.error) == (r2.value, r2.error)
