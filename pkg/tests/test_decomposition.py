from __future__ import annotations

import json

import numpy as np
import pytest

from truecomplexity import field as fd
from truecomplexity.decomposition import (Decomposition, PhaseCombination, gap_length, load_decomposition,
                                          rank_gap_filter, save_decomposition, verify_decomposition)
from truecomplexity.constructions import offdiagonal_example
from truecomplexity.errors import ContractError
from truecomplexity.linsys import progression_system
from truecomplexity.poly import parse_polynomial


def zeros(p, n):
    return fd.TableFunction.zeros(p, n)


def test_gap_length():
    assert gap_length(1.0, 0.25, 5) == 2        # 5^-2 <= 1/16 < 5^-1
    assert gap_length(3.0, 0.5, 7) == 2         # 9/49 <= 1/4 < 9/7
    assert gap_length(0.1, 0.25, 5) == 1
    for M, eps, p in [(1.3, 0.1, 3), (2.0, 0.3, 5)]:
        t = gap_length(M, eps, p)
        assert M * M * p ** -t <= eps ** 2 < M * M * p ** -(t - 1) or t == 1


def test_filter_identity_when_all_ranks_high():
    p, n = 5, 3
    high = parse_polynomial("x1^2 + x2^2 + x3^2", p, n)
    comb = PhaseCombination.of([(1.0, high)])
    h = fd.TableFunction(p, n, np.full(p ** n, 0.01))
    f = comb.table() + h
    rep = rank_gap_filter(f, comb, zeros(p, n), h, 0.25, 1.0, 1)
    assert rep.low == () and rep.high == (0,)
    assert rep.decomposition.h.allclose(h)


def test_filter_drops_spurious_pair():
    p, n = 7, 3
    high = parse_polynomial("x1^2 + x2^2 + x3^2", p, n)
    low = parse_polynomial("x1 + 2", p, n)
    comb = PhaseCombination.of([(1.0, high), (1.0, low), (-1.0, low)])
    f = comb.table()
    rep = rank_gap_filter(f, comb, zeros(p, n), zeros(p, n), 0.5, 3.0, 1)
    assert rep.t == 2 and rep.low == (1, 2) and rep.high == (0,)
    assert rep.fL_norm < 1e-12
    assert rep.h2_norm < 1e-12
    assert rep.decomposition.reconstruction_error() < 1e-9
    assert all(b.holds for b in rep.bounds)


def test_filter_light_low_term():
    p, n = 5, 3
    high = parse_polynomial("x1^2 + x2^2 + 2*x3^2", p, n)
    low = parse_polynomial("x2 + 3*x3", p, n)
    comb = PhaseCombination.of([(0.2, low), (1.0, high)])
    f = comb.table()
    rep = rank_gap_filter(f, comb, zeros(p, n), zeros(p, n), 0.25, comb.M, 1)
    assert rep.low == (0,) and rep.high == (1,)
    assert rep.h2_norm == pytest.approx(0.2)
    assert rep.guarantee_holds and all(b.holds for b in rep.bounds)
    assert not rep.precondition_holds  # f itself is not uniform here; reported, not enforced


def test_filter_contract_violations():
    p, n = 5, 2
    q = parse_polynomial("x1*x2", p, n)
    comb = PhaseCombination.of([(1.0, q)])
    f = comb.table()
    with pytest.raises(ContractError) as exc:
        rank_gap_filter(f + fd.TableFunction.constant(p, n, 0.5), comb, zeros(p, n), zeros(p, n), 0.25, 1.0, 1)
    assert "f != sum" in exc.value.violations[0]
    with pytest.raises(ContractError):
        rank_gap_filter(f, comb, zeros(p, n), zeros(p, n), 0.25, 0.5, 1)
    big_h = fd.TableFunction.constant(p, n, 0.5)
    with pytest.raises(ContractError):
        rank_gap_filter(f + big_h, comb, zeros(p, n), big_h, 0.25, 1.0, 1)


def test_verify_trivial_decomposition():
    p, n = 5, 2
    f = fd.TableFunction.random(p, n, np.random.default_rng(0), kind="real") * 0.01
    dec = Decomposition(f, PhaseCombination.of([], p, n), f, zeros(p, n), {"k": 2, "eta": 0.05, "epsilon": 0.1})
    rep = verify_decomposition(dec)
    assert rep.passed, rep.failed()


def test_verify_example_phase_and_negative_control():
    w = offdiagonal_example(progression_system(4, 5), [2, 2, 2, 2], 2, seed=1)
    q = w.exponents[0]
    comb = PhaseCombination.of([(1.0, q)])
    p, n = 5, 2
    params = {"k": 2, "s": 2, "M0": 1.0, "eta": 1e-9, "epsilon": 0.1}
    dec = Decomposition(comb.table(), comb, zeros(p, n), zeros(p, n), params)
    assert verify_decomposition(dec).passed
    h = fd.TableFunction.constant(p, n, 0.05)
    ok = Decomposition(comb.table() + h, comb, zeros(p, n), h, params)
    assert verify_decomposition(ok).passed
    bad_h = h * 10
    bad = Decomposition(comb.table() + bad_h, comb, zeros(p, n), bad_h, params)
    assert verify_decomposition(bad).failed() == ["||h||_2 <= epsilon"]


def test_save_load_roundtrip(tmp_path):
    p, n = 5, 2
    comb = PhaseCombination.of([(0.5, parse_polynomial("x1*x2", p, n)), (-0.25, parse_polynomial("x2", p, n))])
    rng = np.random.default_rng(2)
    g = fd.TableFunction.random(p, n, rng) * 1e-3
    h = fd.TableFunction.random(p, n, rng) * 1e-2
    dec = Decomposition(comb.table() + g + h, comb, g, h, {"k": 2, "epsilon": 0.1, "M0": 1.0})
    doc = save_decomposition(dec, tmp_path / "dec.json")
    assert doc["terms"][0]["polynomial_text"] == "x1*x2"
    assert json.loads((tmp_path / "dec.json").read_text())["f_ref"] == "dec.f.bin"
    back = load_decomposition(tmp_path / "dec.json")
    assert back.f.allclose(dec.f, atol=0) and back.h.allclose(h, atol=0)
    assert back.combination == comb
    assert back.params["epsilon"] == 0.1 and back.params["M0"] == 1.0
