import math

import numpy as np
import pytest

import trimode


def test_table1_derived():
    d = trimode.derived(trimode.table1())
    assert d["n_thermal"] == pytest.approx(1190663.4506340455, rel=1e-12)
    assert d["braginsky"] == pytest.approx(0.7331535916843188, rel=1e-12)


def test_closed_and_assembled_agree():
    cfg = trimode.table1()
    grid = trimode.default_grid(cfg)
    g0 = cfg["cavity"]["gamma0"]
    for squeeze in ("two_photon", "degenerate"):
        for comb in ("signal", "subtracted"):
            a = trimode.spectrum(cfg, grid, "closed", squeeze=squeeze, rate=0.5 * g0, combination=comb)
            b = trimode.spectrum(cfg, grid, "assembled", squeeze=squeeze, rate=0.5 * g0, combination=comb)
            assert np.allclose(a, b, rtol=1e-10, atol=0)


def test_budget_sums_to_total():
    cfg = trimode.table1()
    grid = np.logspace(2, 6, 40)
    b = trimode.noise_budget(cfg, grid, squeeze="two_photon", rate=1e5, combination="subtracted")
    parts = sum(v for k, v in b.items() if k != "total")
    assert np.allclose(parts, b["total"], rtol=1e-12)


def test_threshold_ratio():
    cfg = trimode.table1()
    cfg["mechanical"]["gamma_m"] = 0.0
    cfg["mechanical"]["temperature"] = 0.0
    t = trimode.threshold(cfg, 28e-6)
    assert t["band_quantum_term"] / t["sql_quantum_term"] == pytest.approx(1 / math.sqrt(3), rel=1e-12)


def test_figures():
    assert trimode.figure_ids()[0] == "fig3"
    fig = trimode.figure("fig5")
    omega, r = fig["curves"]["kappa_0.9g0"]
    assert len(omega) == 400 and r.min() < 1.0


def test_errors():
    cfg = trimode.table1()
    with pytest.raises(trimode.StabilityError):
        trimode.spectrum(cfg, [1e3], squeeze="two_photon", rate=1e7)
    with pytest.raises(trimode.ConfigError):
        trimode.spectrum({"mechanical": {}}, [1e3])
    with pytest.raises(ValueError):
        trimode.spectrum(cfg, [1e3], squeeze="bogus")


def test_simulation_is_deterministic():
    cfg = trimode.table1()
    a = trimode.simulate(cfg, 1e-3, 1e-7, seed=4)
    b = trimode.simulate(cfg, 1e-3, 1e-7, seed=4)
    assert np.array_equal(a["mechanical"], b["mechanical"])
    assert len(a["open"]) == 10000


def test_validate_small():
    cfg = trimode.table1()
    cfg["cavity"]["gamma_e"] = 0.0
    rep = trimode.validate(cfg, segments=32, omega_lo_g0=0.1)
    assert rep["segments"] == 32
    assert rep["points"]
