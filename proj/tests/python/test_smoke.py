import math

import numpy as np
import pytest

import rbsgmkit

SMALL = {
    "n": 9,
    "m": 2,
    "p": 2,
    "tol": 1e-4,
    "ns": 3,
    "nmax": 40,
    "training_size": 60,
    "mode": "compare",
    "reference": False,
}


def test_basis():
    assert rbsgmkit.basis_dimension(5, 5) == 252
    idx = rbsgmkit.enumerate_indices(2, 2)
    assert idx == [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
    assert rbsgmkit.legendre_beta(1) == pytest.approx(1 / math.sqrt(3))


def test_stochastic_matrices():
    g00 = rbsgmkit.assemble_g(0, 0, 3, 2)
    assert np.array_equal(g00, np.eye(10))
    g12 = rbsgmkit.assemble_g(1, 2, 3, 2)
    assert np.allclose(g12, g12.T, atol=1e-15)
    h = rbsgmkit.assemble_h(3, 2)
    assert h[0] == 1.0 and not np.any(h[1:])


def test_kl_eigenvalues():
    one = rbsgmkit.kl_1d_eigenvalues(1.0, -1.0, 1.0, 8)
    assert all(a >= b for a, b in zip(one, one[1:]))
    two = rbsgmkit.kl_2d_eigenvalues(1.0, [-1.0, 1.0, -1.0, 1.0], 9, 5)
    assert two[0] == pytest.approx(one[0] ** 2)
    assert len(two) == 5


def test_secant():
    assert rbsgmkit.secant_predict(15, -2.0, 30, -3.5, 1e-5, 15, 500) == 45


def test_parse_config():
    cfg = rbsgmkit.parse_config("problem = helmholtz\nmu = 10\n")
    assert cfg["problem"] == "helmholtz-dirichlet"
    assert cfg["sigma"] == pytest.approx(1.0)
    assert rbsgmkit.parse_config(SMALL)["n"] == 9
    with pytest.raises(rbsgmkit.ConfigError):
        rbsgmkit.parse_config("p = -1\n")
    with pytest.raises(ValueError):
        rbsgmkit.parse_config({"nonsense": 1})


def test_run(tmp_path):
    report, mean, var = rbsgmkit.run(SMALL, tmp_path)
    assert report["exit_code"] == 0
    assert report["rbsgm"]["converged"]
    assert report["rbsgm"]["final_relres"] <= 1e-4
    assert mean.shape == (81,) and var.shape == (81,)
    assert np.all(var >= 0.0)
    assert mean.max() > 0.0
    for name in ("report.json", "residual_curve.csv", "stats_mean.csv", "stats_var.csv"):
        assert (tmp_path / name).exists()
    again, _, _ = rbsgmkit.run(SMALL)
    assert again["rbsgm"]["selected_indices"] == report["rbsgm"]["selected_indices"]


def test_oracle_check():
    checks = rbsgmkit.oracle_check(1)
    assert len(checks) >= 10
    assert all(c["passed"] for c in checks), [c for c in checks if not c["passed"]]
