import json
import math
import os
import pathlib

import numpy as np
import pytest

import bergmanlab as bl

CONFIGS = pathlib.Path(os.environ.get("BERGMANLAB_CONFIGS", pathlib.Path(__file__).parents[2] / "configs"))


def projection_mobius(a, w):
    # phi_a(w) = (a - P_a w - s_a Q_a w) / (1 - <w, a>)
    a = np.asarray(a, complex)
    w = np.asarray(w, complex)
    aa = np.vdot(a, a).real
    if aa == 0:
        return -w
    pw = np.vdot(a, w) / aa * a
    s = math.sqrt(1 - aa)
    return (a - pw - s * (w - pw)) / (1 - np.vdot(a, w))


def test_mobius_and_distances():
    a = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    w = np.array([0.1 - 0.5j, 0.2 + 0.2j])
    np.testing.assert_allclose(bl.mobius_map(a, w), projection_mobius(a, w), atol=1e-13)
    np.testing.assert_allclose(bl.mobius_map(a, bl.mobius_map(a, w)), w, atol=1e-12)
    assert bl.pseudo_hyperbolic_distance(np.zeros(2, complex), w) == pytest.approx(np.linalg.norm(w), rel=1e-14)
    assert math.tanh(bl.hyperbolic_distance(a, w)) == pytest.approx(bl.pseudo_hyperbolic_distance(a, w), rel=1e-13)
    assert bl.hyperbolic_ball_volume(np.zeros(3, complex), 1.0) == pytest.approx(math.tanh(1.0) ** 6, rel=1e-13)


def test_outside_ball_raises():
    with pytest.raises(ValueError):
        bl.pseudo_hyperbolic_distance(np.array([1.0 + 0j, 0j]), np.zeros(2, complex))


def test_basis_and_kernel():
    assert bl.basis_size(2, 3) == 10
    assert len(bl.basis_indices(3, 2)) == math.comb(5, 3)
    z = np.array([0.3 + 0.2j, 0.1j])
    w = np.array([-0.2 + 0.0j, 0.4 - 0.1j])
    expected = (1 - np.vdot(z, w)) ** -3
    assert abs(bl.bergman_kernel(w, z) - expected) < 1e-13


def test_atom_toeplitz_is_rank_one():
    mu = bl.Measure(2)
    mu.add_atom(np.array([0.4 + 0j, 0.1j]), 0.5)
    assert mu.total_mass == pytest.approx(0.5)
    T = bl.toeplitz(mu, 4)
    assert T.shape == (15, 15)
    assert np.allclose(T, T.conj().T, atol=1e-14)
    s = np.linalg.svd(T, compute_uv=False)
    assert s[1] < 1e-12 * s[0]


def test_slice_measure_projection():
    D = 6
    rho = bl.slice_measure(2, 1, D + 1, scale=2.0)
    T = bl.toeplitz(rho, D)
    idx = bl.basis_indices(2, D)
    pattern = np.diag([1.0 if e[1] == 0 else 0.0 for e in idx])
    assert np.max(np.abs(T - pattern)) < 1e-10
    sp = bl.spectral_projection(T, 2, D)
    assert sp["kernel_dimension"] == len(idx) - (D + 1)
    assert np.max(np.abs(sp["Q"] - pattern)) < 1e-10
    R = bl.restriction(rho, D)
    assert np.max(np.abs(R.conj().T @ R - T)) < 1e-10


def test_kernel_integrals():
    # n = 2, c = 0: the sphere average of |1 - <z, zeta>|^{-2} is log(1/(1 - x^2)) / x^2, x = |z|
    x = 0.5
    val, err, warn = bl.eval_I_c(np.array([x + 0j, 0j]), 0.0)
    assert not warn
    assert val == pytest.approx(-math.log(1 - x * x) / (x * x), rel=1e-7)
    assert err < 1e-6


def test_gram_single_point_exact():
    residual, diag = bl.gram_criterion([np.array([0.3 + 0.1j, 0.2j])], restarts=5, seed=3)
    assert residual < 1e-10


def test_run_config_file():
    cfg = json.loads((CONFIGS / "hyperplane-identity.json").read_text())
    payload = bl.run_experiment(cfg)
    assert payload["experiment"] == "hyperplane-identity"
    assert payload["summary"]["status"] == "PASS"
    assert set(bl.experiments()) >= {"hyperplane-identity", "gram-criterion", "commutators"}


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        bl.validate_config(json.dumps({"schema_version": 1, "experiment": "nope"}))
