import json
import math

import numpy as np
import pytest

from renyi_reach.bounds import divergence_bound, extremal_unitary
from renyi_reach.errors import ConfigError, DimensionMismatch
from renyi_reach.harness import (
    VerifyConfig,
    evolve,
    gell_mann_basis,
    probe_tightness,
    verify_divergence_bound,
    verify_majorization,
    verify_tur,
)
from renyi_reach.linalg import hermitian_eig, swap_operator
from renyi_reach.sampling import RngSeed, random_density

RUNNING_BOUND = math.log(0.16 / 0.9 + 3.6)


def _running_cfg(running_pair, **kw):
    rho_s, rho_e = running_pair
    return VerifyConfig(d_s=2, d_e=2, rho_s=rho_s, rho_e=rho_e, **kw)


def test_evolve_identity_and_swap():
    gen = RngSeed(51).generator()
    rho_s, rho_e = random_density(3, gen), random_density(3, gen)
    np.testing.assert_allclose(evolve(rho_s, rho_e, np.eye(9)), rho_s, atol=1e-14)
    np.testing.assert_allclose(evolve(rho_s, rho_e, swap_operator(3)), rho_e, atol=1e-14)
    with pytest.raises(DimensionMismatch):
        evolve(rho_s, rho_e, np.eye(6))


def test_evolve_extremal(running_pair):
    rho_s, rho_e = running_pair
    sigma = evolve(rho_s, rho_e, extremal_unitary(rho_s, rho_e))
    np.testing.assert_allclose(hermitian_eig(sigma)[0], [0.9, 0.1], atol=1e-12)


@pytest.mark.parametrize(
    "kw",
    [
        dict(d_s=0),
        dict(trials=-1),
        dict(alpha_grid=()),
        dict(alpha_grid=(1.0,)),
        dict(povm_outcomes=1),
        dict(rho_s=np.eye(2) / 2),
        dict(rho_s=np.eye(3) / 3, rho_e=np.eye(2) / 2),
    ],
)
def test_config_rejects(kw):
    with pytest.raises(ConfigError):
        VerifyConfig(**kw)


def test_zero_trials_is_empty():
    for campaign in (verify_divergence_bound, verify_majorization, verify_tur):
        report = campaign(VerifyConfig(trials=0))
        assert report.rows == [] and report.violations == 0 and report.worst_margin is None


def test_running_example_has_no_violations(running_pair):
    cfg = _running_cfg(running_pair, alpha_grid=(0.5, 2.0), trials=500, seed=42)
    report = verify_divergence_bound(cfg)
    assert report.checks == 500 * 5
    assert report.violations == 0
    assert report.worst_margin >= -1e-9


@pytest.mark.parametrize("dims", [(2, 3), (3, 2)])
def test_random_states_have_no_violations(dims):
    cfg = VerifyConfig(d_s=dims[0], d_e=dims[1], trials=200, seed=7)
    assert verify_divergence_bound(cfg).violations == 0
    assert verify_majorization(cfg).violations == 0
    assert verify_tur(VerifyConfig(d_s=dims[0], d_e=dims[1], trials=200, povm_outcomes=3)).violations == 0


def test_extremal_row_saturates(running_pair):
    cfg = _running_cfg(running_pair, trials=3, include_extremal=True)
    report = verify_divergence_bound(cfg)
    extremal = [r for r in report.rows if r.trial == -1 and r.quantity == "petz"]
    assert len(extremal) == len(cfg.alpha_grid)
    assert all(abs(r.margin) <= 1e-8 for r in extremal)
    assert report.notes["extremal_max_gap"] <= 1e-8
    row = [r for r in extremal if r.alpha == 2.0][0]
    assert row.measured == pytest.approx(RUNNING_BOUND, abs=1e-12)


def test_extremal_majorization_equality(running_pair):
    cfg = _running_cfg(running_pair, trials=10, include_extremal=True)
    report = verify_majorization(cfg)
    assert report.violations == 0
    assert report.notes["extremal_max_prefix_gap"] <= 1e-9


def test_trivial_environment_majorization_equality():
    cfg = VerifyConfig(d_s=3, d_e=1, trials=50)
    report = verify_majorization(cfg)
    assert report.violations == 0
    assert all(abs(r.measured) <= 1e-9 for r in report.rows)


def test_tur_running_example(running_pair):
    report = verify_tur(_running_cfg(running_pair, trials=500, povm_outcomes=3))
    tur = [r for r in report.rows if r.quantity == "tur"]
    assert report.violations == 0
    assert all(r.bound == pytest.approx(0.36, abs=1e-14) for r in tur)
    chain = [r for r in report.rows if r.quantity == "chi2_chain"]
    assert len(chain) == 500


def test_tur_skips_without_mean_shift(running_pair):
    rho_s, _ = running_pair
    # identical states leave no reachable change, so every trial is vacuous
    cfg = VerifyConfig(d_s=2, d_e=2, rho_s=rho_s, rho_e=rho_s, trials=0, include_extremal=True)
    assert verify_tur(cfg).rows == []
    mixed = np.eye(2) / 2
    cfg = VerifyConfig(d_s=2, d_e=2, rho_s=mixed, rho_e=mixed, trials=20)
    report = verify_tur(cfg)
    assert report.skipped == 20 and report.violations == 0


def test_campaign_reports_are_deterministic():
    cfg = VerifyConfig(d_s=2, d_e=3, trials=50, seed=99)
    for campaign in (verify_divergence_bound, verify_majorization, verify_tur):
        a = json.dumps(campaign(cfg).to_dict(include_rows=True), default=str)
        b = json.dumps(campaign(cfg).to_dict(include_rows=True), default=str)
        assert a == b


def test_trial_stream_is_schedule_independent():
    short = verify_divergence_bound(VerifyConfig(trials=10, seed=5))
    long = verify_divergence_bound(VerifyConfig(trials=30, seed=5))
    assert long.rows[: len(short.rows)] == short.rows


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_gell_mann_orthonormal(d):
    basis = gell_mann_basis(d)
    assert basis.shape == (d * d, d, d)
    gram = np.einsum("aij,bji->ab", basis, basis)
    np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-14)
    for g in basis:
        np.testing.assert_allclose(g, g.conj().T)


def test_probe_budget_zero(running_pair):
    cfg = _running_cfg(running_pair, seed=3)
    result = probe_tightness(cfg, budget=0, restarts=4, alpha=2.0)
    assert result.evaluations == 0 and not result.exhausted
    assert result.gap >= -1e-8


def test_probe_maximally_mixed():
    mixed = np.eye(2) / 2
    cfg = VerifyConfig(d_s=2, d_e=2, rho_s=mixed, rho_e=mixed)
    result = probe_tightness(cfg, budget=50, restarts=2, alpha=2.0)
    assert result.best_value == pytest.approx(0.0, abs=1e-12)


def test_probe_reaches_running_bound(running_pair):
    cfg = _running_cfg(running_pair, seed=0)
    result = probe_tightness(cfg, budget=4000, restarts=3, alpha=2.0)
    assert result.report.bound == pytest.approx(divergence_bound([0.6, 0.4], [0.9, 0.1], 2))
    assert result.gap >= -1e-8
    assert result.best_value >= RUNNING_BOUND - 1e-4
