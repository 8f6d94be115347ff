"""Monte-Carlo verification campaigns for the reachable-state bounds.

Trial ``t`` of a campaign draws all of its randomness from the Philox stream
``(cfg.seed, t)``, in a fixed order: initial states (when random), the joint
unitary, then the POVM (TUR campaigns only). Two campaigns with the same
seed therefore see the same unitaries, and any trial can be replayed alone.

Every row stores a signed ``margin`` that is positive when the inequality
holds: ``bound - measured`` for upper bounds, ``measured - bound`` for lower
bounds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import bounds as B
from .divergences import (
    bures_angle,
    check_alpha,
    chi_squared,
    measurement_distribution,
    petz_renyi,
    sandwiched_renyi,
)
from .errors import ConfigError, DimensionMismatch
from .linalg import (
    Spectrum,
    as_matrix,
    partial_trace_env,
    spectrum_of,
    tensor_product,
    unitary_from_hermitian,
    validate_density,
)
from .majorization import MAJORIZATION_TOL, prefix_gaps
from .sampling import RngSeed, haar_unitary, random_density, random_povm

log = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.5, 0.9, 1.5, 2.0)


@dataclass
class VerifyConfig:
    d_s: int = 2
    d_e: int = 2
    alpha_grid: Sequence[float] = DEFAULT_ALPHAS
    trials: int = 1000
    seed: int = 0
    rho_s: np.ndarray | None = None
    rho_e: np.ndarray | None = None
    ensemble: str = "hilbert-schmidt"
    povm_outcomes: int = 2
    tolerance: float = 1e-9
    include_extremal: bool = False

    def __post_init__(self):
        if self.d_s < 1 or self.d_e < 1:
            raise ConfigError(f"dimensions must be positive, got d_s={self.d_s}, d_e={self.d_e}")
        if self.trials < 0:
            raise ConfigError(f"trials must be nonnegative, got {self.trials}")
        if len(self.alpha_grid) == 0:
            raise ConfigError("alpha_grid is empty")
        try:
            self.alpha_grid = tuple(check_alpha(a) for a in self.alpha_grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if (self.rho_s is None) != (self.rho_e is None):
            raise ConfigError("give both rho_s and rho_e, or neither")
        if self.rho_s is not None:
            self.rho_s = validate_density(self.rho_s)
            self.rho_e = validate_density(self.rho_e)
            if self.rho_s.shape[0] != self.d_s or self.rho_e.shape[0] != self.d_e:
                raise ConfigError(
                    f"state dimensions {self.rho_s.shape[0]}x{self.rho_e.shape[0]}"
                    f" do not match d_s={self.d_s}, d_e={self.d_e}"
                )
        if self.povm_outcomes < 2:
            raise ConfigError(f"povm_outcomes must be >= 2, got {self.povm_outcomes}")

    @property
    def explicit(self) -> bool:
        return self.rho_s is not None

    def describe(self) -> dict:
        out = {
            "d_s": self.d_s,
            "d_e": self.d_e,
            "alpha_grid": list(self.alpha_grid),
            "trials": self.trials,
            "seed": self.seed,
            "state_source": "explicit" if self.explicit else f"random({self.ensemble})",
            "povm_outcomes": self.povm_outcomes,
            "tolerance": self.tolerance,
        }
        if self.explicit:
            out["lambda_s"] = spectrum_of(self.rho_s).values.tolist()
            out["lambda_e"] = spectrum_of(self.rho_e).values.tolist()
        return out


@dataclass(frozen=True)
class TrialReport:
    trial: int
    quantity: str
    alpha: float | None
    measured: float
    bound: float
    margin: float
    violation: bool
    skipped: bool = False


@dataclass
class CampaignReport:
    name: str
    config: dict
    rows: list[TrialReport] = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def checks(self) -> int:
        return sum(not r.skipped for r in self.rows)

    @property
    def skipped(self) -> int:
        return sum(r.skipped for r in self.rows)

    @property
    def violations(self) -> int:
        return sum(r.violation for r in self.rows)

    @property
    def worst_margin(self) -> float | None:
        live = [r.margin for r in self.rows if not r.skipped and r.trial >= 0]
        return min(live) if live else None

    def summary(self) -> dict:
        return {
            "campaign": self.name,
            "checks": self.checks,
            "violations": self.violations,
            "skipped": self.skipped,
            "worst_margin": self.worst_margin,
            **self.notes,
        }

    def to_dict(self, include_rows: bool = False) -> dict:
        out = {"config": self.config, "summary": self.summary()}
        if include_rows:
            out["rows"] = [asdict(r) for r in self.rows]
        return out


def _upper_row(trial, quantity, alpha, measured, bound, tol) -> TrialReport:
    if math.isinf(bound):
        margin = math.inf
    elif math.isinf(measured):
        margin = -math.inf
    else:
        margin = bound - measured
    return TrialReport(trial, quantity, alpha, measured, bound, margin, margin < -tol)


def _lower_row(trial, quantity, alpha, measured, bound, tol) -> TrialReport:
    margin = math.inf if measured == math.inf else measured - bound
    return TrialReport(trial, quantity, alpha, measured, bound, margin, margin < -tol)


def evolve(rho_s, rho_e, unitary) -> np.ndarray:
    """Reduced system state ``Tr_E[U (rho_S (x) rho_E) U^dagger]``."""
    rs = as_matrix(rho_s, "rho_s")
    re = as_matrix(rho_e, "rho_e")
    u = as_matrix(unitary, "unitary")
    d_s, d_e = rs.shape[0], re.shape[0]
    if u.shape != (d_s * d_e, d_s * d_e):
        raise DimensionMismatch(f"unitary of shape {u.shape} for joint dimension {d_s * d_e}")
    joint = u @ tensor_product(rs, re) @ u.conj().T
    return validate_density(partial_trace_env(joint, d_s, d_e))


@dataclass(frozen=True)
class _Trial:
    rho_s: np.ndarray
    rho_e: np.ndarray
    unitary: np.ndarray
    sigma_s: np.ndarray
    lambda_s: Spectrum
    lambda_e: Spectrum
    generator: np.random.Generator


def _draw_trial(cfg: VerifyConfig, t: int) -> _Trial:
    gen = RngSeed(cfg.seed, t).generator()
    if cfg.explicit:
        rho_s, rho_e = cfg.rho_s, cfg.rho_e
    else:
        rho_s = random_density(cfg.d_s, gen, cfg.ensemble)
        rho_e = random_density(cfg.d_e, gen, cfg.ensemble)
    u = haar_unitary(cfg.d_s * cfg.d_e, gen)
    sigma = evolve(rho_s, rho_e, u)
    return _Trial(rho_s, rho_e, u, sigma, spectrum_of(rho_s), spectrum_of(rho_e), gen)


def _extremal_trial(cfg: VerifyConfig) -> _Trial:
    u = B.extremal_unitary(cfg.rho_s, cfg.rho_e)
    sigma = evolve(cfg.rho_s, cfg.rho_e, u)
    return _Trial(
        cfg.rho_s, cfg.rho_e, u, sigma, spectrum_of(cfg.rho_s), spectrum_of(cfg.rho_e), None
    )


def _trials(cfg: VerifyConfig):
    if cfg.include_extremal and cfg.explicit:
        yield -1, _extremal_trial(cfg)
    for t in range(cfg.trials):
        yield t, _draw_trial(cfg, t)


def verify_divergence_bound(cfg: VerifyConfig) -> CampaignReport:
    """Check Petz, sandwiched and Bures quantities against their reachable-state bounds."""
    report = CampaignReport("divergence", cfg.describe())
    tol = cfg.tolerance
    saturation = []
    for t, tr in _trials(cfg):
        for alpha in cfg.alpha_grid:
            bound = B.divergence_bound(tr.lambda_s, tr.lambda_e, alpha)
            petz = petz_renyi(tr.rho_s, tr.sigma_s, alpha)
            report.rows.append(_upper_row(t, "petz", alpha, petz, bound, tol))
            sand = sandwiched_renyi(tr.rho_s, tr.sigma_s, alpha)
            report.rows.append(_upper_row(t, "sandwiched", alpha, sand, bound, tol))
            if t < 0:
                saturation.append(report.rows[-2].margin)
        angle = bures_angle(tr.rho_s, tr.sigma_s)
        bb = B.bures_bound(tr.lambda_s, tr.lambda_e)
        report.rows.append(_upper_row(t, "bures", None, angle, bb, tol))
    if saturation:
        report.notes["extremal_max_gap"] = max(saturation)
    log.info("divergence campaign: %d checks, %d violations", report.checks, report.violations)
    return report


def verify_majorization(cfg: VerifyConfig) -> CampaignReport:
    """Check that the optimal spectrum majorizes every sampled reduced spectrum.

    ``measured`` is the smallest prefix-sum gap; the total-sum mismatch is
    folded into it so a single margin captures both conditions.
    """
    report = CampaignReport("majorization", cfg.describe())
    for t, tr in _trials(cfg):
        opt = B.reachable_optimum(tr.lambda_s, tr.lambda_e)
        gaps = prefix_gaps(opt, spectrum_of(tr.sigma_s).values)
        worst = float(min(gaps.min(), -abs(gaps[-1])))
        row = TrialReport(t, "majorization", None, worst, 0.0, worst, worst < -MAJORIZATION_TOL)
        report.rows.append(row)
        if t < 0:
            report.notes["extremal_max_prefix_gap"] = float(np.max(np.abs(gaps)))
    return report


def verify_tur(cfg: VerifyConfig) -> CampaignReport:
    """Check the relative-variance bound with a fresh random POVM per trial.

    Each trial also checks ``ln(1 + chi2(P_rho || P_sigma)) <= D_2(rho||sigma)``.
    Trials whose mean shift is below ``1e-8`` are recorded as skipped.
    """
    report = CampaignReport("tur", cfg.describe())
    tol = cfg.tolerance
    for t, tr in _trials(cfg):
        if tr.generator is None:
            continue
        povm = random_povm(cfg.d_s, cfg.povm_outcomes, tr.generator)
        p_rho = measurement_distribution(tr.rho_s, povm)
        p_sigma = measurement_distribution(tr.sigma_s, povm)
        shift = p_sigma.mean() - p_rho.mean()
        rhs = B.tur_bound(tr.lambda_s, tr.lambda_e)
        if abs(shift) < 1e-8:
            report.rows.append(TrialReport(t, "tur", None, math.nan, rhs, math.inf, False, True))
        else:
            lhs = p_sigma.variance() / shift**2
            report.rows.append(_lower_row(t, "tur", None, lhs, rhs, tol))
        chain = math.log1p(chi_squared(p_rho, p_sigma))
        d2 = petz_renyi(tr.rho_s, tr.sigma_s, 2.0)
        report.rows.append(_upper_row(t, "chi2_chain", 2.0, chain, d2, tol))
    return report


def gell_mann_basis(d: int) -> np.ndarray:
    """Orthonormal Hermitian basis of ``d x d`` matrices (``d^2`` elements).

    Symmetric and antisymmetric off-diagonal generators, ``d - 1`` traceless
    diagonals, and the normalized identity; ``Tr[G_a G_b] = delta_ab``.
    """
    out = []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            out += [s, a]
    for l in range(1, d):
        g = np.zeros((d, d), dtype=complex)
        g[np.arange(l), np.arange(l)] = 1.0
        g[l, l] = -l
        out.append(g / np.sqrt(l * (l + 1)))
    out.append(np.eye(d, dtype=complex) / np.sqrt(d))
    return np.array(out)


@dataclass(frozen=True)
class ProbeResult:
    report: TrialReport
    params: np.ndarray
    restart: int
    evaluations: int
    exhausted: bool

    @property
    def best_value(self) -> float:
        return self.report.measured

    @property
    def gap(self) -> float:
        return self.report.margin


def _coordinate_search(f, p0: np.ndarray, budget: int, step: float = 0.5, min_step: float = 1e-7):
    """Maximize ``f`` by compass search along coordinate axes.

    Returns ``(best_p, best_value, evaluations, exhausted)``. A step is halved
    after a sweep with no improvement; ``exhausted`` is set when the budget
    runs out before the step falls below ``min_step``.
    """
    p = p0.copy()
    best = f(p)
    evals = 0
    while step >= min_step:
        improved = False
        for i in range(p.size):
            for sign in (1.0, -1.0):
                if evals >= budget:
                    return p, best, evals, True
                trial = p.copy()
                trial[i] += sign * step
                val = f(trial)
                evals += 1
                if val > best:
                    p, best, improved = trial, val, True
                    break
        if not improved:
            step *= 0.5
    return p, best, evals, False


def probe_tightness(
    cfg: VerifyConfig, budget: int = 4000, restarts: int = 20, alpha: float | None = None
) -> ProbeResult:
    """Search joint unitaries for the largest Petz divergence.

    Each restart ``r`` starts from a Haar unitary ``U_0`` drawn from stream
    ``(cfg.seed, r)`` and climbs over ``U = exp(-i H(p)) U_0`` where
    ``H(p)`` expands ``p`` in the generalized Gell-Mann basis. ``budget`` is
    the number of objective evaluations per restart. Random-state configs use
    the states of trial 0.
    """
    alpha = check_alpha(cfg.alpha_grid[0] if alpha is None else alpha)
    if cfg.explicit:
        rho_s, rho_e = cfg.rho_s, cfg.rho_e
    else:
        tr = _draw_trial(cfg, 0)
        rho_s, rho_e = tr.rho_s, tr.rho_e
    d_s, d_e = rho_s.shape[0], rho_e.shape[0]
    joint = tensor_product(rho_s, rho_e)
    basis = gell_mann_basis(d_s * d_e)
    bound = B.divergence_bound(spectrum_of(rho_s), spectrum_of(rho_e), alpha)

    best: tuple | None = None
    total_evals = 0
    any_exhausted = False
    for r in range(max(restarts, 1)):
        u0 = haar_unitary(d_s * d_e, RngSeed(cfg.seed, r))

        def objective(p, u0=u0):
            u = unitary_from_hermitian(np.tensordot(p, basis, axes=1)) @ u0
            sigma = partial_trace_env(u @ joint @ u.conj().T, d_s, d_e)
            return petz_renyi(rho_s, sigma, alpha)

        p, val, evals, exhausted = _coordinate_search(objective, np.zeros(basis.shape[0]), budget)
        total_evals += evals
        any_exhausted |= exhausted and budget > 0
        if best is None or val > best[1]:
            best = (p, val, r)
    p, val, r = best
    row = _upper_row(r, "probe_petz", alpha, val, bound, 1e-8)
    return ProbeResult(row, p, r, total_evals, any_exhausted)
