"""HMC-within-Gibbs posterior inference for GGP graphs.

The target is the conditional law of (log-sociabilities, remainder mass,
hyperparameters, latent directed counts) given an undirected graph:
HMC updates the log-weights, a joint Metropolis-Hastings block with an
exponentially tilted total-mass proposal updates (alpha, sigma, tau, w*)
without ever evaluating the intractable total-mass density, and the
latent counts are refreshed from their zero-truncated Poisson conditional
(or a +-1 random walk). A conjugate Gibbs sweep handles bipartite graphs.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InconsistentStateError, TooFewSamplesError
from .params import rng_stream
from .totalmass import sample_tilted_total_mass, sample_truncated_poisson
from .params import GgpParams, TiltedStableSpec

STATE_SCHEMA_VERSION = 1


@dataclass
class McmcState:
    """Current position of one chain."""

    omega: np.ndarray          # log sociabilities, length N
    w_star: float              # remainder mass
    alpha: float
    sigma: float
    tau: float
    nbar: np.ndarray           # latent counts per undirected edge, >= 1
    m: np.ndarray = None       # per-node exponent, derived from nbar

    def weights(self):
        return np.exp(self.omega)


@dataclass
class McmcConfig:
    n_iter: int
    n_chains: int = 3
    leapfrog_steps: int = 10
    target_accept: float = 0.6
    adapt_iters: int = None
    rw_sd: float = 0.02
    thin: int = 1
    seed: int = 0
    latent_mode: str = "exact"      # exact | mh
    priors: str = "improper"        # improper | lognormal
    omega_record_stride: int = 0    # 0 disables log-weight snapshots
    init: dict = None

    def __post_init__(self):
        if self.n_iter < 0 or self.thin < 1 or self.leapfrog_steps < 1:
            raise DomainError("n_iter >= 0, thin >= 1, leapfrog_steps >= 1 required")
        if not 0.0 < self.target_accept < 1.0:
            raise DomainError("target_accept must be in (0, 1)")
        if self.latent_mode not in ("exact", "mh"):
            raise DomainError(f"unknown latent mode {self.latent_mode!r}")
        if self.priors not in ("improper", "lognormal"):
            raise DomainError(f"unknown prior family {self.priors!r}")
        if self.adapt_iters is None:
            self.adapt_iters = self.n_iter // 4


@dataclass
class ChainTrace:
    """Per-kept-iteration scalar records plus optional log-weight snapshots."""

    records: dict
    omega: np.ndarray = None
    omega_stride: int = 0
    accept_rates: dict = field(default_factory=dict)
    chain_id: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        if not self.records:
            return 0
        return len(next(iter(self.records.values())))

    def __getitem__(self, name):
        return self.records[name]


def _psi(sigma, tau, t):
    """Laplace exponent per unit alpha for arbitrary sigma < 1, tau > 0, t >= 0."""
    if sigma == 0.0:
        return np.log1p(t / tau)
    return ((t + tau) ** sigma - tau**sigma) / sigma


def compute_m(graph, nbar):
    """Per-node exponent m_i from latent edge counts; a self count contributes 2."""
    m = np.bincount(graph.edge_i, weights=nbar, minlength=graph.n_nodes)
    m += np.bincount(graph.edge_j, weights=nbar, minlength=graph.n_nodes)
    return m.astype(np.int64)


def _check_state(state, graph):
    if len(state.nbar) != graph.n_edges:
        raise InconsistentStateError("latent count vector does not match the edge list")
    if np.any(state.nbar < 1):
        raise InconsistentStateError("latent counts must be >= 1 on edges")
    m = compute_m(graph, state.nbar)
    if state.m is None:
        state.m = m
    elif not np.array_equal(m, state.m):
        raise InconsistentStateError("cached m disagrees with latent counts")


def _log_target_omega(omega, m, sigma, tau, w_star):
    # terms of the log posterior that depend on omega, Jacobian included
    w = np.exp(omega)
    s = w.sum()
    return float(np.dot(m - sigma, omega) - tau * s - (s + w_star) ** 2)


def log_posterior(state, graph):
    """Joint log density up to the additive log g* constant.

    sum_i [m_i log w_i + log rho(w_i)] - (sum w + w*)^2 plus the Jacobian
    sum_i omega_i of the log parameterization.
    """
    _check_state(state, graph)
    n = len(state.omega)
    return (
        _log_target_omega(state.omega, state.m, state.sigma, state.tau, state.w_star)
        - n * gammaln(1.0 - state.sigma)
    )


def grad_log_posterior(state):
    """Gradient in omega: m_i - sigma - w_i (tau + 2 sum_j w_j + 2 w*)."""
    w = np.exp(state.omega)
    return state.m - state.sigma - w * (state.tau + 2.0 * w.sum() + 2.0 * state.w_star)


def _grad_omega(omega, m, sigma, tau, w_star):
    w = np.exp(omega)
    return m - sigma - w * (tau + 2.0 * w.sum() + 2.0 * w_star)


def hmc_update(state, graph, n_steps, stepsize, rng):
    """One Hamiltonian update of the log-weights; returns acceptance flag."""
    _check_state(state, graph)
    m, sigma, tau, w_star = state.m, state.sigma, state.tau, state.w_star
    omega = state.omega
    p0 = rng.standard_normal(len(omega))

    p = p0 + 0.5 * stepsize * _grad_omega(omega, m, sigma, tau, w_star)
    q = omega.copy()
    for _ in range(n_steps - 1):
        q = q + stepsize * p
        p = p + stepsize * _grad_omega(q, m, sigma, tau, w_star)
    q = q + stepsize * p
    p = -(p + 0.5 * stepsize * _grad_omega(q, m, sigma, tau, w_star))

    log_r = (
        _log_target_omega(q, m, sigma, tau, w_star)
        - _log_target_omega(omega, m, sigma, tau, w_star)
        - 0.5 * (np.dot(p, p) - np.dot(p0, p0))
    )
    if not np.isfinite(log_r):
        return state, False
    if np.log(rng.uniform()) < log_r:
        state.omega = q
        return state, True
    return state, False


def _log_prior_ratio(config, new, old):
    """Correction when replacing the improper 1/x priors by proper lognormals."""
    if config.priors == "improper":
        return 0.0
    # lognormal(0, 10) on alpha and tau, on 1 - sigma
    def lp(alpha, sigma, tau):
        out = 0.0
        for x in (alpha, tau, 1.0 - sigma):
            out += -np.log(x) - (np.log(x) ** 2) / 200.0
        return out

    def lp_improper(alpha, sigma, tau):
        return -np.log(alpha) - np.log(1.0 - sigma) - np.log(tau)

    return (lp(*new) - lp(*old)) - (lp_improper(*new) - lp_improper(*old))


def hyper_update(state, config, rng):
    """Joint MH move on (alpha, sigma, tau, w*) with the tilting proposal.

    tau and 1 - sigma take lognormal random-walk proposals, alpha a gamma
    proposal matched to the conditional, and the remainder mass w* is drawn
    from the exponentially tilted total-mass law with tilt 2 sum w + w*;
    the tilting makes every total-mass density cancel from the ratio.
    """
    w = state.weights()
    s_w = float(w.sum())
    sum_log_w = float(state.omega.sum())
    n = len(state.omega)
    sigma, tau, w_star = state.sigma, state.tau, state.w_star

    tau_p = tau * np.exp(config.rw_sd * rng.standard_normal())
    sigma_p = 1.0 - (1.0 - sigma) * np.exp(config.rw_sd * rng.standard_normal())
    tilt = 2.0 * s_w + w_star
    rate_p = _psi(sigma_p, tau_p, tilt)
    alpha_p = float(rng.gamma(n, 1.0 / rate_p))
    if alpha_p <= 0.0 or not np.isfinite(alpha_p):
        return state, False
    spec = TiltedStableSpec(GgpParams(alpha_p, sigma_p, tau_p), tilt)
    w_star_p = sample_tilted_total_mass(spec, rng)

    log_r = (
        -((s_w + w_star_p) ** 2) + (s_w + w_star) ** 2
        - (tau_p - tau + 2.0 * w_star - 2.0 * w_star_p) * s_w
        + (sigma - sigma_p) * sum_log_w
        + n * (
            gammaln(1.0 - sigma) + np.log(_psi(sigma, tau, 2.0 * s_w + w_star_p))
            - gammaln(1.0 - sigma_p) - np.log(_psi(sigma_p, tau_p, tilt))
        )
        + _log_prior_ratio(config, (alpha_p, sigma_p, tau_p), (state.alpha, sigma, tau))
    )
    if not np.isfinite(log_r):
        return state, False
    if np.log(rng.uniform()) < log_r:
        state.alpha, state.sigma, state.tau, state.w_star = alpha_p, sigma_p, tau_p, w_star_p
        return state, True
    return state, False


def latent_rates(state, graph):
    """Conditional truncated-Poisson rates: 2 w_i w_j off-diagonal, w_i^2 on."""
    w = state.weights()
    rate = 2.0 * w[graph.edge_i] * w[graph.edge_j]
    loop = graph.edge_i == graph.edge_j
    rate[loop] = w[graph.edge_i[loop]] ** 2
    return rate


def latent_update(state, graph, mode, rng):
    """Refresh the latent edge counts, exactly or by a +-1 random walk."""
    rate = latent_rates(state, graph)
    if mode == "exact":
        state.nbar = sample_truncated_poisson(rate, rng)
    else:
        nbar = state.nbar
        at_one = nbar == 1
        up = rng.uniform(size=len(nbar)) < 0.5
        prop = np.where(at_one, nbar + 1, np.where(up, nbar + 1, nbar - 1))
        log_q = np.zeros(len(nbar))
        log_q[at_one] = np.log(0.5)                # q(1|2)/q(2|1)
        down_to_one = (nbar == 2) & (prop == 1)
        log_q[down_to_one] = np.log(2.0)           # q(2|1)/q(1|2)
        log_acc = (
            (prop - nbar) * np.log(rate)
            + gammaln(nbar + 1.0) - gammaln(prop + 1.0)
            + log_q
        )
        accept = np.log(rng.uniform(size=len(nbar))) < log_acc
        state.nbar = np.where(accept, prop, nbar)
    state.m = compute_m(graph, state.nbar)
    return state


def init_state(graph, config, rng):
    """Starting point: degree-proportional weights, sigma near 0, tau near 1."""
    overrides = config.init or {}
    deg = graph.degree.astype(float)
    total_deg = deg.sum()
    w0 = deg / np.sqrt(total_deg)
    w0 = w0 * np.exp(0.2 * rng.standard_normal())   # chain-to-chain spread
    sigma0 = overrides.get("sigma", float(np.clip(0.1 * rng.standard_normal(), -0.8, 0.8)))
    tau0 = overrides.get("tau", float(np.exp(0.1 * rng.standard_normal())))
    w_star0 = overrides.get("w_star", 0.1)
    s_w = w0.sum()
    alpha0 = overrides.get(
        "alpha", graph.n_nodes / _psi(sigma0, tau0, 2.0 * s_w + w_star0)
    )
    nbar = np.ones(graph.n_edges, dtype=np.int64)
    state = McmcState(
        omega=np.log(np.maximum(w0, 1e-10)),
        w_star=float(w_star0),
        alpha=float(alpha0),
        sigma=float(sigma0),
        tau=float(tau0),
        nbar=nbar,
    )
    state.m = compute_m(graph, nbar)
    return state


class _DualAveraging:
    """Nesterov dual averaging of the leapfrog stepsize toward a target rate."""

    def __init__(self, eps0, target, gamma=0.05, t0=10.0, kappa=0.75):
        self.mu = np.log(10.0 * eps0)
        self.target = target
        self.gamma, self.t0, self.kappa = gamma, t0, kappa
        self.log_eps = np.log(eps0)
        self.log_eps_bar = np.log(eps0)
        self.h_bar = 0.0
        self.t = 0

    def update(self, accepted):
        self.t += 1
        frac = 1.0 / (self.t + self.t0)
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (self.target - float(accepted))
        self.log_eps = self.mu - np.sqrt(self.t) / self.gamma * self.h_bar
        w = self.t ** (-self.kappa)
        self.log_eps_bar = w * self.log_eps + (1.0 - w) * self.log_eps_bar

    @property
    def stepsize(self):
        return float(np.exp(self.log_eps))

    @property
    def frozen_stepsize(self):
        return float(np.exp(self.log_eps_bar))


def run_chain(graph, config, rng=None, chain_id=0):
    """One chain of the HMC-within-Gibbs sampler on an undirected graph.

    Sweep order: HMC on log-weights, joint hyperparameter block, latent
    counts. The stepsize adapts for the first adapt_iters iterations
    (which double as burn-in), then freezes.
    """
    if graph.n_edges < 1:
        raise DomainError("inference requires a graph with at least one edge")
    if rng is None:
        rng = rng_stream(config.seed, chain_id)
    state = init_state(graph, config, rng)
    latent_update(state, graph, "exact", rng)       # start latent at its conditional

    burn = min(config.adapt_iters, config.n_iter)
    eps0 = 0.1 / max(len(state.omega), 1) ** 0.25
    adapter = _DualAveraging(eps0, config.target_accept)

    names = ("alpha", "sigma", "tau", "w_star", "log_post")
    recs = {k: [] for k in names}
    omega_snaps = []
    accept = {"hmc": 0, "hyper": 0}
    post_window = {"hmc": 0, "hyper": 0, "n": 0}

    for it in range(config.n_iter):
        adapting = it < burn
        stepsize = adapter.stepsize if adapting else adapter.frozen_stepsize
        state, acc_hmc = hmc_update(state, graph, config.leapfrog_steps, stepsize, rng)
        if adapting:
            adapter.update(acc_hmc)
        state, acc_hyp = hyper_update(state, config, rng)
        state = latent_update(state, graph, config.latent_mode, rng)
        accept["hmc"] += acc_hmc
        accept["hyper"] += acc_hyp
        if not adapting:
            post_window["hmc"] += acc_hmc
            post_window["hyper"] += acc_hyp
            post_window["n"] += 1
        if it >= burn and (it - burn) % config.thin == 0:
            recs["alpha"].append(state.alpha)
            recs["sigma"].append(state.sigma)
            recs["tau"].append(state.tau)
            recs["w_star"].append(state.w_star)
            recs["log_post"].append(log_posterior(state, graph))
            stride = config.omega_record_stride
            if stride and ((it - burn) // config.thin) % stride == 0:
                omega_snaps.append(state.omega.copy())

    n_post = max(post_window["n"], 1)
    return ChainTrace(
        records={k: np.asarray(v) for k, v in recs.items()},
        omega=np.asarray(omega_snaps) if omega_snaps else None,
        omega_stride=config.omega_record_stride,
        accept_rates={
            "hmc": accept["hmc"] / max(config.n_iter, 1),
            "hyper": accept["hyper"] / max(config.n_iter, 1),
            "hmc_post_adapt": post_window["hmc"] / n_post,
            "hyper_post_adapt": post_window["hyper"] / n_post,
        },
        chain_id=chain_id,
        meta={
            "n_iter": config.n_iter,
            "burn": burn,
            "thin": config.thin,
            "stepsize": adapter.frozen_stepsize,
            "init": {
                "alpha": float(state.alpha) if config.n_iter == 0 else None,
                "n_nodes": graph.n_nodes,
                "n_edges": graph.n_edges,
            },
        },
    )


def run_chains(graph, config):
    """Independent chains on separate random streams."""
    return [
        run_chain(graph, config, rng_stream(config.seed, c), chain_id=c)
        for c in range(config.n_chains)
    ]


# ---------------------------------------------------------------------------
# bipartite sampler
# ---------------------------------------------------------------------------

def bipartite_log_marginal(alpha, sigma, tau, m, t_other):
    """log marginal likelihood of one side given the other side's total mass.

    -alpha psi(T') + N log alpha + sum_i log kappa(m_i, T') for the GGP.
    """
    n = len(m)
    log_kap = gammaln(m - sigma) - gammaln(1.0 - sigma) + (sigma - m) * np.log(t_other + tau)
    return -alpha * _psi(sigma, tau, t_other) + n * np.log(alpha) + float(log_kap.sum())


def _bipartite_side_update(w, w_star, alpha, sigma, tau, m, t_other, config, rng,
                           update_tau=True):
    """MH on hyperparameters then conjugate draws for one side's weights and mass."""
    alpha_p = alpha * np.exp(config.rw_sd * rng.standard_normal())
    sigma_p = 1.0 - (1.0 - sigma) * np.exp(config.rw_sd * rng.standard_normal())
    tau_p = tau * np.exp(config.rw_sd * rng.standard_normal()) if update_tau else tau
    # improper 1/x priors cancel against the lognormal random-walk proposals
    log_r = (
        bipartite_log_marginal(alpha_p, sigma_p, tau_p, m, t_other)
        - bipartite_log_marginal(alpha, sigma, tau, m, t_other)
    )
    accepted = np.isfinite(log_r) and np.log(rng.uniform()) < log_r
    if accepted:
        alpha, sigma, tau = alpha_p, sigma_p, tau_p

    rate = tau + t_other
    w = rng.gamma(np.asarray(m, dtype=float) - sigma, 1.0 / rate)
    spec = TiltedStableSpec(GgpParams(alpha, sigma, tau), t_other)
    w_star = sample_tilted_total_mass(spec, rng)
    return w, w_star, alpha, sigma, tau, accepted


def run_bipartite_gibbs(graph, config, rng=None, chain_id=0):
    """Gibbs sampler for the bipartite model; tau' is pinned at 1."""
    if graph.n_edges < 1:
        raise DomainError("inference requires a graph with at least one edge")
    if rng is None:
        rng = rng_stream(config.seed, chain_id)

    nl, nr = graph.n_left, graph.n_right
    counts = np.ones(graph.n_edges, dtype=np.int64)
    m = np.bincount(graph.left, weights=counts, minlength=nl).astype(np.int64)
    m_p = np.bincount(graph.right, weights=counts, minlength=nr).astype(np.int64)

    alpha, sigma, tau = float(nl), 0.0, 1.0
    alpha_p, sigma_p = float(nr), 0.0
    w = m / np.sqrt(m.sum())
    w_p = m_p / np.sqrt(m_p.sum())
    w_star, w_star_p = 0.1, 0.1
    sigma = float(np.clip(0.1 * rng.standard_normal(), -0.5, 0.5))
    sigma_p = float(np.clip(0.1 * rng.standard_normal(), -0.5, 0.5))

    burn = min(config.adapt_iters, config.n_iter)
    names = ("alpha", "sigma", "tau", "w_star", "alpha_right", "sigma_right",
             "w_star_right", "log_ml")
    recs = {k: [] for k in names}
    acc = {"left": 0, "right": 0}

    for it in range(config.n_iter):
        t_right = float(w_p.sum() + w_star_p)
        w, w_star, alpha, sigma, tau, a1 = _bipartite_side_update(
            w, w_star, alpha, sigma, tau, m, t_right, config, rng, update_tau=True)
        counts = sample_truncated_poisson(w[graph.left] * w_p[graph.right], rng)
        m = np.bincount(graph.left, weights=counts, minlength=nl).astype(np.int64)
        m_p = np.bincount(graph.right, weights=counts, minlength=nr).astype(np.int64)

        t_left = float(w.sum() + w_star)
        w_p, w_star_p, alpha_p, sigma_p, _, a2 = _bipartite_side_update(
            w_p, w_star_p, alpha_p, sigma_p, 1.0, m_p, t_left, config, rng,
            update_tau=False)
        acc["left"] += a1
        acc["right"] += a2
        if it >= burn and (it - burn) % config.thin == 0:
            recs["alpha"].append(alpha)
            recs["sigma"].append(sigma)
            recs["tau"].append(tau)
            recs["w_star"].append(w_star)
            recs["alpha_right"].append(alpha_p)
            recs["sigma_right"].append(sigma_p)
            recs["w_star_right"].append(w_star_p)
            recs["log_ml"].append(
                bipartite_log_marginal(alpha, sigma, tau, m, t_left))
    return ChainTrace(
        records={k: np.asarray(v) for k, v in recs.items()},
        accept_rates={k: v / max(config.n_iter, 1) for k, v in acc.items()},
        chain_id=chain_id,
        meta={"n_iter": config.n_iter, "burn": burn, "thin": config.thin},
    )


# ---------------------------------------------------------------------------
# checkpointing
# ---------------------------------------------------------------------------

def save_state(state, path):
    """Write an McmcState as a JSON blob; floats round-trip exactly."""
    blob = {
        "schema_version": STATE_SCHEMA_VERSION,
        "omega": state.omega.tolist(),
        "w_star": state.w_star,
        "alpha": state.alpha,
        "sigma": state.sigma,
        "tau": state.tau,
        "nbar": state.nbar.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(blob, fh)


def load_state(path, graph=None):
    with open(path) as fh:
        blob = json.load(fh)
    if blob.get("schema_version") != STATE_SCHEMA_VERSION:
        raise TooFewSamplesError(
            f"unsupported state schema version {blob.get('schema_version')!r}"
        )
    state = McmcState(
        omega=np.asarray(blob["omega"], dtype=float),
        w_star=float(blob["w_star"]),
        alpha=float(blob["alpha"]),
        sigma=float(blob["sigma"]),
        tau=float(blob["tau"]),
        nbar=np.asarray(blob["nbar"], dtype=np.int64),
    )
    if graph is not None:
        state.m = compute_m(graph, state.nbar)
    return state
