"""Generative paths for GGP random graphs.

All paths target the same hierarchy: a (truncated) CRM draw gives node
weights, the directed multigraph is Poisson given the squared total mass,
and the undirected graph keeps one edge per connected unordered pair. The
gamma-process urn and the Kallenberg thinning construction provide
distributionally equivalent alternatives used for cross-validation.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import gamma as gamma_dist

from .errors import DegenerateMassError, DomainError
from .graphs import BipartiteGraph, CrmSample, DirectedMultigraph, UndirectedGraph, to_undirected
from .levy import expected_truncation_mass, inv_tail_intensity, tail_intensity
from .params import GgpParams, rng_stream

DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class SimConfig:
    """Configuration for one graph draw."""

    params: GgpParams
    truncation_eps: float = DEFAULT_EPS
    seed: int = 0
    path: str = "truncated"
    include_self_loops: bool = True

    def __post_init__(self):
        if self.truncation_eps <= 0:
            raise DomainError("truncation_eps must be positive")
        if self.path not in ("truncated", "urn", "kallenberg", "compound-poisson"):
            raise DomainError(f"unknown simulation path {self.path!r}")
        if self.path == "urn" and self.params.sigma != 0.0:
            raise DomainError("the urn path is exact only for sigma = 0")


def _first_appearance_relabel(seq):
    """Map values of seq to contiguous ids in order of first appearance."""
    uniq, first = np.unique(seq, return_index=True)
    order = np.argsort(first)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[order] = np.arange(len(uniq))
    pos = np.searchsorted(uniq, seq)
    return rank[pos], uniq[order]


def sample_crm_truncated(params, eps, rng):
    """Atoms of the restricted CRM with weights above eps.

    K ~ Poisson(alpha rhobar(eps)); weights are i.i.d. from the normalized
    restriction of rho to (eps, inf) via tail-intensity inversion;
    locations are uniform on [0, alpha]. The mean mass below eps is
    recorded as remainder (it never spawns edges).
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    a = params.alpha
    if params.sigma < 0:
        # finite activity: draw the compound Poisson exactly, then threshold
        k = rng.poisson(-(a / params.sigma) * params.tau ** params.sigma)
        w = rng.gamma(-params.sigma, 1.0 / params.tau, size=k)
        w = w[w > eps]
    else:
        k = rng.poisson(a * tail_intensity(params, eps))
        if k == 0:
            w = np.empty(0)
        else:
            u = rng.uniform(size=k)
            w = inv_tail_intensity(params, u * tail_intensity(params, eps))
            w = np.maximum(w, np.nextafter(eps, np.inf))
    theta = rng.uniform(0.0, a, size=len(w))
    return CrmSample(w, theta, remainder_mass=expected_truncation_mass(params, eps))


def _directed_conditional(sample, rng):
    """Directed multigraph given weights, plus the node -> atom index map."""
    w = sample.weights
    total = w.sum()
    if total <= 0:
        raise DegenerateMassError("total weight mass is zero")
    n_edges = rng.poisson(total * total)
    if n_edges == 0:
        d = DirectedMultigraph(0, np.empty(0, np.int64), np.empty(0, np.int64),
                               np.empty(0, np.int64))
        return d, np.empty(0, np.int64)
    endpoints = rng.choice(len(w), size=2 * n_edges, p=w / total)
    labels, atom_ids = _first_appearance_relabel(endpoints)
    src, dst = labels[0::2], labels[1::2]
    keys = src * len(atom_ids) + dst
    uniq, counts = np.unique(keys, return_counts=True)
    d = DirectedMultigraph(len(atom_ids), uniq // len(atom_ids), uniq % len(atom_ids), counts)
    return d, atom_ids


def sample_directed_conditional(sample, rng):
    """D* ~ Poisson(W*^2); each of the 2 D* endpoints i.i.d. proportional to weights."""
    d, _ = _directed_conditional(sample, rng)
    return d


def _strip_self_loops(z):
    keep = z.edge_i != z.edge_j
    i, j = z.edge_i[keep], z.edge_j[keep]
    labels, old_ids = _first_appearance_relabel(np.concatenate([i, j]))
    return UndirectedGraph(len(old_ids), labels[: len(i)], labels[len(i):]), old_ids


def sample_undirected_ggp(config, rng=None):
    """Draw (Z, generating CrmSample) via truncation + conditional Poisson.

    The returned sample is restricted to the atoms that became graph nodes,
    ordered by node id, so it serves as ground truth for recovery tests.
    """
    if rng is None:
        rng = rng_stream(config.seed)
    crm = sample_crm_truncated(config.params, config.truncation_eps, rng)
    d, atom_ids = _directed_conditional(crm, rng)
    z = to_undirected(d)
    if not config.include_self_loops:
        z, kept = _strip_self_loops(z)
        atom_ids = atom_ids[kept]
    node_sample = CrmSample(
        crm.weights[atom_ids],
        None if crm.locations is None else crm.locations[atom_ids],
        remainder_mass=crm.remainder_mass,
    )
    return z, node_sample


def sample_gamma_urn(alpha, tau, rng):
    """Exact gamma-process (sigma = 0) multigraph via the Blackwell-MacQueen urn.

    W* ~ Gamma(alpha, tau), D* ~ Poisson(W*^2); endpoint labels follow the
    urn: a new node with probability alpha/(alpha+n), an existing node j
    with probability m_j/(alpha+n). Choosing an existing node proportional
    to multiplicity is done by copying a uniformly chosen past endpoint.
    """
    if alpha <= 0 or tau <= 0:
        raise DomainError("gamma urn requires alpha > 0 and tau > 0")
    total = rng.gamma(alpha, 1.0 / tau)
    n_edges = rng.poisson(total * total)
    labels = np.empty(2 * n_edges, dtype=np.int64)
    n_distinct = 0
    for n in range(2 * n_edges):
        if rng.uniform() * (alpha + n) < alpha:
            labels[n] = n_distinct
            n_distinct += 1
        else:
            labels[n] = labels[rng.integers(n)]
    if n_edges == 0:
        return DirectedMultigraph(0, np.empty(0, np.int64), np.empty(0, np.int64),
                                  np.empty(0, np.int64))
    src, dst = labels[0::2], labels[1::2]
    keys = src * n_distinct + dst
    uniq, counts = np.unique(keys, return_counts=True)
    return DirectedMultigraph(n_distinct, uniq // n_distinct, uniq % n_distinct, counts)


def _bernoulli_pair_edges(w, rng, include_self_loops, chunk=512):
    """Pairwise Bernoulli edges with p_ij = 1 - exp(-2 w_i w_j), chunked in rows."""
    k = len(w)
    ei, ej = [], []
    for start in range(0, k, chunk):
        stop = min(start + chunk, k)
        rows = np.arange(start, stop)
        # upper triangle only: columns j > i
        p = -np.expm1(-2.0 * np.outer(w[rows], w))
        mask = rng.random(p.shape) < p
        cols = np.arange(k)
        tri = cols[None, :] > rows[:, None]
        r, c = np.nonzero(mask & tri)
        ei.append(rows[r])
        ej.append(c)
        if include_self_loops:
            p_loop = -np.expm1(-(w[rows] ** 2))
            loop = rng.random(len(rows)) < p_loop
            ei.append(rows[loop])
            ej.append(rows[loop])
    ei = np.concatenate(ei) if ei else np.empty(0, np.int64)
    ej = np.concatenate(ej) if ej else np.empty(0, np.int64)
    return ei.astype(np.int64), ej.astype(np.int64)


def sample_kallenberg(params, eps, rng):
    """Undirected graph from the thinned unit-rate mark construction.

    Unit-rate marks on [0, alpha rhobar(eps)] map to weights through the
    inverse tail intensity; each unordered pair is edged independently with
    the pair probability of the weight construction. Isolated nodes drop.
    """
    if params.sigma < 0:
        raise DomainError("Kallenberg path requires infinite activity (sigma >= 0)")
    if eps <= 0:
        raise DomainError("eps must be positive")
    bound = params.alpha * tail_intensity(params, eps)
    k = rng.poisson(bound)
    marks = rng.uniform(0.0, bound, size=k)
    w = inv_tail_intensity(params, marks / params.alpha) if k else np.empty(0)
    ei, ej = _bernoulli_pair_edges(np.asarray(w), rng, include_self_loops=True)
    if len(ei) == 0:
        return UndirectedGraph(0, ei, ej)
    labels, _ = _first_appearance_relabel(np.concatenate([ei, ej]))
    return UndirectedGraph(int(labels.max()) + 1, labels[: len(ei)], labels[len(ei):])


def sample_er_equivalent(alpha, w0, rng, include_self_loops=True):
    """Erdos-Renyi equivalent (Dirac Levy measure at w0): G(Poisson(alpha), p).

    Every pair is edged with p = 1 - exp(-2 w0^2); all Poisson(alpha)
    declared nodes are kept, isolated or not.
    """
    if alpha <= 0 or w0 < 0:
        raise DomainError("requires alpha > 0 and w0 >= 0")
    n = rng.poisson(alpha)
    if n == 0 or w0 == 0.0:
        return UndirectedGraph(n, np.empty(0, np.int64), np.empty(0, np.int64))
    p = -np.expm1(-2.0 * w0 * w0)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < p
    ei, ej = iu[mask], ju[mask]
    if include_self_loops:
        loop = rng.random(n) < -np.expm1(-w0 * w0)
        ids = np.nonzero(loop)[0]
        ei = np.concatenate([ei, ids])
        ej = np.concatenate([ej, ids])
    return UndirectedGraph(n, ei, ej)


def sample_compound_poisson_graph(alpha, weight_cdf_inverse, rng, include_self_loops=True):
    """Graphon-style sampler for finite-activity measures with weight quantile H^-1.

    n ~ Poisson(alpha); i.i.d. uniforms map through H^-1 to weights; pairs
    are edged with 1 - exp(-2 w_i w_j). Declared nodes are all kept.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    n = rng.poisson(alpha)
    if n == 0:
        return UndirectedGraph(0, np.empty(0, np.int64), np.empty(0, np.int64))
    w = np.asarray(weight_cdf_inverse(rng.uniform(size=n)), dtype=float)
    ei, ej = _bernoulli_pair_edges(w, rng, include_self_loops)
    return UndirectedGraph(n, ei, ej)


def sample_bipartite(params, params_prime, eps, rng):
    """Bipartite graph: D* ~ Poisson(W* W'*); endpoints proportional to each side."""
    left_crm = sample_crm_truncated(params, eps, rng)
    right_crm = sample_crm_truncated(params_prime, eps, rng)
    wl, wr = left_crm.weights, right_crm.weights
    if wl.sum() <= 0 or wr.sum() <= 0:
        return BipartiteGraph(0, 0, np.empty(0, np.int64), np.empty(0, np.int64))
    n_edges = rng.poisson(wl.sum() * wr.sum())
    if n_edges == 0:
        return BipartiteGraph(0, 0, np.empty(0, np.int64), np.empty(0, np.int64))
    li = rng.choice(len(wl), size=n_edges, p=wl / wl.sum())
    ri = rng.choice(len(wr), size=n_edges, p=wr / wr.sum())
    left_labels, left_ids = _first_appearance_relabel(li)
    right_labels, right_ids = _first_appearance_relabel(ri)
    keys = left_labels * len(right_ids) + right_labels
    uniq, counts = np.unique(keys, return_counts=True)
    return BipartiteGraph(
        len(left_ids), len(right_ids),
        uniq // len(right_ids), uniq % len(right_ids), counts,
    )


def gamma_weight_quantile(sigma, tau):
    """H^-1 for the sigma < 0 GGP, whose jumps are i.i.d. Gamma(-sigma, tau)."""
    if sigma >= 0 or tau <= 0:
        raise DomainError("gamma jumps require sigma < 0 and tau > 0")
    return lambda u: gamma_dist.ppf(u, -sigma, scale=1.0 / tau)


def sample_graph(config, rng=None):
    """Dispatch one undirected draw over the configured generative path."""
    if rng is None:
        rng = rng_stream(config.seed)
    p = config.params
    if config.path == "truncated":
        z, _ = sample_undirected_ggp(config, rng)
        return z
    if config.path == "urn":
        z = to_undirected(sample_gamma_urn(p.alpha, p.tau, rng))
        if not config.include_self_loops:
            z, _ = _strip_self_loops(z)
        return z
    if config.path == "kallenberg":
        return sample_kallenberg(p, config.truncation_eps, rng)
    # compound-poisson: only meaningful for finite activity
    return sample_compound_poisson_graph(
        p.alpha, gamma_weight_quantile(p.sigma, p.tau), rng, config.include_self_loops
    )
