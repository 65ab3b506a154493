"""Error models: independent depolarizing noise and a correlated Ising model.

Both models sample Pauli errors in the (z|x) bit layout.  The depolarizing
channel also evaluates exact pointwise probabilities; the Ising model's
normalization is intractable at scale, so it deliberately exposes no
``logprob`` and downstream consumers that need one must refuse it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import CodeTables, els_bits
from .errors import LengthMismatchError, UnevaluableModelError

MH_BURNIN_SWEEP_FACTOR = 10   # burn-in sweeps = 10 * n
MH_THIN_SWEEPS = 1            # one full sweep (n site updates) between samples


def _spread_kinds(flip: np.ndarray, kind: np.ndarray) -> np.ndarray:
    """Combine a flip mask and a uniform {0,1,2} draw into (z|x) bits.

    kind 0 -> X, 1 -> Y, 2 -> Z, applied only where ``flip`` is set.
    """
    x = flip & (kind <= 1)
    z = flip & (kind >= 1)
    return np.concatenate([z, x], axis=-1).astype(np.uint8)


@dataclass(frozen=True)
class DepolarizingModel:
    """Independent per-qubit channel: I with prob 1-p, each of X/Y/Z with p/3."""

    n: int
    p: float

    def __post_init__(self):
        if not 0 <= self.p < 1:
            raise ValueError(f"p must be in [0, 1), got {self.p}")

    def sample_batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        flip = rng.random((size, self.n)) < self.p
        kind = rng.integers(0, 3, size=(size, self.n))
        return _spread_kinds(flip, kind)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_batch(rng, 1)[0]

    def logprob(self, pauli) -> np.ndarray | float:
        """Exact log P(E); vectorizes over a leading batch axis.

        Returns -inf for impossible errors (non-identity action at p = 0).
        """
        bits = np.atleast_2d(np.asarray(pauli, dtype=np.uint8))
        if bits.shape[-1] != 2 * self.n:
            raise LengthMismatchError(
                f"Pauli length {bits.shape[-1]} != 2n = {2 * self.n}")
        support = bits[..., :self.n] | bits[..., self.n:]
        w = support.sum(axis=-1).astype(np.float64)
        if self.p == 0.0:
            out = np.where(w == 0, 0.0, -np.inf)
        else:
            out = w * np.log(self.p / 3.0) + (self.n - w) * np.log1p(-self.p)
        return out if np.asarray(pauli).ndim > 1 else float(out[0])


def _random_regular_edges(n: int, degree: int, rng: np.random.Generator) -> np.ndarray:
    """Degree-regular random graph via stub pairing with rejection.

    Shuffles degree copies of every vertex and pairs them off; retries until
    the pairing has no self-loops and no repeated edges.
    """
    if n <= degree:
        raise ValueError(f"need n > degree, got n={n}, degree={degree}")
    if (n * degree) % 2:
        raise ValueError("n * degree must be even")
    stubs = np.repeat(np.arange(n), degree)
    for _ in range(10_000):
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        if (pairs[:, 0] == pairs[:, 1]).any():
            continue
        canon = np.sort(pairs, axis=1)
        if np.unique(canon, axis=0).shape[0] != canon.shape[0]:
            continue
        return canon
    raise RuntimeError("regular-graph pairing did not converge")


@dataclass
class IsingNoiseModel:
    """Correlated noise driven by a random-graph Ising Boltzmann distribution.

    Spin energy (beta scales only the coupling term, h is a fixed field):

        H(s) = -beta * sum_edges J_ij s_i s_j - h * sum_i s_i

    A spin s_i = +1 leaves qubit i untouched; s_i = -1 applies X, Y, or Z
    with probability 1/3 each.
    """

    n: int
    beta: float
    edges: np.ndarray = field(repr=False)
    couplings: np.ndarray = field(repr=False)
    h: float = 0.3

    def __post_init__(self):
        # per-site neighbour/coupling tables for vectorized sweeps
        degree_count = np.zeros(self.n, dtype=int)
        for a, b in self.edges:
            degree_count[a] += 1
            degree_count[b] += 1
        width = degree_count.max()
        nbrs = np.zeros((self.n, width), dtype=np.int64)
        coup = np.zeros((self.n, width), dtype=np.float64)
        fill = np.zeros(self.n, dtype=int)
        for (a, b), j in zip(self.edges, self.couplings):
            nbrs[a, fill[a]], coup[a, fill[a]] = b, j
            fill[a] += 1
            nbrs[b, fill[b]], coup[b, fill[b]] = a, j
            fill[b] += 1
        self._nbrs = nbrs
        self._coup = coup

    @classmethod
    def build(cls, n: int, beta: float, seed: int, *, degree: int = 4,
              h: float = 0.3) -> "IsingNoiseModel":
        """Construct graph and couplings from a seed: degree-regular edges,
        couplings ~ Uniform(0, 1)."""
        rng = np.random.default_rng(seed)
        edges = _random_regular_edges(n, degree, rng)
        couplings = rng.uniform(0.0, 1.0, size=edges.shape[0])
        return cls(n=n, beta=beta, h=h, edges=edges, couplings=couplings)

    def energy(self, spins) -> np.ndarray | float:
        s = np.atleast_2d(np.asarray(spins, dtype=np.float64))
        pair = s[:, self.edges[:, 0]] * s[:, self.edges[:, 1]]
        e = -self.beta * pair @ self.couplings - self.h * s.sum(axis=1)
        return e if np.asarray(spins).ndim > 1 else float(e[0])

    def _sweep(self, spins: np.ndarray, rng: np.random.Generator, sweeps: int) -> None:
        """Advance parallel chains in place by full Metropolis sweeps.

        One sweep performs n single-site updates; each update picks one site
        per chain uniformly at random and flips it with probability
        min(1, exp(-dH)).
        """
        chains = spins.shape[0]
        rows = np.arange(chains)
        for _ in range(sweeps * self.n):
            sites = rng.integers(0, self.n, size=chains)
            s_i = spins[rows, sites]
            nbr_spins = spins[rows[:, None], self._nbrs[sites]]
            local = (self._coup[sites] * nbr_spins).sum(axis=1)
            delta = 2.0 * self.beta * s_i * local + 2.0 * self.h * s_i
            accept = rng.random(chains) < np.exp(-delta)
            spins[rows[accept], sites[accept]] = -s_i[accept]

    def sample_spins(self, rng: np.random.Generator, size: int, *,
                     chains: int | None = None, burn_in: int | None = None,
                     thin: int = MH_THIN_SWEEPS) -> np.ndarray:
        """Draw ``size`` spin configurations from parallel MH chains."""
        chains = min(size, 512) if chains is None else chains
        burn_in = MH_BURNIN_SWEEP_FACTOR * self.n if burn_in is None else burn_in
        spins = np.where(rng.random((chains, self.n)) < 0.5, -1.0, 1.0)
        self._sweep(spins, rng, burn_in)
        out = np.empty((size, self.n), dtype=np.float64)
        filled = 0
        while filled < size:
            self._sweep(spins, rng, thin)
            take = min(chains, size - filled)
            out[filled:filled + take] = spins[:take]
            filled += take
        return out

    def spins_to_pauli(self, spins, rng: np.random.Generator) -> np.ndarray:
        flip = np.atleast_2d(np.asarray(spins)) < 0
        kind = rng.integers(0, 3, size=flip.shape)
        return _spread_kinds(flip, kind)

    def sample_batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.spins_to_pauli(self.sample_spins(rng, size), rng)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_batch(rng, 1)[0]


def sample_depolarizing(model: DepolarizingModel, rng: np.random.Generator) -> np.ndarray:
    """Draw one Pauli error from the depolarizing channel."""
    return model.sample(rng)


def logprob_depolarizing(model: DepolarizingModel, pauli) -> float:
    """Exact log-probability of one Pauli error under the channel."""
    return model.logprob(pauli)


def sample_ising(model: IsingNoiseModel, rng: np.random.Generator, *,
                 sweeps: int, burn_in: int | None = None,
                 thin: int = MH_THIN_SWEEPS) -> np.ndarray:
    """Run one MH chain for ``sweeps`` sweeps and map the final retained
    spin state (after burn-in, at every ``thin``-th sweep) to a Pauli error."""
    burn_in = MH_BURNIN_SWEEP_FACTOR * model.n if burn_in is None else burn_in
    if sweeps < burn_in:
        raise ValueError(f"sweeps={sweeps} < burn_in={burn_in}")
    spins = np.where(rng.random((1, model.n)) < 0.5, -1.0, 1.0)
    model._sweep(spins, rng, burn_in)
    retained = spins.copy()
    done = burn_in
    while done + thin <= sweeps:
        model._sweep(spins, rng, thin)
        retained = spins.copy()
        done += thin
    return model.spins_to_pauli(retained, rng)[0]


def exact_spin_distribution(model: IsingNoiseModel) -> tuple[np.ndarray, np.ndarray]:
    """Exhaustive Boltzmann distribution over all 2^n spin states.

    Returns (states, probs) with states in {-1, +1}. Guarded to small n;
    intended for validation only.
    """
    if model.n > 16:
        raise UnevaluableModelError(f"2^{model.n} spin states is too many to enumerate")
    count = 1 << model.n
    idx = np.arange(count, dtype=np.uint32)
    bits = (idx[:, None] >> np.arange(model.n)[None, :]) & 1
    states = np.where(bits, -1.0, 1.0)
    energies = model.energy(states)
    w = np.exp(-(energies - energies.min()))
    return states, w / w.sum()


def sample_training_batch(code: CodeTables, model, batch: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Draw errors and serialize them as (batch, 2n) [gamma, beta, alpha] rows."""
    if model.n != code.n:
        raise LengthMismatchError(f"model n={model.n} != code n={code.n}")
    return els_bits(code, model.sample_batch(rng, batch))
