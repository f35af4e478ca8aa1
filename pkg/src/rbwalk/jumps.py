"""Continuous-time jump processes on a graph.

A generator ``Q`` is realised through its embedded chain: hold in state
``i`` for an Exponential(``q_i``) time, then jump to ``j`` with probability
``q_ij / q_i``. Transition kernels ``exp(Qt)`` are computed by
uniformization.

Random draws come from a counter-based stream keyed by
``(seed, trajectory id, step, lane)``, so trajectory ``k`` of an ensemble is
identical whether it is sampled alone or inside any batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import DiscreteChain, Generator, discrete_entropy_rate, xlogx

__all__ = [
    "EmbeddedChainSpec",
    "Trajectory",
    "Ensemble",
    "CounterRNG",
    "embed",
    "sample_trajectory",
    "sample_ensemble",
    "transition_kernel",
    "discretize",
    "small_delta_entropy",
    "exact_delta_entropy",
]

DEFAULT_KERNEL_TOL = 1e-12
# largest r*t handled in one uniformization pass; longer times are squared up
_MAX_UNIFORM_RT = 32.0


@dataclass(frozen=True, eq=False)
class EmbeddedChainSpec:
    Pi: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        Pi = np.array(self.Pi, dtype=float)
        rates = np.array(self.rates, dtype=float)
        if np.any(rates <= 0):
            raise ValueError("holding rates must be strictly positive")
        if np.max(np.abs(Pi.sum(axis=1) - 1.0)) > 1e-12 or np.any(np.diag(Pi) != 0):
            raise ValueError("jump matrix must be row-stochastic with zero diagonal")
        Pi.setflags(write=False)
        rates.setflags(write=False)
        object.__setattr__(self, "Pi", Pi)
        object.__setattr__(self, "rates", rates)

    @property
    def n(self) -> int:
        return len(self.rates)


def embed(q: Generator) -> EmbeddedChainSpec:
    """Jump matrix ``q_ij / q_i`` and holding rates ``q_i = -q_ii``."""
    rates = -np.diag(q.Q)
    if np.any(rates <= 0):
        bad = [int(i) for i in np.flatnonzero(rates <= 0)]
        raise ValueError(f"absorbing state(s) {bad}: holding rate must be positive")
    Pi = q.Q / rates[:, None]
    np.fill_diagonal(Pi, 0.0)
    return EmbeddedChainSpec(Pi, rates)


class CounterRNG:
    """Stateless uniform draws on (0, 1] from a keyed 64-bit mixing hash.

    ``uniform(ids, step, lane)`` depends only on the seed and its arguments.
    The mixer is the SplitMix64 finaliser, applied twice over the key.
    """

    _GOLDEN = np.uint64(0x9E3779B97F4A7C15)
    _STEP = np.uint64(0xD1B54A32D192ED03)

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._key = self._mix(np.array([self.seed % 2**64], dtype=np.uint64))[0]

    @staticmethod
    def _mix(z):
        with np.errstate(over="ignore"):
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            return z ^ (z >> np.uint64(31))

    def uniform(self, ids, step: int, lane: int) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.uint64)
        counter = np.uint64(2 * step + lane + 1)
        with np.errstate(over="ignore"):
            z = self._mix(self._key + ids * self._GOLDEN)
            z = self._mix(z ^ (counter * self._STEP))
        # top 53 bits, shifted to (0, 1] so -log(u) is finite
        return ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sample path ``(Z_k, T_k)``: visited states and their holding times.

    ``states`` has one more entry than there are jumps. The last holding time
    is the residual one that carries the path past ``horizon``.
    """

    states: tuple
    holding_times: tuple
    horizon: float

    def __post_init__(self):
        states = tuple(int(s) for s in self.states)
        holding = tuple(float(t) for t in self.holding_times)
        if len(states) != len(holding) or not states:
            raise ValueError("need one holding time per visited state")
        if any(t <= 0 for t in holding):
            raise ValueError("holding times must be positive")
        if any(a == b for a, b in zip(states, states[1:])):
            raise ValueError("consecutive states must differ")
        times = np.cumsum(holding)
        if len(times) > 1 and times[-2] > self.horizon:
            raise ValueError("a jump falls after the horizon")
        if times[-1] <= self.horizon:
            raise ValueError("path ends before the horizon")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "holding_times", holding)

    @property
    def start(self) -> int:
        return self.states[0]

    @property
    def n_jumps(self) -> int:
        return len(self.states) - 1

    @property
    def jumps(self) -> list[tuple[int, float]]:
        """``(next_state, holding time before that jump)`` pairs."""
        return list(zip(self.states[1:], self.holding_times[:-1]))

    @property
    def jump_times(self) -> np.ndarray:
        return np.cumsum(self.holding_times)[:-1]

    def state_at(self, t: float) -> int:
        return self.states[int(np.searchsorted(self.jump_times, t, side="right"))]


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Many trajectories in flat arrays; path ``m`` spans ``offsets[m]:offsets[m+1]``."""

    ids: np.ndarray
    offsets: np.ndarray
    states: np.ndarray
    holding_times: np.ndarray
    horizon: float
    seed: int

    def __len__(self):
        return len(self.ids)

    @property
    def n_jumps(self) -> np.ndarray:
        return np.diff(self.offsets) - 1

    @property
    def start_states(self) -> np.ndarray:
        return self.states[self.offsets[:-1]]

    @property
    def final_states(self) -> np.ndarray:
        return self.states[self.offsets[1:] - 1]

    def trajectory(self, m: int) -> Trajectory:
        a, b = self.offsets[m], self.offsets[m + 1]
        return Trajectory(self.states[a:b], self.holding_times[a:b], self.horizon)

    def paths_with(self, n_jumps: int, end: int) -> np.ndarray:
        """State sequences (rows) of trajectories with ``n_jumps`` jumps ending at ``end``."""
        sel = np.flatnonzero((self.n_jumps == n_jumps) & (self.final_states == end))
        cols = self.offsets[sel][:, None] + np.arange(n_jumps + 1)
        return self.states[cols]

    def holding_means(self, n_states: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean and count of every drawn holding time, per state.

        The residual draws are included: whether a draw happens depends only
        on earlier draws, so each one is an unconditioned exponential sample.
        """
        counts = np.bincount(self.states, minlength=n_states)
        sums = np.bincount(self.states, weights=self.holding_times, minlength=n_states)
        with np.errstate(invalid="ignore", divide="ignore"):
            return sums / counts, counts

    def records(self):
        for m in range(len(self)):
            a, b = self.offsets[m], self.offsets[m + 1]
            yield {
                "id": int(self.ids[m]),
                "start": int(self.states[a]),
                "states": self.states[a:b].tolist(),
                "holding_times": self.holding_times[a:b].tolist(),
                "horizon": self.horizon,
                "seed": self.seed,
            }


def sample_ensemble(spec: EmbeddedChainSpec, start, horizon: float, count: int | None = None,
                    seed: int = 0, ids=None) -> Ensemble:
    """Simulate trajectories in lockstep up to ``horizon``.

    ``start`` is a node or an array of nodes (one per trajectory). Trajectory
    ids default to ``0 .. count-1``.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if ids is None:
        if count is None:
            raise ValueError("give either count or ids")
        ids = np.arange(count, dtype=np.int64)
    ids = np.asarray(ids, dtype=np.int64)
    m = len(ids)
    rng = CounterRNG(seed)
    state = np.broadcast_to(np.asarray(start, dtype=np.int64), (m,)).copy()
    if np.any((state < 0) | (state >= spec.n)):
        raise IndexError("start state out of range")

    cum = np.cumsum(spec.Pi, axis=1)
    # pin each row's cumulative mass to exactly 1 from its last positive entry on
    for i in range(spec.n):
        last = np.flatnonzero(spec.Pi[i] > 0)[-1]
        cum[i, last:] = 1.0

    clock = np.zeros(m)
    active = np.arange(m)
    rec_traj, rec_state, rec_hold = [], [], []
    step = 0
    while active.size:
        u = rng.uniform(ids[active], step, 0)
        hold = -np.log(u) / spec.rates[state[active]]
        rec_traj.append(active)
        rec_state.append(state[active].copy())
        rec_hold.append(hold)
        clock[active] += hold
        active = active[clock[active] <= horizon]
        if active.size:
            u = rng.uniform(ids[active], step, 1)
            state[active] = np.sum(cum[state[active]] < u[:, None], axis=1)
        step += 1

    traj = np.concatenate(rec_traj)
    order = np.argsort(traj, kind="stable")  # steps were appended in order
    lengths = np.bincount(traj, minlength=m)
    offsets = np.concatenate([[0], np.cumsum(lengths)])
    return Ensemble(
        ids=ids,
        offsets=offsets,
        states=np.concatenate(rec_state)[order],
        holding_times=np.concatenate(rec_hold)[order],
        horizon=float(horizon),
        seed=int(seed),
    )


def sample_trajectory(spec: EmbeddedChainSpec, start: int, horizon: float, seed: int,
                      index: int = 0) -> Trajectory:
    """One path; equal to trajectory ``index`` of any ensemble with this seed."""
    return sample_ensemble(spec, start, horizon, seed=seed, ids=[index]).trajectory(0)


def _uniformized(Q, t, tol):
    rates = -np.diag(Q)
    r = float(np.max(rates))
    n = Q.shape[0]
    if r == 0.0 or t == 0.0:
        return np.eye(n)
    P = np.eye(n) + Q / r
    rt = r * t
    weight = np.exp(-rt)
    term = np.eye(n)
    out = weight * term
    mass = weight
    k = 0
    while 1.0 - mass > tol:
        k += 1
        term = term @ P
        weight *= rt / k
        out += weight * term
        mass += weight
        if k > 2.0 * rt + 10 and weight < tol * 1e-3:
            # complement has hit rounding level
            break
    return out


def transition_kernel(q: Generator, t: float, tol: float = DEFAULT_KERNEL_TOL) -> np.ndarray:
    """``exp(Qt)`` by uniformization.

    With ``r = max q_i`` and ``P = I + Q/r`` the kernel is the Poisson(rt)
    mixture of powers of ``P``, truncated once the tail mass drops below
    ``tol``. Large ``rt`` is split into ``2**s`` equal pieces and squared.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    Q = q.Q if isinstance(q, Generator) else np.asarray(q, dtype=float)
    r = float(np.max(-np.diag(Q)))
    s = 0
    while r * t / 2**s > _MAX_UNIFORM_RT:
        s += 1
    K = _uniformized(Q, t / 2**s, tol / 2**s)
    for _ in range(s):
        K = K @ K
    K[(K < 0) & (K > -1e-15)] = 0.0
    return K


def discretize(traj: Trajectory, delta: float) -> list[int]:
    """States at ``0, delta, 2 delta, ...`` up to the horizon (right-continuous)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    count = int(np.floor(traj.horizon / delta * (1 + 1e-12)))
    grid = np.arange(count + 1) * delta
    idx = np.searchsorted(traj.jump_times, grid, side="right")
    return [traj.states[k] for k in idx]


def small_delta_entropy(q: Generator, delta: float) -> float:
    """Leading-order entropy per step of the chain sampled every ``delta``.

    ``-delta (1 - log delta) sum_i pi_i q_ii - delta sum_{i != j} pi_i q_ij log q_ij``
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    Q, pi = q.Q, q.pi
    off = Q - np.diag(np.diag(Q))
    diag_term = float(pi @ np.diag(Q))
    return -delta * (1.0 - np.log(delta)) * diag_term - delta * float(np.sum(pi[:, None] * xlogx(off)))


def exact_delta_entropy(q: Generator, delta: float, tol: float = 1e-15) -> float:
    """Entropy rate of the discrete chain with transition matrix ``exp(Q delta)``."""
    return discrete_entropy_rate(DiscreteChain(transition_kernel(q, delta, tol), q.pi))
