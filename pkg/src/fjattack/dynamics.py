"""Friedkin-Johnsen opinion dynamics on directed influence networks.

Each agent i holds an opinion z_i in [0, 1] and updates it synchronously by
mixing a fixed intrinsic opinion s_i with the weighted average of its
in-neighbors' current opinions:

    z_i(t+1) = theta_i * s_i + (1 - theta_i) * sum_j w_ij * z_j(t)

where theta_i in [0, 1] is the agent's stubbornness and row i of the
influence matrix W is a probability vector supported on the agents that
point an edge at i.  When every agent retains some stubbornness (or, more
generally, when (I - Theta) W is a contraction) the dynamics converge to a
unique fixed point with the closed form

    z* = (I - (I - Theta) W)^-1 Theta s,

and the scalar outcome g = sum_i z*_i lies in [0, N].
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, ValidationError
from .linalg import solve_conditioned, spectral_radius

# Stubbornness floor under which the contraction of (I - Theta) W is no
# longer automatic and is verified spectrally instead.
THETA_MIN = 1e-6

# Tolerance on |row sum - 1| for influence-matrix rows.
ROW_SUM_TOL = 1e-9

# The spectral radius of (I - Theta) W must stay below 1 by this margin.
SPECTRAL_MARGIN = 1e-9


@dataclass(frozen=True)
class InfluenceNetwork:
    """Directed influence graph on agents 0..agent_count-1.

    An edge (source, target) means the target listens to the source, i.e.
    w[target, source] may be nonzero.  Every agent must have at least one
    in-neighbor so each influence row has support to normalize over.
    Self-loops are rejected unless ``allow_self_loops`` is set.
    """

    agent_count: int
    edges: tuple
    allow_self_loops: bool = False

    def __post_init__(self):
        n = self.agent_count
        if not isinstance(n, int) or n < 1:
            raise ValidationError(f"agent_count must be a positive int, got {n!r}")
        canon = []
        seen = set()
        for edge in self.edges:
            src, dst = edge
            src, dst = int(src), int(dst)
            if not (0 <= src < n and 0 <= dst < n):
                raise ValidationError(f"edge ({src}, {dst}) out of range for {n} agents")
            if src == dst and not self.allow_self_loops:
                raise ValidationError(f"self-loop on agent {src} is not allowed")
            if (src, dst) not in seen:
                seen.add((src, dst))
                canon.append((src, dst))
        canon.sort()
        object.__setattr__(self, "edges", tuple(canon))

        incoming = [[] for _ in range(n)]
        outgoing = [[] for _ in range(n)]
        for src, dst in canon:
            incoming[dst].append(src)
            outgoing[src].append(dst)
        for i in range(n):
            if not incoming[i]:
                raise ValidationError(f"agent {i} has no in-neighbors")
        object.__setattr__(self, "_incoming", tuple(tuple(v) for v in incoming))
        object.__setattr__(self, "_outgoing", tuple(tuple(v) for v in outgoing))

    def in_neighbors(self, agent):
        """Agents whose opinions feed agent's update, in index order."""
        return self._incoming[agent]

    def out_neighbors(self, agent):
        """Agents whose updates read agent's opinion, in index order."""
        return self._outgoing[agent]

    def out_degree(self, agent):
        return len(self._outgoing[agent])

    def target_budget(self, agent):
        """Max number of this agent's out-neighbors an attacker may re-weight."""
        return max(0, (self.out_degree(agent) - 1) // 3)

    def leader_budget(self):
        """Max number of agents that may be turned adversarial."""
        return (self.agent_count - 1) // 3

    def support_mask(self):
        """Boolean (n, n) mask; mask[i, j] is True iff w[i, j] may be nonzero."""
        n = self.agent_count
        mask = np.zeros((n, n), dtype=bool)
        for src, dst in self.edges:
            mask[dst, src] = True
        return mask


@dataclass(frozen=True, eq=False)
class FjParameters:
    """A network together with the full parameterization of its dynamics.

    intrinsic     s, shape (n,), entries in [0, 1]
    stubbornness  theta, shape (n,), entries in [0, 1]
    influence     W, shape (n, n), row-stochastic and supported on the edges

    Construction validates shapes, ranges, support, row sums, and that the
    dynamics contract (theta >= THETA_MIN everywhere, or failing that a
    spectral-radius check on (I - Theta) W).  Arrays are copied and frozen.
    """

    network: InfluenceNetwork
    intrinsic: np.ndarray
    stubbornness: np.ndarray
    influence: np.ndarray

    def __post_init__(self):
        n = self.network.agent_count
        s = np.array(self.intrinsic, dtype=float)
        theta = np.array(self.stubbornness, dtype=float)
        w = np.array(self.influence, dtype=float)
        if s.shape != (n,):
            raise ValidationError(f"intrinsic must have shape ({n},), got {s.shape}")
        if theta.shape != (n,):
            raise ValidationError(f"stubbornness must have shape ({n},), got {theta.shape}")
        if w.shape != (n, n):
            raise ValidationError(f"influence must have shape ({n}, {n}), got {w.shape}")
        if not np.all(np.isfinite(s)) or (s < 0).any() or (s > 1).any():
            raise ValidationError("intrinsic opinions must lie in [0, 1]")
        if not np.all(np.isfinite(theta)) or (theta < 0).any() or (theta > 1).any():
            raise ValidationError("stubbornness values must lie in [0, 1]")
        if not np.all(np.isfinite(w)) or (w < 0).any():
            raise ValidationError("influence weights must be nonnegative")
        off_support = w[~self.network.support_mask()]
        if off_support.size and (off_support != 0.0).any():
            raise ValidationError("influence has nonzero weight outside the edge set")
        row_sums = w.sum(axis=1)
        bad = np.abs(row_sums - 1.0) > ROW_SUM_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise ValidationError(
                f"influence row {i} sums to {row_sums[i]!r}, expected 1 within {ROW_SUM_TOL}"
            )
        if (theta < THETA_MIN).any():
            radius = spectral_radius((1.0 - theta)[:, None] * w)
            if radius > 1.0 - SPECTRAL_MARGIN:
                raise ConvergenceError(
                    f"dynamics do not contract: spectral radius {radius:.12f} "
                    f"with stubbornness below {THETA_MIN}"
                )
        for arr in (s, theta, w):
            arr.setflags(write=False)
        object.__setattr__(self, "intrinsic", s)
        object.__setattr__(self, "stubbornness", theta)
        object.__setattr__(self, "influence", w)

    @property
    def n(self):
        return self.network.agent_count


@dataclass(frozen=True, eq=False)
class OpinionTrajectory:
    """Synchronous rollout of the dynamics: row t is the opinion vector z(t)."""

    rounds: int
    values: np.ndarray
    pinned: tuple = ()

    def __post_init__(self):
        if not isinstance(self.rounds, int) or self.rounds < 1:
            raise ValidationError(f"rounds must be a positive int, got {self.rounds!r}")
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != self.rounds + 1:
            raise ValidationError(
                f"values must have shape (rounds + 1, n), got {values.shape}"
            )
        if not np.all(np.isfinite(values)) or (values < 0).any() or (values > 1).any():
            raise ValidationError("trajectory entries must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "pinned", tuple(sorted(int(i) for i in self.pinned)))

    @property
    def n(self):
        return self.values.shape[1]


class Outcome(NamedTuple):
    """Fixed point of the dynamics and its scalar aggregate g."""

    fixed_point: np.ndarray
    g: float


def _check_opinions(z, n, name="z"):
    z = np.asarray(z, dtype=float)
    if z.shape != (n,):
        raise ValidationError(f"{name} must have shape ({n},), got {z.shape}")
    if not np.all(np.isfinite(z)) or (z < 0).any() or (z > 1).any():
        raise ValidationError(f"{name} entries must lie in [0, 1]")
    return z


def _check_pinned(pinned, n, pinned_value):
    pinned = tuple(sorted({int(i) for i in pinned}))
    for i in pinned:
        if not 0 <= i < n:
            raise ValidationError(f"pinned agent {i} out of range for {n} agents")
    if not 0.0 <= pinned_value <= 1.0:
        raise ValidationError(f"pinned_value must lie in [0, 1], got {pinned_value!r}")
    return pinned


def fj_step(params, z, pinned=(), pinned_value=1.0):
    """One synchronous update of every agent's opinion.

    Agents listed in ``pinned`` ignore the update rule and are held at
    ``pinned_value`` instead.  The result of the convex mixing is clipped
    to [0, 1] to strip floating-point dust; in exact arithmetic the update
    maps [0, 1]^n into itself.
    """
    n = params.n
    z = _check_opinions(z, n)
    pinned = _check_pinned(pinned, n, pinned_value)
    theta = params.stubbornness
    out = theta * params.intrinsic + (1.0 - theta) * (params.influence @ z)
    np.clip(out, 0.0, 1.0, out=out)
    if pinned:
        out[list(pinned)] = pinned_value
    return out


def simulate(params, z0, rounds, pinned=(), pinned_value=1.0):
    """Roll the dynamics out for ``rounds`` synchronous updates.

    Row 0 of the result is the supplied initial vector as given; pinning
    only constrains the updated rows.
    """
    n = params.n
    z0 = _check_opinions(z0, n, name="z0")
    pinned = _check_pinned(pinned, n, pinned_value)
    if not isinstance(rounds, int) or rounds < 1:
        raise ValidationError(f"rounds must be a positive int, got {rounds!r}")
    values = np.empty((rounds + 1, n), dtype=float)
    values[0] = z0
    for t in range(rounds):
        values[t + 1] = fj_step(params, values[t], pinned, pinned_value)
    return OpinionTrajectory(rounds=rounds, values=values, pinned=pinned)


def closed_form_outcome(params):
    """Fixed point z* = (I - (I - Theta) W)^-1 Theta s and its sum g.

    Raises ConvergenceError if the system matrix is singular or too badly
    conditioned to trust.
    """
    theta = params.stubbornness
    system = np.eye(params.n) - (1.0 - theta)[:, None] * params.influence
    z = solve_conditioned(system, theta * params.intrinsic)
    return Outcome(fixed_point=z, g=float(z.sum()))
