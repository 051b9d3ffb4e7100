"""Adversarial perturbation of an influence network.

An attack turns a small set A of agents into adversaries that broadcast
opinion 1 regardless of what they hear, and lets each adversary j divert a
little of the attention of up to budget(j) of its out-neighbors.  For a
targeted agent i with adversary set A_i (the adversaries that picked i),
row i of W becomes

    w_ij <- (1 - |A_i| p) w_ij            for j not in A_i
    w_ij <- (1 - |A_i| p) w_ij + p        for j in A_i

which preserves the row sum.  With adversaries pinned at opinion 1, the
remaining agents U reach the fixed point of the restricted system

    z_U = (I_U - (I_U - Theta_U) W_UU)^-1 (Theta_U s_U + (I_U - Theta_U) W_UA 1)

and the attack outcome is g = sum(z_U) + |A|, which lies in [|A|, N].
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dynamics import FjParameters, simulate
from .errors import ValidationError
from .linalg import solve_conditioned

# Default per-edge influence magnitude p.
DEFAULT_P = 1e-3


@dataclass(frozen=True)
class AttackConfig:
    """An adversary set, a target set per adversary, and the magnitude p.

    ``targets`` may be given as a mapping {adversary: iterable of targets}
    or as (adversary, targets) pairs; it is stored canonically as a sorted
    tuple of (adversary, sorted target tuple) pairs covering every
    adversary, so equal configs compare and hash equal and the tuple
    itself serves as a deterministic tie-breaking key.

    An empty adversary set is legal and makes the attack a no-op.
    Structural constraints checked here: adversaries distinct, targets
    only for adversaries, no adversary is targeted, p > 0, and |A_i| p < 1
    for every targeted agent i.  Constraints that need the graph
    (membership, budgets) live in ``validate_against``.
    """

    adversaries: tuple
    targets: tuple
    influence_magnitude: float = DEFAULT_P

    def __post_init__(self):
        adversaries = tuple(sorted(int(a) for a in self.adversaries))
        if len(set(adversaries)) != len(adversaries):
            raise ValidationError(f"duplicate adversaries in {adversaries}")
        adv_set = set(adversaries)

        raw = self.targets.items() if hasattr(self.targets, "items") else self.targets
        by_adv = {}
        for j, target_list in raw:
            j = int(j)
            if j not in adv_set:
                raise ValidationError(f"targets listed for non-adversary {j}")
            if j in by_adv:
                raise ValidationError(f"adversary {j} has two target entries")
            targets = tuple(sorted(int(i) for i in target_list))
            if len(set(targets)) != len(targets):
                raise ValidationError(f"adversary {j} targets an agent twice")
            for i in targets:
                if i in adv_set:
                    raise ValidationError(f"adversary {i} cannot be a target")
            by_adv[j] = targets
        canon = tuple((j, by_adv.get(j, ())) for j in adversaries)

        p = float(self.influence_magnitude)
        if not np.isfinite(p) or p <= 0.0:
            raise ValidationError(f"influence magnitude must be positive, got {p!r}")
        counts = {}
        for _, targets in canon:
            for i in targets:
                counts[i] = counts.get(i, 0) + 1
        for i, k in counts.items():
            if k * p >= 1.0:
                raise ValidationError(
                    f"agent {i} is targeted by {k} adversaries with p={p}; need |A_i| p < 1"
                )

        object.__setattr__(self, "adversaries", adversaries)
        object.__setattr__(self, "targets", canon)
        object.__setattr__(self, "influence_magnitude", p)

    def target_map(self):
        """Targets as a plain dict keyed by adversary."""
        return {j: targets for j, targets in self.targets}

    def targeted_by(self):
        """Inverse map: targeted agent -> tuple of adversaries that chose it."""
        inverse = {}
        for j, targets in self.targets:
            for i in targets:
                inverse.setdefault(i, []).append(j)
        return {i: tuple(sorted(js)) for i, js in inverse.items()}

    def validate_against(self, network, enforce_budgets=True):
        """Check graph membership and (by default) both attack budgets.

        The budget caps bound the attacker's search problem; the outcome
        formulas stay well defined without them, so evaluation helpers can
        pass ``enforce_budgets=False`` to score diagnostic configs that a
        planner would never emit.
        """
        n = network.agent_count
        for j in self.adversaries:
            if not 0 <= j < n:
                raise ValidationError(f"adversary {j} out of range for {n} agents")
        adv_set = set(self.adversaries)
        for j, targets in self.targets:
            allowed = set(network.out_neighbors(j)) - adv_set
            for i in targets:
                if i not in allowed:
                    raise ValidationError(
                        f"agent {i} is not an eligible target of adversary {j}"
                    )
        if not enforce_budgets:
            return
        budget = network.leader_budget()
        if len(self.adversaries) > budget:
            raise ValidationError(
                f"{len(self.adversaries)} adversaries exceed the budget of {budget}"
            )
        for j, targets in self.targets:
            if len(targets) > network.target_budget(j):
                raise ValidationError(
                    f"adversary {j} has {len(targets)} targets, "
                    f"budget is {network.target_budget(j)}"
                )


@dataclass(frozen=True, eq=False)
class AdversarialOutcome:
    """Fixed point of the attacked dynamics over the non-adversarial agents.

    g_value = sum(fixed_point) + |adversaries| and always lies in
    [|adversaries|, n].
    """

    config: AttackConfig
    unpinned: tuple
    fixed_point: np.ndarray
    g_value: float


class OutcomeMetrics(NamedTuple):
    delta_g: float
    agreement_fraction: float


class _RestrictedSystem:
    """Base slices of the dynamics restricted to the non-adversarial agents.

    Holds the unmodified W_UU / W_UA blocks for a fixed adversary set so
    that many target choices can be scored cheaply: each evaluation copies
    the handful of targeted rows, applies the re-weighting, and solves one
    |U| x |U| system.
    """

    def __init__(self, params, adversaries):
        n = params.n
        adversaries = tuple(sorted(adversaries))
        unpinned = tuple(i for i in range(n) if i not in set(adversaries))
        if not unpinned:
            raise ValidationError("every agent is adversarial; nothing to evaluate")
        u = np.array(unpinned, dtype=int)
        a = np.array(adversaries, dtype=int)
        self.adversaries = adversaries
        self.unpinned = unpinned
        self.theta_u = params.stubbornness[u]
        self.s_u = params.intrinsic[u]
        self.w_uu = params.influence[np.ix_(u, u)]
        self.w_ua = params.influence[np.ix_(u, a)]
        self.u_pos = {agent: pos for pos, agent in enumerate(unpinned)}
        self.a_pos = {agent: pos for pos, agent in enumerate(adversaries)}
        self.eye = np.eye(len(unpinned))

    def modified_blocks(self, target_items, p):
        """Apply the row re-weighting for one target choice; returns (W_UU, W_UA)."""
        w_uu = self.w_uu.copy()
        w_ua = self.w_ua.copy()
        hit = {}
        for j, targets in target_items:
            for i in targets:
                hit.setdefault(i, []).append(j)
        for i, advs in hit.items():
            row = self.u_pos[i]
            scale = 1.0 - len(advs) * p
            w_uu[row] *= scale
            w_ua[row] *= scale
            w_ua[row, [self.a_pos[j] for j in advs]] += p
        return w_uu, w_ua

    def outcome(self, target_items, p):
        """Fixed point over U and the scalar g for one target choice."""
        w_uu, w_ua = self.modified_blocks(target_items, p)
        open_minded = 1.0 - self.theta_u
        system = self.eye - open_minded[:, None] * w_uu
        rhs = self.theta_u * self.s_u + open_minded * w_ua.sum(axis=1)
        z_u = np.linalg.solve(system, rhs)
        return z_u, float(z_u.sum()) + len(self.adversaries)


def apply_adversarial_weights(params, config, enforce_budgets=True):
    """Return a copy of ``params`` with the attack's weight perturbation applied.

    Stubbornness and intrinsic opinions are untouched; only the rows of
    targeted agents change, and their sums are preserved.
    """
    config.validate_against(params.network, enforce_budgets)
    w = np.array(params.influence)
    p = config.influence_magnitude
    for i, advs in config.targeted_by().items():
        scale = 1.0 - len(advs) * p
        w[i] *= scale
        w[i, list(advs)] += p
    return FjParameters(
        network=params.network,
        intrinsic=params.intrinsic,
        stubbornness=params.stubbornness,
        influence=w,
    )


def adversarial_outcome(params, config, enforce_budgets=True):
    """Closed-form outcome of an attack with adversaries pinned at opinion 1.

    Solves the restricted fixed point over the non-adversarial agents and
    returns g = sum(z_U) + |A|.
    """
    config.validate_against(params.network, enforce_budgets)
    system = _RestrictedSystem(params, config.adversaries)
    w_uu, w_ua = system.modified_blocks(config.targets, config.influence_magnitude)
    open_minded = 1.0 - system.theta_u
    matrix = system.eye - open_minded[:, None] * w_uu
    rhs = system.theta_u * system.s_u + open_minded * w_ua.sum(axis=1)
    z_u = solve_conditioned(matrix, rhs)
    return AdversarialOutcome(
        config=config,
        unpinned=system.unpinned,
        fixed_point=z_u,
        g_value=float(z_u.sum()) + len(config.adversaries),
    )


def simulate_adversarial(params, config, z0, rounds, enforce_budgets=True):
    """Roll out the attacked dynamics with adversaries pinned at opinion 1.

    The returned trajectory starts from ``z0`` with the adversary entries
    overwritten to 1, uses the re-weighted rows for targeted agents, and
    holds every adversary at 1 on each update.  Its tail converges to the
    same fixed point as ``adversarial_outcome``.
    """
    attacked = apply_adversarial_weights(params, config, enforce_budgets)
    adversaries = list(config.adversaries)
    intrinsic = np.array(attacked.intrinsic)
    intrinsic[adversaries] = 1.0
    pinned_params = FjParameters(
        network=attacked.network,
        intrinsic=intrinsic,
        stubbornness=attacked.stubbornness,
        influence=attacked.influence,
    )
    z_init = np.array(np.asarray(z0, dtype=float))
    if z_init.shape != (params.n,):
        raise ValidationError(f"z0 must have shape ({params.n},), got {z_init.shape}")
    z_init[adversaries] = 1.0
    return simulate(pinned_params, z_init, rounds, pinned=adversaries, pinned_value=1.0)


def outcome_metrics(baseline_g, outcome):
    """Gain over the unattacked outcome and the unpinned agreement fraction.

    agreement_fraction is the share of non-adversarial agents whose
    fixed-point opinion is at least 0.5.
    """
    agreeing = int(np.count_nonzero(outcome.fixed_point >= 0.5))
    return OutcomeMetrics(
        delta_g=outcome.g_value - baseline_g,
        agreement_fraction=agreeing / len(outcome.unpinned),
    )
