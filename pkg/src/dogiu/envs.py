"""Multi-camera target monitoring environments.

Cameras sit at fixed positions and choose one of K headings per round; a
camera covers the closed circular sector of its sensing range around the
chosen heading.  Targets move in clusters: all targets of a cluster share a
velocity whose direction is resampled periodically, each target adds small
i.i.d. Gaussian noise per step, and the workspace boundary reflects.

Rewards for the learners are single-agent marginal coverage gains divided by
a cap B so they land in [0, 1].  The default B is the largest single-sector
target count seen in a short pilot rollout.

The smoothed reward variant replaces the hard sector test with sigmoidal
memberships and deploys headings along a short angular ramp, which makes the
reward Lipschitz in both evaluation time and deployment times; its declared
constants are conservative closed-form bounds suitable for gap audits.  The
hard-count objective is piecewise constant in time, hence not Lipschitz, and
is never used for bound assertions.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .asynchrony import Deployment, TimeStampedRewardHandle
from .submodular import Assignment, GroundElement, SetFunctionHandle

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# default pilot length for calibrating the reward cap B
PILOT_STEPS = 200

# tabular instances must list every subset; 2^16 entries is the ceiling
TABLE_GROUND_CAP = 16


# ---------------------------------------------------------------------------
# Cameras
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CameraGrid:
    """Fixed camera positions with a shared heading set and sector sensor."""

    positions: tuple[tuple[float, float], ...]
    heading_count: int
    fov_half_angle: float
    sensing_range: float

    def __post_init__(self) -> None:
        if not self.positions:
            raise ValueError("need at least one camera")
        if self.heading_count < 1:
            raise ValueError("heading_count must be >= 1")
        if not 0 < self.fov_half_angle < math.pi / 2:
            raise ValueError("fov half-angle must be in (0, pi/2)")
        if self.sensing_range <= 0:
            raise ValueError("sensing range must be positive")

    @property
    def camera_count(self) -> int:
        return len(self.positions)

    def heading_angle(self, action: int) -> float:
        if not 0 <= action < self.heading_count:
            raise ValueError(f"heading action {action} out of range")
        return TWO_PI * action / self.heading_count

    @classmethod
    def lattice(
        cls,
        rows: int,
        cols: int,
        width: float,
        height: float,
        heading_count: int,
        fov_half_angle: float,
        sensing_range: float,
    ) -> "CameraGrid":
        """rows x cols cameras at the centers of an even workspace partition."""
        positions = []
        for r in range(rows):
            for c in range(cols):
                positions.append(
                    ((c + 0.5) * width / cols, (r + 0.5) * height / rows)
                )
        return cls(
            tuple(positions), heading_count, fov_half_angle, sensing_range
        )

    def position_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float)


def sector_masks(cameras: CameraGrid, targets: np.ndarray) -> np.ndarray:
    """Boolean (camera, heading, target) coverage of the closed sectors."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    cams = cameras.position_array()
    rel = targets[None, :, :] - cams[:, None, :]
    dist = np.hypot(rel[..., 0], rel[..., 1])
    ang = np.arctan2(rel[..., 1], rel[..., 0])
    headings = TWO_PI * np.arange(cameras.heading_count) / cameras.heading_count
    diff = ang[:, None, :] - headings[None, :, None]
    diff = np.mod(diff + math.pi, TWO_PI) - math.pi
    in_fov = np.abs(diff) <= cameras.fov_half_angle
    in_range = dist <= cameras.sensing_range
    masks = in_fov & in_range[:, None, :]
    # a target sitting exactly on a camera is covered whatever the heading
    masks |= (dist == 0.0)[:, None, :]
    return masks


def masks_to_bits(masks: np.ndarray) -> list[list[int]]:
    """Per-(camera, heading) target sets packed into Python int bitmasks."""
    c, h, m = masks.shape
    packed = np.packbits(
        masks.reshape(c * h, m).astype(np.uint8), axis=1, bitorder="little"
    )
    out: list[list[int]] = []
    for i in range(c):
        row = []
        for k in range(h):
            row.append(int.from_bytes(packed[i * h + k].tobytes(), "little"))
        out.append(row)
    return out


def covered_count(
    cameras: CameraGrid,
    targets: np.ndarray,
    profile: Assignment | Mapping[int, int],
) -> int:
    """Number of targets inside at least one deployed sector."""
    if isinstance(profile, Assignment):
        items = [(e.agent_id, e.action_id) for e in profile]
    else:
        items = sorted(profile.items())
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.size == 0 or not items:
        return 0
    masks = sector_masks(cameras, targets)
    covered = np.zeros(targets.shape[0], dtype=bool)
    for cam, action in items:
        if not 0 <= cam < cameras.camera_count:
            raise ValueError(f"camera {cam} out of range")
        if not 0 <= action < cameras.heading_count:
            raise ValueError(f"heading {action} out of range")
        covered |= masks[cam, action]
    return int(covered.sum())


def coverage_set_function(
    cameras: CameraGrid,
    targets: np.ndarray,
    reward_cap: float = 1.0,
) -> SetFunctionHandle:
    """Coverage counts over a fixed scene as a set function (divided by B).

    Accepts arbitrary element subsets, including several headings of the
    same camera (their sectors union), so curvature over the full ground set
    is well defined.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if reward_cap <= 0:
        raise ValueError("reward cap must be positive")
    bits = (
        masks_to_bits(sector_masks(cameras, targets))
        if targets.size
        else [[0] * cameras.heading_count for _ in range(cameras.camera_count)]
    )

    def evaluate(elements: frozenset[GroundElement]) -> float:
        union = 0
        for e in elements:
            union |= bits[e.agent_id][e.action_id]
        return union.bit_count() / reward_cap

    return SetFunctionHandle(
        evaluate,
        reward_cap=reward_cap,
        description=f"sector coverage of {targets.shape[0]} targets",
    )


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------


@dataclass
class TargetSystem:
    """Clustered targets with shared per-cluster velocity and reflection."""

    positions: np.ndarray  # (m, 2)
    velocities: np.ndarray  # (m, 2) per-target copies of cluster velocity
    cluster_ids: np.ndarray  # (m,)
    cluster_count: int
    speed: float
    resample_period: int
    noise_sigma: float
    width: float
    height: float

    @classmethod
    def spawn(
        cls,
        rng: np.random.Generator,
        cluster_count: int,
        per_cluster: int,
        speed: float,
        resample_period: int,
        noise_sigma: float,
        width: float,
        height: float,
        scatter_std: float = 3.0,
    ) -> "TargetSystem":
        """Uniform cluster centers, Gaussian scatter around each center."""
        if cluster_count < 1 or per_cluster < 1:
            raise ValueError("need at least one cluster and one target")
        centers = rng.uniform([0.0, 0.0], [width, height], size=(cluster_count, 2))
        cluster_ids = np.repeat(np.arange(cluster_count), per_cluster)
        positions = centers[cluster_ids] + rng.normal(
            0.0, scatter_std, size=(cluster_count * per_cluster, 2)
        )
        np.clip(positions[:, 0], 0.0, width, out=positions[:, 0])
        np.clip(positions[:, 1], 0.0, height, out=positions[:, 1])
        headings = rng.uniform(0.0, TWO_PI, size=cluster_count)
        cluster_vel = speed * np.stack([np.cos(headings), np.sin(headings)], axis=1)
        return cls(
            positions=positions,
            velocities=cluster_vel[cluster_ids].copy(),
            cluster_ids=cluster_ids,
            cluster_count=cluster_count,
            speed=speed,
            resample_period=resample_period,
            noise_sigma=noise_sigma,
            width=width,
            height=height,
        )

    def copy(self) -> "TargetSystem":
        return TargetSystem(
            self.positions.copy(),
            self.velocities.copy(),
            self.cluster_ids.copy(),
            self.cluster_count,
            self.speed,
            self.resample_period,
            self.noise_sigma,
            self.width,
            self.height,
        )

    def step(self, t: int, rng: np.random.Generator) -> None:
        """Advance one step; draws cluster headings first, then noise."""
        if self.resample_period > 0 and t % self.resample_period == 0:
            headings = rng.uniform(0.0, TWO_PI, size=self.cluster_count)
            cluster_vel = self.speed * np.stack(
                [np.cos(headings), np.sin(headings)], axis=1
            )
            self.velocities = cluster_vel[self.cluster_ids].copy()
        disp = self.velocities.copy()
        if self.noise_sigma > 0:
            disp += rng.normal(0.0, self.noise_sigma, size=disp.shape)
        self.positions += disp
        self._reflect()
        assert (
            (self.positions[:, 0] >= 0).all()
            and (self.positions[:, 0] <= self.width).all()
            and (self.positions[:, 1] >= 0).all()
            and (self.positions[:, 1] <= self.height).all()
        ), "target escaped the workspace"

    def _reflect(self) -> None:
        for axis, limit in ((0, self.width), (1, self.height)):
            pos = self.positions[:, axis]
            for _ in range(8):  # displacement << workspace; loop is a guard
                below = pos < 0.0
                above = pos > limit
                if not below.any() and not above.any():
                    break
                pos[below] = -pos[below]
                pos[above] = 2.0 * limit - pos[above]
                flip = below | above
                self.velocities[flip, axis] = -self.velocities[flip, axis]


# ---------------------------------------------------------------------------
# Engine-facing worlds
# ---------------------------------------------------------------------------


class CoverageWorld:
    """Rolling-snapshot coverage environment for the simulation engine.

    Keeps per-round sector bitmasks for the trailing delay window so agents
    can (re)evaluate rewards of past rounds against the scene that was live
    when those actions were taken.
    """

    def __init__(
        self,
        cameras: CameraGrid,
        targets: TargetSystem,
        reward_cap: float,
        window: int,
    ) -> None:
        if reward_cap <= 0:
            raise ValueError("reward cap must be positive")
        self.cameras = cameras
        self.targets = targets
        self.reward_cap = float(reward_cap)
        self.window = max(int(window), 0)
        self.clamp_count = 0
        self._snapshots: dict[int, list[list[int]]] = {}
        self._snapshot(0)

    def _snapshot(self, t: int) -> None:
        self._snapshots[t] = masks_to_bits(
            sector_masks(self.cameras, self.targets.positions)
        )

    def step(self, t: int, rng: np.random.Generator) -> None:
        self.targets.step(t, rng)
        self._snapshot(t)
        stale = t - self.window - 2
        if stale in self._snapshots:
            del self._snapshots[stale]

    def masks_at(self, scene: int) -> list[list[int]]:
        try:
            return self._snapshots[scene]
        except KeyError:
            raise KeyError(f"no scene snapshot for round {scene}") from None

    def reward(
        self,
        agent: int,
        scene: int,
        action: int,
        neighbor_profile: Mapping[int, int],
    ) -> float:
        """Marginal coverage of the agent's sector over its neighbors', / B."""
        bits = self.masks_at(scene)
        base = 0
        for j, a in neighbor_profile.items():
            base |= bits[j][a]
        gain = (base | bits[agent][action]).bit_count() - base.bit_count()
        value = gain / self.reward_cap
        if value > 1.0:
            self.clamp_count += 1
            if self.clamp_count == 1:
                log.warning(
                    "marginal gain %.3f exceeds reward cap %.1f; clamping",
                    gain,
                    self.reward_cap,
                )
            value = 1.0
        return value

    def joint_value(self, scene: int, actions: Sequence[int]) -> float:
        """Raw covered-target count of the full joint assignment."""
        bits = self.masks_at(scene)
        union = 0
        for agent, action in enumerate(actions):
            union |= bits[agent][action]
        return float(union.bit_count())


class TabularWorld:
    """Stationary table-backed environment for the simulation engine."""

    def __init__(self, handle: SetFunctionHandle) -> None:
        if handle.reward_cap <= 0:
            raise ValueError("handle must declare a positive reward cap")
        self.handle = handle
        self.reward_cap = float(handle.reward_cap)
        self.clamp_count = 0

    def step(self, t: int, rng: np.random.Generator) -> None:
        pass  # stationary

    def reward(
        self,
        agent: int,
        scene: int,
        action: int,
        neighbor_profile: Mapping[int, int],
    ) -> float:
        base = frozenset(
            GroundElement(j, a) for j, a in neighbor_profile.items()
        )
        gain = self.handle.evaluate(
            base | {GroundElement(agent, action)}
        ) - self.handle.evaluate(base)
        value = gain / self.reward_cap
        if value > 1.0:
            self.clamp_count += 1
            if self.clamp_count == 1:
                log.warning(
                    "tabular marginal %.4f exceeds cap %.4f; clamping",
                    gain,
                    self.reward_cap,
                )
            value = 1.0
        return value

    def joint_value(self, scene: int, actions: Sequence[int]) -> float:
        return float(
            self.handle.evaluate(
                frozenset(GroundElement(i, a) for i, a in enumerate(actions))
            )
        )


def pilot_reward_cap(
    cameras: CameraGrid,
    targets: TargetSystem,
    rng: np.random.Generator,
    steps: int = PILOT_STEPS,
) -> int:
    """Largest single-sector target count over a pilot rollout, at least 1.

    Runs on a copy of the target system so the caller's trajectory is not
    consumed.
    """
    sys = targets.copy()
    best = 0
    for t in range(steps + 1):
        if t:
            sys.step(t, rng)
        masks = sector_masks(cameras, sys.positions)
        best = max(best, int(masks.sum(axis=2).max()))
    return max(best, 1)


# ---------------------------------------------------------------------------
# Smoothed time-stamped reward
# ---------------------------------------------------------------------------


def smoothed_time_stamped_reward(
    cameras: CameraGrid,
    trajectory: np.ndarray,
    sharpness: float,
    ramp: float = 1.0,
    baseline_actions: Sequence[int] | None = None,
    reward_cap: float = 1.0,
) -> TimeStampedRewardHandle:
    """Soft coverage over a recorded target trajectory.

    ``trajectory`` has shape (S+1, m, 2): target positions at integer times
    0..S, interpolated linearly in between.  Each sector test becomes a
    product of logistic memberships (range plus the two wedge half-planes),
    aggregated per target by a complement-product smooth maximum over the
    deployed cameras.  A deployed camera rotates from its baseline heading to
    the deployed heading along a linear angular ramp of length ``ramp``
    starting at its deployment time.

    The declared Lipschitz constants are closed-form upper bounds:
      per-membership spatial gradient   <= 3 * sharpness / 4
      per-membership heading gradient   <= sharpness * range / 2
      heading ramp rate                 <= pi / ramp
      target speed                      <= max realized step displacement
    and F sums at most (targets x deployed cameras) membership terms / B.
    """
    traj = np.asarray(trajectory, dtype=float)
    if traj.ndim != 3 or traj.shape[2] != 2:
        raise ValueError("trajectory must have shape (steps+1, targets, 2)")
    if sharpness <= 0 or ramp <= 0:
        raise ValueError("sharpness and ramp must be positive")
    if sharpness * cameras.sensing_range < 1.0:
        raise ValueError("sharpness * sensing_range must be >= 1")
    if reward_cap <= 0:
        raise ValueError("reward cap must be positive")
    n_cams = cameras.camera_count
    n_targets = traj.shape[1]
    steps = traj.shape[0] - 1
    if baseline_actions is None:
        baseline = [0] * n_cams
    else:
        baseline = list(baseline_actions)
        if len(baseline) != n_cams:
            raise ValueError("need one baseline action per camera")
    base_angles = [cameras.heading_angle(a) for a in baseline]
    cam_pos = cameras.position_array()

    if steps == 0:
        v_max = 0.0
    else:
        deltas = np.diff(traj, axis=0)
        v_max = float(np.hypot(deltas[..., 0], deltas[..., 1]).max())

    grad_x = 0.75 * sharpness
    grad_theta = 0.5 * sharpness * cameras.sensing_range
    ramp_rate = math.pi / ramp
    lipschitz_eval = (
        n_targets * n_cams * (grad_x * v_max + grad_theta * ramp_rate)
    ) / reward_cap
    lipschitz_deploy = (n_targets * grad_theta * ramp_rate) / reward_cap

    def positions_at(tau: float) -> np.ndarray:
        tau = min(max(tau, 0.0), float(steps))
        lo = int(math.floor(tau))
        if lo >= steps:
            return traj[steps]
        frac = tau - lo
        return (1.0 - frac) * traj[lo] + frac * traj[lo + 1]

    def heading_at(cam: int, action: int, tau_j: float, tau: float) -> float:
        start = base_angles[cam]
        end = cameras.heading_angle(action)
        diff = math.remainder(end - start, TWO_PI)
        progress = (tau - tau_j) / ramp
        progress = min(max(progress, 0.0), 1.0)
        return start + progress * diff

    def membership(
        cam: int, theta: float, targets_now: np.ndarray
    ) -> np.ndarray:
        rel = targets_now - cam_pos[cam]
        dist = np.hypot(rel[:, 0], rel[:, 1])
        lo_edge = theta - cameras.fov_half_angle
        hi_edge = theta + cameras.fov_half_angle
        # inner normals of the two wedge half-planes
        e1 = -math.sin(lo_edge) * rel[:, 0] + math.cos(lo_edge) * rel[:, 1]
        e2 = math.sin(hi_edge) * rel[:, 0] - math.cos(hi_edge) * rel[:, 1]
        z = _logistic(sharpness * (cameras.sensing_range - dist))
        z *= _logistic(sharpness * e1)
        z *= _logistic(sharpness * e2)
        return z

    def evaluate(tau: float, deployments: Sequence[Deployment]) -> float:
        if not deployments:
            return 0.0
        targets_now = positions_at(tau)
        miss = np.ones(n_targets)
        for dep in deployments:
            theta = heading_at(dep.agent_id, dep.action_id, dep.tau, tau)
            miss *= 1.0 - membership(dep.agent_id, theta, targets_now)
        return float((1.0 - miss).sum()) / reward_cap

    return TimeStampedRewardHandle(
        evaluate,
        lipschitz_eval=lipschitz_eval,
        lipschitz_deploy=lipschitz_deploy,
        description=(
            f"soft coverage, {n_targets} targets, sharpness {sharpness:g}"
        ),
    )


def _logistic(u: np.ndarray | float) -> np.ndarray:
    # piecewise form keeps exp arguments non-positive at any sharpness
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


# ---------------------------------------------------------------------------
# Tabular instances
# ---------------------------------------------------------------------------


def tabular_instance(
    ground: Sequence[GroundElement],
    table: Mapping[frozenset[GroundElement], float],
    reward_cap: float | None = None,
) -> SetFunctionHandle:
    """Set function backed by an explicit full-subset value table.

    The table must cover every subset of the ground set, assign 0 to the
    empty set, and be non-negative.  The default reward cap is the largest
    singleton value.
    """
    elems = list(ground)
    if len(set(elems)) != len(elems):
        raise ValueError("ground set contains duplicate elements")
    if len(elems) > TABLE_GROUND_CAP:
        raise ValueError(
            f"tabular ground capped at {TABLE_GROUND_CAP} elements"
        )
    expected = 1 << len(elems)
    if len(table) != expected:
        raise ValueError(
            f"table has {len(table)} entries, needs all {expected} subsets"
        )
    for subset, value in table.items():
        if not subset.issubset(elems):
            raise ValueError(f"table key {set(subset)} leaves the ground set")
        if value < 0:
            raise ValueError(f"negative value {value} for {set(subset)}")
    empty_value = table[frozenset()]
    if abs(empty_value) > 0:
        raise ValueError(f"f(empty) must be 0, table says {empty_value}")
    frozen = dict(table)
    if reward_cap is None:
        reward_cap = max(
            (frozen[frozenset((e,))] for e in elems), default=1.0
        )
        if reward_cap <= 0:
            reward_cap = 1.0

    def evaluate(elements: frozenset[GroundElement]) -> float:
        try:
            return frozen[frozenset(elements)]
        except KeyError:
            raise ValueError(
                f"subset {set(elements)} is outside the tabulated ground"
            ) from None

    return SetFunctionHandle(
        evaluate, reward_cap=float(reward_cap), description="tabular instance"
    )


def weighted_coverage_table(
    cover_sets: Mapping[GroundElement, Iterable[int]],
    weights: Mapping[int, float],
) -> tuple[list[GroundElement], dict[frozenset[GroundElement], float]]:
    """Full subset table of a weighted-coverage function.

    f(S) = total weight of the union of the items covered by S's elements;
    monotone, submodular, and second-order submodular by construction.
    """
    ground = sorted(cover_sets)
    if len(ground) > TABLE_GROUND_CAP:
        raise ValueError(f"ground capped at {TABLE_GROUND_CAP} elements")
    covers = {e: frozenset(cover_sets[e]) for e in ground}
    table: dict[frozenset[GroundElement], float] = {}
    for mask in range(1 << len(ground)):
        subset = frozenset(
            ground[i] for i in range(len(ground)) if mask >> i & 1
        )
        items: set[int] = set()
        for e in subset:
            items |= covers[e]
        table[subset] = float(sum(weights[i] for i in items))
    return ground, table


# ---------------------------------------------------------------------------
# Scene export
# ---------------------------------------------------------------------------


def write_scene_csv(
    path,
    cameras: CameraGrid,
    frames: Iterable[tuple[int, np.ndarray, Sequence[int]]],
) -> None:
    """Per-step target positions and camera headings.

    ``frames`` yields (round, target_positions, camera_actions).  Columns:
    t, entity (camera|target), id, x, y, heading (blank for targets).
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "entity", "id", "x", "y", "heading"])
        for t, targets, actions in frames:
            for cam, action in enumerate(actions):
                x, y = cameras.positions[cam]
                writer.writerow(
                    [t, "camera", cam, repr(x), repr(y), action]
                )
            for tid, (x, y) in enumerate(np.asarray(targets)):
                writer.writerow(
                    [t, "target", tid, repr(float(x)), repr(float(y)), ""]
                )
