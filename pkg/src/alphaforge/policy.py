"""Threshold-selection policy: an epsilon-greedy contextual value learner.

The policy observes a 16-dimensional descriptor of the input cloud, scores
each candidate filtering threshold with a linear value model, and picks the
argmax (or explores uniformly with probability epsilon). Training regresses
each chosen action's predicted value onto the observed F1 reward with an
RMS-adaptive step, replaying buffered transitions every ``period`` steps.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .alphashape import triangulate
from .errors import EmptyMesh, RewardOutOfRange, TooFewPoints
from .mesh import Mesh, PointCloud
from .metrics import f1_score
from .sampling import REWARD_SAMPLES, sample_surface

STATE_DIM = 16
EPSILON_FLOOR = 0.01

RMS_DECAY = 0.99
RMS_STEP = 1e-2
RMS_EPS = 1e-8


def state_descriptor(points: PointCloud | np.ndarray) -> np.ndarray:
    """16-feature cloud descriptor standing in for the image state.

    Layout: bounding-box extents (3), log point count (1), mean/std/min/max
    of the k-th nearest-neighbor distance for k in {1, 8} (8), covariance
    eigenvalue fractions (3), constant bias (1). Computed on centered
    points, hence translation-invariant; the bbox entries keep raw scale.
    """
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, float)
    if len(pts) < 9:
        raise TooFewPoints("descriptor needs at least 9 points (k=8 statistics)")
    centered = pts - pts.mean(axis=0)
    bbox = centered.max(axis=0) - centered.min(axis=0)

    dist, _ = cKDTree(centered).query(centered, k=9)
    feats = [bbox, [np.log(len(pts))]]
    for k in (1, 8):
        dk = dist[:, k]
        feats.append([dk.mean(), dk.std(), dk.min(), dk.max()])
    cov = centered.T @ centered / len(pts)
    eig = np.sort(np.linalg.eigvalsh(cov))[::-1]
    total = max(eig.sum(), 1e-300)
    feats.append(eig / total)
    feats.append([1.0])
    out = np.concatenate([np.asarray(f, dtype=np.float64).ravel() for f in feats])
    assert out.shape == (STATE_DIM,)
    return out


@dataclass(frozen=True)
class QPolicy:
    """Linear action-value model over the candidate thresholds.

    ``theta`` is (n_actions, 16); row a scores action a as theta[a] . s.
    ``rms_cache`` holds the per-parameter running squared-gradient averages
    of the adaptive update.
    """

    actions: tuple[float, ...]
    theta: np.ndarray
    rms_cache: np.ndarray
    epsilon: float = 0.9
    epsilon_decay: float = 0.99
    period: int = 2

    def __post_init__(self):
        actions = tuple(float(a) for a in self.actions)
        if not actions or any(a <= 0 for a in actions):
            raise ValueError("need at least one positive threshold action")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.period < 1:
            raise ValueError("period must be >= 1")
        theta = np.asarray(self.theta, dtype=np.float64)
        cache = np.asarray(self.rms_cache, dtype=np.float64)
        if theta.shape != (len(actions), STATE_DIM) or cache.shape != theta.shape:
            raise ValueError(f"theta/rms_cache must be ({len(actions)}, {STATE_DIM})")
        object.__setattr__(self, "actions", actions)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "rms_cache", cache)

    @classmethod
    def fresh(cls, actions, epsilon: float = 0.9, epsilon_decay: float = 0.99,
              period: int = 2) -> "QPolicy":
        n = len(tuple(actions))
        return cls(tuple(actions), np.zeros((n, STATE_DIM)),
                   np.zeros((n, STATE_DIM)), epsilon, epsilon_decay, period)

    @property
    def n_actions(self) -> int:
        return len(self.actions)


@dataclass
class TrainLog:
    """Per-transition training records."""

    records: list[dict] = field(default_factory=list)

    def append(self, state_hash: str, action: int, reward: float,
               epsilon: float, greedy: bool) -> None:
        if not 0.0 <= reward <= 1.0:
            raise RewardOutOfRange(f"reward {reward} outside [0, 1]")
        self.records.append({
            "state_hash": state_hash, "action": action, "reward": reward,
            "epsilon": epsilon, "greedy": greedy,
        })

    def to_csv(self) -> str:
        lines = ["step,state_hash,action,reward,epsilon,greedy"]
        for i, r in enumerate(self.records):
            lines.append(f"{i},{r['state_hash']},{r['action']},{r['reward']!r},"
                         f"{r['epsilon']!r},{int(r['greedy'])}")
        return "\n".join(lines) + "\n"


def state_hash(s: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(s, dtype=np.float64).tobytes()).hexdigest()[:16]


def q_values(policy: QPolicy, s: np.ndarray) -> np.ndarray:
    """Expected reward per action: theta . s."""
    return policy.theta @ np.asarray(s, dtype=np.float64)


def select_action(policy: QPolicy, s: np.ndarray, rng: np.random.Generator) -> int:
    """Epsilon-greedy choice; greedy ties resolve to the lowest index."""
    if rng.random() < policy.epsilon:
        return int(rng.integers(policy.n_actions))
    return int(np.argmax(q_values(policy, s)))


def reward(pred: Mesh, gt: Mesh, nu: float = 1e-4,
           n_samples: int = REWARD_SAMPLES, seed: int = 0) -> float:
    """Mesh-fidelity reward: F1 at radius nu between equal-seed surface
    samplings of the two meshes, on a 0..1 scale."""
    if pred.num_faces == 0 or gt.num_faces == 0:
        raise EmptyMesh("reward needs non-empty meshes")
    p = sample_surface(pred, n_samples, seed)
    q = sample_surface(gt, n_samples, seed)
    _, _, f1 = f1_score(p, q, nu)
    return f1 / 100.0


def update(policy: QPolicy, s: np.ndarray, action: int, observed: float) -> QPolicy:
    """One RMS-adaptive regression step of q(s, action) toward the reward.

    Only the chosen action's row moves. Epsilon is multiplied by its decay
    factor and floored at 1%.
    """
    if not 0.0 <= observed <= 1.0:
        raise RewardOutOfRange(f"reward {observed} outside [0, 1]")
    s = np.asarray(s, dtype=np.float64)
    q = float(policy.theta[action] @ s)
    grad = 2.0 * (q - observed) * s
    cache = policy.rms_cache.copy()
    cache[action] = RMS_DECAY * cache[action] + (1.0 - RMS_DECAY) * grad**2
    theta = policy.theta.copy()
    theta[action] = theta[action] - RMS_STEP * grad / (np.sqrt(cache[action]) + RMS_EPS)
    eps = max(policy.epsilon * policy.epsilon_decay, EPSILON_FLOOR)
    return QPolicy(policy.actions, theta, cache, eps, policy.epsilon_decay, policy.period)


def train_policy(
    dataset: list[tuple[PointCloud, Mesh]],
    policy: QPolicy,
    episodes: int,
    seed: int,
    nu: float = 1e-4,
    n_samples: int = REWARD_SAMPLES,
) -> tuple[QPolicy, TrainLog]:
    """Train on (cloud, ground-truth mesh) pairs for ``episodes`` transitions.

    Each transition: build the descriptor, epsilon-greedily pick a threshold,
    run the triangulation layer, score the result with the F1 reward (an
    empty filtered complex scores 0), and buffer the transition. Every
    ``period`` transitions the buffer is replayed once through the update
    rule and cleared. The dataset order is reshuffled every pass.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    rng = np.random.Generator(np.random.Philox(seed))
    descriptors = [state_descriptor(cloud) for cloud, _ in dataset]
    log = TrainLog()
    buffer: list[tuple[np.ndarray, int, float]] = []
    step = 0
    while step < episodes:
        order = rng.permutation(len(dataset))
        for i in order:
            if step >= episodes:
                break
            cloud, gt = dataset[i]
            s = descriptors[i]
            qv = q_values(policy, s)
            explore = rng.random() < policy.epsilon
            action = int(rng.integers(policy.n_actions)) if explore else int(np.argmax(qv))
            tau = policy.actions[action]
            try:
                mesh = triangulate(cloud, tau)
                r = reward(mesh, gt, nu=nu, n_samples=n_samples,
                           seed=int(rng.integers(2**62)))
            except EmptyMesh:
                r = 0.0
            buffer.append((s, action, r))
            log.append(state_hash(s), action, r, policy.epsilon, not explore)
            step += 1
            if len(buffer) >= policy.period:
                for bs, ba, br in buffer:
                    policy = update(policy, bs, ba, br)
                buffer.clear()
    for bs, ba, br in buffer:
        policy = update(policy, bs, ba, br)
    return policy, log


def policy_to_json(policy: QPolicy) -> str:
    """Versioned JSON document; floats are emitted in shortest round-trip
    form, so serialization is value-exact."""
    doc = {
        "version": 1,
        "actions": list(policy.actions),
        "theta": [float(x) for x in policy.theta.ravel()],
        "epsilon": policy.epsilon,
        "epsilon_decay": policy.epsilon_decay,
        "period": policy.period,
        "optimizer_state": [float(x) for x in policy.rms_cache.ravel()],
    }
    return json.dumps(doc, indent=2) + "\n"


def save_policy(policy: QPolicy, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(policy_to_json(policy))


def load_policy(path) -> QPolicy:
    with open(path, encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("version") != 1:
        raise ValueError(f"unsupported policy version {doc.get('version')!r}")
    n = len(doc["actions"])
    theta = np.array(doc["theta"], dtype=np.float64).reshape(n, STATE_DIM)
    cache = np.array(doc["optimizer_state"], dtype=np.float64).reshape(n, STATE_DIM)
    return QPolicy(tuple(doc["actions"]), theta, cache, doc["epsilon"],
                   doc["epsilon_decay"], doc["period"])
