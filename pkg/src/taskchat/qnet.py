"""Hand-rolled Q-value network, replay buffer, and checkpoint files.

A single-hidden-layer tanh network trained by plain SGD on the one-step
Q-learning target with a periodically synced target copy. No ML framework;
the gradients are written out by hand and checked against finite differences
in the test suite.
"""

from __future__ import annotations

import hashlib
import json
from typing import Optional, Sequence

import numpy as np

from .errors import CheckpointError, TrainingDiverged
from .schema import DomainSchema

CHECKPOINT_VERSION = 1

# (features, action, reward, next_features, terminal)
Transition = tuple[np.ndarray, int, float, np.ndarray, bool]


class QFunction:
    """Q(s, ·) as a d -> hidden -> n_actions network with a target copy."""

    def __init__(self, input_dim: int, n_actions: int, hidden: int = 80,
                 lr: float = 1e-2, gamma: float = 0.95,
                 target_sync_period: int = 200, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.input_dim = input_dim
        self.n_actions = n_actions
        self.hidden = hidden
        self.lr = lr
        self.gamma = gamma
        self.target_sync_period = target_sync_period
        self.params = {
            "W1": rng.normal(0.0, 1.0 / np.sqrt(input_dim), (hidden, input_dim)),
            "b1": np.zeros(hidden),
            "W2": rng.normal(0.0, 1.0 / np.sqrt(hidden), (n_actions, hidden)),
            "b2": np.zeros(n_actions),
        }
        self.target_params = {k: v.copy() for k, v in self.params.items()}
        self.updates = 0

    def forward(self, X: np.ndarray, params: Optional[dict] = None) -> tuple[np.ndarray, np.ndarray]:
        p = self.params if params is None else params
        Z = np.tanh(X @ p["W1"].T + p["b1"])
        return Z @ p["W2"].T + p["b2"], Z

    def q_values(self, features: np.ndarray) -> np.ndarray:
        q, _ = self.forward(features.reshape(1, -1))
        return q[0]

    def target_q(self, X: np.ndarray) -> np.ndarray:
        q, _ = self.forward(X, self.target_params)
        return q

    def sync_target(self):
        self.target_params = {k: v.copy() for k, v in self.params.items()}

    def copy(self) -> "QFunction":
        clone = QFunction(self.input_dim, self.n_actions, self.hidden, self.lr,
                          self.gamma, self.target_sync_period)
        clone.params = {k: v.copy() for k, v in self.params.items()}
        clone.target_params = {k: v.copy() for k, v in self.target_params.items()}
        clone.updates = self.updates
        return clone

    def train_on_batch(self, batch: Sequence["Transition"]) -> float:
        return train_step(self, batch)


def select_action(q: QFunction, features: np.ndarray, epsilon: float,
                  rng: Optional[np.random.Generator] = None) -> int:
    """Epsilon-greedy action index; greedy breaks ties toward the lowest index."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    if epsilon > 0.0:
        if rng is None:
            raise ValueError("exploration requires an rng")
        if rng.random() < epsilon:
            return int(rng.integers(q.n_actions))
    return int(np.argmax(q.q_values(features)))


def _batch_arrays(batch: Sequence[Transition]):
    X = np.stack([t[0] for t in batch])
    A = np.array([t[1] for t in batch], dtype=int)
    R = np.array([t[2] for t in batch], dtype=float)
    X2 = np.stack([t[3] for t in batch])
    T = np.array([t[4] for t in batch], dtype=float)
    return X, A, R, X2, T


def compute_grads(q: QFunction, batch: Sequence[Transition]) -> tuple[float, dict]:
    """Mean squared TD loss and its analytic gradients (no parameter update)."""
    X, A, R, X2, T = _batch_arrays(batch)
    n = len(batch)
    targets = R + q.gamma * (1.0 - T) * q.target_q(X2).max(axis=1)
    Q, Z = q.forward(X)
    rows = np.arange(n)
    err = Q[rows, A] - targets
    loss = float(np.mean(err ** 2))
    dQ = np.zeros_like(Q)
    dQ[rows, A] = 2.0 * err / n
    dZ = dQ @ q.params["W2"]
    dpre = dZ * (1.0 - Z ** 2)
    grads = {
        "W2": dQ.T @ Z,
        "b2": dQ.sum(axis=0),
        "W1": dpre.T @ X,
        "b1": dpre.sum(axis=0),
    }
    return loss, grads


def train_step(q: "QFunction", batch: Sequence[Transition]) -> float:
    """One SGD step on the batch; syncs the target copy on schedule.

    Raises TrainingDiverged if any parameter goes non-finite.
    """
    if not len(batch):
        raise ValueError("batch must be non-empty")
    loss, grads = compute_grads(q, batch)
    for name, g in grads.items():
        q.params[name] -= q.lr * g
    for name, p in q.params.items():
        if not np.all(np.isfinite(p)):
            raise TrainingDiverged(f"non-finite values in {name}")
    q.updates += 1
    if q.target_sync_period > 0 and q.updates % q.target_sync_period == 0:
        q.sync_target()
    return loss


class TabularQ:
    """Exact Q-table over discretized feature vectors.

    Drop-in alternative to QFunction for tiny worlds where every reachable
    state fits in memory; same q_values/train_on_batch surface.
    """

    def __init__(self, n_actions: int, lr: float = 0.2, gamma: float = 0.95):
        self.n_actions = n_actions
        self.lr = lr
        self.gamma = gamma
        self.table: dict[bytes, np.ndarray] = {}

    def _row(self, features: np.ndarray) -> np.ndarray:
        key = np.asarray(features, dtype=float).tobytes()
        row = self.table.get(key)
        if row is None:
            row = self.table[key] = np.zeros(self.n_actions)
        return row

    def q_values(self, features: np.ndarray) -> np.ndarray:
        return self._row(features).copy()

    def train_on_batch(self, batch: Sequence[Transition]) -> float:
        errors = []
        for features, action, reward, next_features, terminal in batch:
            target = reward
            if not terminal:
                target += self.gamma * float(self._row(next_features).max())
            row = self._row(features)
            td = target - row[action]
            row[action] += self.lr * td
            errors.append(td * td)
        return float(np.mean(errors))

    def copy(self) -> "TabularQ":
        clone = TabularQ(self.n_actions, self.lr, self.gamma)
        clone.table = {k: v.copy() for k, v in self.table.items()}
        return clone


class ReplayBuffer:
    """Uniform-sampling ring buffer of transitions."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.items: list[Transition] = []
        self.pos = 0

    def push(self, transition: Transition):
        if len(self.items) < self.capacity:
            self.items.append(transition)
        else:
            self.items[self.pos] = transition
        self.pos = (self.pos + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        idx = rng.integers(len(self.items), size=batch_size)
        return [self.items[i] for i in idx]

    def __len__(self):
        return len(self.items)


# -- checkpoints ---------------------------------------------------------------

def schema_hash(schema: DomainSchema) -> str:
    doc = {
        "domain": schema.domain_name,
        "intents": list(schema.intents),
        "informable_slots": list(schema.informable_slots),
        "requestable_slots": list(schema.requestable_slots),
        "primary_request_slot": schema.primary_request_slot,
        "max_turns": schema.max_turns,
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def save_checkpoint(path: str, q: QFunction, schema: DomainSchema):
    doc = {
        "version": CHECKPOINT_VERSION,
        "schema_hash": schema_hash(schema),
        "domain": schema.domain_name,
        "input_dim": q.input_dim,
        "n_actions": q.n_actions,
        "hidden": q.hidden,
        "lr": q.lr,
        "gamma": q.gamma,
        "target_sync_period": q.target_sync_period,
        "updates": q.updates,
        "params": {k: v.tolist() for k, v in q.params.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_checkpoint(path: str, schema: DomainSchema) -> QFunction:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read checkpoint {path!r}: {e}") from e
    if doc.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {doc.get('version')!r}")
    if doc.get("schema_hash") != schema_hash(schema):
        raise CheckpointError(
            f"checkpoint was trained against a different {doc.get('domain', '?')} schema")
    q = QFunction(doc["input_dim"], doc["n_actions"], doc["hidden"], doc["lr"],
                  doc["gamma"], doc["target_sync_period"])
    for k in q.params:
        arr = np.asarray(doc["params"][k], dtype=float)
        if arr.shape != q.params[k].shape:
            raise CheckpointError(f"parameter {k} has shape {arr.shape}, expected {q.params[k].shape}")
        q.params[k] = arr
    q.sync_target()
    q.updates = doc.get("updates", 0)
    return q
