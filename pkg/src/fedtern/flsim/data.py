"""Synthetic classification data and label-skewed client partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InfeasiblePartition


@dataclass
class ToyDataset:
    """Feature matrix, integer labels, and a disjoint client partition."""

    features: np.ndarray
    labels: np.ndarray
    partition: dict[int, np.ndarray]

    @property
    def client_sizes(self) -> dict[int, int]:
        return {k: len(idx) for k, idx in self.partition.items()}


def make_blobs(classes: int, features: int, samples: int, separation: float,
               noise: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian class clusters with centers ``separation`` apart on average."""
    centers = rng.normal(size=(classes, features))
    centers *= separation / np.linalg.norm(centers, axis=1, keepdims=True)
    counts = np.full(classes, samples // classes)
    counts[: samples % classes] += 1
    labels = np.repeat(np.arange(classes), counts)
    X = centers[labels] + noise * rng.normal(size=(samples, features))
    order = rng.permutation(samples)
    return X[order].astype(np.float64), labels[order].astype(np.int64)


def partition_noniid(X: np.ndarray, y: np.ndarray, N: int, classes_per_client: int,
                     rng: np.random.Generator) -> ToyDataset:
    """Deal label-sorted shards so each client sees few distinct classes.

    Client k draws from classes {(k*cpc + j) mod K : j < cpc}; each class's
    samples are split as evenly as divisibility allows among the clients
    assigned to it.  The partition is disjoint and exhaustive.
    """
    if classes_per_client < 1:
        raise ValueError("classes_per_client must be at least 1")
    classes = int(y.max()) + 1
    cpc = classes_per_client
    if classes > N * cpc:
        raise InfeasiblePartition(
            f"{classes} classes cannot all be covered by {N} clients x {cpc} classes each")
    class_clients: dict[int, list[int]] = {c: [] for c in range(classes)}
    for k in range(N):
        for j in range(cpc):
            c = (k * cpc + j) % classes
            if k not in class_clients[c]:
                class_clients[c].append(k)
    shards: dict[int, list[np.ndarray]] = {k: [] for k in range(N)}
    for c in range(classes):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(len(idx))]
        owners = class_clients[c]
        if len(idx) < len(owners):
            raise InfeasiblePartition(
                f"class {c} has {len(idx)} samples for {len(owners)} clients")
        for owner, chunk in zip(owners, np.array_split(idx, len(owners))):
            shards[owner].append(chunk)
    partition = {k: np.sort(np.concatenate(chunks)) for k, chunks in shards.items()}
    return ToyDataset(features=X, labels=y, partition=partition)


def split_train_test(indices: np.ndarray, test_fraction: float,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Held-out split of one client shard; test stays disjoint from train."""
    n_test = max(1, int(round(len(indices) * test_fraction)))
    order = rng.permutation(len(indices))
    return np.sort(indices[order[n_test:]]), np.sort(indices[order[:n_test]])
