"""Diagonal-covariance Gaussian mixture models.

Frame density: p(x) = sum_i w_i * N(x | mu_i, diag(var_i)). Everything is
computed in the log domain via log-sum-exp so long utterances and narrow
variances do not underflow. Training is seeded k-means followed by EM with
a per-dimension variance floor, and is fully deterministic for a given
(data, config) pair.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    FewerFramesThanComponents,
    ModelFileError,
    ModelInvariantError,
    ModelVersionError,
)

MODEL_MAGIC = b"GMM1"
MODEL_VERSION = 1
_MODEL_HEADER = struct.Struct("<4sIII")

WEIGHT_SUM_TOL = 1e-9

# A component whose responsibility mass drops below this fraction of the
# frame count is considered dead and gets re-seeded.
EMPTY_COMPONENT_FRACTION = 1e-10

# Absolute lower bound on the variance floor so constant dimensions cannot
# produce zero variances.
_MIN_VARIANCE = 1e-12


@dataclass(eq=False)
class GmmModel:
    """weights (M,), means (M, D), variances (M, D); diagonal covariances."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.variances = np.asarray(self.variances, dtype=np.float64)
        if self.weights.ndim != 1:
            raise ValueError("weights must be one-dimensional")
        if self.means.ndim != 2 or self.variances.ndim != 2:
            raise ValueError("means and variances must be 2-D")
        m = self.weights.shape[0]
        if self.means.shape[0] != m or self.variances.shape != self.means.shape:
            raise ValueError("weights, means, variances have inconsistent shapes")

    @property
    def num_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def validate(self) -> None:
        """Raise ModelInvariantError unless this is a usable mixture."""
        if not (
            np.isfinite(self.weights).all()
            and np.isfinite(self.means).all()
            and np.isfinite(self.variances).all()
        ):
            raise ModelInvariantError("model contains non-finite values")
        if (self.weights < 0.0).any():
            raise ModelInvariantError("negative mixture weight")
        total = float(self.weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ModelInvariantError(f"weights sum to {total!r}, expected 1")
        if (self.variances <= 0.0).any():
            raise ModelInvariantError("non-positive variance")


@dataclass
class TrainConfig:
    """EM training knobs. rng_seed makes the whole fit reproducible."""

    num_components: int
    max_em_iterations: int = 100
    convergence_tol: float = 1e-5
    variance_floor_factor: float = 1e-3
    rng_seed: int = 0
    kmeans_max_iterations: int = 50

    def __post_init__(self):
        if self.num_components < 1:
            raise ValueError("num_components must be at least 1")
        if self.max_em_iterations < 1:
            raise ValueError("max_em_iterations must be at least 1")
        if self.convergence_tol <= 0.0:
            raise ValueError("convergence_tol must be positive")
        if self.variance_floor_factor <= 0.0:
            raise ValueError("variance_floor_factor must be positive")
        if self.kmeans_max_iterations < 1:
            raise ValueError("kmeans_max_iterations must be at least 1")


def _check_dim(model: GmmModel, x: np.ndarray) -> None:
    if x.shape[-1] != model.dim:
        raise ValueError(f"frame dim {x.shape[-1]} != model dim {model.dim}")


def _log_joint(model: GmmModel, frames: np.ndarray) -> np.ndarray:
    """log(w_i) + log N(x_t | mu_i, var_i) for every frame t, component i.

    Returns shape (T, M). Zero weights map to -inf rows, which log-sum-exp
    handles exactly.
    """
    inv_var = 1.0 / model.variances
    # -0.5 * (D log 2pi + sum_d log var_id) per component
    log_norm = -0.5 * (
        model.dim * math.log(2.0 * math.pi) + np.log(model.variances).sum(axis=1)
    )
    maha = (
        (frames**2) @ inv_var.T
        - 2.0 * (frames @ (model.means * inv_var).T)
        + (model.means**2 * inv_var).sum(axis=1)[None, :]
    )
    with np.errstate(divide="ignore"):
        log_w = np.log(model.weights)
    return log_w[None, :] + log_norm[None, :] - 0.5 * maha


def _logsumexp_rows(a: np.ndarray) -> np.ndarray:
    m = np.max(a, axis=1, keepdims=True)
    # All-(-inf) rows cannot occur: weights sum to one, so max is finite.
    return m[:, 0] + np.log(np.exp(a - m).sum(axis=1))


def log_density_frame(model: GmmModel, x: np.ndarray) -> float:
    """Natural-log mixture density of a single frame."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("frame must be a one-dimensional vector")
    _check_dim(model, x)
    return float(_logsumexp_rows(_log_joint(model, x[None, :]))[0])


def log_likelihood_sequence(model: GmmModel, features: np.ndarray) -> float:
    """Total log-likelihood of a feature matrix: sum over frame densities.

    Uses exact (fsum) accumulation over frames, so the value is independent
    of how the frames are chunked.
    """
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    if f.shape[0] < 1:
        raise ValueError("empty feature matrix")
    _check_dim(model, f)
    return math.fsum(_logsumexp_rows(_log_joint(model, f)))


def _check_training_data(data: np.ndarray, k: int) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("training data must be a non-empty 2-D matrix")
    if not np.isfinite(data).all():
        raise ValueError("training data contains non-finite values")
    if data.shape[0] < k:
        raise FewerFramesThanComponents(
            f"{data.shape[0]} frames < {k} mixture components"
        )
    return data


def _variance_floor(data: np.ndarray, factor: float) -> np.ndarray:
    return np.maximum(factor * data.var(axis=0), _MIN_VARIANCE)


def _nearest_sq_dist(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        (data**2).sum(axis=1)[:, None]
        - 2.0 * data @ centers.T
        + (centers**2).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def kmeans_init(
    data: np.ndarray,
    k: int,
    seed: int,
    max_iterations: int = 50,
    variance_floor_factor: float = 1e-3,
) -> GmmModel:
    """Seeded k-means initialization for EM.

    The first center is a seeded random frame; the rest are chosen
    farthest-first. Lloyd iterations then run until assignments stop
    changing or max_iterations is hit. Cluster occupancy fractions become
    the initial weights and per-cluster variances are floored. Ties in
    distance always resolve to the lowest index, so the result depends only
    on (data, k, seed).
    """
    data = _check_training_data(data, k)
    t = data.shape[0]
    rng = np.random.default_rng(seed)
    floor = _variance_floor(data, variance_floor_factor)
    global_var = np.maximum(data.var(axis=0), floor)

    centers = np.empty((k, data.shape[1]))
    centers[0] = data[int(rng.integers(t))]
    min_d2 = ((data - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        centers[j] = data[int(np.argmax(min_d2))]
        min_d2 = np.minimum(min_d2, ((data - centers[j]) ** 2).sum(axis=1))

    assignment = np.argmin(_nearest_sq_dist(data, centers), axis=1)
    for _ in range(max_iterations):
        for j in range(k):
            members = assignment == j
            if members.any():
                centers[j] = data[members].mean(axis=0)
        d2 = _nearest_sq_dist(data, centers)
        new_assignment = np.argmin(d2, axis=1)
        empty = np.setdiff1d(np.arange(k), np.unique(new_assignment))
        if empty.size:
            # Re-seed empty clusters at the frames farthest from any center.
            order = np.argsort(-d2.min(axis=1))
            for j, idx in zip(empty, order[: empty.size]):
                centers[j] = data[idx]
            new_assignment = np.argmin(_nearest_sq_dist(data, centers), axis=1)
        if np.array_equal(new_assignment, assignment):
            assignment = new_assignment
            break
        assignment = new_assignment

    weights = np.zeros(k)
    variances = np.empty((k, data.shape[1]))
    for j in range(k):
        members = assignment == j
        count = int(members.sum())
        weights[j] = count / t
        if count:
            centers[j] = data[members].mean(axis=0)
            variances[j] = np.maximum(data[members].var(axis=0), floor)
        else:
            variances[j] = global_var
    return GmmModel(weights, centers, variances)


def em_fit(data: np.ndarray, config: TrainConfig) -> tuple[GmmModel, list[float]]:
    """Fit a diagonal GMM with EM; returns (model, per-iteration log-likelihoods).

    The trace is evaluated before each M-step and is non-decreasing (up to
    float noise) as long as no component dies. A component whose
    responsibility mass falls below EMPTY_COMPONENT_FRACTION * num_frames is
    re-seeded at the lowest-likelihood frame with the global variance and a
    1/num_frames weight, keeping the component count fixed.
    """
    data = _check_training_data(data, config.num_components)
    t = data.shape[0]
    floor = _variance_floor(data, config.variance_floor_factor)
    global_var = np.maximum(data.var(axis=0), floor)

    model = kmeans_init(
        data,
        config.num_components,
        config.rng_seed,
        config.kmeans_max_iterations,
        config.variance_floor_factor,
    )
    weights = model.weights.copy()
    means = model.means.copy()
    variances = model.variances.copy()

    trace: list[float] = []
    for iteration in range(config.max_em_iterations):
        current = GmmModel(weights, means, variances)
        log_joint = _log_joint(current, data)
        frame_ll = _logsumexp_rows(log_joint)
        total = math.fsum(frame_ll)
        trace.append(total)
        if iteration > 0:
            previous = trace[-2]
            if total - previous < config.convergence_tol * (abs(previous) + 1e-12):
                break

        resp = np.exp(log_joint - frame_ll[:, None])
        mass = resp.sum(axis=0)
        alive = mass >= EMPTY_COMPONENT_FRACTION * t

        safe_mass = np.where(alive, mass, 1.0)
        new_means = (resp.T @ data) / safe_mass[:, None]
        new_vars = (resp.T @ (data**2)) / safe_mass[:, None] - new_means**2
        new_weights = mass / t

        if not alive.all():
            dead = np.flatnonzero(~alive)
            worst = np.argsort(frame_ll)[: dead.size]
            for j, idx in zip(dead, worst):
                new_means[j] = data[idx]
                new_vars[j] = global_var
                new_weights[j] = 1.0 / t
            new_weights = new_weights / new_weights.sum()

        weights = new_weights
        means = new_means
        variances = np.maximum(new_vars, floor)

    return GmmModel(weights, means, variances), trace


def save_model(model: GmmModel, path) -> None:
    """Serialize a validated model: header then weights, means, variances."""
    model.validate()
    header = _MODEL_HEADER.pack(
        MODEL_MAGIC, MODEL_VERSION, model.dim, model.num_components
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.means, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.variances, dtype="<f8").tobytes())


def load_model(path) -> GmmModel:
    """Read a model file, checking magic, version, size, and invariants."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _MODEL_HEADER.size:
        raise ModelFileError(f"{path}: truncated header")
    magic, version, dim, m = _MODEL_HEADER.unpack_from(blob)
    if magic != MODEL_MAGIC:
        raise ModelFileError(f"{path}: bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise ModelVersionError(f"{path}: unsupported version {version}")
    expected = _MODEL_HEADER.size + 8 * (m + 2 * m * dim)
    if len(blob) != expected or m < 1 or dim < 1:
        raise ModelFileError(
            f"{path}: payload is {len(blob)} bytes, expected {expected}"
        )
    flat = np.frombuffer(blob, dtype="<f8", offset=_MODEL_HEADER.size)
    weights = flat[:m].astype(np.float64)
    means = flat[m : m + m * dim].reshape(m, dim).astype(np.float64)
    variances = flat[m + m * dim :].reshape(m, dim).astype(np.float64)
    model = GmmModel(weights, means, variances)
    model.validate()
    return model
