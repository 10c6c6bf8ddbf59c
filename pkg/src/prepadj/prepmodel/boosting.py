"""Gradient-boosted regression trees on the logistic loss.

Trees are grown depth-first on binned features: at each node the gradient and
hessian histograms give every candidate split's gain in one pass, the best
split (first in fixed feature order on ties) is taken when its gain is positive
and both children carry at least `min_child_weight` hessian mass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import expit, logit

from prepadj.core.constants import (
    DEFAULT_PATIENCE,
    DEFAULT_REG_LAMBDA,
    MODEL_FORMAT,
    MODEL_FORMAT_VERSION,
    PASSED,
    PROB_CLIP,
)
from prepadj.core.exceptions import ConfigError, DataError, DegenerateTargetError, MissingArtifactError
from prepadj.dataset.table import CohortTable
from prepadj.prepmodel.features import FeatureEncoder
from prepadj.prepmodel.metrics import auc, calibration_report


class BoostParams(BaseModel):
    max_depth: int = 4
    eta: float = 0.1
    min_child_weight: float = 1.0
    gamma: float = 0.0
    max_delta_step: float = 0.0
    reg_lambda: float = DEFAULT_REG_LAMBDA


class CvRow(BaseModel):
    params: BoostParams
    fold_auc: list[float]
    mean_auc: float
    best_rounds: list[int]


class TrainingReport(BaseModel):
    target: str
    params: BoostParams
    seed: int
    n_train: int
    rounds_requested: int
    rounds_used: int
    valid_auc: float | None = None
    holdout_auc: float | None = None
    cv_table: list[CvRow] = Field(default_factory=list)


@dataclass(frozen=True)
class RegressionTree:
    """Array-encoded binary tree. feature = -1 marks a leaf; values already scaled by eta."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[node]
            rows = np.flatnonzero(feat >= 0)
            if rows.size == 0:
                return self.value[node]
            cur = node[rows]
            go_left = X[rows, feat[rows]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> RegressionTree:
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.asarray(data["threshold"], dtype=float),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            value=np.asarray(data["value"], dtype=float),
        )


@dataclass(frozen=True, eq=False)
class PreparednessModel:
    """Fitted probability model: base score plus the sum of tree outputs on the log-odds scale."""

    trees: list[RegressionTree]
    base_score: float
    learning_rate: float
    encoder: FeatureEncoder
    report: TrainingReport | None = field(default=None)

    def margin(self, table: CohortTable) -> np.ndarray:
        X = self.encoder.transform(table)
        out = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            out += tree.predict(X)
        return out


class _Grower:
    """Grows one tree from gradient statistics on pre-binned features."""

    def __init__(self, bins: np.ndarray, encoder: FeatureEncoder, params: BoostParams):
        self.bins = bins
        self.thresholds = [np.asarray(f.thresholds) for f in encoder.features]
        self.n_bins = encoder.n_bins
        self.width = int(self.n_bins.max()) if self.n_bins.size else 1
        self.params = params
        n_features = bins.shape[1]
        self.offsets = np.arange(n_features, dtype=np.int64) * self.width
        # split k is admissible only if it leaves something on the right
        self.admissible = np.arange(self.width)[None, :] < (self.n_bins[:, None] - 1)

    def grow(self, grad: np.ndarray, hess: np.ndarray) -> tuple[RegressionTree, np.ndarray]:
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.update = np.zeros(grad.shape[0])
        self.grad, self.hess = grad, hess
        self._node(np.arange(grad.shape[0]), depth=0)
        tree = RegressionTree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=float),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            value=np.asarray(self.value, dtype=float),
        )
        return tree, self.update

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _leaf_weight(self, G: float, H: float) -> float:
        p = self.params
        w = -G / (H + p.reg_lambda)
        if p.max_delta_step > 0:
            w = float(np.clip(w, -p.max_delta_step, p.max_delta_step))
        return p.eta * w

    def _histogram(self, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        n_features = self.bins.shape[1]
        flat = (self.bins[idx] + self.offsets).ravel()
        size = n_features * self.width
        g_hist = np.bincount(flat, weights=np.repeat(self.grad[idx], n_features), minlength=size)
        h_hist = np.bincount(flat, weights=np.repeat(self.hess[idx], n_features), minlength=size)
        return g_hist.reshape(n_features, self.width), h_hist.reshape(n_features, self.width)

    def _node(self, idx: np.ndarray, depth: int, hist: tuple[np.ndarray, np.ndarray] | None = None) -> int:
        node = self._new_node()
        p = self.params
        G, H = float(self.grad[idx].sum()), float(self.hess[idx].sum())
        split = None
        if depth < p.max_depth and H >= 2 * p.min_child_weight and self.bins.shape[1] > 0:
            if hist is None:
                hist = self._histogram(idx)
            split = self._best_split(hist, G, H)
        if split is None:
            value = self._leaf_weight(G, H)
            self.value[node] = value
            self.update[idx] = value
            return node

        feat, k = split
        go_left = self.bins[idx, feat] <= k
        children = (idx[go_left], idx[~go_left])
        child_hist: list[tuple[np.ndarray, np.ndarray] | None] = [None, None]
        if depth + 1 < p.max_depth:
            # histogram the smaller child; the sibling is parent minus child
            small = 0 if children[0].size <= children[1].size else 1
            g_small, h_small = self._histogram(children[small])
            child_hist[small] = (g_small, h_small)
            child_hist[1 - small] = (hist[0] - g_small, hist[1] - h_small)
        self.feature[node] = feat
        self.threshold[node] = float(self.thresholds[feat][k])
        self.left[node] = self._node(children[0], depth + 1, child_hist[0])
        self.right[node] = self._node(children[1], depth + 1, child_hist[1])
        return node

    def _best_split(self, hist: tuple[np.ndarray, np.ndarray], G: float, H: float) -> tuple[int, int] | None:
        p = self.params
        GL = np.cumsum(hist[0], axis=1)
        HL = np.cumsum(hist[1], axis=1)
        GR, HR = G - GL, H - HL
        lam = p.reg_lambda
        gain = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam)) - p.gamma
        ok = self.admissible & (HL >= p.min_child_weight) & (HR >= p.min_child_weight)
        gain = np.where(ok, gain, -np.inf)
        best = int(np.argmax(gain))
        if not gain.flat[best] > 0:
            return None
        feat, k = divmod(best, self.width)
        return int(feat), int(k)


def _target(table: CohortTable, target: str) -> np.ndarray:
    y = table.frame[target].to_numpy(dtype=float)
    if np.isnan(y).any():
        raise DataError(
            f"Target {target!r} is missing for {int(np.isnan(y).sum())} unit(s); "
            "restrict training data to units where it is observed",
            column=target,
        )
    return y


def fit_boosted(
    train: CohortTable,
    params: BoostParams,
    rounds: int,
    seed: int,
    *,
    target: str = PASSED,
    features: list[str] | None = None,
    valid: CohortTable | None = None,
    patience: int = DEFAULT_PATIENCE,
    allow_group: bool = False,
) -> PreparednessModel:
    """Fit a boosted ensemble; with `valid`, stop early on validation AUC and keep the best round."""
    if rounds <= 0:
        raise ConfigError(f"rounds must be positive, got {rounds}")
    if len(train) == 0:
        raise DataError("Training table is empty")
    y = _target(train, target)
    if y.min() == y.max():
        raise DegenerateTargetError(f"degenerate target: every {target!r} value is {int(y[0])}")

    encoder = FeatureEncoder.fit(train, features, allow_group=allow_group)
    X = encoder.transform(train)
    grower = _Grower(encoder.bin(X), encoder, params)

    base_score = float(logit(y.mean()))
    margin = np.full(y.shape[0], base_score)

    if valid is not None:
        y_valid = _target(valid, target)
        X_valid = encoder.transform(valid)
        margin_valid = np.full(y_valid.shape[0], base_score)
        best_auc, best_round = -np.inf, 0

    trees: list[RegressionTree] = []
    for r in range(rounds):
        p = expit(margin)
        tree, update = grower.grow(p - y, p * (1.0 - p))
        margin += update
        trees.append(tree)
        if valid is not None:
            margin_valid += tree.predict(X_valid)
            score = auc(margin_valid, y_valid)
            if score > best_auc:
                best_auc, best_round = score, r
            elif r - best_round >= patience:
                break

    if valid is not None:
        trees = trees[: best_round + 1]

    report = TrainingReport(
        target=target,
        params=params,
        seed=seed,
        n_train=len(train),
        rounds_requested=rounds,
        rounds_used=len(trees),
        valid_auc=float(best_auc) if valid is not None else None,
    )
    return PreparednessModel(
        trees=trees, base_score=base_score, learning_rate=params.eta, encoder=encoder, report=report,
    )


def predict_mu(model: PreparednessModel, table: CohortTable) -> np.ndarray:
    """Success probability per unit, clipped to [PROB_CLIP, 1 - PROB_CLIP]."""
    return np.clip(expit(model.margin(table)), PROB_CLIP, 1.0 - PROB_CLIP)


class HoldoutReport(BaseModel):
    auc: float
    n: int
    calibration_by_group: list[dict]
    calibration_by_stratum: list[dict]


def evaluate_holdout(model: PreparednessModel, holdout: CohortTable) -> HoldoutReport:
    target = model.report.target if model.report else PASSED
    y = _target(holdout, target)
    mu = predict_mu(model, holdout)
    return HoldoutReport(
        auc=auc(mu, y),
        n=len(holdout),
        calibration_by_group=calibration_report(mu, y, holdout.group).to_dict("records"),
        calibration_by_stratum=calibration_report(mu, y, holdout.stratum).to_dict("records"),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def model_to_dict(model: PreparednessModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "base_score": model.base_score,
        "learning_rate": model.learning_rate,
        "features": model.encoder.model_dump(),
        "trees": [t.to_dict() for t in model.trees],
        "training_report": model.report.model_dump() if model.report else None,
    }


def model_from_dict(data: dict) -> PreparednessModel:
    if data.get("format") != MODEL_FORMAT:
        raise ConfigError(f"Not a {MODEL_FORMAT} document")
    if data.get("version") != MODEL_FORMAT_VERSION:
        raise ConfigError(
            f"Unsupported model version {data.get('version')!r}; expected {MODEL_FORMAT_VERSION}"
        )
    report = data.get("training_report")
    return PreparednessModel(
        trees=[RegressionTree.from_dict(t) for t in data["trees"]],
        base_score=float(data["base_score"]),
        learning_rate=float(data["learning_rate"]),
        encoder=FeatureEncoder.model_validate(data["features"]),
        report=TrainingReport.model_validate(report) if report else None,
    )


def save_model(model: PreparednessModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_dict(model), indent=2) + "\n")
    return path


def load_model(path: Path) -> PreparednessModel:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"Model file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"Model file {path} is not valid JSON: {e}") from e
    return model_from_dict(data)
