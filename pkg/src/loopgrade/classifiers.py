"""OK/NOK classifiers over CPI feature vectors.

Seven model families are supported.  Gaussian naive Bayes, LDA and KNN are
implemented directly; CART trees, random forests and RBF support vector
machines are fitted with scikit-learn and their learned state is copied into
plain arrays, so prediction and persistence never touch scikit-learn objects.
AdaBoost is a SAMME loop around scikit-learn trees.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.svm import SVC
from sklearn.tree import DecisionTreeClassifier
from sklearn.ensemble import RandomForestClassifier

from .errors import DomainError
from .features import FEATURE_IDS, POPULAR_12, FeatureVector, feature_indices

KINDS = ("GNB", "LDA", "KNN", "DecisionTree", "RandomForest", "AdaBoost", "SVM-RBF")
TREE_KINDS = ("DecisionTree", "RandomForest", "AdaBoost")
SCALED_KINDS = ("GNB", "LDA", "KNN", "SVM-RBF")
MODEL_FORMAT = "loopgrade-model/1"

VAR_FLOOR = 1e-9
LDA_RIDGE = 1e-6
SVM_TOL = 1e-3
ADABOOST_BASE_DEPTH = 10

_PCT = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
_RATE = [0.3, 0.4, 0.5, 0.6, 0.7]
_NEST = [30, 50, 70, 100, 150, 200]
_DEPTH = list(range(4, 21))
_LEAF = list(range(4, 31))

# Search spaces; every value is drawn independently and uniformly.
RANGES = {
    "GNB": {},
    "LDA": {},
    "KNN": {"k": list(range(1, 30, 2))},
    "DecisionTree": {"max_depth": _DEPTH, "min_samples_leaf": _LEAF},
    "RandomForest": {"sampling_rate": _RATE, "n_estimators": _NEST, "max_depth": _DEPTH,
                     "min_samples_leaf": _LEAF},
    "AdaBoost": {"max_features": _PCT, "sampling_rate": _RATE, "n_estimators": _NEST,
                 "learning_rate": [0.001, 0.01, 0.1, 0.2, 0.5, 1.0]},
    "SVM-RBF": {"gamma": [2.0 ** e for e in range(-15, 4, 2)],
                "C": [2.0 ** e for e in range(-5, 16, 2)]},
}

DEFAULTS = {
    "GNB": {},
    "LDA": {},
    "KNN": {"k": 5},
    "DecisionTree": {"max_depth": 19, "min_samples_leaf": 4},
    "RandomForest": {"sampling_rate": 0.7, "n_estimators": 50, "max_depth": 20, "min_samples_leaf": 6},
    "AdaBoost": {"max_features": 0.4, "sampling_rate": 0.7, "n_estimators": 50, "learning_rate": 0.1},
    "SVM-RBF": {"gamma": 2.0 ** -5, "C": 512.0},
}

OK, NOK = "OK", "NOK"


def _check_kind(kind):
    if kind not in KINDS:
        raise DomainError(f"unknown classifier kind {kind!r}; choose from {', '.join(KINDS)}")


def _xy(data):
    if isinstance(data, tuple):
        X, y = data
    else:
        X, y = data.X, data.y
    return np.asarray(X, dtype=float), np.asarray(y, dtype=int)


@dataclass
class Scaler:
    mean: np.ndarray
    std: np.ndarray
    degenerate: list = field(default_factory=list)  # columns left unscaled (zero variance)

    @classmethod
    def fit(cls, X):
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        bad = np.flatnonzero(~(std > 1e-12 * (1.0 + np.abs(mean))))
        std = std.copy()
        std[bad] = 1.0
        return cls(mean, std, bad.tolist())

    def transform(self, X):
        return (X - self.mean) / self.std


@dataclass
class ClassifierModel:
    kind: str
    hyper: dict
    features: list  # column indices into F1..F30
    scaler: Scaler | None
    state: dict
    seed: int = 0
    notes: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


class Prediction(tuple):
    """``(label, score)``; positive scores favour OK."""

    def __new__(cls, label, score):
        return super().__new__(cls, (label, score))

    @property
    def label(self):
        return self[0]

    @property
    def score(self):
        return self[1]


# -- tree state ---------------------------------------------------------------

def _tree_state(est) -> dict:
    t = est.tree_
    classes = list(est.classes_)
    val = t.value[:, 0, :]
    v_ok = val[:, classes.index(1)] if 1 in classes else np.zeros(t.node_count)
    v_nok = val[:, classes.index(0)] if 0 in classes else np.zeros(t.node_count)
    return {"left": t.children_left.astype(np.int64), "right": t.children_right.astype(np.int64),
            "feature": t.feature.astype(np.int64), "threshold": t.threshold.astype(float),
            "value_ok": v_ok.astype(float), "value_nok": v_nok.astype(float),
            "impurity": t.impurity.astype(float),
            "weight": t.weighted_n_node_samples.astype(float)}


def _tree_leaves(tree, X):
    # trees compare single-precision inputs against double thresholds
    Xf = X.astype(np.float32).astype(float)
    n = Xf.shape[0]
    rows = np.arange(n)
    node = np.zeros(n, dtype=np.int64)
    left, right, feat, thr = tree["left"], tree["right"], tree["feature"], tree["threshold"]
    while True:
        leaf = left[node] < 0
        if leaf.all():
            return node
        f = np.where(leaf, 0, feat[node])
        go_left = Xf[rows, f] <= thr[node]
        node = np.where(leaf, node, np.where(go_left, left[node], right[node]))


def _tree_votes(tree, X):
    leaf = _tree_leaves(tree, X)
    return (tree["value_ok"][leaf] > tree["value_nok"][leaf]).astype(int)


def _tree_importance(tree) -> np.ndarray:
    imp = np.zeros(len(FEATURE_IDS))
    left, right, feat = tree["left"], tree["right"], tree["feature"]
    w, g = tree["weight"], tree["impurity"]
    for node in np.flatnonzero(left >= 0):
        l, r = left[node], right[node]
        imp[feat[node]] += w[node] * g[node] - w[l] * g[l] - w[r] * g[r]
    total = imp.sum()
    return imp / total if total > 0 else imp


# -- fitting ------------------------------------------------------------------

def _fit_gnb(X, y, hyper, seed, notes):
    mu, var, logp = [], [], []
    for c in (0, 1):
        Xc = X[y == c]
        mu.append(Xc.mean(axis=0))
        var.append(np.maximum(Xc.var(axis=0), VAR_FLOOR))
        logp.append(math.log(len(Xc) / len(X)))
    return {"mean": np.array(mu), "var": np.array(var), "log_prior": np.array(logp)}


def _fit_lda(X, y, hyper, seed, notes):
    mu0, mu1 = X[y == 0].mean(axis=0), X[y == 1].mean(axis=0)
    R = np.where(y[:, None] == 1, X - mu1, X - mu0)
    S = R.T @ R / max(len(X) - 2, 1) + LDA_RIDGE * np.eye(X.shape[1])
    try:
        np.linalg.cholesky(S)
        if np.linalg.cond(S) > 1e12:
            raise np.linalg.LinAlgError("ill-conditioned")
        w = np.linalg.solve(S, mu1 - mu0)
    except np.linalg.LinAlgError:
        notes.append("SingularCovariance: pooled covariance replaced by its diagonal")
        w = (mu1 - mu0) / np.diag(S)
    p1 = y.mean()
    b = -0.5 * float((mu0 + mu1) @ w) + math.log(p1 / (1 - p1))
    return {"w": w, "b": b}


def _fit_knn(X, y, hyper, seed, notes):
    return {"X": X.copy(), "y": y.copy(), "k": int(hyper["k"])}


def _fit_tree(X, y, hyper, seed, notes):
    est = DecisionTreeClassifier(max_depth=hyper["max_depth"], min_samples_leaf=hyper["min_samples_leaf"],
                                 random_state=seed)
    est.fit(X, y)
    return {"trees": [_tree_state(est)]}


def _fit_forest(X, y, hyper, seed, notes):
    est = RandomForestClassifier(n_estimators=hyper["n_estimators"], max_depth=hyper["max_depth"],
                                 min_samples_leaf=hyper["min_samples_leaf"],
                                 max_samples=hyper["sampling_rate"], bootstrap=True,
                                 random_state=seed, n_jobs=1)
    est.fit(X, y)
    return {"trees": [_tree_state(t) for t in est.estimators_]}


def _fit_adaboost(X, y, hyper, seed, notes):
    rng = np.random.default_rng(seed)
    n = len(X)
    w = np.full(n, 1.0 / n)
    m_sub = max(2, int(round(hyper["sampling_rate"] * n)))
    lr = float(hyper["learning_rate"])
    trees, alphas = [], []
    for _ in range(int(hyper["n_estimators"])):
        idx = np.sort(rng.choice(n, size=min(m_sub, n), replace=False))
        est = DecisionTreeClassifier(max_depth=hyper.get("base_depth", ADABOOST_BASE_DEPTH),
                                     max_features=hyper["max_features"],
                                     random_state=int(rng.integers(2 ** 31 - 1)))
        est.fit(X[idx], y[idx], sample_weight=w[idx] / w[idx].sum())
        tree = _tree_state(est)
        miss = _tree_votes(tree, X) != y
        err = float(w[miss].sum() / w.sum())
        if err <= 0:
            trees.append(tree)
            alphas.append(1.0)
            break
        if err >= 0.5:
            if not trees:
                trees.append(tree)
                alphas.append(1.0)
            break
        alpha = lr * math.log((1 - err) / err)
        trees.append(tree)
        alphas.append(alpha)
        w = w * np.exp(alpha * miss)
        w /= w.sum()
    return {"trees": trees, "alphas": np.array(alphas)}


def _fit_svm(X, y, hyper, seed, notes):
    est = SVC(kernel="rbf", C=hyper["C"], gamma=hyper["gamma"], tol=SVM_TOL, cache_size=500)
    est.fit(X, y)
    sign = 1.0 if list(est.classes_) == [0, 1] else -1.0
    return {"sv": est.support_vectors_.copy(), "coef": sign * est.dual_coef_[0].copy(),
            "b": sign * float(est.intercept_[0]), "gamma": float(hyper["gamma"])}


_FIT = {"GNB": _fit_gnb, "LDA": _fit_lda, "KNN": _fit_knn, "DecisionTree": _fit_tree,
        "RandomForest": _fit_forest, "AdaBoost": _fit_adaboost, "SVM-RBF": _fit_svm}


def train(kind: str, hyper: dict | None, dataset, features=None, seed: int = 0,
          standardize: bool | None = None) -> ClassifierModel:
    """Fit a classifier on ``dataset`` (a ``Dataset`` or an ``(X, y)`` pair).

    ``features`` selects columns by id (``"F7"``) or index; default all 30.
    Distance and likelihood based kinds standardize with training statistics;
    trees use raw features unless ``standardize`` is set.
    """
    _check_kind(kind)
    hp = dict(DEFAULTS[kind])
    hp.update(hyper or {})
    X, y = _xy(dataset)
    if len(X) == 0:
        raise DomainError("cannot train on an empty dataset")
    cols = _resolve_features(features)
    X = X[:, cols]
    notes = []
    scale = kind in SCALED_KINDS if standardize is None else standardize
    scaler = None
    if scale:
        scaler = Scaler.fit(X)
        if scaler.degenerate:
            notes.append("DegenerateFeature: zero variance in "
                         + ", ".join(FEATURE_IDS[cols[i]] for i in scaler.degenerate))
        X = scaler.transform(X)
    classes = np.unique(y)
    if classes.size == 1:
        notes.append("single-class training data; model is constant")
        state = {"constant": int(classes[0])}
    else:
        state = _FIT[kind](X, y, hp, seed, notes)
    return ClassifierModel(kind=kind, hyper=hp, features=cols, scaler=scaler, state=state,
                           seed=seed, notes=notes)


def _resolve_features(features) -> list[int]:
    if features is None:
        return list(range(len(FEATURE_IDS)))
    out = []
    for f in features:
        out.append(FEATURE_IDS.index(f) if isinstance(f, str) else int(f))
    if len(set(out)) != len(out) or not all(0 <= i < len(FEATURE_IDS) for i in out):
        raise DomainError(f"invalid feature selection {features!r}")
    return out


# -- inference ----------------------------------------------------------------

def _prepare(model, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] == len(FEATURE_IDS):
        X = X[:, model.features]
    elif X.shape[1] != len(model.features):
        raise DomainError(f"expected {len(FEATURE_IDS)} or {len(model.features)} columns, got {X.shape[1]}")
    return model.scaler.transform(X) if model.scaler is not None else X


def _sqdist(A, B):
    d = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


def decision_scores(model: ClassifierModel, X) -> np.ndarray:
    """Per-row scores; a row is OK exactly when its score is >= 0."""
    X = _prepare(model, X)
    st = model.state
    if "constant" in st:
        return np.full(len(X), 1.0 if st["constant"] == 1 else -1.0)
    kind = model.kind
    if kind == "GNB":
        ll = [(-0.5 * (np.log(2 * np.pi * st["var"][c]) + (X - st["mean"][c]) ** 2 / st["var"][c])).sum(1)
              + st["log_prior"][c] for c in (0, 1)]
        return ll[1] - ll[0]
    if kind == "LDA":
        return X @ st["w"] + st["b"]
    if kind == "KNN":
        k = st["k"]
        out = np.empty(len(X))
        for lo in range(0, len(X), 512):
            d = _sqdist(X[lo:lo + 512], st["X"])
            nn = np.argsort(d, axis=1, kind="stable")[:, :k]
            out[lo:lo + 512] = st["y"][nn].mean(1) - 0.5  # ties (0) go to OK
        return out
    if kind in ("DecisionTree", "RandomForest"):
        votes = np.mean([_tree_votes(t, X) for t in st["trees"]], axis=0)
        if kind == "DecisionTree":
            # strict majority inside the leaf, as the fitted tree decides
            return np.where(votes > 0, 1.0, -1.0)
        return votes - 0.5
    if kind == "AdaBoost":
        s = sum(a * (2 * _tree_votes(t, X) - 1) for t, a in zip(st["trees"], st["alphas"]))
        return s / st["alphas"].sum()
    if kind == "SVM-RBF":
        out = np.empty(len(X))
        for lo in range(0, len(X), 512):
            K = np.exp(-st["gamma"] * _sqdist(X[lo:lo + 512], st["sv"]))
            out[lo:lo + 512] = K @ st["coef"] + st["b"]
        return out
    raise DomainError(kind)


def predict_many(model: ClassifierModel, X) -> np.ndarray:
    """1 (OK) / 0 (NOK) per row."""
    return (decision_scores(model, X) >= 0).astype(int)


def predict(model: ClassifierModel, fv) -> Prediction:
    vals = fv.values if isinstance(fv, FeatureVector) else np.asarray(fv, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise DomainError("feature vector must be finite")
    s = float(decision_scores(model, vals[None, :])[0])
    return Prediction(OK if s >= 0 else NOK, s)


def tree_votes(model: ClassifierModel, X) -> np.ndarray:
    """Per-tree OK votes, shape ``(n_trees, n_rows)``."""
    if model.kind not in TREE_KINDS:
        raise DomainError(f"{model.kind} is not tree-based")
    X = _prepare(model, X)
    return np.array([_tree_votes(t, X) for t in model.state["trees"]])


# -- evaluation ---------------------------------------------------------------

@dataclass
class EvalReport:
    accuracy: float
    confusion: np.ndarray  # rows true (OK, NOK), columns predicted (OK, NOK)

    @classmethod
    def from_labels(cls, y_true, y_pred):
        y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
        cm = np.array([[np.sum((y_true == t) & (y_pred == p)) for p in (1, 0)] for t in (1, 0)])
        acc = float(np.trace(cm) / cm.sum()) if cm.sum() else math.nan
        return cls(acc, cm)

    def _pr(self, i):
        tp = self.confusion[i, i]
        col, row = self.confusion[:, i].sum(), self.confusion[i].sum()
        return (tp / col if col else 0.0), (tp / row if row else 0.0)

    @property
    def precision(self) -> dict:
        return {OK: float(self._pr(0)[0]), NOK: float(self._pr(1)[0])}

    @property
    def recall(self) -> dict:
        return {OK: float(self._pr(0)[1]), NOK: float(self._pr(1)[1])}

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "confusion": self.confusion.tolist(),
                "confusion_axes": {"rows": ["true OK", "true NOK"], "cols": ["pred OK", "pred NOK"]},
                "precision": self.precision, "recall": self.recall, "n": int(self.confusion.sum())}

    def to_text(self) -> str:
        c = self.confusion
        return "\n".join([
            f"accuracy  {100 * self.accuracy:.2f}%  (n={int(c.sum())})",
            "              pred OK   pred NOK",
            f"  true OK   {c[0, 0]:9d}  {c[0, 1]:9d}",
            f"  true NOK  {c[1, 0]:9d}  {c[1, 1]:9d}",
            f"  precision OK {self.precision[OK]:.3f}  NOK {self.precision[NOK]:.3f}",
            f"  recall    OK {self.recall[OK]:.3f}  NOK {self.recall[NOK]:.3f}",
        ])


def evaluate(model: ClassifierModel, dataset) -> EvalReport:
    X, y = _xy(dataset)
    return EvalReport.from_labels(y, predict_many(model, X))


# -- model selection ----------------------------------------------------------

def kfold_indices(n: int, folds: int, seed: int = 0) -> list[np.ndarray]:
    """Disjoint, covering, seed-determined folds."""
    if not 2 <= folds <= n:
        raise DomainError(f"need 2 <= folds <= {n}, got {folds}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, folds)]


def cross_val_accuracy(kind, hyper, dataset, folds=5, seed=0, features=None) -> np.ndarray:
    X, y = _xy(dataset)
    parts = kfold_indices(len(X), folds, seed)
    acc = []
    for i, test in enumerate(parts):
        mask = np.ones(len(X), dtype=bool)
        mask[test] = False
        m = train(kind, hyper, (X[mask], y[mask]), features=features, seed=seed)
        acc.append(evaluate(m, (X[test], y[test])).accuracy)
    return np.array(acc)


def _simplicity(hp: dict):
    # fewer estimators, shallower trees, smaller k, stronger regularization (smaller C)
    return (hp.get("n_estimators", 0), hp.get("max_depth", 0), hp.get("k", 0), hp.get("C", 0.0),
            -hp.get("min_samples_leaf", 0), json.dumps(hp, sort_keys=True))


@dataclass
class SearchResult:
    best: dict
    best_score: float
    trials: list  # (hyper, mean CV accuracy) in draw order


def random_search(kind, ranges=None, dataset=None, iterations=30, folds=5, seed=0,
                  features=None, progress=None) -> SearchResult:
    """Random search maximizing mean k-fold CV accuracy.

    Ties in accuracy go to the simpler configuration.
    """
    _check_kind(kind)
    space = RANGES[kind] if ranges is None else ranges
    rng = np.random.default_rng(seed)
    names = sorted(space)
    trials, seen = [], {}
    n_iter = iterations if names else 1
    for _ in range(n_iter):
        hp = {}
        for name in names:
            choice = space[name][int(rng.integers(len(space[name])))]
            hp[name] = choice.item() if hasattr(choice, "item") else choice
        key = json.dumps(hp, sort_keys=True)
        if key not in seen:
            seen[key] = float(cross_val_accuracy(kind, hp, dataset, folds, seed, features).mean())
            if progress:
                progress(hp, seen[key])
        trials.append((hp, seen[key]))
    best_hp, best_score = min(trials, key=lambda t: (-t[1], _simplicity(t[0])))
    return SearchResult(best=best_hp, best_score=best_score, trials=trials)


# -- feature ranking ----------------------------------------------------------

def feature_importance(model: ClassifierModel) -> list[tuple[str, float]]:
    """Impurity-decrease importances of all 30 features, ranked descending."""
    if model.kind not in TREE_KINDS:
        raise DomainError(f"feature importance needs a tree-based model, not {model.kind}")
    imp_local = np.zeros(len(FEATURE_IDS))
    st = model.state
    if "constant" not in st:
        per_tree = np.array([_tree_importance(t) for t in st["trees"]])
        weights = st["alphas"] if model.kind == "AdaBoost" else np.ones(len(per_tree))
        imp_local = weights @ per_tree / weights.sum()
    imp = np.zeros(len(FEATURE_IDS))
    imp[model.features] = imp_local[:len(model.features)]
    total = imp.sum()
    if total > 0:
        imp = imp / total
    order = sorted(range(len(FEATURE_IDS)), key=lambda i: (-imp[i], i))
    return [(FEATURE_IDS[i], float(imp[i])) for i in order]


def topk_study(kind, train_set, val_set, k_list, hyper=None, seed=0):
    """Validation accuracy when retraining on the top-k ranked features.

    The ranking comes from a model trained on all 30 features; selected
    columns keep their natural order so ``k = 30`` reproduces that model.
    Returns ``(ranking, {k: accuracy})``.
    """
    if kind not in TREE_KINDS:
        raise DomainError(f"top-k study needs a tree-based kind, not {kind}")
    full = train(kind, hyper, train_set, seed=seed)
    ranking = feature_importance(full)
    out = {}
    for k in k_list:
        if not 1 <= k <= len(FEATURE_IDS):
            raise DomainError(f"k must lie in [1, 30], got {k}")
        cols = sorted(FEATURE_IDS.index(f) for f, _ in ranking[:k])
        model = full if k == len(FEATURE_IDS) else train(kind, hyper, train_set, features=cols, seed=seed)
        out[k] = evaluate(model, val_set).accuracy
    return ranking, out


def feature_set(spec: str, ranking=None) -> list[int] | None:
    """Parse ``all30``, ``popular12`` or ``topk:K`` into column indices."""
    if spec == "all30":
        return None
    if spec == "popular12":
        return feature_indices(POPULAR_12)
    if spec.startswith("topk:"):
        if ranking is None:
            raise DomainError("topk feature selection needs an importance ranking")
        k = int(spec.split(":", 1)[1])
        return sorted(FEATURE_IDS.index(f) for f, _ in ranking[:k])
    raise DomainError(f"unknown feature set {spec!r}; use all30, popular12 or topk:K")


# -- persistence --------------------------------------------------------------

def _to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return {"__array__": obj.tolist(), "dtype": str(obj.dtype)}
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _from_jsonable(obj):
    if isinstance(obj, dict):
        if "__array__" in obj:
            return np.array(obj["__array__"], dtype=obj["dtype"])
        return {k: _from_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_from_jsonable(v) for v in obj]
    return obj


def model_to_json(model: ClassifierModel) -> str:
    doc = {
        "format": MODEL_FORMAT, "kind": model.kind, "hyper": model.hyper,
        "features": [FEATURE_IDS[i] for i in model.features], "seed": model.seed,
        "scaler": None if model.scaler is None else {
            "mean": model.scaler.mean, "std": model.scaler.std, "degenerate": model.scaler.degenerate},
        "state": model.state, "notes": model.notes, "meta": model.meta,
    }
    return json.dumps(_to_jsonable(doc), sort_keys=True)


def model_from_json(text: str) -> ClassifierModel:
    doc = _from_jsonable(json.loads(text))
    if doc.get("format") != MODEL_FORMAT:
        raise DomainError(f"unsupported model format {doc.get('format')!r}")
    sc = doc["scaler"]
    scaler = None if sc is None else Scaler(np.asarray(sc["mean"]), np.asarray(sc["std"]), sc["degenerate"])
    return ClassifierModel(kind=doc["kind"], hyper=doc["hyper"],
                           features=[FEATURE_IDS.index(f) for f in doc["features"]],
                           scaler=scaler, state=doc["state"], seed=doc["seed"],
                           notes=doc["notes"], meta=doc.get("meta", {}))


def save_model(model: ClassifierModel, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(model_to_json(model) + "\n")


def load_model(path) -> ClassifierModel:
    with open(path) as fh:
        return model_from_json(fh.read())

