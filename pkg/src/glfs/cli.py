"""Command-line front end.

Every subcommand writes its artifacts through :class:`_Outputs`, which
stages files next to their destination and renames them only after the
whole run succeeds, so a failed run leaves nothing behind. Failures print
one line ``glfs: error[<code>]: <message>`` on stderr and exit nonzero.

Any flag can also be set through the environment as ``GLFS_<FLAG>``
(upper case, dashes as underscores), e.g. ``GLFS_LAMBDA1=3``. Explicit
flags win over the environment.
"""

import argparse
import csv
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .baselines import greedy_variance_select, laplacian_score
from .evaluation import (
    LabeledDataset,
    SimulationConfig,
    glfs_classify,
    kfold_cv,
    kmeans,
    loo_1nn_accuracy,
    nmi,
    ranking_score,
    simulate,
    spectral_cluster,
)
from .exceptions import GLFSError, InvalidInputError, InvalidParameterError, ParseError
from .graph import DataMatrix, build_knn_heat_graph, laplacian
from .optimizer import OptimizerConfig, PenaltySchedule, owd_minimize
from .pipeline import GLFSParams, glfs_select, kernel_for, rank_order

ENV_PREFIX = "GLFS_"

EXIT_CODES = {
    "error": 1,
    "usage": 2,
    "parse-error": 3,
    "invalid-input": 4,
    "invalid-parameter": 5,
    "numerical-error": 6,
    "empty-selection": 7,
    "io-error": 8,
}


# ---------------------------------------------------------------- file formats


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _strip_trailing_blank(rows):
    while rows and not any(tok.strip() for tok in rows[-1][1]):
        rows.pop()
    return rows


def load_matrix(path: str) -> DataMatrix:
    """Read a feature-per-row CSV.

    A first row containing any non-numeric token is taken as a header of
    sample names and skipped. Every other row must hold the same number of
    finite decimals.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [(reader.line_num, row) for row in reader]
    rows = _strip_trailing_blank(rows)
    if rows and not all(_is_number(tok.strip()) for tok in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise ParseError(f"{path}: no data rows", line=1)
    width = len(rows[0][1])
    values = np.empty((len(rows), width))
    for r, (line, row) in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"{path}: expected {width} fields, found {len(row)}", line=line)
        for c, tok in enumerate(row):
            try:
                v = float(tok.strip())
            except ValueError:
                raise ParseError(f"{path}: not a number: {tok.strip()!r}", line=line) from None
            if not math.isfinite(v):
                raise ParseError(f"{path}: non-finite value {tok.strip()!r}", line=line)
            values[r, c] = v
    return DataMatrix(values)


def _read_lines(path):
    with open(path) as fh:
        lines = [(i, ln.strip()) for i, ln in enumerate(fh, start=1)]
    while lines and not lines[-1][1]:
        lines.pop()
    if not lines:
        raise ParseError(f"{path}: file is empty", line=1)
    for i, tok in lines:
        if not tok:
            raise ParseError(f"{path}: blank line", line=i)
    return lines


def load_labels(path: str) -> np.ndarray:
    """One class per line. Integer classes are kept as given; otherwise
    labels become dense ids in order of first appearance."""
    lines = _read_lines(path)
    tokens = [tok for _, tok in lines]
    try:
        return np.array([int(tok) for tok in tokens], dtype=np.int64)
    except ValueError:
        ids: Dict[str, int] = {}
        return np.array([ids.setdefault(tok, len(ids)) for tok in tokens], dtype=np.int64)


def load_indices(path: str) -> np.ndarray:
    out = []
    for line, tok in _read_lines(path):
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(f"{path}: expected an integer feature index, got {tok!r}", line=line) from None
    return np.array(out, dtype=np.int64)


def load_ranking(path: str) -> np.ndarray:
    """Feature indices in file order from a ``feature_index<TAB>value`` table."""
    out = []
    for line, tok in _read_lines(path):
        head = tok.split("\t")[0]
        try:
            out.append(int(head))
        except ValueError:
            raise ParseError(f"{path}: expected a feature index, got {head!r}", line=line) from None
    if len(set(out)) != len(out):
        raise InvalidInputError(f"{path}: repeated feature index")
    return np.array(out, dtype=np.int64)


def _num(x) -> str:
    return f"{x:.12g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in (obj.tolist() if isinstance(obj, np.ndarray) else obj)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(_num(x)) if math.isfinite(x) else _num(x)
    return obj


# ---------------------------------------------------------------- outputs


class _Outputs:
    """Stage output files and publish them together on success."""

    def __init__(self):
        self._staged: List[tuple] = []
        # mkstemp creates 0600 files; published outputs follow the umask
        mask = os.umask(0)
        os.umask(mask)
        self._mode = 0o666 & ~mask

    def open(self, path: str):
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(prefix=".glfs-", dir=directory)
        self._staged.append((tmp, path))
        return os.fdopen(fd, "w", newline="")

    def write(self, path: str, text: str):
        with self.open(path) as fh:
            fh.write(text)

    def commit(self):
        for tmp, path in self._staged:
            os.chmod(tmp, self._mode)
            os.replace(tmp, path)
        self._staged.clear()

    def discard(self):
        for tmp, _ in self._staged:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
        self._staged.clear()


# ---------------------------------------------------------------- configuration


@dataclass(frozen=True)
class RunConfig:
    command: str
    lambda1: float = 10.0
    lambda2: float = 1.0
    graph_k: int = 5
    width: object = "auto"
    lambda0: float = 1e-4
    C: float = 1024.0
    seed: int = 0
    max_iter: int = 500
    tol_obj: float = 1e-8
    tol_grad: float = 1e-6
    trace: Optional[str] = None
    options: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def params(self) -> GLFSParams:
        return GLFSParams(self.lambda1, self.lambda2, self.graph_k, self.width)

    @property
    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(max_iter=self.max_iter, tol_obj=self.tol_obj, tol_grad=self.tol_grad)

    @property
    def schedule(self) -> PenaltySchedule:
        return PenaltySchedule(self.lambda0, self.C)

    def summary_base(self) -> dict:
        return {
            "command": self.command,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "graph_k": self.graph_k,
            "width": self.width,
            "seed": self.seed,
        }


def _width(text):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"width must be 'auto' or a number, got {text!r}") from None


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _UsageError(GLFSError):
    code = "usage"


def _common(p, model=True):
    p.add_argument("--seed", type=int, default=0)
    if model:
        p.add_argument("--lambda1", type=float, default=10.0)
        p.add_argument("--lambda2", type=float, default=1.0)
        p.add_argument("--graph-k", type=int, default=5)
        p.add_argument("--width", type=_width, default="auto")
        p.add_argument("--lambda0", type=float, default=1e-4)
        p.add_argument("--C", dest="C", type=float, default=1024.0)
        p.add_argument("--max-iter", type=int, default=500)
        p.add_argument("--tol-obj", type=float, default=1e-8)
        p.add_argument("--tol-grad", type=float, default=1e-6)
        p.add_argument("--trace", help="optimizer iteration log ('-' for stderr)")


def _selection(p):
    p.add_argument("--input", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--weights", help="ranking TSV; GLFS runs in-process when omitted")
    p.add_argument("--top", type=int, default=100, help="number of leading features to use")
    p.add_argument("--summary")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="glfs", description="Graph-based unsupervised feature selection.")
    parser.add_argument("--version", action="version", version=f"glfs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subparsers = []
    add = sub.add_parser

    def add_parser(name, **kw):
        p = add(name, **kw)
        subparsers.append(p)
        return p

    sub.add_parser = add_parser

    p = sub.add_parser("select", help="GLFS feature weights")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="weights.tsv", help="weights TSV (default: weights.tsv)")
    p.add_argument("--summary", help="JSON summary (default: <output>.json)")
    _common(p)

    p = sub.add_parser("baseline", help="Laplacian Score or greedy variance selection")
    p.add_argument("--method", choices=("lapscore", "lapaofs", "lapdofs"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--count", type=int, default=100, help="features to pick greedily")
    p.add_argument("--summary")
    _common(p)

    p = sub.add_parser("simulate", help="synthetic clusters buried in noise features")
    p.add_argument("--matrix", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--true-ids", required=True)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--noise-features", type=int, default=1000)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--clusters", type=int, default=4)
    _common(p, model=False)

    p = sub.add_parser("score", help="ranking Score of a weights file")
    p.add_argument("--weights", required=True)
    p.add_argument("--true-ids", required=True)
    p.add_argument("--features", type=int, help="total feature count (default: inferred)")
    p.add_argument("--summary")

    p = sub.add_parser("eval-cluster", help="cluster on selected features and report NMI")
    _selection(p)
    p.add_argument("--method", choices=("kmeans", "spectral"), default="kmeans")
    p.add_argument("--clusters", type=int, help="default: number of distinct labels")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--assignments", help="write one cluster id per sample")
    _common(p)

    p = sub.add_parser("eval-knn", help="leave-one-out 1-NN accuracy on selected features")
    _selection(p)
    _common(p)

    p = sub.add_parser("classify", help="GLFS + LapRLS with ten-fold CV over the penalty")
    p.add_argument("--train", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--test")
    p.add_argument("--test-labels")
    p.add_argument("--test-fraction", type=float, default=0.3, help="held-out share when --test is absent")
    p.add_argument("--lambdas", type=_float_list, default=[1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1])
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--summary", required=True)
    _common(p)

    p = sub.add_parser("sweep-lambda", help="support size over a grid of penalties")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="CSV lambda,support_size,objective")
    p.add_argument("--lambdas", type=_float_list)
    p.add_argument("--lambda-min", type=float, default=1e-5)
    p.add_argument("--lambda-max", type=float, default=1e-1)
    p.add_argument("--points", type=int, default=10)
    _common(p)

    for p in subparsers:
        _apply_environment(p)
    return parser


def _apply_environment(parser):
    for act in parser._actions:
        if not act.option_strings or act.dest == "help":
            continue
        key = ENV_PREFIX + act.dest.upper()
        if key not in os.environ:
            continue
        raw = os.environ[key]
        try:
            value = act.type(raw) if act.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InvalidParameterError(f"{key}={raw!r}: {exc}") from None
        if act.choices is not None and value not in act.choices:
            raise InvalidParameterError(f"{key}={raw!r}: choose from {sorted(act.choices)}")
        act.default = value
        act.required = False


def config_from_args(args) -> RunConfig:
    names = {f for f in RunConfig.__dataclass_fields__ if f not in ("command", "options")}
    common = {k: getattr(args, k) for k in names if hasattr(args, k)}
    options = {k: v for k, v in vars(args).items() if k not in names and k != "command"}
    return RunConfig(command=args.command, options=options, **common)


# ---------------------------------------------------------------- subcommands


class _Trace:
    def __init__(self, path, out: _Outputs):
        self.fh = None
        self.close = False
        if path == "-":
            self.fh = sys.stderr
        elif path:
            self.fh = out.open(path)
            self.close = True

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        if self.close:
            self.fh.close()


def _weights_tsv(weights) -> str:
    return "".join(f"{i}\t{_num(weights[i])}\n" for i in rank_order(weights))


def _summary_path(cfg, default_from=None):
    path = cfg.options.get("summary")
    if path is None and default_from is not None:
        path = default_from + ".json"
    return path


def _write_summary(out, path, summary):
    if path:
        out.write(path, json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


def cmd_select(cfg: RunConfig, out: _Outputs, stdout):
    X = load_matrix(cfg.options["input"])
    with _Trace(cfg.trace, out) as trace:
        res = glfs_select(X, cfg.params, cfg.schedule, cfg.optimizer, trace)
    out.write(cfg.options["output"], _weights_tsv(res.result.beta))
    summary = cfg.summary_base()
    summary.update(
        lambda_chosen=res.lam,
        support_size=res.result.support_size,
        objective=res.result.objective_value,
        iterations=res.result.iterations,
        converged=res.result.converged,
        stopped_early=res.stopped_early,
        schedule=[{"lambda": lam, "support_size": s} for lam, s in res.history],
        n_features=X.d,
        n_samples=X.n,
    )
    _write_summary(out, _summary_path(cfg, cfg.options["output"]), summary)
    stdout.write(f"lambda={_num(res.lam)} support={res.result.support_size} objective={_num(res.result.objective_value)}\n")


def cmd_baseline(cfg: RunConfig, out: _Outputs, stdout):
    X = load_matrix(cfg.options["input"])
    method = cfg.options["method"]
    summary = cfg.summary_base()
    summary["method"] = method
    S = build_knn_heat_graph(X, cfg.graph_k, cfg.width)
    if method == "lapscore":
        scores = laplacian_score(X, S)
        # ascending score, ties to lower index
        order = np.lexsort((np.arange(X.d), scores))
        text = "".join(f"{i}\t{_num(scores[i])}\n" for i in order)
    else:
        count = min(cfg.options["count"], X.d)
        criterion = "trace" if method == "lapaofs" else "determinant"
        chosen = greedy_variance_select(X, laplacian(S), cfg.lambda1, cfg.lambda2, count, criterion)
        text = "".join(f"{j}\t{r}\n" for r, j in enumerate(chosen, start=1))
        summary["count"] = count
    out.write(cfg.options["output"], text)
    _write_summary(out, _summary_path(cfg, cfg.options["output"]), summary)
    stdout.write(f"method={method} features={X.d}\n")


def cmd_simulate(cfg: RunConfig, out: _Outputs, stdout):
    o = cfg.options
    sim = SimulationConfig(
        n_samples=o["samples"], n_noise=o["noise_features"], noise_sigma=o["sigma"], n_clusters=o["clusters"]
    )
    ds = simulate(sim, cfg.seed)
    with out.open(o["matrix"]) as fh:
        for row in ds.X:
            fh.write(",".join(repr(v) for v in row.tolist()) + "\n")
    out.write(o["labels"], "".join(f"{v}\n" for v in ds.labels.tolist()))
    out.write(o["true_ids"], "".join(f"{v}\n" for v in ds.true_feature_ids.tolist()))
    stdout.write(f"features={ds.X.shape[0]} samples={ds.X.shape[1]} true_ids={','.join(map(str, ds.true_feature_ids))}\n")


def _ranking_weights(order, d):
    w = np.full(d, -np.inf)
    w[order] = np.arange(order.size, 0, -1, dtype=np.float64)
    return w


def cmd_score(cfg: RunConfig, out: _Outputs, stdout):
    order = load_ranking(cfg.options["weights"])
    ids = load_indices(cfg.options["true_ids"])
    d = cfg.options["features"]
    if d is None:
        d = int(max(order.max(initial=-1), ids.max(initial=-1))) + 1
    if order.size and (order.min() < 0 or order.max() >= d):
        raise InvalidInputError("feature index in the ranking is out of range")
    score = ranking_score(_ranking_weights(order, d), ids)
    summary = {"command": "score", "score": score, "true_ids": ids}
    _write_summary(out, _summary_path(cfg), summary)
    stdout.write(f"{float(_num(score))!r}\n")


def _selected_rows(cfg, X, out):
    top = cfg.options["top"]
    if top < 1:
        raise InvalidParameterError(f"--top must be >= 1, got {top}")
    if cfg.options.get("weights"):
        order = load_ranking(cfg.options["weights"])
        if order.size and (order.min() < 0 or order.max() >= X.d):
            raise InvalidInputError("feature index in the ranking is out of range")
        source = "file"
    else:
        with _Trace(cfg.trace, out) as trace:
            res = glfs_select(X, cfg.params, cfg.schedule, cfg.optimizer, trace)
        order = rank_order(res.result.beta)
        source = "glfs"
    return order[: min(top, order.size)], source


def _labels_for(cfg, X):
    labels = load_labels(cfg.options["labels"])
    if labels.size != X.n:
        raise InvalidInputError(f"{labels.size} labels for {X.n} samples")
    return labels


def cmd_eval_cluster(cfg: RunConfig, out: _Outputs, stdout):
    X = load_matrix(cfg.options["input"])
    labels = _labels_for(cfg, X)
    rows, source = _selected_rows(cfg, X, out)
    Xs = X.values[rows]
    k = cfg.options["clusters"] or int(np.unique(labels).size)
    if cfg.options["method"] == "kmeans":
        assigned = kmeans(Xs, k, restarts=cfg.options["restarts"], seed=cfg.seed)
    else:
        S = build_knn_heat_graph(Xs, cfg.graph_k, cfg.width)
        assigned = spectral_cluster(S, k, seed=cfg.seed, restarts=cfg.options["restarts"])
    score = nmi(labels, assigned)
    if cfg.options.get("assignments"):
        out.write(cfg.options["assignments"], "".join(f"{v}\n" for v in assigned.tolist()))
    summary = cfg.summary_base()
    summary.update(method=cfg.options["method"], clusters=k, n_selected=rows.size, selection=source, nmi=score)
    _write_summary(out, _summary_path(cfg), summary)
    stdout.write(f"nmi={_num(score)}\n")


def cmd_eval_knn(cfg: RunConfig, out: _Outputs, stdout):
    X = load_matrix(cfg.options["input"])
    labels = _labels_for(cfg, X)
    rows, source = _selected_rows(cfg, X, out)
    acc = loo_1nn_accuracy(X.values[rows], labels)
    summary = cfg.summary_base()
    summary.update(n_selected=rows.size, selection=source, accuracy=acc)
    _write_summary(out, _summary_path(cfg), summary)
    stdout.write(f"accuracy={_num(acc)}\n")


def _binary(labels, where):
    classes = list(dict.fromkeys(labels.tolist()))
    if set(classes) <= {0, 1}:
        return labels.astype(np.int64)
    if len(classes) != 2:
        raise InvalidInputError(f"{where}: classification needs exactly 2 classes, found {len(classes)}")
    return np.array([classes.index(v) for v in labels.tolist()], dtype=np.int64)


def cmd_classify(cfg: RunConfig, out: _Outputs, stdout):
    o = cfg.options
    Xtr = load_matrix(o["train"])
    ytr_raw = load_labels(o["train_labels"])
    if ytr_raw.size != Xtr.n:
        raise InvalidInputError(f"{ytr_raw.size} training labels for {Xtr.n} samples")
    if o.get("test"):
        if not o.get("test_labels"):
            raise InvalidParameterError("--test needs --test-labels")
        Xte = load_matrix(o["test"])
        yte_raw = load_labels(o["test_labels"])
        if Xte.d != Xtr.d:
            raise InvalidInputError(f"test data has {Xte.d} features, training data {Xtr.d}")
        if yte_raw.size != Xte.n:
            raise InvalidInputError(f"{yte_raw.size} test labels for {Xte.n} samples")
        both = _binary(np.concatenate([ytr_raw, yte_raw]), "labels")
        ytr, yte = both[: Xtr.n], both[Xtr.n :]
        A, B = Xtr.values, Xte.values
    else:
        frac = o["test_fraction"]
        if not 0 < frac < 1:
            raise InvalidParameterError(f"--test-fraction must lie in (0, 1), got {frac}")
        y = _binary(ytr_raw, "labels")
        perm = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1])).permutation(Xtr.n)
        n_test = max(1, int(round(frac * Xtr.n)))
        te, tr = np.sort(perm[:n_test]), np.sort(perm[n_test:])
        A, B, ytr, yte = Xtr.values[:, tr], Xtr.values[:, te], y[tr], y[te]
    if not o["lambdas"]:
        raise InvalidParameterError("--lambdas is empty")
    cv = kfold_cv(LabeledDataset(A, ytr), o["lambdas"], folds=o["folds"], seed=cfg.seed,
                  params=cfg.params, cfg=cfg.optimizer)
    preds, model = glfs_classify(A, ytr, B, cv.best_lambda, cfg.params, cfg.optimizer)
    test_errors = int(np.sum(preds != yte))
    summary = cfg.summary_base()
    summary.update(
        lambdas=o["lambdas"],
        cv_errors_per_lambda=cv.errors_per_lambda,
        best_lambda=cv.best_lambda,
        cv_errors=cv.errors,
        n_train=ytr.size,
        test_errors=test_errors,
        n_test=yte.size,
        selected_features=model.feature_ids,
        n_selected=model.feature_ids.size,
    )
    _write_summary(out, o["summary"], summary)
    stdout.write(
        f"cv_errors={cv.errors}/{ytr.size} test_errors={test_errors}/{yte.size} selected={model.feature_ids.size}\n"
    )


def cmd_sweep_lambda(cfg: RunConfig, out: _Outputs, stdout):
    o = cfg.options
    X = load_matrix(o["input"])
    if o["lambdas"]:
        grid = np.array(o["lambdas"], dtype=np.float64)
    else:
        if not 0 < o["lambda_min"] < o["lambda_max"] or o["points"] < 2:
            raise InvalidParameterError("need 0 < lambda-min < lambda-max and points >= 2")
        grid = np.geomspace(o["lambda_min"], o["lambda_max"], o["points"])
    M = kernel_for(X, cfg.params)
    lines = ["lambda,support_size,objective\n"]
    with _Trace(cfg.trace, out) as trace:
        for lam in grid:
            if trace is not None:
                trace.write(f"# lambda = {_num(lam)}\n")
            res = owd_minimize(X, M, float(lam), cfg=cfg.optimizer, trace=trace)
            lines.append(f"{_num(lam)},{res.support_size},{_num(res.objective_value)}\n")
    out.write(o["output"], "".join(lines))
    stdout.write(f"points={grid.size}\n")


COMMANDS = {
    "select": cmd_select,
    "baseline": cmd_baseline,
    "simulate": cmd_simulate,
    "score": cmd_score,
    "eval-cluster": cmd_eval_cluster,
    "eval-knn": cmd_eval_knn,
    "classify": cmd_classify,
    "sweep-lambda": cmd_sweep_lambda,
}


def run_pipeline(cfg: RunConfig, stdout=None) -> int:
    """Run one subcommand; outputs appear only if it succeeds."""
    stdout = stdout or sys.stdout
    out = _Outputs()
    try:
        COMMANDS[cfg.command](cfg, out, stdout)
        out.commit()
    except BaseException:
        out.discard()
        raise
    return 0


def _fail(code, exc) -> int:
    message = " ".join(str(exc).split()) or type(exc).__name__
    sys.stderr.write(f"glfs: error[{code}]: {message}\n")
    return EXIT_CODES.get(code, 1)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return run_pipeline(config_from_args(args))
    except GLFSError as exc:
        return _fail(exc.code, exc)
    except OSError as exc:
        return _fail("io-error", exc)
    except (ValueError, ArithmeticError) as exc:
        return _fail("error", exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
