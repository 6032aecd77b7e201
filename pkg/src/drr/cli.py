"""Command-line front end.

Every verb is a pure function of its inputs: data comes from CSV, models
from the single-file format in model_io, settings from flags or from a
flat ``key = value`` config file (flags win over the file, the file wins
over built-in defaults).  Commands write CSV tables with a one-line header
and never modify their inputs; any error exits nonzero with a one-line
diagnostic on stderr.
"""

import argparse
import csv
import sys

import numpy as np

from .data import DataError, LabeledDataset, load_csv, save_csv
from .evaluation import (
    classification_protocol,
    make_retrieval_task,
    reconstruction_curve,
    retrieval_protocol,
)
from .manifolds import ManifoldSpec, benchmark_manifold, generate_manifold
from .model_io import load_model, save_model
from .pca import PcaModel, fit_pca
from .ppa import fit_ppa
from .reduction import DrrConfig, DrrModel, fit_drr

_DEFAULTS = {
    "input": None,
    "model": None,
    "output": None,
    "targets": None,
    "test_input": None,
    "test_targets": None,
    "method": "drr",
    "methods": None,
    "k": None,
    "k_list": None,
    "seed": 0,
    "seeds": 1,
    "folds": 5,
    "degree": 3,
    "max_train": 2000,
    "sigma": None,
    "gamma": None,
    "share_hyperparams": False,
    "residualize_from": 2,
    "parallel": False,
    "has_header": False,
    "label_column": None,
    "train_fraction": 0.5,
    "ridge": 1e-6,
    "width": None,
    "tilt": 0.0,
    "noise": 0.05,
    "n_samples": 10_000,
    "r1": 1.0,
    "r2": 0.35,
    "n_train": 4000,
    "n_test": 4000,
    "synthetic": False,
}

# casts applied to config-file strings; keys without an entry stay strings
_CASTS = {
    "method": str,
    "methods": str,
    "k": int,
    "k_list": str,
    "seed": int,
    "seeds": int,
    "folds": int,
    "degree": int,
    "max_train": int,
    "sigma": float,
    "gamma": float,
    "share_hyperparams": bool,
    "residualize_from": int,
    "parallel": bool,
    "has_header": bool,
    "label_column": str,
    "train_fraction": float,
    "ridge": float,
    "width": int,
    "tilt": float,
    "noise": float,
    "n_samples": int,
    "r1": float,
    "r2": float,
    "n_train": int,
    "n_test": int,
    "synthetic": bool,
}

_FLAGS = {
    "input": ("--input", {"help": "input CSV path"}),
    "model": ("--model", {"help": "model file path"}),
    "output": ("--output", {"help": "output path"}),
    "targets": ("--targets", {"help": "training-target CSV path"}),
    "test_input": ("--test-input", {"help": "test-feature CSV path"}),
    "test_targets": ("--test-targets", {"help": "test-target CSV path"}),
    "method": ("--method", {"choices": ["pca", "ppa", "drr"]}),
    "methods": ("--methods", {"help": "comma-separated method list"}),
    "k": ("--k", {"type": int, "help": "number of kept coordinates"}),
    "k_list": ("--k-list", {"help": "widths, e.g. 1-5,8"}),
    "seed": ("--seed", {"type": int}),
    "seeds": ("--seeds", {"type": int, "help": "number of consecutive seeds"}),
    "folds": ("--folds", {"type": int}),
    "degree": ("--degree", {"type": int, "help": "polynomial degree"}),
    "max_train": ("--max-train", {"type": int, "help": "regression subsample cap"}),
    "sigma": ("--sigma", {"type": float, "help": "fixed kernel length-scale"}),
    "gamma": ("--gamma", {"type": float, "help": "fixed ridge"}),
    "share_hyperparams": (
        "--share-hyperparams",
        {"action": argparse.BooleanOptionalAction},
    ),
    "residualize_from": ("--residualize-from", {"type": int}),
    "parallel": ("--parallel", {"action": argparse.BooleanOptionalAction}),
    "has_header": ("--has-header", {"action": argparse.BooleanOptionalAction}),
    "label_column": ("--label-column", {"help": '"last" or 0-based index'}),
    "train_fraction": ("--train-fraction", {"type": float}),
    "ridge": ("--ridge", {"type": float}),
    "width": ("--width", {"type": int, "help": "projection width for retrieval"}),
    "tilt": ("--tilt", {"type": float}),
    "noise": ("--noise", {"type": float}),
    "n_samples": ("--n-samples", {"type": int}),
    "r1": ("--r1", {"type": float}),
    "r2": ("--r2", {"type": float}),
    "n_train": ("--n-train", {"type": int}),
    "n_test": ("--n-test", {"type": int}),
    "synthetic": ("--synthetic", {"action": argparse.BooleanOptionalAction}),
}


class Settings:
    """Flag > config file > default, per key."""

    def __init__(self, args, keys):
        config = _load_config(args.config) if args.config else {}
        for key in keys:
            value = getattr(args, key, None)
            if value is None and key in config:
                value = _cast_config(key, config[key])
            if value is None:
                value = _DEFAULTS[key]
            setattr(self, key, value)

    def require(self, *keys):
        for key in keys:
            if getattr(self, key) is None:
                flag = _FLAGS[key][0]
                raise DataError(f"{flag} is required (flag or config)")


def _load_config(path):
    values = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise DataError(f"{path}:{line_no}: expected key = value")
            key, _, value = text.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _cast_config(key, raw):
    caster = _CASTS.get(key, str)
    if caster is bool:
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise DataError(f"config key {key}: expected a boolean, got {raw!r}")
    try:
        return caster(raw)
    except ValueError:
        raise DataError(
            f"config key {key}: expected {caster.__name__}, got {raw!r}"
        ) from None


def _parse_ks(text, d):
    """Width list like "1-5,8"; None means every width 1..d."""
    if text is None:
        return list(range(1, d + 1))
    ks = []
    for part in str(text).split(","):
        part = part.strip()
        if "-" in part:
            lo, _, hi = part.partition("-")
            ks.extend(range(int(lo), int(hi) + 1))
        elif part:
            ks.append(int(part))
    if not ks or min(ks) < 1 or max(ks) > d:
        raise DataError(f"k list {text!r} must stay within 1..{d}")
    return sorted(set(ks))


def _label_column(s):
    value = getattr(s, "label_column", None)
    if value is None:
        return None
    return "last" if value == "last" else int(value)


def _load_matrix(s, path):
    loaded = load_csv(path, has_header=s.has_header, label_column=_label_column(s))
    return loaded.data if isinstance(loaded, LabeledDataset) else loaded


def _drr_config(s, seed):
    return DrrConfig(
        sigma=s.sigma,
        gamma=s.gamma,
        folds=int(s.folds),
        max_train=int(s.max_train),
        seed=int(seed),
        share_hyperparams=bool(s.share_hyperparams),
        residualize_from=int(s.residualize_from),
    )


def _fit_one(s, method, x, seed):
    if method == "pca":
        return fit_pca(x)
    if method == "ppa":
        return fit_ppa(x, degree=int(s.degree))
    if method == "drr":
        return fit_drr(x, _drr_config(s, seed))
    raise DataError(f"unknown method {method!r}")


def _fitters(s, default_methods):
    names = [m.strip() for m in (s.methods or default_methods).split(",") if m.strip()]
    fitters = {}
    for name in names:
        if name not in ("pca", "ppa", "drr"):
            raise DataError(f"unknown method {name!r}")
        fitters[name] = lambda x, seed, m=name: _fit_one(s, m, x, seed)
    return fitters


def _write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format(v, ".10g") if isinstance(v, float) else v for v in row]
            )


def _seed_range(s):
    return range(int(s.seed), int(s.seed) + int(s.seeds))


def cmd_fit(s) -> int:
    s.require("input", "model")
    x = _load_matrix(s, s.input)
    model = _fit_one(s, s.method, x, s.seed)
    save_model(
        model,
        s.model,
        metadata={"seed": int(s.seed), "method": s.method, "source_rows": x.shape[0]},
    )
    out = model.transform(x)
    scores = model.pca.transform(x) if isinstance(model, DrrModel) else out
    print("coordinate,score_variance,residual_variance")
    for i in range(out.shape[1]):
        print(
            f"{i + 1},{np.var(scores[:, i]):.10g},{np.var(out[:, i]):.10g}"
        )
    return 0


def _apply(s, op) -> int:
    s.require("input", "model", "output")
    model = load_model(s.model)
    x = _load_matrix(s, s.input)
    save_csv(op(model, x), s.output)
    return 0


def cmd_transform(s) -> int:
    return _apply(
        s,
        lambda m, x: m.transform(x, parallel=True)
        if (s.parallel and isinstance(m, DrrModel))
        else m.transform(x),
    )


def cmd_invert(s) -> int:
    return _apply(s, lambda m, y: m.inverse_transform(y))


def cmd_reconstruct(s) -> int:
    s.require("k")
    return _apply(s, lambda m, x: m.reconstruct(x, int(s.k)))


def _model_paths(s):
    value = s.model
    if isinstance(value, str):
        value = value.replace(",", " ").split()
    return list(value)


def cmd_eval_reconstruction(s) -> int:
    s.require("input", "model", "output")
    x = _load_matrix(s, s.input)
    named = []
    counts = {}
    for path in _model_paths(s):
        model = load_model(path)
        tag = {PcaModel: "pca", DrrModel: "drr"}.get(type(model), "ppa")
        counts[tag] = counts.get(tag, 0) + 1
        name = tag if counts[tag] == 1 else f"{tag}-{counts[tag]}"
        named.append((name, model))
    reference_model = next(
        (m for _, m in named if isinstance(m, PcaModel)), None
    ) or fit_pca(x)
    reference = reconstruction_curve(reference_model, x, method="pca")
    rows = []
    if all(not isinstance(m, PcaModel) for _, m in named):
        named.insert(0, ("pca", reference_model))
    for name, model in named:
        curve = reconstruction_curve(model, x, method=name, reference=reference)
        for i, k in enumerate(curve.ks):
            rows.append(
                (
                    name,
                    int(k),
                    float(curve.mae[i]),
                    float(curve.mse[i]),
                    float(curve.relative_mae[i]),
                    float(curve.relative_mse[i]),
                )
            )
    _write_table(
        s.output,
        ["method", "k", "mae", "mse", "relative_mae", "relative_mse"],
        rows,
    )
    return 0


def cmd_eval_classify(s) -> int:
    s.require("input", "output")
    if s.label_column is None:
        s.label_column = "last"
    dataset = load_csv(s.input, has_header=s.has_header, label_column=_label_column(s))
    if not isinstance(dataset, LabeledDataset):
        raise DataError("classification needs a label column")
    ks = _parse_ks(s.k_list, dataset.data.shape[1])
    rows = classification_protocol(
        dataset,
        ks,
        _fitters(s, "pca,drr"),
        seeds=list(_seed_range(s)),
        train_fraction=float(s.train_fraction),
        ridge=float(s.ridge),
    )
    _write_table(
        s.output,
        ["method", "seed", "k", "error"],
        [(r["method"], r["seed"], r["k"], r["error"]) for r in rows],
    )
    return 0


def cmd_eval_retrieve(s) -> int:
    s.require("output")
    if s.synthetic:
        tasks = [
            (
                seed,
                *make_retrieval_task(
                    n_train=int(s.n_train), n_test=int(s.n_test), seed=int(seed)
                ),
            )
            for seed in _seed_range(s)
        ]
    else:
        s.require("input", "targets", "test_input", "test_targets")
        x_train = _load_matrix(s, s.input)
        y_train = _load_matrix(s, s.targets)
        x_test = _load_matrix(s, s.test_input)
        y_test = _load_matrix(s, s.test_targets)
        tasks = [(seed, x_train, y_train, x_test, y_test) for seed in _seed_range(s)]
    ks = _parse_ks(s.k_list or "1-8", tasks[0][1].shape[1])
    rows = []
    for seed, x_train, y_train, x_test, y_test in tasks:
        for row in retrieval_protocol(
            x_train,
            y_train,
            x_test,
            y_test,
            ks,
            _fitters(s, "pca,drr"),
            seed=seed,
            width=s.width,
        ):
            rows.append((row["method"], seed, row["k"], row["mae"]))
    _write_table(s.output, ["method", "seed", "k", "mae"], rows)
    return 0


def _manifold_spec(s, seed):
    return ManifoldSpec(
        n_samples=int(s.n_samples),
        tilt=float(s.tilt),
        noise_std=float(s.noise),
        radii=(float(s.r1), float(s.r2)),
        seed=int(seed),
    )


def cmd_gen_manifold(s) -> int:
    s.require("output")
    x, latent = generate_manifold(_manifold_spec(s, s.seed))
    save_csv(np.column_stack([x, latent]), s.output, header=["x1", "x2", "x3", "u", "v"])
    return 0


def cmd_benchmark_manifolds(s) -> int:
    s.require("output")
    rows = benchmark_manifold(
        _manifold_spec(s, s.seed),
        list(_seed_range(s)),
        _fitters(s, "pca,ppa,drr"),
    )
    _write_table(
        s.output,
        ["method", "seed", "tilt", "mse_dr", "mse_f"],
        [(r["method"], r["seed"], float(s.tilt), r["mse_dr"], r["mse_f"]) for r in rows],
    )
    methods = {r["method"] for r in rows}
    for name in sorted(methods):
        mean_dr = np.mean([r["mse_dr"] for r in rows if r["method"] == name])
        mean_f = np.mean([r["mse_f"] for r in rows if r["method"] == name])
        print(f"{name}: mean mse_dr {mean_dr:.6g}, mean mse_f {mean_f:.6g}")
    return 0


_COMMANDS = {
    "fit": (
        cmd_fit,
        [
            "input",
            "model",
            "method",
            "seed",
            "folds",
            "max_train",
            "degree",
            "sigma",
            "gamma",
            "share_hyperparams",
            "residualize_from",
            "has_header",
            "label_column",
        ],
        "fit a model on a CSV and write a model file plus a variance report",
    ),
    "transform": (
        cmd_transform,
        ["input", "model", "output", "has_header", "label_column", "parallel"],
        "map samples to the reduced coordinates",
    ),
    "invert": (
        cmd_invert,
        ["input", "model", "output", "has_header"],
        "map reduced coordinates back to the input space",
    ),
    "reconstruct": (
        cmd_reconstruct,
        ["input", "model", "output", "k", "has_header", "label_column"],
        "round trip through the leading k coordinates",
    ),
    "eval-reconstruction": (
        cmd_eval_reconstruction,
        ["input", "model", "output", "has_header", "label_column"],
        "per-width error table for one or more models, relative to PCA",
    ),
    "eval-classify": (
        cmd_eval_classify,
        [
            "input",
            "output",
            "methods",
            "k_list",
            "seed",
            "seeds",
            "train_fraction",
            "ridge",
            "folds",
            "max_train",
            "degree",
            "sigma",
            "gamma",
            "share_hyperparams",
            "residualize_from",
            "has_header",
            "label_column",
        ],
        "linear-discriminant error on data reconstructed at each width",
    ),
    "eval-retrieve": (
        cmd_eval_retrieve,
        [
            "input",
            "targets",
            "test_input",
            "test_targets",
            "output",
            "methods",
            "k_list",
            "seed",
            "seeds",
            "width",
            "folds",
            "max_train",
            "degree",
            "sigma",
            "gamma",
            "share_hyperparams",
            "residualize_from",
            "has_header",
            "synthetic",
            "n_train",
            "n_test",
        ],
        "linear retrieval error from the leading k features",
    ),
    "gen-manifold": (
        cmd_gen_manifold,
        ["output", "seed", "tilt", "noise", "n_samples", "r1", "r2"],
        "sample the synthetic curved manifold (CSV: x1,x2,x3,u,v)",
    ),
    "benchmark-manifolds": (
        cmd_benchmark_manifolds,
        [
            "output",
            "seed",
            "seeds",
            "tilt",
            "noise",
            "n_samples",
            "r1",
            "r2",
            "methods",
            "folds",
            "max_train",
            "degree",
            "sigma",
            "gamma",
            "share_hyperparams",
        ],
        "per-seed manifold benchmark table for PCA, PPA, and DRR",
    ),
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="drr",
        description="invertible dimensionality reduction via sequential regression",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, keys, help_text) in _COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", help="key = value settings file")
        for key in keys:
            flag, kwargs = _FLAGS[key]
            if name == "eval-reconstruction" and key == "model":
                sub.add_argument(flag, nargs="+", default=None, **kwargs)
            else:
                sub.add_argument(flag, default=None, **kwargs)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    command, keys, _ = _COMMANDS[args.command]
    try:
        settings = Settings(args, keys)
        return command(settings)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
