"""``loopgrade`` command-line front end.

Exit codes: 0 success, 2 configuration or input errors (bad flags, missing
files, processes outside the mesh), 3 numerical failures (infeasible
references, simulation or identification failures, exhausted budgets).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import classifiers as clf
from .datagen import (STREAM_TRAIN, STREAM_VALIDATION, e_dist, generate_dataset, read_dataset,
                      write_dataset)
from .errors import DomainError, LoopgradeError
from .features import extract_features
from .frequency import margins
from .identification import canonical_response, fit_sopdt_closed_loop
from .plots import accuracy_bars, response_overlay, topk_curves
from .process import DEFAULT_N, PidTuning, RejectionResponse, read_response_csv
from .tuning import GRID_L1, GRID_L2, build_mesh, default_workers, interpolate_tuning, load_mesh, save_mesh
from .validation import SUITE_PROCESSES, TABLE_I, run_fixed_suite, run_higher_order_suite

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DESK_SIZES = (6000, 1000)
FULL_SIZES = (60000, 10000)

log = logging.getLogger("loopgrade")


class ConfigError(Exception):
    pass


def _paths(args):
    out = Path(args.out)
    mesh = Path(args.mesh) if getattr(args, "mesh", None) else out / "mesh" / "mesh.json"
    return out, mesh


def _require(path: Path, what: str, hint: str):
    if not path.exists():
        raise ConfigError(f"{what} not found at {path}; {hint}")


def _write_json(path: Path, doc: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True, default=float) + "\n")


def _parse_range(text):
    try:
        parts = [tuple(float(v) for v in p.split(":")) for p in text.split(",")]
        (a1, b1), (a2, b2) = parts
    except ValueError:
        raise ConfigError(f"--range expects L1lo:L1hi,L2lo:L2hi, got {text!r}") from None
    l1 = tuple(v for v in GRID_L1 if a1 - 1e-9 <= v <= b1 + 1e-9)
    l2 = tuple(v for v in GRID_L2 if a2 - 1e-9 <= v <= b2 + 1e-9)
    if len(l1) < 2 or len(l2) < 2:
        raise ConfigError(f"--range {text!r} keeps fewer than two grid nodes per axis")
    return l1, l2


# -- commands -----------------------------------------------------------------

def cmd_mesh(args) -> int:
    out, mesh_path = _paths(args)
    l1, l2 = _parse_range(args.range) if args.range else (GRID_L1, GRID_L2)
    workers = args.workers or default_workers()
    log.info("optimizing %d reference nodes with %d worker(s)", len(l1) * len(l2), workers)
    mesh = build_mesh(seed=args.seed, L1=l1, L2=l2, workers=workers,
                      progress=lambda e: log.info("node L1=%.1f L2=%.1f done", e.process.L1, e.process.L2))
    save_mesh(mesh, mesh_path)
    print(f"{'L1':>5} {'L2':>5} {'kr':>8} {'Ti':>8} {'Td':>8} {'Am':>7} {'phi_m':>7} {'IAE':>8}")
    for (i, j), e in sorted(mesh.entries.items()):
        t, m = e.tuning, e.margins
        print(f"{e.process.L1:5.2f} {e.process.L2:5.2f} {t.kr:8.4f} {t.Ti:8.4f} {t.Td:8.4f} "
              f"{m.Am:7.3f} {m.phi_m:7.2f} {e.iae_ref:8.4f}")
    print(f"mesh written to {mesh_path}")
    return EXIT_OK


def cmd_gendata(args) -> int:
    out, mesh_path = _paths(args)
    _require(mesh_path, "mesh", "run `loopgrade mesh` first")
    mesh = load_mesh(mesh_path)
    n_train, n_val = FULL_SIZES if args.full_scale else DESK_SIZES
    n_train = args.n_train or n_train
    n_val = args.n_val or n_val
    workers = args.workers or 1
    for name, n, stream in (("train", n_train, STREAM_TRAIN), ("validation", n_val, STREAM_VALIDATION)):
        log.info("generating %s set (%d samples)", name, n)
        ds = generate_dataset(mesh, n, seed=args.seed, workers=workers, stream=stream)
        path = write_dataset(ds, out / "data" / f"{name}.csv")
        st = ds.stats
        print(f"{name}: {len(ds)} samples {ds.counts()} from {st.attempts} attempts; "
              f"raw OK fraction {st.ok_fraction:.3f}; "
              f"P(margins in band | e_dist<0.1) {st.band_given_close:.3f} -> {path}")
    return EXIT_OK


def _load_sets(args):
    out, _ = _paths(args)
    train_path = Path(args.train) if args.train else out / "data" / "train.csv"
    val_path = Path(args.val) if args.val else out / "data" / "validation.csv"
    _require(train_path, "training set", "run `loopgrade gendata` first")
    _require(val_path, "validation set", "run `loopgrade gendata` first")
    return read_dataset(train_path), read_dataset(val_path)


def cmd_train(args) -> int:
    out, _ = _paths(args)
    train_set, val_set = _load_sets(args)
    kinds = clf.KINDS if args.kind == "all" else [k.strip() for k in args.kind.split(",")]
    for k in kinds:
        if k not in clf.KINDS:
            raise ConfigError(f"unknown kind {k!r}; choose from {', '.join(clf.KINDS)} or all")
    fsets = [f.strip() for f in args.features.split(",")]
    provenance = {"seed": args.seed, "mesh_version": train_set.mesh_version,
                  "train_sha256": train_set.digest(), "validation_sha256": val_set.digest()}
    results, summary, curves = {}, {}, {}
    for kind in kinds:
        try:
            hyper = None
            if args.search:
                res = clf.random_search(kind, dataset=train_set, iterations=args.search,
                                        folds=args.folds, seed=args.seed)
                hyper = res.best
                log.info("%s: search picked %s (CV %.4f)", kind, hyper, res.best_score)
        except LoopgradeError as exc:
            log.error("%s search failed: %s", kind, exc)
            summary[kind] = {"error": str(exc)}
            continue
        ranking = None
        for fs in fsets:
            try:
                if fs.startswith("topk:") and ranking is None:
                    if kind not in clf.TREE_KINDS:
                        raise DomainError(f"{fs} needs a tree-based kind, not {kind}")
                    ranking = clf.feature_importance(clf.train(kind, hyper, train_set, seed=args.seed))
                model = clf.train(kind, hyper, train_set, features=clf.feature_set(fs, ranking), seed=args.seed)
            except LoopgradeError as exc:
                log.error("%s [%s] failed: %s", kind, fs, exc)
                summary[f"{kind}/{fs}"] = {"error": str(exc)}
                continue
            model.meta.update(provenance, feature_set=fs)
            rep = clf.evaluate(model, val_set)
            clf.save_model(model, out / "models" / f"{kind}_{fs.replace(':', '')}.json")
            results.setdefault(kind, {})[fs] = rep.accuracy
            summary[f"{kind}/{fs}"] = {"hyper": model.hyper, "notes": model.notes, **rep.as_dict()}
            print(f"== {kind} [{fs}]\n{rep.to_text()}")
        if args.topk_study and kind in clf.TREE_KINDS:
            ranking, curve = clf.topk_study(kind, train_set, val_set, range(1, 31), hyper, args.seed)
            curves[kind] = curve
            summary[f"{kind}/topk"] = {"ranking": ranking, "accuracy": curve}
    _write_json(out / "reports" / "train_report.json", {**provenance, "results": summary})
    (out / "reports").mkdir(parents=True, exist_ok=True)
    accuracy_bars(results, out / "reports" / "accuracy.svg")
    if curves:
        topk_curves(curves, out / "reports" / "topk.svg")
    return EXIT_OK


def _model_path(args, out):
    path = Path(args.model) if args.model else out / "models" / "SVM-RBF_all30.json"
    _require(path, "model", "run `loopgrade train` first or pass --model")
    return path


def cmd_assess(args) -> int:
    out, mesh_path = _paths(args)
    _require(mesh_path, "mesh", "run `loopgrade mesh` first")
    rec_path = Path(args.response)
    _require(rec_path, "response file", "pass a t,y CSV recorded after the disturbance step")
    model = clf.load_model(_model_path(args, out))
    mesh = load_mesh(mesh_path)
    tuning = PidTuning(args.kr, args.ti, args.td, args.n)
    raw = read_response_csv(rec_path)
    with open(rec_path) as fh:
        physical = fh.readline().strip().split(",")[1] == "y"
    # keep r = y / (gain * delta_d) with unit gain so the fit sees physical units
    record = RejectionResponse(raw.dt, raw.r / args.delta_d if physical else raw.r,
                               delta_d=args.delta_d)
    fit = fit_sopdt_closed_loop(record, tuning, args.delta_d, seed=args.seed)
    p = fit.normalized
    if not mesh.contains(p):
        raise DomainError(f"identified process L1={p.L1:.3f}, L2={p.L2:.3f} lies outside the mesh "
                          f"[{mesh.L1[0]}, {mesh.L1[-1]}] x [{mesh.L2[0]}, {mesh.L2[-1]}]; "
                          "check the record (dead time, sampling) or build a wider mesh")
    entry = interpolate_tuning(mesh, p)
    resp = canonical_response(record, fit.model)
    fv = extract_features(resp, allow_unsettled=True)
    pred = clf.predict(model, fv)
    mp = margins(fit.model, tuning)
    ed = e_dist(entry.response_ref, resp)
    m = fit.model
    print(f"verdict: {pred.label}  (score {pred.score:+.4f}, model {model.kind})")
    print(f"  identified SOPDT  k={m.k:.4g} tau1={m.tau1:.4g} tau2={m.tau2:.4g} tau0={m.tau0:.4g} "
          f"(L1={p.L1:.3f}, L2={p.L2:.3f}, rms {fit.residual:.3g})")
    print(f"  margins           Am={mp.Am:.3f} (ref {entry.margins.Am:.3f})  "
          f"phi_m={mp.phi_m:.2f} (ref {entry.margins.phi_m:.2f})")
    print(f"  e_dist            {ed:.4f}")
    ref = entry.tuning
    print(f"  reference tuning  kr={ref.kr / m.k:.4g} Ti={ref.Ti * m.tau1:.4g} Td={ref.Td * m.tau1:.4g}")
    if args.plot:
        response_overlay(entry.response_ref, [(resp, pred.label)], args.plot,
                         title=f"assessed ({pred.label}) vs reference")
    return EXIT_OK


def cmd_validate(args) -> int:
    out, mesh_path = _paths(args)
    _require(mesh_path, "mesh", "run `loopgrade mesh` first")
    model = clf.load_model(_model_path(args, out))
    mesh = load_mesh(mesh_path)
    rdir = out / "reports" / "validation"
    rdir.mkdir(parents=True, exist_ok=True)
    suites = [run_fixed_suite(mesh, model, p) for p in SUITE_PROCESSES]
    suites += [run_higher_order_suite(mesh, model, name, seed=args.seed) for name in TABLE_I]
    docs = []
    for s in suites:
        rep = s.report
        print(f"== {s.name}\n{rep.to_text()}")
        if s.fit is not None:
            print(f"  identified L1={s.fit.normalized.L1:.3f} L2={s.fit.normalized.L2:.3f} "
                  f"(tabulated {s.expected[0]}, {s.expected[1]})")
        failed = [c for c in s.cases if c.error]
        if failed:
            print(f"  {len(failed)} case(s) failed: " + "; ".join(c.error for c in failed))
        tag = s.name.split()[0] if s.fit is not None else f"L1_{s.process.L1:g}_L2_{s.process.L2:g}"
        response_overlay(s.reference, [(c.response, c.predicted) for c in s.cases if c.response is not None],
                         rdir / f"{tag}.svg", title=s.name)
        docs.append(s.as_dict())
    _write_json(rdir / "validation.json", {"seed": args.seed, "mesh_version": mesh.version,
                                           "model": model.kind, "model_meta": model.meta,
                                           "suites": docs})
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="loopgrade",
        description="Grade PID load-disturbance rejection as OK or NOK.",
        epilog="exit codes: 0 success, 2 configuration/input error, 3 numerical failure",
        formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed (default 0)")
    common.add_argument("--out", default="loopgrade-out", help="output directory")
    common.add_argument("--mesh", help="mesh JSON (default OUT/mesh/mesh.json)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", parents=[common], help="optimize the reference-tuning mesh")
    p.add_argument("--range", help="restrict to L1lo:L1hi,L2lo:L2hi, e.g. 0.1:0.2,0.1:0.2")
    p.add_argument("--workers", type=int, help="parallel node optimizations")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("gendata", parents=[common], help="generate balanced train/validation sets")
    p.add_argument("--full-scale", action="store_true", help="60000/10000 samples instead of 6000/1000")
    p.add_argument("--n-train", type=int)
    p.add_argument("--n-val", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_gendata)

    p = sub.add_parser("train", parents=[common], help="train and evaluate classifiers")
    p.add_argument("--kind", default="all", help="kind, comma list, or all")
    p.add_argument("--features", default="all30,popular12",
                   help="comma list of all30, popular12, topk:K")
    p.add_argument("--search", type=int, default=0, metavar="N",
                   help="random-search iterations (0 keeps the default hyperparameters)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--topk-study", action="store_true", help="accuracy vs top-k features for tree kinds")
    p.add_argument("--train", help="training CSV (default OUT/data/train.csv)")
    p.add_argument("--val", help="validation CSV (default OUT/data/validation.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("assess", parents=[common], help="grade one recorded rejection response")
    p.add_argument("response", help="CSV with header t,y (or t,r), disturbance applied at t=0")
    p.add_argument("--model", help="model JSON (default OUT/models/SVM-RBF_all30.json)")
    p.add_argument("--kr", type=float, required=True)
    p.add_argument("--ti", type=float, required=True)
    p.add_argument("--td", type=float, required=True)
    p.add_argument("--n", type=float, default=DEFAULT_N, help="derivative filter divisor")
    p.add_argument("--delta-d", type=float, default=1.0, help="load step amplitude")
    p.add_argument("--plot", help="write an SVG overlay of the assessed and reference responses")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("validate", parents=[common], help="run the fixed and higher-order suites")
    p.add_argument("--model", help="model JSON (default OUT/models/SVM-RBF_all30.json)")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except (ConfigError, DomainError, FileNotFoundError) as exc:
        print(f"loopgrade: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LoopgradeError as exc:
        print(f"loopgrade: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
