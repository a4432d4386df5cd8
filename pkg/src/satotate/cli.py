"""Command-line entry point: ``satotate <command> [options]``.

Exit codes: 0 on success, 1 if some input rows failed, 2 on bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager

import numpy as np

from . import classifier, moments, pca, st_groups, tables
from .curves import EulerCoefficientVector, euler_matrix_genus1, euler_vector_genus2, is_cm, j_invariant, primes_below

log = logging.getLogger("satotate")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(63)
        log.warning("no --seed given; using seed=%d", args.seed)
        args.generated_seed = True
    return args.seed


def _write_meta(args, extra=None) -> None:
    """Record a generated seed next to a CSV output."""
    if getattr(args, "generated_seed", False) and args.out not in (None, "-"):
        with open(args.out + ".meta.json", "w") as fh:
            json.dump({"command": args.command, "seed": args.seed, **(extra or {})}, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _dump_json(obj, path) -> None:
    with _output(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _group_list(text: str) -> list[str]:
    groups = [g.strip() for g in text.split(",") if g.strip()]
    if not groups:
        raise UsageError("empty group list")
    for g in groups:
        try:
            st_groups.group_info(g)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return groups


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated integer list: {text!r}") from None


def _load_dataset(path) -> tuple[classifier.Dataset, list[str]]:
    labels, ids, X, names = tables.read_feature_table(path)
    return classifier.Dataset(X, labels, names), ids


# --------------------------------------------------------------------------
# commands


def _genus1_chunk(curves, bound):
    return euler_matrix_genus1(curves, bound)


def _genus2_one(curve, num_primes):
    try:
        return euler_vector_genus2(curve, num_primes), None
    except ValueError as exc:
        return None, str(exc)


def cmd_euler(args) -> int:
    genus, rows, errors = tables.read_curves(args.curves)
    for line, msg in errors:
        log.error("line %d: %s", line, msg)
    rows.sort(key=lambda r: r.curve.label)
    curves = [r.curve for r in rows]
    vectors = []
    if genus == 1:
        primes = np.array(primes_below(args.bound), dtype=np.int64)
        X = np.zeros((len(curves), len(primes)))
        if curves:
            chunks = np.array_split(np.arange(len(curves)), max(1, min(args.threads, len(curves))))
            with ProcessPoolExecutor(args.threads) if args.threads > 1 else _Serial() as ex:
                parts = ex.map(_genus1_chunk, [[curves[i] for i in c] for c in chunks], [args.bound] * len(chunks))
                for c, (_, part) in zip(chunks, parts):
                    X[c] = part
        for c, row in zip(curves, X):
            bad = tuple(int(p) for p in primes if not c.is_good(int(p)))
            if bad:
                log.info("%s: bad primes %s", c.label, bad)
            vectors.append(EulerCoefficientVector(c.label, 1, primes, row, bad))
    else:
        with ProcessPoolExecutor(args.threads) if args.threads > 1 else _Serial() as ex:
            for i, (vec, err) in enumerate(ex.map(_genus2_one, curves, [args.primes] * len(curves))):
                if err:
                    errors.append((rows[i].line, err))
                    log.error("line %d: %s", rows[i].line, err)
                else:
                    vectors.append(vec)
                log.info("%d/%d curves done", i + 1, len(curves))
    st = {r.curve.label: r.st_label for r in rows}
    with _output(args.out) as fh:
        if args.format == "long":
            tables.write_coefficients_long(fh, vectors, genus)
        else:
            width = len(vectors[0].features()) if vectors else 0
            names = tables.feature_names(width, genus, prefix="a")
            tables.write_feature_table(
                fh, ["group", "label", *names], [st[v.label] for v in vectors], [v.label for v in vectors], [v.features() for v in vectors]
            )
    return EXIT_PARTIAL if errors else EXIT_OK


class _Serial:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    @staticmethod
    def map(fn, *iterables):
        return map(fn, *iterables)


def cmd_sample(args) -> int:
    groups = sorted(_group_list(args.groups))
    seed = _resolve_seed(args)
    if args.pairs < 1 or args.samples < 1:
        raise UsageError("--pairs and --samples must be positive")
    genus = {st_groups.group_info(g).genus for g in groups}
    if len(genus) > 1:
        raise UsageError("cannot mix genus-1 and genus-2 groups in one batch")
    genus = genus.pop()
    width = args.pairs * (2 if genus == 2 else 1)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "sample_index", *tables.feature_names(width, genus)])
        for g in groups:
            X, _ = st_groups.sample_batch(g, args.pairs, args.samples, seed)
            for i, row in enumerate(X):
                w.writerow([g, i, *map(tables.fmt, row)])
    _write_meta(args, {"groups": groups, "pairs": args.pairs, "samples": args.samples})
    return EXIT_OK


def cmd_train(args) -> int:
    ds, _ = _load_dataset(args.data)
    model = classifier.train(ds, args.likelihood)
    with _output(args.out) as fh:
        fh.write(model.to_json())
        fh.write("\n")
    return EXIT_OK


def _load_model(path) -> classifier.NBModel:
    with open(path) as fh:
        return classifier.NBModel.from_json(fh.read())


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    _, ids, X, _ = tables.read_feature_table(args.data)
    if len(ids) and X.shape[1] != model.n_features:
        raise UsageError(f"model expects {model.n_features} features, data has {X.shape[1]}")
    labels, post = classifier.predict_many(model, X) if len(ids) else ([], np.zeros((0, len(model.classes))))
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "predicted", *(f"posterior_{c}" for c in model.classes)])
        for rid, lab, row in zip(ids, labels, post):
            w.writerow([rid, lab, *map(tables.fmt, row)])
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.confusion:
        with open(args.confusion) as fh:
            d = json.load(fh)
        report = classifier.report_from_confusion(np.array(d["confusion"]), d.get("classes") or [str(i) for i in range(len(d["confusion"]))])
        _dump_json(report.to_dict(), args.out)
        return EXIT_OK
    if not args.data:
        raise UsageError("evaluate needs --data (or --confusion)")
    ds, _ = _load_dataset(args.data)
    out = {}
    if args.model:
        model = _load_model(args.model)
        validation = ds
    elif args.train_data:
        model = classifier.train(_load_dataset(args.train_data)[0], args.likelihood)
        validation = ds
    else:
        seed = _resolve_seed(args)
        tr, validation = classifier.split(ds, args.train_fraction, seed)
        model = classifier.train(tr, args.likelihood)
        out.update(seed=seed, train_fraction=args.train_fraction, train_size=len(tr))
    if validation.features.shape[1] != model.n_features:
        raise UsageError(f"model expects {model.n_features} features, data has {validation.features.shape[1]}")
    out.update(classifier.evaluate(model, validation).to_dict())
    out.update(likelihood=model.likelihood, validation_size=len(validation))
    _dump_json(out, args.out)
    return EXIT_OK


def cmd_learning_curve(args) -> int:
    ds, _ = _load_dataset(args.data)
    seed = _resolve_seed(args)
    width = args.width or tables.pair_width(ds.feature_names or [])
    sizes = _int_list(args.prefix_sizes)
    try:
        points = classifier.learning_curve(ds, sizes, args.train_fraction, seed, args.repeats, width, args.likelihood)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["prefix_size", "accuracy", "phi", "accuracy_std", "phi_std"])
        for pt in points:
            w.writerow([pt.size, *map(tables.fmt, (pt.accuracy, pt.phi, pt.accuracy_std, pt.phi_std))])
    _write_meta(args)
    return EXIT_OK


def cmd_pca(args) -> int:
    labels, ids, X, _ = tables.read_feature_table(args.data)
    try:
        model = pca.fit(X, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    Z = pca.transform(model, X)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", *(f"pc{i + 1}" for i in range(args.k))])
        for lab, row in zip(labels, Z):
            w.writerow([lab, *map(tables.fmt, row)])
    log.info("explained variance %s", model.explained_variance.tolist())
    return EXIT_OK


def cmd_moments(args) -> int:
    groups = sorted(_group_list(args.groups)) if args.groups else list(st_groups.GENUS2_GROUPS)
    seed = _resolve_seed(args)
    refs = moments.reference_tables(groups, args.n_samples, seed, args.m_max_a1, args.m_max_a2)
    out = {"seed": seed, "n_samples": args.n_samples, "tables": [t.to_dict() for t in refs]}
    if args.data:
        labels, ids, X, names = tables.read_feature_table(args.data)
        width = tables.pair_width(names)
        results = []
        for lab, rid, row in zip(labels, ids, X):
            a1, a2 = (row[0::2], row[1::2]) if width == 2 else (row, None)
            obs = moments.moments_of_pairs(rid, a1, a2, args.m_max_a1, args.m_max_a2)
            best, scores = moments.nearest_group(obs, refs)
            results.append({"id": rid, "label": lab, "nearest": best, "scores": scores})
        out["nearest"] = results
    _dump_json(out, args.out)
    return EXIT_OK


def cmd_cm_check(args) -> int:
    genus, rows, errors = tables.read_curves(args.curves)
    if genus != 1:
        raise UsageError("cm-check expects a genus-1 curve file")
    for line, msg in errors:
        log.error("line %d: %s", line, msg)
    rows.sort(key=lambda r: r.curve.label)
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "j", "is_cm"])
        for r in rows:
            w.writerow([r.curve.label, str(j_invariant(r.curve)), str(is_cm(r.curve)).lower()])
    return EXIT_PARTIAL if errors else EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed for every random draw")
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("--quiet", action="store_true", help="only log errors")

    p = argparse.ArgumentParser(prog="satotate", description="Sato-Tate group sampling, point counting and naive Bayes experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("euler", parents=[common], help="normalized Euler coefficients of curves")
    s.add_argument("curves", help="curve CSV (label,a1,a2,a3,a4,a6 or label,f,h)")
    s.add_argument("--bound", type=int, default=10_000, help="genus 1: all primes below this")
    s.add_argument("--primes", type=int, default=200, help="genus 2: number of good primes")
    s.add_argument("--format", choices=("long", "wide"), default="long")
    s.set_defaults(func=cmd_euler)

    s = sub.add_parser("sample", parents=[common], help="batches of Haar-random characteristic polynomials")
    s.add_argument("--groups", required=True, help="comma-separated group labels")
    s.add_argument("--pairs", type=int, default=200)
    s.add_argument("--samples", type=int, default=1000)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("train", parents=[common], help="fit a naive Bayes model")
    s.add_argument("--data", required=True)
    s.add_argument("--likelihood", choices=classifier.LIKELIHOODS, default="gaussian")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", parents=[common], help="posterior class probabilities")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", parents=[common], help="accuracy, phi and confusion matrix")
    s.add_argument("--data", help="labeled feature CSV")
    s.add_argument("--model", help="evaluate this model on all of --data")
    s.add_argument("--train-data", help="train on this file, evaluate on --data")
    s.add_argument("--confusion", help="JSON with a 'confusion' matrix (rows true) to score directly")
    s.add_argument("--train-fraction", type=float, default=0.2)
    s.add_argument("--likelihood", choices=classifier.LIKELIHOODS, default="gaussian")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("learning-curve", parents=[common], help="accuracy against feature prefix length")
    s.add_argument("--data", required=True)
    s.add_argument("--prefix-sizes", required=True, help="comma-separated prefix lengths (in pairs for genus 2)")
    s.add_argument("--width", type=int, choices=(1, 2), default=None, help="columns per step (default: detect)")
    s.add_argument("--train-fraction", type=float, default=0.2)
    s.add_argument("--repeats", type=int, default=1)
    s.add_argument("--likelihood", choices=classifier.LIKELIHOODS, default="gaussian")
    s.set_defaults(func=cmd_learning_curve)

    s = sub.add_parser("pca", parents=[common], help="project features on principal components")
    s.add_argument("--data", required=True)
    s.add_argument("--k", type=int, default=2)
    s.set_defaults(func=cmd_pca)

    s = sub.add_parser("moments", parents=[common], help="reference moment tables and nearest-group matching")
    s.add_argument("--groups", default=None, help="comma-separated labels (default: all genus-2 groups)")
    s.add_argument("--n-samples", type=int, default=100_000)
    s.add_argument("--m-max-a1", type=int, default=moments.M_MAX_A1)
    s.add_argument("--m-max-a2", type=int, default=moments.M_MAX_A2)
    s.add_argument("--data", help="feature CSV whose rows are matched to the nearest group")
    s.set_defaults(func=cmd_moments)

    s = sub.add_parser("cm-check", parents=[common], help="CM verdict from the j-invariant")
    s.add_argument("curves", help="genus-1 curve CSV")
    s.set_defaults(func=cmd_cm_check)
    return p


def _configure_logging(quiet: bool) -> None:
    pkg = logging.getLogger("satotate")
    for h in list(pkg.handlers):
        pkg.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    pkg.addHandler(handler)
    pkg.setLevel(logging.ERROR if quiet else logging.INFO)
    pkg.propagate = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.quiet)
    if args.threads < 1:
        parser.error("--threads must be positive")
    if hasattr(args, "train_fraction") and not 0 < args.train_fraction < 1:
        parser.error("--train-fraction must lie strictly between 0 and 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"satotate {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"satotate {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
