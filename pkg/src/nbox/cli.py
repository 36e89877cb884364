"""
Command line front end.

    nbox enumerate -n 3 --boxes-only [--format json|csv] [-o catalog.json]
    nbox describe -n 3 --class ID [--catalog catalog.json] [--metric random|FILE] [--seed S]
    nbox verify -n 3 [--class ID] [--metric random|FILE] [--seed S] [--trials T]
    nbox conjecture -n 4
    nbox check-acute points.csv

Exit codes: 0 success, 2 property violation (artifact bug, witness printed),
3 theorem falsification, 4 usage error.  The worker count for sweeps comes from the
NBOX_WORKERS environment variable and never changes any output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import __version__
from .acute import NotAcuteFree, PointConfig, cardinality_report, check_acute_free
from .classify import (
    MAX_DIMENSION,
    CatalogEntry,
    DimensionTooLarge,
    enumerate_actions,
    sweep,
)
from .errors import PropertyViolation, TheoremFalsified
from .exactnum import Q, SymForm, qstr
from .flatgeom import (
    Check,
    classify_codim2_strata,
    extremal_lattice,
    sampled_extremality_check,
    sampled_midpoint_check,
    verify_cell_properties,
)
from .moduli import PRNG_NAME, invariant_form_basis, is_invariant, sample_invariant_metric
from .orbits import extremal_points, maximal_finite
from .signcrystal import GroupSpec

FORMAT_VERSION = 1

EXIT_OK, EXIT_VIOLATION, EXIT_FALSIFIED, EXIT_USAGE = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _workers() -> int:
    raw = os.environ.get("NBOX_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"NBOX_WORKERS must be an integer, got {raw!r}")


def _check_n(n: int):
    if not 1 <= n <= MAX_DIMENSION:
        raise UsageError(f"-n must be between 1 and {MAX_DIMENSION}")


# -- catalog I/O ----------------------------------------------------------------------

def catalog_document(entries, command: str) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "producer": f"nbox {__version__}",
        "command": command,
        "prng": PRNG_NAME,
        "entries": [e.to_json() for e in entries],
    }


def catalog_csv(entries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "n", "generators", "phi", "N", "M", "k", "moduli_dim", "name"])
    for e in entries:
        d = e.spec.to_json()
        w.writerow([
            e.id, e.n, " ".join(d["generators"]),
            " ".join(f"{g}:{p}" for g, p in d["phi"].items()),
            e.N, e.M, "" if e.k is None else e.k, e.moduli_dim, e.name or "",
        ])
    return buf.getvalue()


def load_catalog(path: str) -> list[CatalogEntry]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read catalog {path}: {exc}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise UsageError(f"unsupported catalog format {doc.get('format_version')!r}")
    return [CatalogEntry.from_json(d) for d in doc["entries"]]


def _select(args) -> list[CatalogEntry]:
    if args.catalog:
        entries = load_catalog(args.catalog)
    elif args.spec:
        try:
            spec = GroupSpec.from_json(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read spec {args.spec}: {exc}")
        from .classify import make_entry

        return [make_entry(spec)]
    else:
        if args.n is None:
            raise UsageError("give -n, --catalog or --spec")
        _check_n(args.n)
        entries = enumerate_actions(args.n, boxes_only=getattr(args, "boxes_only", True))
    if args.n is not None:
        entries = [e for e in entries if e.n == args.n]
    if args.cls:
        entries = [e for e in entries if e.id == args.cls or e.name == args.cls]
        if not entries:
            raise UsageError(f"class {args.cls!r} not found")
    return entries


def _metrics(args, spec: GroupSpec) -> list[tuple[str, SymForm]]:
    if args.metric == "random":
        return [(f"random:{args.seed + t}", sample_invariant_metric(spec, args.seed + t))
                for t in range(args.trials)]
    try:
        rows = json.loads(Path(args.metric).read_text(encoding="utf-8"))
        form = SymForm.from_json(rows)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read metric {args.metric}: {exc}")
    if form.n != spec.n or not is_invariant(spec, form):
        raise UsageError("metric has the wrong size or is not invariant under the point group")
    return [(f"file:{args.metric}", form)]


# -- commands -------------------------------------------------------------------------

def cmd_enumerate(args) -> int:
    _check_n(args.n)
    entries = enumerate_actions(args.n, boxes_only=args.boxes_only)
    command = f"enumerate -n {args.n}" + (" --boxes-only" if args.boxes_only else "")
    if args.format == "csv":
        _emit(catalog_csv(entries), args.output)
    else:
        _emit(_dump(catalog_document(entries, command)), args.output)
    return EXIT_OK


def cmd_describe(args) -> int:
    out = []
    for entry in _select(args):
        spec = entry.spec
        label, form = _metrics(args, spec)[0]
        doc = entry.to_json()
        doc["extremal_set"] = extremal_points(spec).to_json()
        doc["maximal_finite"] = maximal_finite(spec).to_json()
        doc["moduli_basis"] = [list(p) for p in invariant_form_basis(spec).positions]
        doc["metric"] = {"source": label, "form": form.to_json()}
        if entry.N:
            try:
                lat = extremal_lattice(spec, form)
                doc["lattice"] = {
                    "origin": [qstr(x) for x in lat.origin],
                    "basis": [[qstr(x) for x in v] for v in lat.basis.vectors],
                    "relevant_vectors": [[qstr(x) for x in v] for v in lat.neighbor_set],
                }
            except ValueError as exc:
                doc["lattice"] = {"error": str(exc)}
        doc["codim2_strata"] = [s.to_json() for s in classify_codim2_strata(spec, form)]
        out.append(doc)
    _emit(_dump(out), args.output)
    return EXIT_OK


def verify_entry(entry: CatalogEntry, metrics, samples: int, pairs: int) -> list[dict]:
    reports = []
    for label, form in metrics:
        checks = verify_cell_properties(entry.spec, form, strict=False)
        seed = int(label.split(":")[1]) if label.startswith("random:") else 0
        mid = sampled_midpoint_check(entry.spec, form, samples, seed)
        checks.append(Check("midpoint_lemma", "pass" if mid["violations"] == 0 else "fail",
                            f"{mid['samples']} samples, {mid['paths']} paths", mid["first_violation"]))
        ext = sampled_extremality_check(entry.spec, form, pairs, seed)
        bad = ext["extremal_failures"] + ext["witness_failures"]
        checks.append(Check("extremality", "pass" if bad == 0 else "fail",
                            f"{ext['extremal_points']} extremal, {ext['non_extremal_points']} other",
                            ext["first_failure"]))
        reports.append({
            "class_id": entry.id,
            "name": entry.name,
            "metric": {"source": label, "form": form.to_json()},
            "checks": [c.to_json() for c in checks],
        })
    return reports


def cmd_verify(args) -> int:
    entries = [e for e in _select(args) if e.is_box]
    if not entries:
        raise UsageError("no box classes selected")
    reports = []
    for entry in entries:
        reports.extend(verify_entry(entry, _metrics(args, entry.spec), args.samples, args.pairs))
    doc = {"format_version": FORMAT_VERSION, "prng": PRNG_NAME, "reports": reports}
    _emit(_dump(doc), args.output)
    failed = any(c["status"] != "pass" for r in reports for c in r["checks"])
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_conjecture(args) -> int:
    _check_n(args.n)
    res = sweep(args.n, workers=_workers())
    doc = res.to_json()
    doc["format_version"] = FORMAT_VERSION
    bound = 2 ** args.n
    bad = len(res.n_exceeds) + len(res.m_exceeds)
    verdict = "hold" if not bad else "fail"
    doc["summary"] = (
        f"N <= {bound} and M <= {bound} {verdict} for all {res.specs} enumerated specs; "
        f"{bad} counterexamples"
    )
    _emit(_dump(doc), args.output)
    if res.n_exceeds:
        return EXIT_FALSIFIED
    if res.n_above_m:
        return EXIT_VIOLATION
    return EXIT_OK


def read_points_csv(path: str) -> PointConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(x.strip() for x in r)]
        pts = [[Q(x.strip()) for x in r] for r in rows]
    except (OSError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot read points {path}: {exc}")
    if not pts or len({len(p) for p in pts}) != 1:
        raise UsageError("points file must have rows of equal, nonzero length")
    try:
        return PointConfig.of(pts)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_check_acute(args) -> int:
    config = read_points_csv(args.file)
    res = check_acute_free(config)
    if not res.ok:
        i, j, k = res.witness
        _emit(_dump({"acute_free": False, "witness": [i, j, k], "dot": qstr(res.dot)}), args.output)
        return EXIT_VIOLATION
    report = cardinality_report(config)
    _emit(_dump({"acute_free": True, **report.to_json()}), args.output)
    return EXIT_FALSIFIED if report.falsifies else EXIT_OK


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nbox", description="Boxes: flat orbifolds with 2^n extremal points.")
    p.add_argument("--version", action="version", version=f"nbox {__version__}")
    p.add_argument("--json-errors", action="store_true", help="report failures as JSON on stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    e = sub.add_parser("enumerate", help="catalog of classes in dimension n")
    e.add_argument("-n", type=int, required=True)
    e.add_argument("--boxes-only", action="store_true")
    e.add_argument("--format", choices=["json", "csv"], default="json")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_enumerate)

    for name, func, helptext in (
        ("describe", cmd_describe, "print one class with E, relevant vectors, strata, moduli"),
        ("verify", cmd_verify, "run the metric checks on box classes"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("-n", type=int)
        s.add_argument("--class", dest="cls", help="catalog id or name")
        s.add_argument("--catalog", help="catalog JSON written by enumerate")
        s.add_argument("--spec", help="group spec JSON file")
        s.add_argument("--metric", default="random", help="'random' or a JSON matrix file")
        s.add_argument("--seed", type=int, default=1)
        s.add_argument("--trials", type=int, default=1 if name == "describe" else 3)
        s.add_argument("--samples", type=int, default=500)
        s.add_argument("--pairs", type=int, default=10_000)
        s.add_argument("-o", "--output")
        s.set_defaults(func=func, boxes_only=name == "verify")

    c = sub.add_parser("conjecture", help="sweep N <= 2^n and M <= 2^n over all specs")
    c.add_argument("-n", type=int, required=True)
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_conjecture)

    a = sub.add_parser("check-acute", help="acute-free test for a CSV of rational points")
    a.add_argument("file")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_check_acute)
    return p


def _fail(args_json: bool, code: int, kind: str, message: str, witness=None) -> int:
    if args_json:
        sys.stderr.write(json.dumps({"error": kind, "message": message, "witness": witness}, default=str) + "\n")
    else:
        sys.stderr.write(f"nbox: {kind}: {message}\n")
        if witness is not None:
            sys.stderr.write(f"witness: {witness}\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    json_errors = "--json-errors" in argv
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("missing command")
        return args.func(args)
    except UsageError as exc:
        return _fail(json_errors, EXIT_USAGE, "usage", str(exc))
    except DimensionTooLarge as exc:
        return _fail(json_errors, EXIT_USAGE, "usage", str(exc))
    except TheoremFalsified as exc:
        return _fail(json_errors, EXIT_FALSIFIED, "theorem_falsified", str(exc), exc.witness)
    except (PropertyViolation, NotAcuteFree) as exc:
        return _fail(json_errors, EXIT_VIOLATION, "property_violation", str(exc), getattr(exc, "witness", None))


if __name__ == "__main__":
    sys.exit(main())
