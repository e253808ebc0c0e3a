"""Command-line surface.

Subcommands: classify, reduce, optimize, dominate, verify, augment.
Each invocation emits one structured JSON document on stdout (numbers
with 17 significant digits, keys sorted, byte-deterministic);
diagnostics go to stderr.  ``--pretty`` swaps the document for a short
human-readable summary.  Exit codes: 0 success, 1 domain/validation
error, 2 numerical failure.

Design documents are JSON objects with fields::

    model      "logistic" | ... | "power:m=<v>" | "hedayat:r=<v>"
    params     {"alpha": a, "beta": b}            (optional)
    space      "canonical" | "natural"            (optional, default canonical)
    region     [lo, hi]; "inf"/"-inf" allowed, capped on load
    support    [{"point": c, "weight": w}, ...]
    criterion  {"kind": "D"|"A"|"E"|"phi-p"|"c-optimal", "p": v, "vector": [a,b]}
    transform  "identity" | "mu-beta" | "scaled(<lambda>)"

Unknown fields are rejected.  Natural-space documents are converted to
canonical variables on load and the canonical region echoed back.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

from .classify import cap_region, check_condition_41, check_type, find_breakpoints
from .design import Design, design
from .errors import DocumentError, DomainError, NumericalError
from .infomat import c_matrix, info_matrix, loewner_compare
from .models import (
    ModelSpec,
    ParamTransform,
    a_matrix,
    b_matrix_mu_beta,
    b_matrix_scaled,
    get_model,
    x_to_c,
)
from .optimize import (
    Criterion,
    OptimizationResult,
    augment_multistage,
    optimize,
    verify_equivalence_D,
)
from .reduce import ReductionOutcome, reduce as reduce_design


# ---------------------------------------------------------------------------
# deterministic JSON output
# ---------------------------------------------------------------------------

def _fmt_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(float(x), ".17g")


def dump_document(obj) -> str:
    """Serialize with sorted keys and 17-significant-digit floats."""

    def emit(o):
        if o is None:
            return "null"
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, (bool, int, float)):
            return _fmt_number(o)
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(emit(v) for v in o) + "]"
        if isinstance(o, dict):
            items = sorted(o.items())
            return "{" + ",".join(json.dumps(k) + ":" + emit(v) for k, v in items) + "}"
        raise TypeError(f"cannot serialize {type(o)!r}")

    return emit(obj)


# ---------------------------------------------------------------------------
# document parsing
# ---------------------------------------------------------------------------

_DESIGN_FIELDS = {"model", "params", "space", "region", "support", "criterion", "transform"}
_PARAM_FIELDS = {"alpha", "beta"}
_CRITERION_FIELDS = {"kind", "p", "vector"}
_SUPPORT_FIELDS = {"point", "weight"}


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise DocumentError(f"unknown field {key!r} in {where}")


def _parse_region_end(value, which: str) -> float:
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return math.inf
        if text in ("-inf", "-infinity"):
            return -math.inf
        try:
            return float(text)
        except ValueError as exc:
            raise DocumentError(f"bad region {which} value {value!r}") from exc
    if isinstance(value, (int, float)):
        return float(value)
    raise DocumentError(f"bad region {which} value {value!r}")


def _parse_criterion_obj(obj, model: ModelSpec, alpha: float, beta: float,
                         transform_name: Optional[str]) -> Criterion:
    if obj is None:
        kind, p, vector = "D", None, None
    else:
        if not isinstance(obj, dict):
            raise DocumentError("field 'criterion' must be an object")
        _reject_unknown(obj, _CRITERION_FIELDS, "criterion")
        kind = obj.get("kind", "D")
        p = obj.get("p")
        vector = obj.get("vector")
        if vector is not None:
            if not (isinstance(vector, list) and len(vector) == 2):
                raise DocumentError("criterion field 'vector' must be a pair")
            vector = (float(vector[0]), float(vector[1]))
        if p is not None:
            p = float(p)
    transform = _build_transform(transform_name, model, alpha, beta)
    try:
        return Criterion(kind=kind, p=p, vector=vector, transform=transform)
    except DomainError as exc:
        raise DocumentError(str(exc)) from exc


def _build_transform(name: Optional[str], model: ModelSpec, alpha: float,
                     beta: float) -> Optional[ParamTransform]:
    if name is None:
        return None
    text = name.strip()
    a = a_matrix(model, alpha, beta)
    if text == "identity":
        return ParamTransform(a=a)
    if text == "mu-beta":
        return ParamTransform(a=a, b=b_matrix_mu_beta(alpha, beta))
    if text.startswith("scaled(") and text.endswith(")"):
        try:
            lam = float(text[len("scaled(") : -1])
        except ValueError as exc:
            raise DocumentError(f"bad transform {name!r}") from exc
        return ParamTransform(a=a, b=b_matrix_scaled(alpha, beta, lam))
    raise DocumentError(f"unknown transform {name!r}")


class LoadedDocument:
    """A parsed design document, converted to canonical space."""

    def __init__(self, model: ModelSpec, dsgn: Design, alpha: float, beta: float,
                 criterion: Criterion, transform_name: Optional[str]):
        self.model = model
        self.design = dsgn
        self.alpha = alpha
        self.beta = beta
        self.criterion = criterion
        self.transform_name = transform_name


def load_design_document(path: str) -> LoadedDocument:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise DocumentError(f"{path}: document must be a JSON object")
    _reject_unknown(doc, _DESIGN_FIELDS, "design document")
    if "model" not in doc:
        raise DocumentError("missing field 'model' in design document")
    model = get_model(str(doc["model"]))

    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise DocumentError("field 'params' must be an object")
    _reject_unknown(params, _PARAM_FIELDS, "params")
    alpha = float(params.get("alpha", 0.0))
    beta = float(params.get("beta", 1.0))

    space = doc.get("space", "canonical")
    if space not in ("canonical", "natural"):
        raise DocumentError(f"field 'space' must be 'canonical' or 'natural', got {space!r}")

    if "region" not in doc or not isinstance(doc["region"], list) or len(doc["region"]) != 2:
        raise DocumentError("field 'region' must be a [lo, hi] pair")
    lo = _parse_region_end(doc["region"][0], "lower")
    hi = _parse_region_end(doc["region"][1], "upper")

    raw_support = doc.get("support", [])
    if not isinstance(raw_support, list):
        raise DocumentError("field 'support' must be a list")
    pts = []
    for i, entry in enumerate(raw_support):
        if not isinstance(entry, dict):
            raise DocumentError(f"support entry {i} must be an object")
        _reject_unknown(entry, _SUPPORT_FIELDS, f"support entry {i}")
        if "point" not in entry or "weight" not in entry:
            raise DocumentError(f"support entry {i} needs 'point' and 'weight'")
        pts.append((float(entry["point"]), float(entry["weight"])))

    if space == "natural":
        ends = sorted(
            x_to_c(model, alpha, beta, v) if math.isfinite(v) else math.copysign(math.inf, v * beta)
            for v in (lo, hi)
        )
        lo, hi = ends
        pts = [(x_to_c(model, alpha, beta, c), w) for c, w in pts]

    lo, hi = cap_region(model, lo, hi)
    if pts:
        lo = min(lo, min(c for c, _ in pts))
        hi = max(hi, max(c for c, _ in pts))
    try:
        dsgn = design(pts, (lo, hi))
    except DomainError as exc:
        raise DocumentError(str(exc)) from exc

    criterion = _parse_criterion_obj(doc.get("criterion"), model, alpha, beta, doc.get("transform"))
    return LoadedDocument(model, dsgn, alpha, beta, criterion, doc.get("transform"))


def design_document(model: ModelSpec, dsgn: Design, alpha: float, beta: float,
                    transform_name: Optional[str] = None, criterion: Optional[dict] = None) -> dict:
    doc = {
        "model": model.id,
        "params": {"alpha": alpha, "beta": beta},
        "space": "canonical",
        "region": [dsgn.region[0], dsgn.region[1]],
        "support": [{"point": c, "weight": w} for c, w in dsgn.points],
    }
    if transform_name is not None:
        doc["transform"] = transform_name
    if criterion is not None:
        doc["criterion"] = criterion
    return doc


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DocumentError(message)


def _criterion_from_flag(text: str, model: ModelSpec, alpha: float, beta: float,
                         transform_name: Optional[str]) -> Criterion:
    body = text.strip()
    kind, p, vector = body, None, None
    if body.startswith("phi-p:"):
        kind = "phi-p"
        tail = body[len("phi-p:") :]
        if not tail.startswith("p="):
            raise DocumentError(f"bad criterion {text!r}; expected phi-p:p=<value>")
        p = float(tail[2:])
    elif body.startswith("c-optimal:"):
        kind = "c-optimal"
        tail = body[len("c-optimal:") :]
        if not tail.startswith("v="):
            raise DocumentError(f"bad criterion {text!r}; expected c-optimal:v=a,b")
        parts = tail[2:].split(",")
        if len(parts) != 2:
            raise DocumentError(f"bad criterion vector in {text!r}")
        vector = (float(parts[0]), float(parts[1]))
    transform = _build_transform(transform_name, model, alpha, beta)
    try:
        return Criterion(kind=kind, p=p, vector=vector, transform=transform)
    except DomainError as exc:
        raise DocumentError(str(exc)) from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="lodesign", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_args(p):
        p.add_argument("--model", required=True)
        p.add_argument("--region", nargs=2, required=True, metavar=("LO", "HI"))
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--beta", type=float, default=1.0)

    p = sub.add_parser("classify", help="interval-type verdict for a model")
    add_model_args(p)
    p.add_argument("--grid-n", type=int, default=512)
    p.add_argument("--breakpoints", action="store_true", help="include a breakpoint scan")
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("reduce", help="collapse a design file to its dominating class")
    p.add_argument("design_file")
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("optimize", help="best design in the reduced class")
    add_model_args(p)
    p.add_argument("--criterion", default="D")
    p.add_argument("--transform", default=None)
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("dominate", help="Loewner verdict between two design files")
    p.add_argument("design_file_a")
    p.add_argument("design_file_b")
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("verify", help="equivalence-theorem check of a design file")
    p.add_argument("design_file")
    p.add_argument("--grid-n", type=int, default=2048)
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("augment", help="optimal second stage given a first-stage design")
    add_model_args(p)
    p.add_argument("--criterion", default="D")
    p.add_argument("--transform", default=None)
    p.add_argument("--new-mass", type=float, required=True)
    p.add_argument("--initial", default=None, help="first-stage design file")
    p.add_argument("--pretty", action="store_true")
    return parser


def _region_from_args(args, model: ModelSpec) -> tuple[float, float]:
    lo = _parse_region_end(args.region[0], "lower")
    hi = _parse_region_end(args.region[1], "upper")
    return cap_region(model, lo, hi)


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------

def _cmd_classify(args) -> dict:
    model = get_model(args.model)
    region = _region_from_args(args, model)
    cl = check_type(model, region, grid_n=args.grid_n)
    signs = cl.diagnostics.sign_product
    doc = {
        "model": model.id,
        "region": [cl.interval[0], cl.interval[1]],
        "verdict": cl.verdict,
        "condition_41": cl.condition_41,
        "grid_n": len(cl.diagnostics.grid),
        "signed_points": {
            "positive": sum(1 for s in signs if s > 0),
            "negative": sum(1 for s in signs if s < 0),
            "inconclusive": sum(1 for s in signs if s == 0),
        },
        "first_violation": cl.diagnostics.first_violation,
        "note": cl.diagnostics.note,
    }
    if args.breakpoints:
        doc["breakpoints"] = [
            {"point": b.c, "kind": b.kind} for b in find_breakpoints(model, region)
        ]
    return doc


def _summary_classify(doc) -> str:
    lines = [
        f"model {doc['model']} on [{doc['region'][0]:g}, {doc['region'][1]:g}]: {doc['verdict']}",
        f"  condition (psi3'/psi1')' > 0: {doc['condition_41']}",
    ]
    if doc.get("breakpoints"):
        for b in doc["breakpoints"]:
            lines.append(f"  breakpoint {b['point']:.6g} ({b['kind']})")
    return "\n".join(lines)


def _outcome_document(model: ModelSpec, out: ReductionOutcome, alpha: float, beta: float) -> dict:
    return {
        "design": design_document(model, out.reduced, alpha, beta),
        "structure": out.structure,
        "certificate": {
            "moment_residuals": list(out.certificate.moment_residuals),
            "third_moment_slack": out.certificate.third_moment_slack,
            "psd_margin": out.certificate.psd_margin,
        },
    }


def _cmd_reduce(args) -> dict:
    loaded = load_design_document(args.design_file)
    out = reduce_design(loaded.model, loaded.design)
    return _outcome_document(loaded.model, out, loaded.alpha, loaded.beta)


def _summary_reduce(doc) -> str:
    cert = doc["certificate"]
    pts = ", ".join(
        f"({e['point']:.6g}, {e['weight']:.6g})" for e in doc["design"]["support"]
    )
    return (
        f"reduced to {doc['structure']}: {pts}\n"
        f"  moment residuals {cert['moment_residuals'][0]:.2e}, "
        f"{cert['moment_residuals'][1]:.2e}; third-moment gain "
        f"{cert['third_moment_slack']:.3g}; psd margin {cert['psd_margin']:.3g}"
    )


def _result_document(model: ModelSpec, res: OptimizationResult, alpha: float, beta: float,
                     crit_text: str, transform_name: Optional[str]) -> dict:
    doc = design_document(model, res.design, alpha, beta, transform_name)
    doc["criterion"] = _criterion_descriptor(crit_text)
    return {
        "design": doc,
        "criterion_value": res.value,
        "structure": res.structure.tag,
    }


def _criterion_descriptor(text: str) -> dict:
    if text.startswith("phi-p:p="):
        return {"kind": "phi-p", "p": float(text[len("phi-p:p=") :])}
    if text.startswith("c-optimal:v="):
        a, b = text[len("c-optimal:v=") :].split(",")
        return {"kind": "c-optimal", "vector": [float(a), float(b)]}
    return {"kind": text}


def _cmd_optimize(args) -> dict:
    model = get_model(args.model)
    region = _region_from_args(args, model)
    crit = _criterion_from_flag(args.criterion, model, args.alpha, args.beta, args.transform)
    res = optimize(model, region, args.alpha, args.beta, crit)
    return _result_document(model, res, args.alpha, args.beta, args.criterion, args.transform)


def _summary_optimize(doc) -> str:
    pts = ", ".join(
        f"({e['point']:.8g}, {e['weight']:.8g})" for e in doc["design"]["support"]
    )
    return f"optimal {doc['structure']}: {pts}\n  criterion value {doc['criterion_value']:.10g}"


def _cmd_dominate(args) -> dict:
    a = load_design_document(args.design_file_a)
    b = load_design_document(args.design_file_b)
    if a.model.id != b.model.id:
        raise DocumentError("dominance comparison needs the same model in both files")
    ta = _build_transform(a.transform_name, a.model, a.alpha, a.beta)
    tb = _build_transform(b.transform_name, b.model, b.alpha, b.beta)
    ma = info_matrix(a.design, a.model, a.alpha, a.beta, ta)
    mb = info_matrix(b.design, b.model, b.alpha, b.beta, tb)
    return {"verdict": loewner_compare(ma, mb)}


def _cmd_verify(args) -> dict:
    loaded = load_design_document(args.design_file)
    rep = verify_equivalence_D(loaded.design, loaded.model, loaded.design.region, args.grid_n)
    return {
        "max_variance": rep.max_variance,
        "argmax": rep.argmax,
        "support_variances": list(rep.support_variances),
        "certified": rep.certified,
    }


def _summary_verify(doc) -> str:
    tag = "D-optimal" if doc["certified"] else "not D-optimal"
    return (
        f"max variance {doc['max_variance']:.8g} at c = {doc['argmax']:.8g} -> {tag}\n"
        f"  support variances: "
        + ", ".join(f"{v:.8g}" for v in doc["support_variances"])
    )


def _cmd_augment(args) -> dict:
    model = get_model(args.model)
    region = _region_from_args(args, model)
    crit = _criterion_from_flag(args.criterion, model, args.alpha, args.beta, args.transform)
    first = None
    if args.initial is not None:
        loaded = load_design_document(args.initial)
        if loaded.model.id != model.id:
            raise DocumentError("first-stage design uses a different model")
        first = loaded.design
    res = augment_multistage(first, model, region, args.alpha, args.beta, crit, args.new_mass)
    return _result_document(model, res, args.alpha, args.beta, args.criterion, args.transform)


_SUMMARIES = {
    "classify": _summary_classify,
    "reduce": _summary_reduce,
    "optimize": _summary_optimize,
    "augment": _summary_optimize,
    "verify": _summary_verify,
    "dominate": lambda doc: f"verdict: {doc['verdict']}",
}

_COMMANDS = {
    "classify": _cmd_classify,
    "reduce": _cmd_reduce,
    "optimize": _cmd_optimize,
    "dominate": _cmd_dominate,
    "verify": _cmd_verify,
    "augment": _cmd_augment,
}


def run(argv, stdout=None, stderr=None) -> int:
    """Execute one subcommand; returns the process exit code."""
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    try:
        args = _build_parser().parse_args(argv)
        doc = _COMMANDS[args.command](args)
        if getattr(args, "pretty", False):
            print(_SUMMARIES[args.command](doc), file=out)
        else:
            print(dump_document(doc), file=out)
        return 0
    except (DocumentError, DomainError) as exc:
        print(f"error: {exc}", file=err)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=err)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
