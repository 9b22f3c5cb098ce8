"""Command-line front end.  Every command prints one canonical JSON report."""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from importlib import metadata

from . import shapes
from .concave import midpoint_violation, oscillating_function
from .decide import EXIT_CODES, classify_hessian, corollary_singular_count, decide_flat, hessian_at_zero
from .errors import BudgetExhausted, DomainError, FlatNewtError, HypothesisFailed
from .functional import Integrand, dirichlet_split, gradient_split_quadrature
from .geom2d import Side, classify_vertical_support, diameter, geometric_constants
from .kbound import Budget, divergence_certificate, estimate_K
from .svg import domain_figure

EXIT_OK, EXIT_NEGATIVE, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


class ParseError(Exception):
    """Unreadable input file or flag value."""


class ValidationError(Exception):
    """Readable input that does not describe a valid domain."""


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.1.0"


def canonical(obj):
    """Round floats to 12 significant digits; infinities become "unbounded"."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "unbounded" if obj > 0 else "-unbounded"
        v = float(f"{obj:.12g}")
        return 0.0 if v == 0 else v
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return canonical(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    return json.dumps(canonical(report), sort_keys=True, indent=2) + "\n"


# -- input ------------------------------------------------------------------


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ParseError("config must be a JSON object")
    return cfg


def _merge(args, cfg: dict) -> None:
    """Config values fill in flags that were not given on the command line."""
    for key, value in cfg.items():
        key = key.replace("-", "_")
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _domain(args):
    n_poly = int(args.n_poly or shapes.DEFAULT_N_POLY)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            if isinstance(args.domain, dict):
                return shapes.domain_from_json({"n_poly": n_poly, **args.domain})
            if args.domain:
                try:
                    with open(args.domain) as fh:
                        obj = json.load(fh)
                except (OSError, json.JSONDecodeError) as exc:
                    raise ParseError(f"domain {args.domain}: {exc}") from None
                if not isinstance(obj, dict):
                    raise ParseError("domain spec must be a JSON object")
                obj.setdefault("n_poly", n_poly)
                return shapes.domain_from_json(obj)
            return shapes.from_generator(args.gen or "diamond", n_poly=n_poly)
        except (DomainError, ValueError, TypeError, KeyError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ValidationError(str(exc)) from None


def _ints(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


def _budget(args) -> Budget:
    b = Budget()
    return Budget(restarts=int(args.restarts if args.restarts is not None else b.restarts),
                  iters=int(args.iters if args.iters is not None else b.iters),
                  apex_counts=tuple(_ints(args.apex_counts)) if args.apex_counts is not None
                  else b.apex_counts)


def _seed(args) -> int:
    return int(args.seed) if args.seed is not None else 0


# -- report pieces ------------------------------------------------------------


def domain_summary(domain) -> dict:
    left = classify_vertical_support(domain, Side.LEFT)
    right = classify_vertical_support(domain, Side.RIGHT)
    out = {"pieces": [p.to_json() for p in domain.pieces], "n_poly": domain.n_poly,
           "area": domain.area, "polygon_area": domain.polygon_area,
           "diameter": diameter(domain), "singular_count": corollary_singular_count(domain),
           "angular_left": left.to_json(), "angular_right": right.to_json()}
    if left.is_angular and right.is_angular:
        out["constants"] = geometric_constants(domain).to_json()
    return out


def _provenance(args, **extra) -> dict:
    out = {"seed": _seed(args), "version": version(), "command": args.command}
    out.update(extra)
    return out


def _maybe_svg(args, domain, u=None) -> None:
    if args.svg:
        domain_figure(domain, u).write(args.svg)


# -- commands -----------------------------------------------------------------


def cmd_domain_info(args) -> tuple[dict, int]:
    domain = _domain(args)
    _maybe_svg(args, domain)
    return {"domain": domain_summary(domain), "provenance": _provenance(args)}, EXIT_OK


def cmd_k_estimate(args) -> tuple[dict, int]:
    domain = _domain(args)
    budget = _budget(args)
    K = estimate_K(domain, budget, _seed(args))
    k = K.to_json()
    if not K.bounded:
        k["upper_note"] = "a vertical support line is not angular: the ratio is unbounded"
    _maybe_svg(args, domain, K.witness)
    report = {"domain": domain_summary(domain), "k_estimate": k,
              "provenance": _provenance(args, budget=budget.to_json())}
    return report, EXIT_OK


def cmd_witness(args) -> tuple[dict, int]:
    domain = _domain(args)
    threshold = float(args.threshold if args.threshold is not None else 100.0)
    report = {"domain": domain_summary(domain), "certificates": [],
              "provenance": _provenance(args, threshold=threshold)}
    try:
        cert = divergence_certificate(domain, threshold)
    except HypothesisFailed as exc:
        report["failure"] = {"type": "HypothesisFailed", "message": str(exc),
                             "best_ratio": exc.best_ratio, "trace": [list(t) for t in exc.trace]}
        return report, EXIT_NEGATIVE
    except BudgetExhausted as exc:
        report["failure"] = {"type": "BudgetExhausted", "message": str(exc),
                             "best_ratio": exc.best_ratio, "trace": [list(t) for t in exc.trace]}
        return report, EXIT_INCONCLUSIVE
    split = dirichlet_split(cert.witness)
    report["certificates"].append({**cert.to_json(), "I_x": split.I_x, "I_y": split.I_y})
    _maybe_svg(args, domain, cert.witness)
    return report, EXIT_OK


def cmd_decide(args) -> tuple[dict, int]:
    domain = _domain(args)
    try:
        f = Integrand.parse(args.integrand or "newtonian")
    except (ValueError, SyntaxError) as exc:
        raise ParseError(f"integrand: {exc}") from None
    H = hessian_at_zero(f)
    hc = classify_hessian(H)
    budget = _budget(args)
    verdict = decide_flat(domain, hc, budget, _seed(args))
    report = {"domain": domain_summary(domain), "integrand": f.to_json(),
              "hessian_matrix": H.tolist(), "verdicts": [verdict.to_json()],
              "provenance": _provenance(args, budget=budget.to_json())}
    if verdict.k_estimate is not None:
        _maybe_svg(args, domain, verdict.k_estimate.witness)
    else:
        _maybe_svg(args, domain)
    return report, EXIT_CODES[verdict.kind]


def cmd_oscillation(args) -> tuple[dict, int]:
    domain = _domain(args)
    Ns = _ints(args.N if args.N is not None else "1,2,4,8")
    grid = int(args.grid or 128)
    rows = []
    for N in Ns:
        field = oscillating_function(domain, N)
        split = gradient_split_quadrature(field.gradient, domain, grid)
        row = {"N": N, "I_x": split.I_x, "I_y": split.I_y}
        if split.I_y > 0:
            row["ratio"] = split.I_x / split.I_y
        else:
            row["ratio"] = None
            row["degenerate"] = True
        bad = midpoint_violation(field, domain, n_pairs=2000, seed=_seed(args))
        row["concavity"] = "non-concave" if bad is not None else "no violation found"
        rows.append(row)
    return {"domain": domain_summary(domain), "oscillation": rows,
            "provenance": _provenance(args, grid=grid)}, EXIT_OK


COMMANDS = {"domain-info": cmd_domain_info, "k-estimate": cmd_k_estimate,
            "witness": cmd_witness, "decide": cmd_decide, "oscillation": cmd_oscillation}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flatnewt",
                                     description="Local minimality of flat profiles in "
                                                 "Newton-type resistance problems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--gen", help="generator, e.g. diamond, disk, regular_ngon:6")
        src.add_argument("--domain", help="JSON domain spec")
        p.add_argument("--config", help="JSON file with default flag values")
        p.add_argument("--n-poly", type=int, dest="n_poly")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--svg", help="write a figure here")
        if name in ("k-estimate", "decide"):
            p.add_argument("--restarts", type=int)
            p.add_argument("--iters", type=int)
            p.add_argument("--apex-counts", dest="apex_counts")
        if name == "witness":
            p.add_argument("--threshold", type=float)
        if name == "decide":
            p.add_argument("--integrand",
                           help="newtonian | quadratic:l1,l2 | custom:<expression in z1, z2>")
        if name == "oscillation":
            p.add_argument("--N", dest="N", help="comma-separated frequencies")
            p.add_argument("--grid", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge(args, _load_config(args.config))
        report, code = COMMANDS[args.command](args)
    except (ParseError, ValidationError) as exc:
        report = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        code = EXIT_INPUT
    except FlatNewtError as exc:
        report = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        code = EXIT_INPUT
    text = dumps(report)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_INPUT:
        print(f"error: {report['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
