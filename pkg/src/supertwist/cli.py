"""Command line: ``supertwist verify`` and ``supertwist compute``.

Exit status is 0 on success, 1 when verification fails under the chosen
policy and 2 for unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence

from .errors import SuperGeometryError
from .geometry import (
    covariant_derivative,
    curvature,
    divergence,
    gradient,
    hessian,
    k_tensor,
    laplacian,
    ricci,
    w2,
)
from .graded import MAX_TERMS_ENV
from .parser import ScenarioDocument, load_scenario, parse_expression
from .products import ClaimId, Tier, VerificationReport, verify

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2

# tensor -> (number of frame arguments, needs --expr)
TENSORS = {
    "connection": (2, False),
    "curvature": (3, False),
    "ricci": (2, False),
    "gradient": (0, True),
    "divergence": (1, False),
    "laplacian": (0, True),
    "hessian": (2, True),
    "k": (3, False),
    "w2": (4, False),
}

DEFAULT_WIDTH = 160


class InputError(Exception):
    pass


def _claim_list(text: str | None) -> list[ClaimId] | None:
    if text is None:
        return None
    if text.strip().lower() == "all":
        return list(ClaimId)
    try:
        return [ClaimId.parse(c) for c in text.split(",") if c.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _frames(doc: ScenarioDocument, text: str | None, count: int) -> list[str]:
    raw = [a.strip() for a in (text or "").split(",") if a.strip()]
    if len(raw) != count:
        raise InputError(f"expected {count} frame argument(s), got {len(raw)}")
    frames = doc.product.chart.frames
    out = []
    for a in raw:
        if a.startswith("d") and a[1:] in frames:
            out.append(a[1:])
        elif a in frames:
            out.append(a)
        else:
            raise InputError(f"{a!r} is not a frame of the product chart {', '.join(frames)}")
    return out


# -- rendering ----------------------------------------------------------------


def report_to_json(report: VerificationReport) -> dict:
    claims = []
    for c in report.claims:
        claims.append(
            {
                "id": c.claim.value,
                "tier": c.tier.value,
                "status": c.status,
                "note": c.note,
                "cases": [
                    {"frames": list(k.frames), "residual": k.residual.render(), "pass": k.passed}
                    for k in c.cases
                ],
                "pass": c.passed,
            }
        )
    return {"scenario": report.scenario, "claims": claims, "summary": report.summary()}


def _truncate(text: str, width: int) -> str:
    if width <= 0 or len(text) <= width:
        return text
    return text[:width] + f" ... [{len(text) - width} more chars; use --format json]"


def report_to_text(report: VerificationReport, width: int = DEFAULT_WIDTH) -> str:
    lines = [f"scenario: {report.scenario}"]
    for c in report.claims:
        good = sum(1 for k in c.cases if k.passed)
        head = f"{c.status.upper():<14} {c.claim.value:<7} {c.tier.value:<9} {good}/{len(c.cases)} frame tuples"
        if c.note:
            head += f"  ({c.note})"
        lines.append(head)
        for k in c.cases:
            if not k.passed:
                frames = ",".join(k.frames)
                lines.append(f"    ({frames}): residual {_truncate(k.residual.render(), width)}")
    s = report.summary()
    lines.append(
        f"summary: {s['passed']} passed, {s['failed']} failed, {s['reported']} reported, "
        f"{s['not_applicable']} not applicable"
    )
    return "\n".join(lines)


# -- commands -------------------------------------------------------------------


def run_verify(args) -> int:
    doc = load_scenario(args.scenario)
    claims = _claim_list(args.claims)
    if claims is None:
        claims = list(doc.claims)
    report = verify(doc.product, claims)
    if args.format == "json":
        print(json.dumps(report_to_json(report), indent=2, sort_keys=False))
    else:
        print(report_to_text(report, args.width))
    if args.fail_on == "any-claim":
        bad = any(c.status in ("fail", "report") for c in report.claims)
    else:
        bad = any(c.status == "fail" and c.tier is Tier.MUST_PASS for c in report.claims)
    return EXIT_FAILED if bad else EXIT_OK


def compute_value(doc: ScenarioDocument, tensor: str, frame_text: str | None, expr: str | None):
    if tensor not in TENSORS:
        raise InputError(f"unknown tensor {tensor!r}; choose from {', '.join(TENSORS)}")
    count, needs_expr = TENSORS[tensor]
    tp = doc.product
    conn = tp.conn
    frames = [tp.chart.frame(f) for f in _frames(doc, frame_text, count)]
    fn = None
    if needs_expr:
        if not expr:
            raise InputError(f"--expr is required for {tensor}")
        fn = parse_expression(expr, doc.algebra)
    elif expr:
        raise InputError(f"--expr is not used by {tensor}")
    if tensor == "connection":
        return covariant_derivative(conn, *frames)
    if tensor == "curvature":
        return curvature(conn, *frames)
    if tensor == "ricci":
        return ricci(conn, *frames)
    if tensor == "gradient":
        return gradient(tp.metric, fn)
    if tensor == "divergence":
        return divergence(conn, *frames)
    if tensor == "laplacian":
        return laplacian(tp.metric, fn)
    if tensor == "hessian":
        return hessian(conn, fn, *frames)
    if tensor == "k":
        return k_tensor(tp.metric, *frames)
    return w2(tp.metric, *frames)


def run_compute(args) -> int:
    doc = load_scenario(args.scenario)
    value = compute_value(doc, args.tensor, args.args, args.expr)
    text = value.render()
    if args.format == "json":
        payload = {
            "scenario": doc.name,
            "tensor": args.tensor,
            "args": [a.strip() for a in (args.args or "").split(",") if a.strip()],
            "expr": args.expr,
            "value": text,
        }
        print(json.dumps(payload, indent=2))
    else:
        print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="supertwist",
        description="Exact curvature of super twisted products and verification of their closed forms.",
        epilog=f"The expression size limit is read from ${MAX_TERMS_ENV} (default 20000 terms).",
    )
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check closed-form claims against direct computation")
    v.add_argument("--scenario", required=True, help="scenario file (.scn)")
    v.add_argument("--claims", help="comma-separated claim ids, or 'all' (default: the scenario's list)")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--fail-on", choices=("must-pass-only", "any-claim"), default="must-pass-only")
    v.add_argument("--width", type=int, default=DEFAULT_WIDTH, help="truncate residuals in text output (0: never)")
    v.set_defaults(run=run_verify)

    c = sub.add_parser("compute", help="evaluate one tensor on the product metric")
    c.add_argument("--scenario", required=True)
    c.add_argument("--tensor", required=True, choices=tuple(TENSORS))
    c.add_argument("--args", help="comma-separated frames, e.g. dx,dy")
    c.add_argument("--expr", help="function argument for gradient, laplacian and hessian")
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.set_defaults(run=run_compute)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (InputError, SuperGeometryError) as exc:
        print(f"supertwist: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:  # output piped into head and friends
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
