"""Command line front end.

Every library operation is reachable from a subcommand, and ``demo`` bundles
the headline experiments with fixed defaults.  Output is JSON by default
(numbers as decimal or exact ``p/q`` strings, keys sorted, so identical
invocations are byte-identical) or CSV with a header row for traces and
tables.  Exit codes: 0 success, 1 usage error, 2 domain error, 3
non-convergence (partial results are still emitted).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import List, Optional, Tuple

from .cantor_function import phi, phi_increment_check, phi_middle_third_digits, staircase_table
from .construction import (
    CantorSystem,
    ExplicitGapSchedule,
    MiddleAlpha,
    MultiBranch,
    SequenceSpec,
    VariableFraction,
    example2_system,
    fluctuating_family,
    level_profile,
    middle_third_system,
    refine_to,
)
from .errors import CantorLabError, NonConvergent
from .numerics import (
    BigScalar,
    as_big,
    get_default_precision,
    log_base,
    set_default_precision,
)
from .scale_free_de import (
    coverage_steps_to,
    hopping_coverage,
    hopping_identity,
    lcf_solution_check,
    product_minus,
    product_plus,
)
from .set_statistics import (
    box_dimension_estimate,
    fatness_exponent,
    fatness_table,
    hausdorff_dimension_closed_form,
    lebesgue_measure_limit,
    level_table,
    thickness,
    thickness_is_infinite,
)
from .ultrametrics import (
    InfinitesimalContext,
    endpoint_exponent,
    growth_of_measure_demo,
    natural_ultrametric,
    relative_infinitesimal,
    scale_norm_infimum,
    sequence_norm_limit,
    valuated_exponent_estimate,
    valuation,
    valuation_trace,
    valued_measure_estimate,
    valued_norm_triadic,
    word_encode,
)

__all__ = ["main"]


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse defaults to exit code 2, which this tool reserves for
        # domain errors; usage problems exit 1.
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# argument value parsing
# ---------------------------------------------------------------------------


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def parse_depths(text: str) -> List[int]:
    """Depth lists: '8:20' (inclusive range), '8,12,16', or a single '8'."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise ValueError
            return list(range(lo_i, hi_i + 1))
        return [int(p) for p in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"expected 'lo:hi' or comma-separated integers, got {text!r}"
        ) from exc


def parse_fraction_list(text: str) -> List[Fraction]:
    return [parse_fraction(p) for p in text.split(",")]


def _keyword_args(parts: List[str], what: str) -> dict:
    kw = {}
    for part in parts:
        if "=" not in part:
            raise UsageError(f"{what}: expected key=value, got {part!r}")
        key, _, value = part.partition("=")
        kw[key.strip()] = value.strip()
    return kw


def _sequence_spec(rule: str, kw: dict, what: str) -> SequenceSpec:
    if rule == "geom":
        spec = SequenceSpec.geometric(
            parse_fraction(kw.pop("c", "1")), parse_fraction(kw.pop("r"))
        )
    elif rule == "power":
        spec = SequenceSpec.reciprocal_power(
            c=parse_fraction(kw.pop("c", "1")),
            power=int(kw.pop("power", "2")),
            offset=int(kw.pop("offset", "0")),
        )
    elif rule == "explicit":
        values = [parse_fraction(v) for v in kw.pop("values").split(";")]
        spec = SequenceSpec.explicit(values)
    else:
        raise UsageError(f"{what}: unknown rule {rule!r} (use geom, power, explicit)")
    if kw:
        raise UsageError(f"{what}: unexpected keys {sorted(kw)}")
    return spec


def parse_system(text: str) -> CantorSystem:
    """The ``kind:param,...`` mini-grammar for naming a system on the command line.

    Examples: ``middle-third``, ``middle-alpha:1/3``, ``example2:1/2``,
    ``fluct:3`` or ``fluct:3,start=5``, ``multi:p=3,beta=1/5``,
    ``varfrac:geom,c=1,r=1/4``, ``varfrac:power,offset=2``,
    ``gaps:explicit,values=1/6;1/18``.
    """
    head, _, rest = text.partition(":")
    kind = head.strip().lower()
    try:
        if kind in ("middle-third", "mt"):
            if rest:
                raise UsageError(f"{kind} takes no parameters, got {rest!r}")
            return middle_third_system()
        if kind == "middle-alpha":
            return MiddleAlpha(parse_fraction(rest))
        if kind == "example2":
            return example2_system(parse_fraction(rest))
        if kind == "fluct":
            parts = [p for p in rest.split(",") if p]
            if not parts:
                raise UsageError("fluct needs a branch parameter, e.g. fluct:3")
            kw = _keyword_args(parts[1:], "fluct")
            start = int(kw.pop("start")) if "start" in kw else None
            if kw:
                raise UsageError(f"fluct: unexpected keys {sorted(kw)}")
            return fluctuating_family(int(parts[0]), start_level=start)
        if kind == "multi":
            kw = _keyword_args([p for p in rest.split(",") if p], "multi")
            p = int(kw.pop("p"))
            q = int(kw.pop("q", str(p - 1)))
            if "beta" in kw and "alpha" not in kw:
                beta = parse_fraction(kw.pop("beta"))
                alpha = Fraction(1 - p * beta, q)
            elif "alpha" in kw and "beta" not in kw:
                alpha = parse_fraction(kw.pop("alpha"))
                beta = Fraction(1 - q * alpha, p)
            else:
                alpha = parse_fraction(kw.pop("alpha"))
                beta = parse_fraction(kw.pop("beta"))
            if kw:
                raise UsageError(f"multi: unexpected keys {sorted(kw)}")
            return MultiBranch(p, q, alpha, beta)
        if kind in ("varfrac", "gaps"):
            parts = [p for p in rest.split(",") if p]
            if not parts:
                raise UsageError(f"{kind} needs a rule, e.g. {kind}:geom,r=1/3")
            spec = _sequence_spec(parts[0], _keyword_args(parts[1:], kind), kind)
            return VariableFraction(spec) if kind == "varfrac" else ExplicitGapSchedule(spec)
    except (KeyError, ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad system spec {text!r}: {exc}") from exc
    raise UsageError(f"unknown system kind {kind!r}")


def system_from_config(path: str) -> CantorSystem:
    """JSON alternative to the mini-grammar, for complex sequence specs."""
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    kind = cfg.pop("kind", None)
    if kind is None:
        raise UsageError(f"{path}: config needs a 'kind' key")
    if kind in ("varfrac", "gaps"):
        rule = cfg.pop("rule", None)
        if rule is None:
            raise UsageError(f"{path}: {kind} config needs a 'rule' key")
        kw = {k: str(v) for k, v in cfg.items()}
        spec = _sequence_spec(rule, kw, kind)
        return VariableFraction(spec) if kind == "varfrac" else ExplicitGapSchedule(spec)
    parts = [f"{k}={v}" for k, v in cfg.items()]
    if kind in ("middle-alpha", "example2"):
        lone = cfg.get("alpha") if kind == "middle-alpha" else cfg.get("delta")
        if lone is None:
            raise UsageError(f"{path}: {kind} config needs its parameter")
        return parse_system(f"{kind}:{lone}")
    if kind == "fluct":
        q = cfg.pop("q", None)
        if q is None:
            raise UsageError(f"{path}: fluct config needs 'q'")
        rest = [str(q)] + [f"{k}={v}" for k, v in cfg.items()]
        return parse_system("fluct:" + ",".join(rest))
    return parse_system(f"{kind}:{','.join(parts)}" if parts else kind)


def resolve_system(args) -> CantorSystem:
    if getattr(args, "config", None):
        return system_from_config(args.config)
    if getattr(args, "system", None):
        return parse_system(args.system)
    raise UsageError("name a system with --system KIND:PARAMS or --config FILE")


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------


def jnum(value):
    """Numbers as precision-faithful strings: exact rationals as 'p/q'
    (integers bare), arbitrary-precision scalars as decimal strings."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, BigScalar):
        return value.to_decimal_string()
    if isinstance(value, (list, tuple)):
        return [jnum(v) for v in value]
    if isinstance(value, dict):
        return {k: jnum(v) for k, v in value.items()}
    return value


def decimal_str(value) -> str:
    return as_big(value).to_decimal_string()


def limit_payload(est) -> dict:
    return {
        "value": decimal_str(est.value),
        "error_bound": decimal_str(est.error_bound),
        "terms_used": est.terms_used,
        "converged": est.converged,
    }


def fit_payload(fit) -> dict:
    return {
        "slope": decimal_str(fit.slope),
        "intercept": decimal_str(fit.intercept),
        "residual": decimal_str(fit.residual),
        "points_used": fit.points_used,
    }


def emit(payload: dict, rows: Optional[List[dict]], args) -> None:
    if args.format == "csv":
        if not rows:
            rows = [payload]
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: jnum(v) for k, v in row.items()})
        text = buf.getvalue()
    else:
        text = json.dumps(jnum(payload), sort_keys=True, indent=2) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (payload, csv_rows)
# ---------------------------------------------------------------------------

Handled = Tuple[dict, Optional[List[dict]]]


def cmd_construct(args) -> Handled:
    system = resolve_system(args)
    depth = args.depth if args.depth is not None else 4
    level = refine_to(system, depth)
    payload = level.to_json_dict()
    rows: List[dict] = []
    for i, b in enumerate(level.bridges):
        rows.append({"index": i, "kind": "bridge", "left": b.left, "right": b.right, "depth": depth})
    for i, g in enumerate(level.gaps):
        rows.append({"index": i, "kind": "gap", "left": g.left, "right": g.right, "depth": g.depth})
    return payload, rows


def cmd_stats(args) -> Handled:
    system = resolve_system(args)
    if args.action == "measure":
        depth = args.depth if args.depth is not None else 48
        tol = args.tol if args.tol is not None else Fraction(1, 10**12)
        est = lebesgue_measure_limit(system, tol, max_depth=depth, method=args.method)
        payload = limit_payload(est)
        payload["method"] = args.method
        return payload, None
    if args.action == "box-dim":
        depth = args.depth if args.depth is not None else 20
        min_depth = args.min_depth if args.min_depth is not None else 5
        fit = box_dimension_estimate(system, min_depth, depth)
        payload = fit_payload(fit)
        payload["dimension"] = payload.pop("slope")
        return payload, None
    if args.action == "hausdorff":
        return {"dimension": decimal_str(hausdorff_dimension_closed_form(system))}, None
    if args.action == "thickness":
        depth = args.depth if args.depth is not None else 12
        value = thickness(system, depth)
        return {"thickness": value, "divergent": thickness_is_infinite(system, max(depth, 2))}, None
    if args.action == "fatness":
        fit = fatness_exponent(
            system, args.depths, override_positive_measure=args.override_measure_zero
        )
        payload = fit_payload(fit)
        payload["exponent"] = payload.pop("slope")
        rows = fatness_table(system, args.depths)
        return payload, rows
    if args.action == "levels":
        depth = args.depth if args.depth is not None else 12
        min_depth = args.min_depth if args.min_depth is not None else 0
        rows = level_table(system, min_depth, depth)
        return {"rows": rows}, rows
    raise UsageError(f"unknown stats action {args.action!r}")


def cmd_phi(args) -> Handled:
    if args.action == "eval":
        system = resolve_system(args)
        depth = args.depth if args.depth is not None else 64
        result = phi(system, args.x, max_depth=depth)
        return {
            "value": decimal_str(result.value),
            "value_exact": result.value,
            "exact": result.exact,
            "depth_used": result.depth_used,
        }, None
    if args.action == "digits":
        value = phi_middle_third_digits(args.x, args.digits)
        return {"value": decimal_str(value), "value_exact": value}, None
    if args.action == "table":
        system = resolve_system(args)
        depth = args.depth if args.depth is not None else 48
        table = staircase_table(system, args.samples, depth)
        rows = [
            {"x": x, "phi": decimal_str(v.value), "exact": v.exact} for x, v in table
        ]
        return {"rows": rows}, rows
    if args.action == "increment":
        system = resolve_system(args)
        depth = args.depth if args.depth is not None else 8
        return {"depth": depth, "holds": phi_increment_check(system, depth)}, None
    if args.action == "sweep":
        system = resolve_system(args)
        depth = args.depth if args.depth is not None else 40
        rng = random.Random(args.seed)
        violations = 0
        for _ in range(args.pairs):
            a = Fraction(rng.randrange(1, 2**30), 2**30)
            b = Fraction(rng.randrange(1, 2**30), 2**30)
            if a > b:
                a, b = b, a
            if phi(system, a, depth).value > phi(system, b, depth).value:
                violations += 1
        return {"pairs": args.pairs, "violations": violations, "seed": args.seed}, None
    raise UsageError(f"unknown phi action {args.action!r}")


def cmd_ultra(args) -> Handled:
    if args.action == "word":
        system = resolve_system(args)
        depth = args.depth if args.depth is not None else 8
        word = word_encode(system, args.x, depth)
        return {"digits": str(word), "beta": word.beta, "length": word.length}, None
    if args.action == "metric":
        system = resolve_system(args)
        depth = args.depth if args.depth is not None else 8
        wx = word_encode(system, args.x, depth)
        wy = word_encode(system, args.y, depth)
        return {"distance": natural_ultrametric(wx, wy, args.base)}, None
    if args.action == "invert":
        ctx = InfinitesimalContext(args.x, args.eps, args.lam)
        xt = relative_infinitesimal(ctx)
        return {"xtilde": xt, "xtilde_decimal": decimal_str(xt)}, None
    if args.action == "valuation":
        schedule = [args.scale_base ** (2**k) for k in range(args.scale_count)]

        def xtilde(eps):
            return args.coefficient * as_big(eps) ** (1 + as_big(args.exponent))

        trace = valuation_trace(xtilde, schedule)
        est = valuation(xtilde, schedule, tol=args.tol)
        payload = {
            "value": decimal_str(est.value),
            "error_bound": decimal_str(est.error_bound),
            "scale_schedule": est.scale_schedule,
        }
        rows = [{"scale": eps, "term": decimal_str(t)} for eps, t in trace]
        return payload, rows
    if args.action == "norm":
        depth = args.depth if args.depth is not None else 8
        est = valued_norm_triadic(args.x, depth, args.m)
        return {
            "value": decimal_str(est.value),
            "identity_gap": decimal_str(est.error_bound),
            "scale_schedule": est.scale_schedule,
        }, None
    if args.action == "plain-norm":
        return {"value": scale_norm_infimum(args.n, args.r_max)}, None
    if args.action == "sequence-limit":
        est = sequence_norm_limit(args.eps, args.l, args.n_max, lam=args.lam, tol=args.tol)
        return {
            "estimate": decimal_str(est.value),
            "error_bound": decimal_str(est.error_bound),
            "scale_schedule": est.scale_schedule,
        }, None
    if args.action == "valued-measure":
        system = resolve_system(args)
        depth = args.depth if args.depth is not None else 8
        return {"value": valued_measure_estimate(system, depth), "level": depth}, None
    if args.action == "endpoint":
        return {"k": decimal_str(endpoint_exponent(args.c, args.b, args.n))}, None
    if args.action == "rho":
        system = resolve_system(args)
        est = valuated_exponent_estimate(system, args.depths)
        return {
            "rho": decimal_str(est.rho),
            "residual": decimal_str(est.residual),
            "levels": list(est.levels),
        }, None
    raise UsageError(f"unknown ultra action {args.action!r}")


def cmd_de(args) -> Handled:
    if args.action == "products":
        eta = args.eta
        rows = []
        for n in range(args.steps + 1):
            rows.append(
                {
                    "n": n,
                    "minus": product_minus(eta, n),
                    "plus": product_plus(eta, n),
                }
            )
        payload = {
            "minus": rows[-1]["minus"],
            "plus": rows[-1]["plus"],
            "limit_minus": 1 - eta,
            "limit_plus": 1 + eta,
            "steps": args.steps,
        }
        return payload, rows
    if args.action == "identity":
        rows = []
        for n in range(args.steps + 1):
            lhs, rhs, gap = hopping_identity(args.eta, n)
            rows.append({"n": n, "lhs": lhs, "rhs": rhs, "gap": gap})
        last = rows[-1]
        return {"lhs": last["lhs"], "rhs": last["rhs"], "gap": last["gap"], "steps": args.steps}, rows
    if args.action == "coverage":
        if args.to_delta is not None:
            additive, hopped = coverage_steps_to(args.eta, args.to_delta)
            return {"additive_steps": additive, "hopped_steps": hopped, "delta": args.to_delta}, None
        rows = []
        for n in range(args.steps + 1):
            add, hop = hopping_coverage(args.eta, n)
            rows.append({"n": n, "additive": add, "hopped": hop})
        last = rows[-1]
        return {"additive": last["additive"], "hopped": last["hopped"], "steps": args.steps}, rows
    if args.action == "lcf":
        system = resolve_system(args)
        report = lcf_solution_check(system, args.points, args.scales or ())
        seg_rows = [
            {
                "x_lo": s.x_lo,
                "x_hi": s.x_hi,
                "tau_lo": s.tau_lo,
                "tau_hi": s.tau_hi,
                "plateau": s.plateau,
                "residual": decimal_str(s.exponent_residual),
            }
            for s in report.segments
        ]
        payload = {
            "segments": seg_rows,
            "plateau_count": report.plateau_count,
            "crossing_count": report.crossing_count,
            "flatness": [
                {
                    "epsilon": r.epsilon,
                    "max_abs_slope": decimal_str(r.max_abs_slope),
                    "oracle_slope": decimal_str(r.oracle_slope),
                }
                for r in report.flatness
            ],
        }
        return payload, seg_rows
    raise UsageError(f"unknown de action {args.action!r}")


# --- demo experiments -------------------------------------------------------
# Workers take primitive arguments and return JSON-ready dicts so they can
# cross a process boundary under --jobs.


def _demo_hopping_worker(eta_text: str, steps: int, bits: int) -> dict:
    set_default_precision(bits)
    eta = Fraction(eta_text)
    _lhs, _rhs, gap = hopping_identity(eta, steps)
    collapse = all(
        hopping_identity(eta, n + 1)[2] ** 10 < hopping_identity(eta, n)[2] ** 19
        for n in range(2, steps)
    )
    return {
        "eta": jnum(eta),
        "gap": jnum(gap),
        "gap_decimal": decimal_str(gap),
        "steps": steps,
        "super_geometric": collapse,
    }


def _demo_rho_worker(q: int, depth: int, bits: int) -> dict:
    set_default_precision(bits)
    system = fluctuating_family(q)
    fit = box_dimension_estimate(system, 10, depth)
    est = valuated_exponent_estimate(system, range(1, 61))
    return {
        "q": q,
        "box_dimension": decimal_str(fit.slope),
        "box_residual": decimal_str(fit.residual),
        "rho": decimal_str(est.rho),
        "rho_residual": decimal_str(est.residual),
    }


def _fan_out(worker, arglists, jobs: int) -> List[dict]:
    if jobs > 1 and len(arglists) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, *zip(*arglists)))
    return [worker(*a) for a in arglists]


def cmd_demo(args) -> Handled:
    bits = get_default_precision()
    if args.name == "example1":
        system = VariableFraction(SequenceSpec.reciprocal_power(c=1, power=2, offset=2))
        depth = args.depth if args.depth is not None else 200
        est = lebesgue_measure_limit(system, max_depth=depth, method="fixed-depth")
        payload = limit_payload(est)
        payload["depth"] = depth
        payload["system"] = system.describe()
        return payload, None
    if args.name == "example2":
        system = example2_system(args.delta)
        depth = args.depth if args.depth is not None else 30
        est = lebesgue_measure_limit(system, args.tol or Fraction(1, 10**9), max_depth=depth)
        payload = limit_payload(est)
        payload["target"] = 1 - args.delta
        payload["thickness_divergent"] = thickness_is_infinite(system, 24)
        payload["system"] = system.describe()
        return payload, None
    if args.name == "example3":
        est = sequence_norm_limit(args.eps, args.l, args.n_max, lam=args.lam, tol=args.tol)
        return {
            "estimate": decimal_str(est.value),
            "error_bound": decimal_str(est.error_bound),
            "target": args.l,
            "companion_plain_norm": scale_norm_infimum(10**6),
            "scale_schedule": est.scale_schedule,
        }, None
    if args.name == "growth-of-measure":
        target = example2_system(args.delta)
        est = growth_of_measure_demo(args.alpha, target, n_max=args.n_max, tol=args.tol)
        return {
            "value": decimal_str(est.value),
            "error_bound": decimal_str(est.error_bound),
            "target_measure": 1 - args.delta,
            "scale_schedule": est.scale_schedule,
        }, None
    if args.name == "fatness-example2":
        system = example2_system(args.delta)
        fit = fatness_exponent(system, args.depths)
        payload = fit_payload(fit)
        payload["exponent"] = payload.pop("slope")
        payload["reference"] = decimal_str(1 - log_base(3, 2))
        rows = fatness_table(system, args.depths)
        return payload, rows
    if args.name == "hopping-identity":
        etas = args.eta or [Fraction(1, 10), Fraction(1, 2), Fraction(9, 10)]
        steps = args.steps if args.steps is not None else 10
        arglists = [(str(e), steps, bits) for e in etas]
        results = _fan_out(_demo_hopping_worker, arglists, args.jobs)
        rows = [
            {"eta": r["eta"], "gap": r["gap"], "super_geometric": r["super_geometric"]}
            for r in results
        ]
        return {"results": results}, rows
    if args.name == "fluct-family":
        q = args.q[0] if args.q else 3
        depth = args.depth if args.depth is not None else 24
        system = fluctuating_family(q)
        fit = box_dimension_estimate(system, 10, depth)
        rho = valuated_exponent_estimate(system, range(1, 61))
        deleted = level_profile(system, depth, numeric="big")[-1].cumulative_gap_length
        return {
            "q": q,
            "box_dimension": decimal_str(fit.slope),
            "box_residual": decimal_str(fit.residual),
            "thickness": decimal_str(thickness(system, depth)),
            "rho": decimal_str(rho.rho),
            "rho_residual": decimal_str(rho.residual),
            "cumulative_deleted": decimal_str(deleted),
            "depth": depth,
        }, None
    if args.name == "rho-separation":
        qs = args.q or [3, 9]
        depth = args.depth if args.depth is not None else 24
        arglists = [(q, depth, bits) for q in qs]
        results = _fan_out(_demo_rho_worker, arglists, args.jobs)
        return {"results": results}, results
    raise UsageError(f"unknown demo {args.name!r}")


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--precision-bits",
        type=int,
        default=None,
        help="working precision in bits (default: CANTORLAB_PRECISION_BITS or 256)",
    )
    common.add_argument("--depth", type=int, default=None, help="refinement depth")
    common.add_argument("--tol", type=parse_fraction, default=None, help="limit tolerance")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None, help="write output to a file")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    common.add_argument("--jobs", type=int, default=1, help="parallel experiment fan-out")
    common.add_argument("--system", default=None, help="system spec, e.g. middle-alpha:1/3")
    common.add_argument("--config", default=None, help="JSON file describing the system")

    parser = _Parser(prog="cantorlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="materialise a refinement level")
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser("stats", parents=[common], help="measure, dimension, thickness, fatness")
    p.add_argument("action", choices=("measure", "box-dim", "hausdorff", "thickness", "fatness", "levels"))
    p.add_argument("--method", choices=("aitken", "plain-tail", "fixed-depth"), default="aitken")
    p.add_argument("--min-depth", type=int, default=None)
    p.add_argument("--depths", type=parse_depths, default=list(range(8, 21)))
    p.add_argument("--override-measure-zero", action="store_true")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("phi", parents=[common], help="evaluate or sample the staircase")
    p.add_argument("action", choices=("eval", "digits", "table", "increment", "sweep"))
    p.add_argument("--x", type=parse_fraction, default=Fraction(1, 4))
    p.add_argument("--digits", type=int, default=64)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--pairs", type=int, default=1000)
    p.set_defaults(handler=cmd_phi)

    p = sub.add_parser("ultra", parents=[common], help="words, valuations, valued norms")
    p.add_argument(
        "action",
        choices=(
            "word",
            "metric",
            "invert",
            "valuation",
            "norm",
            "plain-norm",
            "sequence-limit",
            "valued-measure",
            "endpoint",
            "rho",
        ),
    )
    p.add_argument("--x", type=parse_fraction, default=Fraction(1, 4))
    p.add_argument("--y", type=parse_fraction, default=Fraction(3, 4))
    p.add_argument("--base", type=parse_fraction, default=Fraction(3))
    p.add_argument("--eps", type=parse_fraction, default=Fraction(1, 10))
    p.add_argument("--lam", type=parse_fraction, default=Fraction(1))
    p.add_argument("--l", type=parse_fraction, default=Fraction(1, 2))
    p.add_argument("--exponent", type=parse_fraction, default=Fraction(1, 2))
    p.add_argument("--coefficient", type=parse_fraction, default=Fraction(1))
    p.add_argument("--scale-base", type=parse_fraction, default=Fraction(1, 3))
    p.add_argument("--scale-count", type=int, default=9)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--n-max", type=int, default=1024)
    p.add_argument("--r-max", type=int, default=64)
    p.add_argument("--c", type=parse_fraction, default=Fraction(1, 3))
    p.add_argument("--b", type=parse_fraction, default=Fraction(1, 2))
    p.add_argument("--depths", type=parse_depths, default=list(range(1, 61)))
    p.set_defaults(handler=cmd_ultra)

    p = sub.add_parser("de", parents=[common], help="two-scale products and plateau checks")
    p.add_argument("action", choices=("products", "identity", "coverage", "lcf"))
    p.add_argument("--eta", type=parse_fraction, default=Fraction(1, 2))
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--to-delta", type=parse_fraction, default=None)
    p.add_argument("--points", type=parse_fraction_list, default=[Fraction(2, 5), Fraction(9, 20), Fraction(11, 20)])
    p.add_argument("--scales", type=parse_fraction_list, default=None)
    p.set_defaults(handler=cmd_de)

    p = sub.add_parser("demo", parents=[common], help="named end-to-end experiments")
    p.add_argument(
        "name",
        choices=(
            "example1",
            "example2",
            "example3",
            "growth-of-measure",
            "fatness-example2",
            "hopping-identity",
            "fluct-family",
            "rho-separation",
        ),
    )
    p.add_argument("--delta", type=parse_fraction, default=Fraction(1, 2))
    p.add_argument("--alpha", type=parse_fraction, default=Fraction(1, 3))
    p.add_argument("--eps", type=parse_fraction, default=Fraction(3, 10))
    p.add_argument("--l", type=parse_fraction, default=Fraction(2, 5))
    p.add_argument("--lam", type=parse_fraction, default=Fraction(1))
    p.add_argument("--n-max", type=int, default=1024)
    p.add_argument("--eta", type=parse_fraction, action="append", default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--q", type=int, action="append", default=None)
    p.add_argument("--depths", type=parse_depths, default=list(range(8, 21)))
    p.set_defaults(handler=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    previous_bits = get_default_precision()
    if args.precision_bits is not None:
        set_default_precision(args.precision_bits)
    try:
        payload, rows = args.handler(args)
    except UsageError as exc:
        print(f"cantorlab: error: {exc}", file=sys.stderr)
        return 1
    except NonConvergent as exc:
        partial = {}
        est = getattr(exc, "estimate", None)
        if est is not None:
            partial = limit_payload(est)
        emit({"error": str(exc), "partial": partial}, None, args)
        return 3
    except CantorLabError as exc:
        print(f"cantorlab: error: {exc}", file=sys.stderr)
        return 2
    finally:
        set_default_precision(previous_bits)
    emit(payload, rows, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
