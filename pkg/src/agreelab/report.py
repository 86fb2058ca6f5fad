"""Report emission: human-readable tables and line-delimited records.

The ``records`` format is one JSON object per line, a "run" record
followed by one "ck" record per closure report. Floats go through json's
shortest round-trip representation, so parsing the stream back yields a
report equal to the one emitted. The ``table`` format is for reading and
prints values to 12 significant digits.
"""

from __future__ import annotations

import json

from .agreement import CKReport
from .errors import ParseError
from .scenario import RunReport
from .search import FuzzSummary

FORMATS = ("table", "records")


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _run_record(r: RunReport) -> dict:
    return {
        "record": "run",
        "scenario": r.scenario_id,
        "backend": r.backend,
        "sizes": list(r.sizes),
        "event": list(r.event),
        "q_a": list(r.q_a),
        "q_b": list(r.q_b),
        "violations": r.violation_count,
        "singular_ok": r.singular_ok,
        "joint": list(r.joint) if r.joint is not None else None,
    }


def _ck_record(c: CKReport) -> dict:
    return {
        "record": "ck",
        "q_a": c.q_a,
        "q_b": c.q_b,
        "a_star": list(c.a_star),
        "b_star": list(c.b_star),
        "steps": c.steps,
        "ck_holds": c.ck_holds,
        "agrees": c.agrees,
        "mass_a": c.mass_a,
        "mass_b": c.mass_b,
        "witness": list(c.witness) if c.witness is not None else None,
    }


def emit_report(r: RunReport, format: str = "table") -> str:
    """Render a run report; see module docstring for the two formats."""
    if format == "records":
        lines = [json.dumps(_run_record(r))]
        lines.extend(json.dumps(_ck_record(c)) for c in r.reports)
        return "\n".join(lines) + "\n"
    if format != "table":
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
    lines = [
        f"scenario {r.scenario_id} [{r.backend}]  sizes {r.sizes}  "
        f"event K{sorted(r.event)}  duration {r.duration:.3f}s",
        "q_A: " + "  ".join(f"i={i}: {_fmt(v)}" for i, v in enumerate(r.q_a)),
        "q_B: " + "  ".join(f"j={j}: {_fmt(v)}" for j, v in enumerate(r.q_b)),
        f"violations: {r.violation_count}  singular_ok: {r.singular_ok}",
    ]
    header = f"{'q_a':>15} {'q_b':>15} {'A*':>12} {'B*':>12} {'steps':>5} {'ck':>5} {'agree':>5}"
    lines.append(header)
    for c in r.reports:
        lines.append(
            f"{_fmt(c.q_a):>15} {_fmt(c.q_b):>15} "
            f"{','.join(map(str, c.a_star)) or '-':>12} "
            f"{','.join(map(str, c.b_star)) or '-':>12} "
            f"{c.steps:>5} {str(c.ck_holds):>5} {str(c.agrees):>5}"
        )
    if r.joint is not None:
        lines.append("joint (row-major): " + " ".join(_fmt(x) for x in r.joint))
    return "\n".join(lines) + "\n"


def parse_records(text: str) -> RunReport:
    """Rebuild a RunReport from its records stream (duration is not carried)."""
    run = None
    cks = []
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"line {n}: {e.msg}") from None
        kind = obj.get("record")
        if kind == "run":
            run = obj
        elif kind == "ck":
            cks.append(obj)
        else:
            raise ParseError(f"line {n}: unknown record kind {kind!r}")
    if run is None:
        raise ParseError("no run record in stream")
    reports = tuple(
        CKReport(
            q_a=float(c["q_a"]),
            q_b=float(c["q_b"]),
            a_star=tuple(c["a_star"]),
            b_star=tuple(c["b_star"]),
            steps=int(c["steps"]),
            ck_holds=bool(c["ck_holds"]),
            agrees=bool(c["agrees"]),
            mass_a=float(c["mass_a"]),
            mass_b=float(c["mass_b"]),
            witness=tuple(c["witness"]) if c["witness"] is not None else None,
        )
        for c in cks
    )
    return RunReport(
        scenario_id=run["scenario"],
        backend=run["backend"],
        sizes=tuple(run["sizes"]),
        event=tuple(run["event"]),
        q_a=tuple(run["q_a"]),
        q_b=tuple(run["q_b"]),
        reports=reports,
        violation_count=int(run["violations"]),
        singular_ok=bool(run["singular_ok"]),
        joint=tuple(run["joint"]) if run["joint"] is not None else None,
    )


def emit_search_summary(s: FuzzSummary, format: str = "table") -> str:
    if format == "records":
        return (
            json.dumps(
                {
                    "record": "search",
                    "backend": s.backend,
                    "trials": s.trials,
                    "seed": s.seed,
                    "max_dim": s.max_dim,
                    "closures": s.closures_examined,
                    "violations": s.violation_count,
                    "singular_failures": s.singular_failures,
                    "max_steps": s.max_steps,
                    "closure_sizes": [[list(k), v] for k, v in s.closure_sizes],
                }
            )
            + "\n"
        )
    sizes = "  ".join(f"{a}x{b}:{n}" for (a, b), n in s.closure_sizes)
    return (
        f"backend {s.backend}  trials {s.trials}  seed {s.seed}  max_dim {s.max_dim}\n"
        f"closures examined: {s.closures_examined}  max steps: {s.max_steps}\n"
        f"violations: {s.violation_count}  singular failures: {s.singular_failures}\n"
        f"closure sizes (|A*|x|B*|:count): {sizes}\n"
    )
