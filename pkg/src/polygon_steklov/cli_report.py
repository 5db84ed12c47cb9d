"""Command-line front end and report emission.

Exit status: 0 when every certification in the run passes, 2 on a
certification, ledger or gap violation, 3 on a configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Sequence

from flint import arb

from . import interval_core as ic
from .asymptotics_constants import (
    check_ledger,
    constant_closure,
    expansion_value,
    gap_verification,
    monotonicity_margin,
)
from .block_operators import dump_section_csv
from .certification import DEFAULT_DIGITS, DEFAULT_M, SigmaEnclosure, SigmaWorkspace, block_enclosure, sigma_enclosure
from .errors import CertificationError, ConfigError
from .schur_analysis import beta_and_kappa, schur_root, theta_via_moments

COMMANDS = ("enclose", "table", "gaps", "constants", "expand", "verify-monotonicity", "schur-check")
FORMATS = ("json", "csv", "text")
KINDS = ("sigma_row", "gap_row", "constant_row", "expansion_row", "block_row", "schur_row", "verdict")
DISPLAY_PLACES = 18
STORED_PLACES = 60
DPS_ENV = "POLYGON_STEKLOV_DPS"
PLOT_COLUMNS = ["N", "sigma_lo", "sigma_hi", "expansion_center", "band_lo", "band_hi"]


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_from: int
    n_to: int
    M: int = DEFAULT_M
    dps: int = DEFAULT_DIGITS
    fmt: str = "text"
    out: Path | None = None
    per_block: bool = False
    step: int = 1
    certify_upto: int = 40
    plot: Path | None = None
    dump_section: Path | None = None
    residue: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"--command: unknown command {self.command!r}")
        if self.n_from < 3 or self.n_to < self.n_from:
            raise ConfigError(f"--n/--from/--to: need 3 <= from <= to, got {self.n_from}..{self.n_to}")
        if self.M < 1:
            raise ConfigError(f"--m: section half-width must be >= 1, got {self.M}")
        if self.dps < ic.MIN_DIGITS:
            raise ConfigError(f"--dps: precision must be >= {ic.MIN_DIGITS}, got {self.dps}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"--format: expected one of {FORMATS}, got {self.fmt!r}")
        if self.step < 1:
            raise ConfigError(f"--step: must be >= 1, got {self.step}")

    @property
    def n_values(self) -> list[int]:
        return list(range(self.n_from, self.n_to + 1, self.step))


@dataclass
class ReportRecord:
    kind: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown record kind {self.kind!r}")

    def as_dict(self) -> dict:
        return {"kind": self.kind, **self.payload}


# ---- rendering ----------------------------------------------------------------

def _decimal_text(q) -> str:
    return format(Decimal(q.numerator) / Decimal(q.denominator), "f")


def _endpoints(x: arb, prefix: str) -> dict[str, str]:
    """Outward display endpoints plus longer outward endpoints for round-trips."""
    lo, hi = ic.endpoints_decimal(x, DISPLAY_PLACES)
    lo_full, hi_full = ic.endpoints_decimal(x, STORED_PLACES)
    return {f"{prefix}_lo": lo, f"{prefix}_hi": hi, f"{prefix}_lo_full": lo_full, f"{prefix}_hi_full": hi_full}


def parse_interval(record: dict, prefix: str) -> arb:
    """Recover an interval from a rendered record; it contains the in-memory one."""
    return ic.interval(record[f"{prefix}_lo_full"], record[f"{prefix}_hi_full"])


def sigma_record(enc: SigmaEnclosure) -> ReportRecord:
    payload = {"N": enc.n_sides, **_endpoints(enc.interval, "sigma")}
    payload["width"] = ic.render_upper(enc.width, DISPLAY_PLACES)
    payload.update({"argmax_block": enc.argmax_block, "M": enc.half_width, "dps": enc.digits})
    return ReportRecord("sigma_row", payload)


def block_records(enc: SigmaEnclosure) -> list[ReportRecord]:
    out = []
    for b in enc.per_block:
        payload = {"N": enc.n_sides, "residue": b.block.residue,
                   **_endpoints(ic.interval(b.lambda_lo, b.lambda_hi), "lambda"),
                   "e_norm": ic.render_upper(b.tail.e_norm, 12), "c_norm": ic.render_upper(b.tail.c_norm, 12)}
        out.append(ReportRecord("block_row", payload))
    return out


def _render_text(records: Sequence[ReportRecord]) -> str:
    lines = []
    for r in records:
        fields = [f"{k}={v}" for k, v in r.payload.items() if not k.endswith("_full")]
        lines.append(f"{r.kind}: " + " ".join(fields))
    return "\n".join(lines) + ("\n" if lines else "")


def _render_csv(records: Sequence[ReportRecord]) -> str:
    buf = io.StringIO()
    kinds = []
    for r in records:
        if r.kind not in kinds:
            kinds.append(r.kind)
    for kind in kinds:
        rows = [r.payload for r in records if r.kind == kind]
        cols = list(rows[0].keys())
        for row in rows[1:]:
            cols += [k for k in row if k not in cols]
        w = csv.DictWriter(buf, fieldnames=["kind"] + cols, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({"kind": kind, **row})
    return buf.getvalue()


def render(records: Sequence[ReportRecord], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([r.as_dict() for r in records], indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(records)
    return _render_text(records)


def emit_plot_data(rows: Sequence[ReportRecord], path: str | Path) -> Path:
    """Plot-ready CSV with one line per sigma or expansion record."""
    path = Path(path)
    kinds = {r.kind for r in rows}
    if len(kinds) > 1:
        raise ValueError(f"plot rows must share one kind, got {sorted(kinds)}")
    if kinds and not kinds <= {"sigma_row", "expansion_row"}:
        raise ValueError("plot data is emitted for sigma_row or expansion_row records")
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(PLOT_COLUMNS)
            for r in rows:
                p = r.payload
                w.writerow([p["N"], p.get("sigma_lo", ""), p.get("sigma_hi", ""), p.get("center_lo", ""),
                            p.get("band_lo", ""), p.get("band_hi", "")])
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc}") from exc
    return path


# ---- commands -------------------------------------------------------------------

def _enclosures(cfg: RunConfig, ns: Iterable[int]) -> list[SigmaEnclosure]:
    return [sigma_enclosure(n, cfg.M, cfg.dps) for n in ns]


def _sigma_output(cfg: RunConfig, encs: list[SigmaEnclosure]) -> list[ReportRecord]:
    out = []
    for e in encs:
        rec = sigma_record(e)
        if e.n_sides >= 20:
            center, band = expansion_value(e.n_sides)
            rec.payload["center_lo"] = ic.render_lower(center, DISPLAY_PLACES)
            rec.payload.update(dict(zip(("band_lo", "band_hi"), ic.endpoints_decimal(band, DISPLAY_PLACES))))
        out.append(rec)
        if cfg.per_block:
            out.extend(block_records(e))
    return out


def _gap_records(rows) -> list[ReportRecord]:
    return [ReportRecord("gap_row", {"N": r.n_sides, "gap_lo": ic.render_lower(r.gap_lo, DISPLAY_PLACES),
                                     "positive": r.positive}) for r in rows]


def cmd_enclose(cfg: RunConfig) -> tuple[list[ReportRecord], bool]:
    if cfg.dump_section is not None:
        with ic.working_precision(cfg.dps):
            ws = SigmaWorkspace(cfg.n_from, cfg.M)
            dump_section_csv(ws.section(cfg.residue), cfg.dump_section)
    return _sigma_output(cfg, _enclosures(cfg, [cfg.n_from])), True


def cmd_table(cfg: RunConfig) -> tuple[list[ReportRecord], bool]:
    return _sigma_output(cfg, _enclosures(cfg, cfg.n_values)), True


def cmd_gaps(cfg: RunConfig) -> tuple[list[ReportRecord], bool]:
    encs = _enclosures(cfg, range(cfg.n_from, cfg.n_to + 1))
    rows = gap_verification(cfg.n_from, cfg.n_to, encs, strict=False)
    return _gap_records(rows), all(r.positive for r in rows)


def cmd_constants(cfg: RunConfig) -> tuple[list[ReportRecord], bool]:
    with ic.working_precision(max(cfg.dps, 50)):
        consts = constant_closure()
        checks = {c.name: c for c in check_ledger(consts)}
        records = []
        for name, value in list(consts.headline().items()) + sorted(consts.sub.items()):
            lo, hi = ic.endpoints_decimal(value, 12)
            payload = {"name": name, "lo": lo, "hi": hi}
            if name in checks:
                payload.update({"recorded_bound": _decimal_text(checks[name].bound), "passed": checks[name].passed})
            records.append(ReportRecord("constant_row", payload))
        margin = monotonicity_margin(consts.E_sigma)
        records.append(ReportRecord("constant_row", {
            "name": "margin_positive_part", **dict(zip(("lo", "hi"), ic.endpoints_decimal(margin.positive_part, 12)))}))
        records.append(ReportRecord("constant_row", {
            "name": "margin", **dict(zip(("lo", "hi"), ic.endpoints_decimal(margin.margin, 6))),
            "passed": margin.certified_positive}))
    ok = all(c.passed for c in checks.values()) and margin.certified_positive
    return records, ok


def cmd_expand(cfg: RunConfig) -> tuple[list[ReportRecord], bool]:
    if cfg.n_from < 20:
        raise ConfigError("--from: the expansion is defined for N >= 20")
    records, ok = [], True
    for n in cfg.n_values:
        with ic.working_precision(cfg.dps):
            center, band = expansion_value(n)
            payload = {"N": n, **_endpoints(center, "center"), **_endpoints(band, "band")}
            if n <= cfg.certify_upto:
                enc = sigma_enclosure(n, cfg.M, cfg.dps)
                inside = bool(band.contains(enc.interval))
                payload.update({**_endpoints(enc.interval, "sigma"), "inside_band": inside})
                ok = ok and inside
        records.append(ReportRecord("expansion_row", payload))
    return records, ok


def cmd_verify_monotonicity(cfg: RunConfig) -> tuple[list[ReportRecord], bool]:
    encs = _enclosures(cfg, range(3, 21))
    rows = gap_verification(3, 20, encs, strict=False)
    gaps_ok = all(r.positive for r in rows)
    with ic.working_precision(max(cfg.dps, 50)):
        margin = monotonicity_margin()
    margin_ok = margin.certified_positive
    smallest = min(rows, key=lambda r: ic.exact_fraction(r.gap_lo))
    verdict = {
        "verdict": "PASS" if gaps_ok and margin_ok else "FAIL",
        "gaps_positive": gaps_ok,
        "smallest_gap_N": smallest.n_sides,
        "smallest_gap_lo": ic.render_lower(smallest.gap_lo, DISPLAY_PLACES),
        "margin_positive_part": ic.render_lower(margin.positive_part, 6),
        "E_sigma": ic.render_upper(margin.e_sigma, 6),
        "margin_lo": ic.render_lower(margin.margin, 6),
        "margin_positive": margin_ok,
    }
    return _gap_records(rows) + [ReportRecord("verdict", verdict)], gaps_ok and margin_ok


def cmd_schur_check(cfg: RunConfig) -> tuple[list[ReportRecord], bool]:
    records, ok = [], True
    for n in cfg.n_values:
        with ic.working_precision(cfg.dps):
            state = beta_and_kappa(n, cfg.M)
            root = schur_root(state)
            blk = block_enclosure(n, 1, cfg.M)
            lam_cw = ic.interval(blk.lambda_lo, blk.lambda_hi)
            agree = bool(root.lambda_star.overlaps(lam_cw))
            payload = {"N": n, **_endpoints(root.lambda_star, "lambda_schur"), **_endpoints(lam_cw, "lambda_cw"),
                       "agree": agree}
            if n >= 20:
                theta, _ = theta_via_moments(n, cfg.M, state)
                t_ok = bool(theta.overlaps(root.theta))
                payload.update({**_endpoints(theta, "theta_moments"), "theta_agree": t_ok})
                agree = agree and t_ok
        ok = ok and agree
        records.append(ReportRecord("schur_row", payload))
    return records, ok


HANDLERS = {
    "enclose": cmd_enclose,
    "table": cmd_table,
    "gaps": cmd_gaps,
    "constants": cmd_constants,
    "expand": cmd_expand,
    "verify-monotonicity": cmd_verify_monotonicity,
    "schur-check": cmd_schur_check,
}


# ---- argument parsing -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _default_dps() -> int:
    raw = os.environ.get(DPS_ENV)
    if raw is None:
        return DEFAULT_DIGITS
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{DPS_ENV}: not an integer: {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polygon-steklov", description="Certified Steklov eigenvalue enclosures for regular polygons.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--n", type=int, help="single N")
    p.add_argument("--from", dest="n_from", type=int, help="first N of a range")
    p.add_argument("--to", dest="n_to", type=int, help="last N of a range")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--m", dest="M", type=int, default=DEFAULT_M, help="section half-width")
    p.add_argument("--dps", type=int, default=None, help="working precision in decimal digits")
    p.add_argument("--format", dest="fmt", default="text", choices=FORMATS)
    p.add_argument("--out", type=Path)
    p.add_argument("--per-block", action="store_true")
    p.add_argument("--certify-upto", type=int, default=40, help="expand: certify sigma for N up to this value")
    p.add_argument("--plot", type=Path, help="write plot-ready CSV here")
    p.add_argument("--dump-section", type=Path, help="enclose: write the section entries of --residue as CSV")
    p.add_argument("--residue", type=int, default=1)
    return p


_DEFAULT_RANGES = {
    "enclose": (3, 3), "table": (3, 20), "gaps": (3, 20), "constants": (20, 20),
    "expand": (20, 100), "verify-monotonicity": (3, 20), "schur-check": (20, 20),
}


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    lo, hi = _DEFAULT_RANGES[args.command]
    step = args.step
    if args.command == "expand" and args.step == 1 and args.n is None and args.n_from is None:
        step = 10
    if args.n is not None:
        if args.n_from is not None or args.n_to is not None:
            raise ConfigError("--n cannot be combined with --from/--to")
        lo = hi = args.n
    else:
        lo = args.n_from if args.n_from is not None else lo
        hi = args.n_to if args.n_to is not None else max(hi, lo)
    dps = args.dps if args.dps is not None else _default_dps()
    return RunConfig(args.command, lo, hi, args.M, dps, args.fmt, args.out, args.per_block, step,
                     args.certify_upto, args.plot, args.dump_section, args.residue)


def run(cfg: RunConfig) -> tuple[int, list[ReportRecord]]:
    try:
        records, ok = HANDLERS[cfg.command](cfg)
    except ConfigError:
        raise
    except CertificationError as exc:
        return 2, [ReportRecord("verdict", {"verdict": "FAIL", "error": type(exc).__name__, "message": str(exc)})]
    text = render(records, cfg.fmt)
    if cfg.out is not None:
        cfg.out.write_text(text)
    else:
        sys.stdout.write(text)
    if cfg.plot is not None:
        plot_rows = [r for r in records if r.kind in ("sigma_row", "expansion_row")]
        emit_plot_data(plot_rows, cfg.plot)
    return (0 if ok else 2), records


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        status, records = run(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 3
    if status == 2 and records and records[0].kind == "verdict" and "error" in records[0].payload:
        sys.stderr.write(f"certification failed: {records[0].payload['message']}\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
