"""Command-line front end: SNR sweeps, exponent reports, Monte Carlo runs
and self-verification.

dB convention: snr_db = 10*log10(rho) with rho the average SNR of both the
channel and the side-information link. CSV cells carry 9 significant
digits and the column schema is fixed, so golden-file comparisons are
stable; sweep output is bit-identical across runs for the same arguments
and seed.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from . import __version__
from .bounds import informed_ed, partially_informed_ed
from .exponents import EXPONENT_KINDS, empirical_exponent, exponent_formula
from .fading import SystemConfig
from .montecarlo import BOUND_KINDS, mc_ed
from .numerics import DEFAULT_TOL, DomainError, QuadratureError, Tolerances
from .schemes import (
    JDS,
    SCHEME_KINDS,
    SHDA,
    SSCC,
    Uncoded,
    expected_distortion,
    optimize_scheme,
)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

CSV_COLUMNS = [
    "snr_db", "ed_inf", "ed_pi", "ed_uncoded", "ed_sscc", "ed_jds",
    "ed_hda", "ed_shda", "rc_opt", "rs_opt", "rj_opt", "pd_opt", "eta2_opt",
]

_ED_COLUMN = {
    "uncoded": "ed_uncoded",
    "sscc": "ed_sscc",
    "jds": "ed_jds",
    "hda": "ed_hda",
    "shda": "ed_shda",
}


class UsageError(Exception):
    pass


def _fmt(value: float) -> str:
    return format(value, ".9g")


def _parse_snr_range(text: str) -> list[float]:
    """Parse 'lo:hi:step' (dB, inclusive of hi) or a single dB value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"bad --snr-db {text!r}; expected lo:hi:step or a single value")
    if step <= 0.0 or hi < lo:
        raise UsageError(f"empty --snr-db range {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(count)]


def _parse_schemes(text: str) -> tuple[str, ...]:
    if text == "all":
        return SCHEME_KINDS
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    for name in names:
        if name not in SCHEME_KINDS:
            raise UsageError(f"unknown scheme {name!r}; expected one of {SCHEME_KINDS} or 'all'")
    if not names:
        raise UsageError("no scheme selected")
    return names


def _load_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    return values


_TOL_KEYS = ("quad_rel", "quad_abs", "root_tol", "opt_tol", "tail_mass")


class _Options:
    """Flags override config-file values, which override defaults."""

    def __init__(self, args: argparse.Namespace):
        self._args = vars(args)
        self._config = _load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, key: str, default=None, convert=float):
        flag = self._args.get(key)
        if flag is not None:
            return flag
        if key in self._config:
            try:
                return convert(self._config[key])
            except ValueError:
                raise UsageError(f"bad config value for {key}: {self._config[key]!r}")
        return default

    def tolerances(self) -> Tolerances:
        kwargs = {}
        for key in _TOL_KEYS:
            value = self.get(key)
            if value is not None:
                kwargs[key] = value
        return replace(DEFAULT_TOL, **kwargs) if kwargs else DEFAULT_TOL


def _require(opts: _Options, key: str, convert=float):
    value = opts.get(key, convert=convert)
    if value is None:
        raise UsageError(f"missing required option --{key.replace('_', '-')}")
    return value


def _system_config(opts: _Options, snr_db: float) -> SystemConfig:
    lc = _require(opts, "lc")
    ls = _require(opts, "ls")
    if lc <= 0.0 or ls <= 0.0:
        raise UsageError(f"shape parameters must be positive, got lc={lc!r}, ls={ls!r}")
    return SystemConfig(lc=lc, ls=ls, rho=10.0 ** (snr_db / 10.0), tol=opts.tolerances())


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_row(task) -> dict[str, float]:
    snr_db, lc, ls, tol, kinds = task
    cfg = SystemConfig(lc=lc, ls=ls, rho=10.0 ** (snr_db / 10.0), tol=tol)
    row: dict[str, float] = {
        "snr_db": snr_db,
        "ed_inf": informed_ed(cfg),
        "ed_pi": partially_informed_ed(cfg),
    }
    for kind in kinds:
        params, ed = optimize_scheme(kind, cfg)
        row[_ED_COLUMN[kind]] = ed
        if kind == "sscc":
            row["rc_opt"], row["rs_opt"] = params.rc, params.rs
        elif kind == "jds":
            row["rj_opt"] = params.rj
        elif kind == "shda":
            row["pd_opt"], row["eta2_opt"] = params.pd, params.eta ** 2
    return row


def _write_csv(rows: list[dict[str, float]], out_path: str | None) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) if c in row else "" for c in CSV_COLUMNS])
    text = buffer.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render_plot(rows: list[dict[str, float]], path: str, lc: float, ls: float) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    styles = {
        "ed_inf": ("informed bound", "k--"),
        "ed_pi": ("partially informed bound", "k-"),
        "ed_uncoded": ("uncoded", "C0-o"),
        "ed_sscc": ("SSCC", "C1-s"),
        "ed_jds": ("JDS", "C2-^"),
        "ed_hda": ("HDA", "C3-v"),
        "ed_shda": ("S-HDA", "C4-d"),
    }
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    x = [row["snr_db"] for row in rows]
    for column, (label, style) in styles.items():
        if all(column in row for row in rows):
            ax.semilogy(x, [row[column] for row in rows], style, label=label,
                        markersize=4, linewidth=1.2)
    ax.set_xlabel("SNR [dB]")
    ax.set_ylabel("expected distortion")
    ax.set_title(f"ls={ls:g}, lc={lc:g}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_sweep(opts: _Options) -> int:
    snr_db = _require(opts, "snr_db", convert=str)
    points = _parse_snr_range(snr_db)
    kinds = _parse_schemes(opts.get("scheme", "all", convert=str))
    lc = _require(opts, "lc")
    ls = _require(opts, "ls")
    if lc <= 0.0 or ls <= 0.0:
        raise UsageError("shape parameters must be positive")
    tol = opts.tolerances()
    workers = int(opts.get("workers", 1, convert=int))

    tasks = [(db, lc, ls, tol, kinds) for db in points]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tasks))  # ordered regardless of completion
    else:
        rows = [_sweep_row(task) for task in tasks]

    _write_csv(rows, opts.get("out", convert=str))
    plot_path = opts.get("plot", convert=str)
    if plot_path:
        _render_plot(rows, plot_path, lc, ls)
    return EXIT_OK


# ---------------------------------------------------------------------------
# exponent
# ---------------------------------------------------------------------------

def cmd_exponent(opts: _Options) -> int:
    lc = _require(opts, "lc")
    ls = _require(opts, "ls")
    if lc <= 0.0 or ls <= 0.0:
        raise UsageError("shape parameters must be positive")

    print(f"distortion exponents at ls={ls:g}, lc={lc:g}")
    print(f"{'kind':<9}{'value':>12}  {'regime':<18}params")
    lines = []
    for kind in EXPONENT_KINDS:
        report = exponent_formula(kind, ls, lc)
        params = ", ".join(f"{k}*={float(v):.6g}" for k, v in report.optimal_params.items())
        if report.upper_bound is not None:
            params = (params + "; " if params else "") + \
                f"upper bound {float(report.upper_bound):.6g}"
        print(f"{kind:<9}{float(report.value):>12.8g}  {report.regime:<18}{params}")
        lines.append((kind, report))

    out_path = opts.get("out", convert=str)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["kind", "value", "regime", "params", "upper_bound"])
            for kind, report in lines:
                writer.writerow([
                    kind, _fmt(float(report.value)), report.regime,
                    " ".join(f"{k}={float(v):.9g}" for k, v in report.optimal_params.items()),
                    "" if report.upper_bound is None else _fmt(float(report.upper_bound)),
                ])

    from_csv = opts.get("from_csv", convert=str)
    if from_csv:
        _report_empirical(from_csv, float(opts.get("window", 0.4)))
    return EXIT_OK


def _report_empirical(path: str, window: float) -> None:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
    except OSError as exc:
        raise UsageError(f"cannot read sweep CSV {path}: {exc}")
    if not rows:
        raise UsageError(f"sweep CSV {path} holds no data rows")
    snr = [10.0 ** (float(r["snr_db"]) / 10.0) for r in rows]
    print(f"\nempirical tail slopes from {path} (window {window:g}):")
    for column in CSV_COLUMNS[1:8]:
        values = [r.get(column, "") for r in rows]
        if any(v == "" for v in values):
            continue
        slope, residual = empirical_exponent(snr, [float(v) for v in values], window)
        print(f"  {column:<11} slope {slope:8.5f}   max fit deviation {residual:.3g}")


# ---------------------------------------------------------------------------
# mc
# ---------------------------------------------------------------------------

def _explicit_params(kind: str, opts: _Options):
    if kind == "uncoded":
        return Uncoded()
    if kind == "sscc":
        rc, rs = opts.get("rc"), opts.get("rs")
        return SSCC(rc=rc, rs=rs or 0.0) if rc is not None else None
    if kind == "jds":
        rj = opts.get("rj")
        return JDS(rj=rj) if rj is not None else None
    pd = 1.0 if kind == "hda" else opts.get("pd")
    eta2 = opts.get("eta2")
    if eta2 is None or pd is None:
        return None
    return SHDA(pd=pd, eta=math.sqrt(eta2))


def _mc_targets(opts: _Options, cfg: SystemConfig):
    """Resolve the mc/verify target list to (name, target, quadrature value)."""
    requested = opts.get("scheme", "all", convert=str)
    names = BOUND_KINDS + SCHEME_KINDS if requested == "all" else \
        tuple(t.strip() for t in requested.split(","))
    resolved = []
    for name in names:
        if name in BOUND_KINDS:
            reference = informed_ed(cfg) if name == "informed" else partially_informed_ed(cfg)
            resolved.append((name, name, reference))
        elif name in SCHEME_KINDS:
            params = _explicit_params(name, opts)
            if params is None:
                params, reference = optimize_scheme(name, cfg)
            else:
                reference = expected_distortion(params, cfg)
            resolved.append((name, params, reference))
        else:
            raise UsageError(
                f"unknown target {name!r}; expected one of {BOUND_KINDS + SCHEME_KINDS}")
    return resolved


def cmd_mc(opts: _Options) -> int:
    snr_db = _parse_snr_range(str(opts.get("snr_db", "10", convert=str)))
    samples = int(opts.get("samples", 10 ** 6, convert=int))
    seed = int(opts.get("seed", 1234, convert=int))

    print(f"{'snr_db':>7} {'target':<28} {'mc_mean':>13} {'stderr':>10} "
          f"{'quadrature':>13} {'z':>7}")
    for db in snr_db:
        cfg = _system_config(opts, db)
        for name, target, reference in _mc_targets(opts, cfg):
            est = mc_ed(target, cfg, samples, seed)
            z = (est.mean - reference) / est.stderr if est.stderr > 0 else 0.0
            label = name if isinstance(target, str) else repr(target)
            print(f"{db:>7.2f} {label:<28.28} {est.mean:>13.6e} {est.stderr:>10.3e} "
                  f"{reference:>13.6e} {z:>7.2f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(opts: _Options) -> int:
    failures = []

    def report(name: str, ok: bool, detail: str) -> None:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failures.append(name)

    try:
        tol = opts.tolerances()
        report("tolerances", True, f"quad_rel={tol.quad_rel:g}, tail_mass={tol.tail_mass:g}")
    except DomainError as exc:
        report("tolerances", False, str(exc))
        print("verification FAILED: tolerances")
        return EXIT_VERIFY

    snr_db = _parse_snr_range(str(opts.get("snr_db", "10", convert=str)))
    samples = int(opts.get("samples", 10 ** 6, convert=int))
    seed = int(opts.get("seed", 1234, convert=int))

    for db in snr_db:
        cfg = _system_config(opts, db)
        targets = _mc_targets(opts, cfg)
        values = dict((name, reference) for name, _, reference in targets)

        in_range = all(0.0 < v <= 1.0 + 1e-12 for v in values.values())
        report(f"distortion_range@{db:g}dB", in_range,
               ", ".join(f"{k}={v:.4e}" for k, v in values.items()))

        if "informed" in values and "pi" in values:
            ok = values["informed"] <= values["pi"] + 1e-7
            scheme_values = {k: v for k, v in values.items() if k not in BOUND_KINDS}
            ok = ok and all(values["pi"] <= v + 1e-7 for v in scheme_values.values())
            report(f"bound_ordering@{db:g}dB", ok,
                   f"inf={values['informed']:.6e} <= pi={values['pi']:.6e} <= schemes")

        if "sscc" in values and "jds" in values:
            pair_ok = True
            for rc, rs in ((0.5, 0.25), (1.0, 0.5), (2.0, 0.0)):
                ed_s = expected_distortion(SSCC(rc=rc, rs=rs), cfg)
                ed_j = expected_distortion(JDS(rj=rc + rs), cfg)
                pair_ok = pair_ok and ed_s >= ed_j - 1e-9
            report(f"jds_vs_sscc@{db:g}dB", pair_ok, "joint decoding never loses at equal rate")

        mc_ok = True
        worst = 0.0
        for name, target, reference in targets:
            est = mc_ed(target, cfg, samples, seed)
            z = abs(est.mean - reference) / est.stderr if est.stderr > 0 else 0.0
            worst = max(worst, z)
            mc_ok = mc_ok and z <= 5.0
        report(f"mc_agreement@{db:g}dB", mc_ok,
               f"worst |z| = {worst:.2f} over {len(targets)} targets at n={samples}")

        first = mc_ed("informed", cfg, max(1000, samples // 10), seed)
        second = mc_ed("informed", cfg, max(1000, samples // 10), seed)
        report(f"seed_reproducibility@{db:g}dB", first == second,
               f"mean={first.mean:.12e}")

    if failures:
        print(f"verification FAILED: {', '.join(failures)}")
        return EXIT_VERIFY
    print("verification passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--lc", type=float, help="channel gain shape parameter")
    sub.add_argument("--ls", type=float, help="side-information gain shape parameter")
    sub.add_argument("--config", help="key=value config file; flags take precedence")
    sub.add_argument("--seed", type=int, help="root seed for all randomness")
    for key in _TOL_KEYS:
        sub.add_argument(f"--{key.replace('_', '-')}", type=float, dest=key,
                         help=f"override tolerance {key}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fadewz",
        description="Expected distortion of a Gaussian source over a block-fading "
                    "channel with fading receiver side information: bounds, schemes, "
                    "distortion exponents and Monte Carlo cross-checks. "
                    "SNR is given in dB as 10*log10(rho).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("sweep", help="expected distortion over an SNR range, as CSV")
    _add_common(sweep)
    sweep.add_argument("--snr-db", dest="snr_db", help="dB range lo:hi:step (hi inclusive)")
    sweep.add_argument("--scheme", help=f"comma list from {SCHEME_KINDS} or 'all'")
    sweep.add_argument("--out", help="CSV output path (default: stdout)")
    sweep.add_argument("--plot", help="also render the curves to this image file")
    sweep.add_argument("--workers", type=int, help="worker processes for SNR points")

    exponent = subs.add_parser("exponent", help="closed-form distortion exponents")
    _add_common(exponent)
    exponent.add_argument("--out", help="also write the table as CSV")
    exponent.add_argument("--from-csv", dest="from_csv",
                          help="sweep CSV to fit empirical tail slopes from")
    exponent.add_argument("--window", type=float,
                          help="tail fraction of the log-SNR range to fit (default 0.4)")

    mc = subs.add_parser("mc", help="Monte Carlo estimates vs quadrature")
    _add_common(mc)
    mc.add_argument("--snr-db", dest="snr_db", help="dB value or range lo:hi:step")
    mc.add_argument("--scheme", help="targets: scheme/bound names or 'all'")
    mc.add_argument("--samples", type=int, help="number of state draws (default 1e6)")
    for flag in ("rc", "rs", "rj", "pd", "eta2"):
        mc.add_argument(f"--{flag}", type=float, help=f"fixed scheme parameter {flag}")

    verify = subs.add_parser("verify", help="cross-checks and invariants; exit 0 iff all pass")
    _add_common(verify)
    verify.add_argument("--snr-db", dest="snr_db", help="dB value or range to verify at")
    verify.add_argument("--scheme", help="targets to verify (default 'all')")
    verify.add_argument("--samples", type=int, help="Monte Carlo draws per check")
    for flag in ("rc", "rs", "rj", "pd", "eta2"):
        verify.add_argument(f"--{flag}", type=float, help=f"fixed scheme parameter {flag}")

    return parser


_COMMANDS = {
    "sweep": cmd_sweep,
    "exponent": cmd_exponent,
    "mc": cmd_mc,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _Options(args)
        return _COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
