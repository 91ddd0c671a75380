"""``diracstep`` command line: parameter sweeps and profile scattering as CSV.

Energies, momenta, potentials and lengths are in units of the rest mass
(``m = 1``) unless ``--absolute`` is given together with ``--mass``.  The
``massless`` subcommand always works in absolute units.

Exit codes: 0 success, 1 usage error, 2 physics or parse error, 3 numerical
failure (including a failed ``--verify`` check).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import BandCase, NumericalError, PhysicsError, classify_band
from .massless import massless_step_scatter
from .overlap import intuitive_estimate, n2_per_length, n3_integrand_array, n3_per_length_with_error
from .step import ScatteringResult, match_oracle, oracle_amplitudes, step_scatter
from .transfer import BarrierSpec, PotentialProfile, profile_scatter, profile_scatter_direct

EXIT_OK, EXIT_USAGE, EXIT_PHYSICS, EXIT_NUMERICAL = 0, 1, 2, 3

STEP_COLUMNS = ["k", "E", "band", "f_re", "f_im", "g_re", "g_im", "R", "T"]
BARRIER_COLUMNS = ["k", "E", "f_re", "f_im", "g_re", "g_im", "R", "T", "error"]
OVERLAP_COLUMNS = ["V0", "n2PerL", "n3PerL", "intuitivePerL", "totalPerL", "n3_error", "error"]
MASSLESS_COLUMNS = ["E", "k", "k_prime", "f_re", "f_im", "g_re", "g_im", "R", "T"]
PROFILE_COLUMNS = ["E", "k", "k_prime", "f_re", "f_im", "g_re", "g_im", "R", "T"]


class UsageError(Exception):
    pass


class ProfileParseError(PhysicsError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        raise UsageError(message)


def fmt(x: float | None) -> str:
    """Round-trippable, locale-free float text; ``None`` becomes an empty field."""
    if x is None:
        return ""
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0.0 into 0


# --- sweep grids ------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    start: float
    end: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 2:
            raise UsageError(f"grid needs at least 2 points, got {self.count}")
        if not self.start < self.end:
            raise UsageError(f"grid start {self.start!r} must be below end {self.end!r}")

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.end, self.count)


def parse_grid(text: str) -> Grid:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like START:END:COUNT, got {text!r}")
    try:
        return Grid(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None


# --- profile files ------------------------------------------------------------


def parse_profile(text: str) -> PotentialProfile:
    """Read ``lead-left V`` / ``segment WIDTH V`` ... / ``lead-right V``; ``#`` starts a comment."""
    entries: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            entries.append((lineno, body.split()))
    if not entries:
        raise ProfileParseError(0, "empty profile")

    def number(lineno: int, tok: str) -> float:
        try:
            x = float(tok)
        except ValueError:
            raise ProfileParseError(lineno, f"not a number: {tok!r}") from None
        if not math.isfinite(x):
            raise ProfileParseError(lineno, f"non-finite value {tok!r}")
        return x

    first_line, first = entries[0]
    if first[0] != "lead-left" or len(first) != 2:
        raise ProfileParseError(first_line, "first entry must be 'lead-left <V>'")
    last_line, last = entries[-1]
    if len(entries) < 2 or last[0] != "lead-right" or len(last) != 2:
        raise ProfileParseError(last_line, "last entry must be 'lead-right <V>'")
    segments = []
    for lineno, toks in entries[1:-1]:
        if toks[0] != "segment" or len(toks) != 3:
            raise ProfileParseError(lineno, f"expected 'segment <width> <V>', got {' '.join(toks)!r}")
        w, v = number(lineno, toks[1]), number(lineno, toks[2])
        if not w > 0:
            raise ProfileParseError(lineno, f"segment width must be positive, got {w!r}")
        segments.append((w, v))
    return PotentialProfile(number(first_line, first[1]), tuple(segments), number(last_line, last[1]))


def write_profile(profile: PotentialProfile) -> str:
    lines = [f"lead-left {profile.left_lead_v!r}"]
    lines += [f"segment {w!r} {v!r}" for w, v in profile.segments]
    lines.append(f"lead-right {profile.right_lead_v!r}")
    return "\n".join(lines) + "\n"


# --- per-point workers (module level so a process pool can pickle them) -------


def _amplitude_fields(res: ScatteringResult) -> list[str]:
    return [fmt(res.f.real), fmt(res.f.imag), fmt(res.g.real), fmt(res.g.imag), fmt(res.R), fmt(res.T)]


def _step_row(args: tuple[float, str, float, float]) -> list[str]:
    x, axis, V0, m = args
    if axis == "k":
        k, E = x, math.hypot(m, x)
    else:
        E = x
        k = math.sqrt((abs(E) - m) * (abs(E) + m)) if abs(E) >= m else None
    band = classify_band(E, V0, m)
    if band is BandCase.GAP_NO_STATES:
        return [fmt(k), fmt(E), band.value, "", "", "", "", "", ""]
    res = step_scatter(E, V0, m)
    return [fmt(k), fmt(E), band.value, *_amplitude_fields(res)]


def _barrier_row(args: tuple[float, float, float, float]) -> list[str]:
    k, V0, a, m = args
    E = math.hypot(m, k)
    try:
        if not k > 0:
            raise PhysicsError("incident wave needs k > 0")
        res = profile_scatter(BarrierSpec(V0, a).profile(), E, m)
    except (PhysicsError, NumericalError) as exc:
        return [fmt(k), fmt(E), "", "", "", "", "", "", f"{type(exc).__name__}: {exc}"]
    return [fmt(k), fmt(E), *_amplitude_fields(res), ""]


def _overlap_row(args: tuple[float, float, float]) -> list[str]:
    V0, m, tol = args
    n2 = n2_per_length(V0, m)
    intuitive = intuitive_estimate(V0, m)
    try:
        n3, err = n3_per_length_with_error(V0, m, tol)
    except NumericalError as exc:
        return [fmt(V0), fmt(n2), "", fmt(intuitive), "", "", f"NumericalError: {exc}"]
    return [fmt(V0), fmt(n2), fmt(n3), fmt(intuitive), fmt(n2 + n3), fmt(err), ""]


def _massless_row(args: tuple[float, float]) -> list[str]:
    E, V0 = args
    res = massless_step_scatter(E, V0)
    return [fmt(E), fmt(res.k_left), fmt(res.k_right), *_amplitude_fields(res)]


def _run_rows(worker: Callable, tasks: Sequence, jobs: int) -> list[list[str]]:
    if jobs <= 1 or len(tasks) < 2:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves input order, so output is identical to the serial run
        return list(pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


# --- verification -------------------------------------------------------------


def _sample_indices(n: int, seed: int) -> list[int]:
    size = max(1, math.ceil(n / 100))
    rng = np.random.default_rng(seed)
    return sorted(int(i) for i in rng.choice(n, size=size, replace=False))


def _parse_amplitudes(row: list[str], offset: int) -> tuple[complex, complex, float, float]:
    v = [float(x) for x in row[offset : offset + 6]]
    return complex(v[0], v[1]), complex(v[2], v[3]), v[4], v[5]


def _check_amplitudes(label: str, got: tuple, ref: tuple[complex, complex], tol: float) -> list[str]:
    f, g, R, T = got
    problems = []
    if abs(f - ref[0]) > tol or abs(g - ref[1]) > tol:
        problems.append(f"{label}: amplitudes differ from oracle by {max(abs(f - ref[0]), abs(g - ref[1])):.3g}")
    if abs(R + T - 1) > tol:
        problems.append(f"{label}: R+T-1 = {R + T - 1:.3g}")
    return problems


def _verify_step(rows, ctx) -> list[str]:
    problems = []
    for i in ctx["indices"]:
        row = rows[i]
        if row[3] == "":
            continue
        E = float(row[1])
        ref = oracle_amplitudes(match_oracle(E, ctx["V0"], ctx["m"]))
        problems += _check_amplitudes(f"row {i}", _parse_amplitudes(row, 3), ref, ctx["vtol"])
    return problems


def _verify_barrier(rows, ctx) -> list[str]:
    problems = []
    profile = BarrierSpec(ctx["V0"], ctx["a"]).profile()
    for i in ctx["indices"]:
        row = rows[i]
        if row[2] == "":
            continue
        ref = profile_scatter_direct(profile, float(row[1]), ctx["m"])
        problems += _check_amplitudes(f"row {i}", _parse_amplitudes(row, 2), (ref.f, ref.g), ctx["vtol"])
    return problems


def _riemann_n3(V0: float, m: float, points: int = 200_000) -> float:
    kmax = math.sqrt(V0 * (V0 - 2 * m)) if V0 > 2 * m else 0.0
    if kmax == 0.0:
        return 0.0
    h = kmax / points
    k = (np.arange(points) + 0.5) * h
    return float(n3_integrand_array(k, V0, m).sum() * h / (2 * math.pi))


def _verify_overlap(rows, ctx) -> list[str]:
    problems = []
    for i in ctx["indices"]:
        row = rows[i]
        if row[2] == "":
            continue
        V0, n3 = float(row[0]), float(row[2])
        ref = _riemann_n3(V0, ctx["m"])
        if abs(n3 - ref) > max(ctx["tol"], 1e-6) * max(abs(ref), 1e-300) and abs(n3 - ref) > 1e-12:
            problems.append(f"row {i}: n3PerL {n3!r} vs midpoint sum {ref!r}")
    return problems


def _verify_massless(rows, ctx) -> list[str]:
    # continuity of the (1, 1) spinor: 1 + f = g and 1 - f = g
    f_ref, g_ref = np.linalg.solve(np.array([[1.0, -1.0], [-1.0, -1.0]]), np.array([-1.0, -1.0]))
    problems = []
    for i in ctx["indices"]:
        problems += _check_amplitudes(f"row {i}", _parse_amplitudes(rows[i], 3), (f_ref, g_ref), ctx["vtol"])
    return problems


# --- commands -------------------------------------------------------------------


def _mass(args) -> float:
    if args.absolute:
        if args.mass is None:
            raise UsageError("--absolute needs --mass")
        if not args.mass > 0:
            raise UsageError(f"--mass must be positive, got {args.mass!r}")
        return args.mass
    if args.mass is not None:
        raise UsageError("--mass is only meaningful with --absolute (inputs are in units of m by default)")
    return 1.0


def _vtol(args) -> float:
    return max(args.tol, 1e-9)


def cmd_step_sweep(args) -> tuple[list[str], list[list[str]], Callable | None, dict]:
    m = _mass(args)
    if args.V0 < 0:
        raise PhysicsError(f"step height must be non-negative, got {args.V0!r}")
    grid = parse_grid(args.grid or "0.01:8:500")
    if args.axis == "k" and grid.start < 0:
        raise UsageError("momentum grid must be non-negative")
    tasks = [(float(x), args.axis, args.V0, m) for x in grid.points()]
    rows = _run_rows(_step_row, tasks, args.jobs)
    return STEP_COLUMNS, rows, _verify_step, {"V0": args.V0, "m": m}


def cmd_barrier_sweep(args):
    m = _mass(args)
    spec = BarrierSpec(args.V0, args.width)
    grid = parse_grid(args.grid or "0.01:8:500")
    tasks = [(float(k), spec.V0, spec.a, m) for k in grid.points()]
    rows = _run_rows(_barrier_row, tasks, args.jobs)
    return BARRIER_COLUMNS, rows, _verify_barrier, {"V0": spec.V0, "a": spec.a, "m": m}


def cmd_overlap_sweep(args):
    m = _mass(args)
    grid = parse_grid(args.grid or "0:10:501")
    if grid.start < 0:
        raise PhysicsError("V0 grid must be non-negative")
    tasks = [(float(v), m, args.tol) for v in grid.points()]
    rows = _run_rows(_overlap_row, tasks, args.jobs)
    return OVERLAP_COLUMNS, rows, _verify_overlap, {"m": m}


def cmd_massless(args):
    grid = parse_grid(args.grid or "-5:5:101")
    tasks = [(float(E), args.V0) for E in grid.points()]
    rows = _run_rows(_massless_row, tasks, args.jobs)
    return MASSLESS_COLUMNS, rows, _verify_massless, {}


def cmd_profile(args):
    m = _mass(args)
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read profile: {exc}") from None
    profile = parse_profile(text)
    res = profile_scatter(profile, args.energy, m, method=args.method)
    rows = [[fmt(args.energy), fmt(res.k_left), fmt(res.k_right), *_amplitude_fields(res)]]

    def verify(rows, ctx):
        ref = profile_scatter_direct(profile, args.energy, m)
        return _check_amplitudes("profile", _parse_amplitudes(rows[0], 3), (ref.f, ref.g), ctx["vtol"])

    return PROFILE_COLUMNS, rows, verify, {}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--grid", help="sweep grid START:END:COUNT")
    common.add_argument("--verify", action="store_true", help="re-check a seeded random 1%% of records against an oracle")
    common.add_argument("--seed", type=int, default=0, help="seed for --verify sampling")
    common.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance; verification uses max(tol, 1e-9)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (output order is unaffected)")
    units = common.add_mutually_exclusive_group()
    units.add_argument("--mass-units", dest="absolute", action="store_false", help="inputs in units of m (default)")
    units.add_argument("--absolute", dest="absolute", action="store_true", help="inputs in absolute units; needs --mass")
    common.add_argument("--mass", type=float, help="rest mass for --absolute")
    common.set_defaults(absolute=False)

    parser = _Parser(prog="diracstep", description="Exact 1-D Dirac scattering off piecewise-constant potentials.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("step-sweep", parents=[common], help="step R and T versus k (or E)")
    p.add_argument("--V0", type=float, required=True)
    p.add_argument("--axis", choices=["k", "E"], default="k", help="sweep variable")
    p.set_defaults(func=cmd_step_sweep)

    p = sub.add_parser("barrier-sweep", parents=[common], help="square-barrier R and T versus k")
    p.add_argument("--V0", type=float, required=True)
    p.add_argument("--width", type=float, required=True, help="barrier width a")
    p.set_defaults(func=cmd_barrier_sweep)

    p = sub.add_parser("overlap-sweep", parents=[common], help="overlap counts per unit length versus V0")
    p.set_defaults(func=cmd_overlap_sweep)

    p = sub.add_parser("massless", parents=[common], help="zero-mass step scattering versus E (absolute units)")
    p.add_argument("--V0", type=float, default=0.0)
    p.set_defaults(func=cmd_massless)

    p = sub.add_parser("profile", parents=[common], help="scatter off a profile file at one energy")
    p.add_argument("file")
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--method", choices=["auto", "transfer", "direct"], default="auto")
    p.set_defaults(func=cmd_profile)
    return parser


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if not args.tol > 0:
            raise UsageError("--tol must be positive")
        columns, rows, verifier, ctx = args.func(args)
        text = render_csv(columns, rows)
        if args.verify and verifier is not None:
            ctx.update(indices=_sample_indices(len(rows), args.seed), tol=args.tol, vtol=_vtol(args))
            problems = verifier(rows, ctx)
            if problems:
                for line in problems:
                    print(f"verify: {line}", file=sys.stderr)
                return EXIT_NUMERICAL
            print(f"verify: {len(ctx['indices'])} record(s) checked", file=sys.stderr)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PhysicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
