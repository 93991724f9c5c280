"""Command-line front end: zeros, eig, localize, resonance, mode-eval.

Every subcommand writes one table as CSV (with '#' header lines) or as a
JSON object {config, rows, fits, diagnostics}.  Exit codes: 0 success,
1 usage error, 2 I/O error, 3 numerical failure on every row.
"""
import argparse
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import datetime
import io
import json
import math
import sys

import numpy as np

from . import __version__, diagnostics, elastic2d, elastic3d, specfun
from .errors import ElasticTEError, ParameterError
from .params import LameParameters

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    lam: float = 1.0
    mu: float = 1.0
    rho: float = 1.0
    rho_tilde: float = 20.0
    dimension: int = 2
    mode_kind: str = "bi"
    m_list: list = field(default_factory=lambda: [4, 8, 13, 17, 22, 27, 34, 42])
    s0: int = 1
    gamma1: float = 0.3
    gamma2: float = 0.8
    n_deg: int = 1
    tau: float = 2.0 / 3.0
    theta1: float = 0.0
    theta2: float = math.pi / 3.0
    normalization: str = "v_unit"
    measure: str = "literal"
    tau_list: list = field(default_factory=lambda: [0.5])
    mu_list: list = field(default_factory=list)
    mu_sweep_m: int = 11
    grid: str = "100x256"
    output_path: str = None
    output_format: str = "csv"

    def validate(self):
        if self.dimension not in (2, 3):
            raise UsageError("dimension must be 2 or 3")
        if self.mode_kind not in ("mono", "bi"):
            raise UsageError("mode_kind must be mono or bi")
        if not self.m_list:
            raise UsageError("m_list must be nonempty")
        if any(b <= a for a, b in zip(self.m_list, self.m_list[1:])):
            raise UsageError("m_list must be strictly increasing")
        if self.normalization not in ("v_unit", "u_unit"):
            raise UsageError("normalization must be v_unit or u_unit")
        if self.measure not in ("literal", "area"):
            raise UsageError("measure must be literal or area")
        if self.output_format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        try:
            self.material()
            self.region()
        except ParameterError as exc:
            raise UsageError(str(exc)) from exc

    def material(self, **overrides):
        d = dict(lam=self.lam, mu=self.mu, rho=self.rho, rho_tilde=self.rho_tilde, dim=self.dimension)
        d.update(overrides)
        return LameParameters(**d)

    def region(self):
        return diagnostics.SectorRegion(self.tau, self.theta1, self.theta2)

    def to_dict(self):
        d = asdict(self)
        d.pop("output_path")
        d.pop("output_format")
        return d

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


# -- parsing helpers ------------------------------------------------------------


def parse_int_range(text):
    """'a..b' (inclusive), 'a' or a comma list of those."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"malformed range {text!r}") from None
    return out


def parse_float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed number list {text!r}") from None


def parse_grid(text):
    try:
        nr, nt = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"malformed grid {text!r}; expected NRxNTHETA") from None
    if nr < 1 or nt < 1:
        raise UsageError("grid sizes must be positive")
    return nr, nt


def _pmap(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _guard(fn):
    """Run fn and return (value, status)."""
    try:
        return fn(), "ok"
    except ElasticTEError as exc:
        return None, f"{type(exc).__name__}: {exc}"


# -- commands -------------------------------------------------------------------


def cmd_zeros(m_range, s_range):
    rows = []
    for m in m_range:
        for s in s_range:
            j = specfun.bessel_zero(m, s, certify=False)
            jp = specfun.bessel_prime_zero(m, s)
            lo, hi = specfun.zero_bound_window(m, s)
            rows.append(
                dict(m=m, s=s, j=j, j_prime=jp, bound_lo=lo, bound_hi=hi, bound_pass=bool(lo < j < hi))
            )
    return rows


def _bracket(cfg, m, params):
    if cfg.dimension == 2:
        if cfg.mode_kind == "bi":
            return elastic2d.bracket_bi(m, cfg.s0, params)
        return elastic2d.bracket_mono(m, cfg.gamma1, cfg.gamma2, params)
    if cfg.mode_kind == "bi":
        return elastic3d.bracket_bi_3d(m, cfg.s0, params)
    return elastic3d.bracket_mono_3d(m, cfg.gamma1, cfg.gamma2, params)


def _eig_row(cfg, m, params):
    br = _bracket(cfg, m, params)
    row = dict(m=m, lo=br.lo, hi=br.hi)
    if cfg.dimension == 2:
        omega = elastic2d.find_eigenvalue(br, m, params)
        mat, _, _ = elastic2d.equilibrate(elastic2d.boundary_matrix(m, omega, params))
        det_res = abs(np.linalg.det(mat)) / np.prod(np.linalg.norm(mat, axis=1))
        mode = elastic2d.make_mode(m, omega, params)
        residual = elastic2d.boundary_residual(mode)
        sv = elastic2d.singular_value_ratio(m, omega, params)
    else:
        which = "f_tilde" if cfg.mode_kind == "bi" else "spheroidal"
        omega = elastic3d.find_eigenvalue_3d(br, m, params, which)
        angle = elastic3d.generic_angle(m, cfg.n_deg)
        mat, _, _ = elastic2d.equilibrate(elastic3d.assemble_A(m, cfg.n_deg, omega, params, *angle))
        det_res = abs(np.linalg.det(mat)) / np.prod(np.linalg.norm(mat, axis=1))
        sv_all = np.linalg.svd(mat, compute_uv=False)
        sv = sv_all[-1] / sv_all[0]
        mode = elastic3d.make_mode_3d(m, cfg.n_deg, omega, params)
        residual = max(
            elastic3d.nullspace_residual(
                elastic3d.assemble_A(m, cfg.n_deg, omega, params, *ang), np.array(mode.coeffs)
            )
            for ang in elastic3d.SECONDARY_ANGLES
        )
    row.update(omega=omega, det_residual=det_res, sv_ratio=sv, boundary_residual=residual)
    return row, mode


def cmd_eig(cfg: RunConfig, threads=1):
    params = cfg.material()

    def one(m):
        res, status = _guard(lambda: _eig_row(cfg, m, params)[0])
        return res if res else dict(m=m, status=status)

    rows = _pmap(one, cfg.m_list, threads)
    for r in rows:
        r.setdefault("status", "ok")
    return rows


SIDES_2D = ("u", "v", "up", "us", "vp", "vs")


def cmd_localize(cfg: RunConfig, tau_list, threads=1):
    params = cfg.material()

    def one(m):
        def work():
            _, mode = _eig_row(cfg, m, params)
            out = []
            for tau in tau_list:
                if cfg.dimension == 2:
                    for side in SIDES_2D:
                        ratio = diagnostics.localization_ratio(mode, side, tau)
                        out.append(dict(m=m, omega=mode.omega, tau=tau, side=side, ratio=ratio, status="ok"))
                else:
                    for side in ("u", "v"):
                        ratio = elastic3d.localization_ratio_3d(mode, side, tau)
                        out.append(dict(m=m, omega=mode.omega, tau=tau, side=side, ratio=ratio, status="ok"))
            return out

        res, status = _guard(work)
        return res if res else [dict(m=m, status=status)]

    return [row for block in _pmap(one, cfg.m_list, threads) for row in block]


def _resonance_row(cfg, m, params, block):
    region = cfg.region()
    mode = elastic2d.compute_mode(m, params, cfg.mode_kind, cfg.s0, (cfg.gamma1, cfg.gamma2))
    mode = diagnostics.normalize(mode, cfg.normalization)
    row = dict(block=block, m=m, mu=params.mu, omega=mode.omega)
    for measure in ("literal", "area"):
        row[f"E2u_{measure}"] = diagnostics.sector_energy(mode, "u", region, measure)
        row[f"E2v_{measure}"] = diagnostics.sector_energy(mode, "v", region, measure)
    for side in ("u", "v"):
        sq = diagnostics.grad_sup(mode, side, region, squared=True)
        row[f"grad{side}_sup_sq"] = sq
        row[f"grad{side}_sup"] = math.sqrt(sq)
    row["status"] = "ok"
    return row


def _fit_dict(name, xs_key, ys_key, rows):
    pts = [(r[xs_key], r[ys_key]) for r in rows if r.get("status") == "ok"]
    if len(pts) < 3:
        return None
    fit = diagnostics.growth_order_fit(pts)
    return dict(name=name, x=xs_key, y=ys_key, **asdict(fit))


def cmd_resonance(cfg: RunConfig, threads=1):
    """Energy and sup-norm table over m_list, and over mu_list at fixed m."""
    if cfg.dimension != 2:
        raise UsageError("resonance is available for dimension 2 only")
    base = cfg.material()
    jobs = [("m_sweep", m, base) for m in cfg.m_list]
    jobs += [("mu_sweep", cfg.mu_sweep_m, cfg.material(mu=mu)) for mu in cfg.mu_list]

    def one(job):
        block, m, params = job
        res, status = _guard(lambda: _resonance_row(cfg, m, params, block))
        return res if res else dict(block=block, m=m, mu=params.mu, status=status)

    rows = _pmap(one, jobs, threads)
    m_rows = [r for r in rows if r["block"] == "m_sweep"]
    mu_rows = [r for r in rows if r["block"] == "mu_sweep"]
    ms = cfg.measure
    fits = [
        _fit_dict("grad_u_sup_sq_vs_m", "m", "gradu_sup_sq", m_rows),
        _fit_dict("grad_v_sup_sq_vs_m", "m", "gradv_sup_sq", m_rows),
        _fit_dict("E2u_vs_m", "m", f"E2u_{ms}", m_rows),
        _fit_dict("E2v_vs_m", "m", f"E2v_{ms}", m_rows),
        _fit_dict("E2u_vs_mu", "mu", f"E2u_{ms}", mu_rows),
        _fit_dict("E2v_vs_mu", "mu", f"E2v_{ms}", mu_rows),
    ]
    return rows, [f for f in fits if f]


def cmd_mode_eval(cfg: RunConfig, m, grid_spec):
    if cfg.dimension != 2:
        raise UsageError("mode-eval is available for dimension 2 only")
    nr, nt = parse_grid(grid_spec)
    params = cfg.material()
    mode = elastic2d.compute_mode(m, params, cfg.mode_kind, cfg.s0, (cfg.gamma1, cfg.gamma2))
    mode = diagnostics.normalize(mode, cfg.normalization)
    r = np.linspace(0.0, 1.0, nr)
    t = np.linspace(0.0, 2 * math.pi, nt, endpoint=False)
    rr, tt = np.meshgrid(r, t, indexing="ij")
    cols = {"r": rr.ravel(), "theta": tt.ravel()}
    for side in ("u", "v"):
        for parts, suffix in (("ps", ""), ("p", "p"), ("s", "s")):
            field_ = elastic2d.eval_mode(mode, side, rr, tt, parts)
            cols[f"abs_{side}{suffix}"] = np.linalg.norm(field_, axis=-1).ravel()
    order = ["r", "theta", "abs_u", "abs_v", "abs_up", "abs_us", "abs_vp", "abs_vs"]
    rows = [dict(zip(order, vals)) for vals in zip(*(cols[k] for k in order))]
    return rows, dict(m=m, omega=mode.omega)


# -- output ---------------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return "" if value is None else str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(format(float(value), ".12g"))
        return v if math.isfinite(v) else str(v)
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return value


def render(command, config, rows, fits=(), diagnostics_=None, fmt="csv", reproducible=False):
    header = dict(tool="elastic-te", version=__version__, command=command)
    if not reproducible:
        header["generated"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    if fmt == "json":
        doc = dict(
            config=_json_value(config),
            rows=[_json_value(r) for r in rows],
            fits=[_json_value(f) for f in fits],
            diagnostics=_json_value(dict(header, **(diagnostics_ or {}))),
        )
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {value}\n")
    buf.write("# config: " + json.dumps(_json_value(config), sort_keys=True) + "\n")
    for key, value in (diagnostics_ or {}).items():
        buf.write(f"# {key}: {_fmt(value)}\n")
    for fit in fits:
        buf.write("# fit: " + json.dumps(_json_value(fit)) + "\n")
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    writer = csv.writer(buf, lineterminator="\n")
    if columns:
        writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


# -- argument parsing -----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(suppress):
    p = argparse.ArgumentParser(add_help=False)
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON run configuration")
    p.add_argument("--out", default=d, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=d)
    p.add_argument("--measure", choices=("literal", "area"), default=d)
    p.add_argument("--norm", choices=("v", "u"), default=d)
    p.add_argument("--reproducible", action="store_true", default=argparse.SUPPRESS if suppress else False)
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1)
    return p


def _run_flags():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--lam", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--rho-tilde", type=float)
    p.add_argument("--dimension", type=int, choices=(2, 3))
    p.add_argument("--kind", choices=("mono", "bi"))
    p.add_argument("--m-list", help="orders, e.g. 4,8,13 or 20..40")
    p.add_argument("--s0", type=int)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--gamma2", type=float)
    p.add_argument("--n-deg", type=int)
    p.add_argument("--tau", type=float, help="inner radius of the energy sector")
    p.add_argument("--theta1", type=float)
    p.add_argument("--theta2", type=float)
    return p


def build_parser():
    parser = _Parser(prog="elastic-te", description=__doc__.splitlines()[0], parents=[_global_flags(False)])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    gflags = _global_flags(True)
    rflags = _run_flags()

    z = sub.add_parser("zeros", parents=[gflags], help="Bessel zeros with certified windows")
    z.add_argument("--m-range", default="0..5")
    z.add_argument("--s-range", default="1..3")

    sub.add_parser("eig", parents=[gflags, rflags], help="eigenvalues per order m")

    loc = sub.add_parser("localize", parents=[gflags, rflags], help="localization ratios")
    loc.add_argument("--tau-list", help="comma-separated radii")

    res = sub.add_parser("resonance", parents=[gflags, rflags], help="sector energies and sup-norms")
    res.add_argument("--mu-list", help="comma-separated shear moduli for the mu sweep")
    res.add_argument("--mu-sweep-m", type=int)

    me = sub.add_parser("mode-eval", parents=[gflags, rflags], help="field magnitudes on a polar grid")
    me.add_argument("--m", type=int, required=True)
    me.add_argument("--grid", help="NRxNTHETA, e.g. 100x256")
    return parser


_FLAG_FIELDS = {
    "lam": "lam",
    "mu": "mu",
    "rho": "rho",
    "rho_tilde": "rho_tilde",
    "dimension": "dimension",
    "kind": "mode_kind",
    "s0": "s0",
    "gamma1": "gamma1",
    "gamma2": "gamma2",
    "n_deg": "n_deg",
    "tau": "tau",
    "theta1": "theta1",
    "theta2": "theta2",
    "measure": "measure",
    "format": "output_format",
    "out": "output_path",
    "mu_sweep_m": "mu_sweep_m",
    "grid": "grid",
}


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    data = dict(data)
    for nested in ("material", "sigma_region"):
        data.update(data.pop(nested, {}) or {})
    return RunConfig.from_dict(data)


def resolve_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "norm", None):
        cfg.normalization = f"{args.norm}_unit"
    if getattr(args, "m_list", None):
        cfg.m_list = parse_int_range(args.m_list)
    if getattr(args, "tau_list", None):
        cfg.tau_list = parse_float_list(args.tau_list)
    if getattr(args, "mu_list", None):
        cfg.mu_list = parse_float_list(args.mu_list)
    cfg.validate()
    return cfg


def run(argv=None, stdout=None):
    """Entry point returning the exit code."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "zeros":
            m_range, s_range = parse_int_range(args.m_range), parse_int_range(args.s_range)
            if any(m < 0 for m in m_range) or any(s < 1 for s in s_range):
                raise UsageError("orders must be >= 0 and indices >= 1")
            fmt = args.format or "csv"
            config = dict(m_range=m_range, s_range=s_range)
            rows, fits, diag = cmd_zeros(m_range, s_range), [], None
            out_path = args.out
        else:
            cfg = resolve_config(args)
            fmt, out_path, config = cfg.output_format, cfg.output_path, cfg.to_dict()
            fits, diag = [], None
            if args.command == "eig":
                rows = cmd_eig(cfg, args.threads)
            elif args.command == "localize":
                rows = cmd_localize(cfg, cfg.tau_list, args.threads)
            elif args.command == "resonance":
                rows, fits = cmd_resonance(cfg, args.threads)
            else:
                rows, diag = cmd_mode_eval(cfg, args.m, cfg.grid)
                config["m"] = args.m
    except UsageError as exc:
        print(f"elastic-te: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"elastic-te: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ElasticTEError as exc:
        print(f"elastic-te: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    text = render(args.command, config, rows, fits, diag, fmt, args.reproducible)
    try:
        if out_path:
            with open(out_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except OSError as exc:
        print(f"elastic-te: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if rows and all(r.get("status", "ok") != "ok" for r in rows):
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
