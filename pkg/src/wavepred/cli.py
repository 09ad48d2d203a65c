"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure or missing input,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import analysis
from .basis import make_layout
from .eigen import SpectralSolution, SymmetryError
from .filters import MAX_GENUS, build_filter
from .operators import ModelSystem
from .oracle import coefficient_block, exact_state, project_exact
from .output import csv_text, svg_from_csv, write_atomic
from .predictor import MODES, predict_level, secondary_predict, select_indices, smooth_average

MAX_LEVEL = 8
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class MissingInputError(Exception):
    pass


@dataclass
class RunConfig:
    genus: int = 4
    omega: float = 1.0
    halfwidth: float = 8.0
    M: int = 4
    states: int = 6
    state: int = 0
    mode: str = "additive"
    beta_convention: str = "normalized"
    window: int = 3
    threshold: float = 1e-3
    out: str = "out"
    seed: int = 0

    def validate(self) -> "RunConfig":
        if not 3 <= self.genus <= MAX_GENUS:
            raise UsageError(f"--genus must be in 3..{MAX_GENUS}")
        for name in ("omega", "halfwidth", "states", "window", "threshold"):
            if not getattr(self, name) > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if not 0 <= self.M <= MAX_LEVEL:
            raise UsageError(f"--M must be in 0..{MAX_LEVEL}")
        if not 0 <= self.state < self.states:
            raise UsageError("--state must be below --states")
        if self.mode not in MODES:
            raise UsageError(f"--mode must be one of {', '.join(MODES)}")
        if self.beta_convention not in ("normalized", "verbatim"):
            raise UsageError("--beta-convention must be normalized or verbatim")
        if self.window < 3 or self.window % 2 == 0:
            raise UsageError("--window must be an odd integer >= 3")
        return self

    @property
    def model(self) -> ModelSystem:
        return ModelSystem.harmonic(self.omega)

    @property
    def filters(self):
        return build_filter(self.genus)


def read_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in fields(RunConfig)}
    conv = {"int": int, "float": float, "str": str}
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in types:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = conv[types[key]](val)
        except ValueError:
            raise UsageError(f"{path}:{n}: bad value for {key}") from None
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--genus", type=int)
    common.add_argument("--omega", type=float)
    common.add_argument("--halfwidth", type=float)
    common.add_argument("--M", type=int, dest="M")
    common.add_argument("--states", type=int)
    common.add_argument("--state", type=int)
    common.add_argument("--mode", choices=MODES)
    common.add_argument("--beta-convention", dest="beta_convention", choices=("normalized", "verbatim"))
    common.add_argument("--window", type=int)
    common.add_argument("--threshold", type=float)
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--svg", action="store_true", help="also render SVG from the CSV")

    p = _Parser(prog="wavepred", description="Wavelet eigenproblems and coefficient prediction.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="eigensolve levels 0..M")
    pr = sub.add_parser("predict", parents=[common], help="predict level-M wavelet coefficients")
    pr.add_argument("--secondary", action="store_true")
    pr.add_argument("--from", dest="source", help="solution document written by 'solve'")
    sub.add_parser("table", parents=[common], help="energy table up to level M")
    sc = sub.add_parser("scaling", parents=[common], help="scaling of W, R, lambda, alpha")
    sc.add_argument("--quantity", choices=analysis.QUANTITIES + ("all",), default="all")
    sc.add_argument("--from-level", dest="from_level", type=int, default=2)
    fd = sub.add_parser("figdata", parents=[common], help="figure data as CSV")
    fd.add_argument("--fig", type=int, choices=range(1, 6), required=True)
    return p


def make_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values).validate()


def _emit(cfg: RunConfig, name: str, text: str) -> Path:
    return write_atomic(Path(cfg.out) / name, text)


def _svg(cfg, csv_path, **kw):
    write_atomic(csv_path.with_suffix(".svg"), svg_from_csv(csv_path, **kw))


# --- commands -------------------------------------------------------------------------


def cmd_solve(cfg: RunConfig, args) -> int:
    fb = cfg.filters
    rows = []
    for M in range(cfg.M + 1):
        sol = analysis.solution(cfg.model, fb, M, cfg.halfwidth, cfg.states)
        if np.max(sol.residuals) > 1e-8:
            raise ArithmeticError(f"eigensolve at level {M} did not converge")
        _emit(cfg, f"solution_M{M}.json", json.dumps(sol.to_dict(), sort_keys=True) + "\n")
        rows.append([f"E[{M}]", *sol.eigenvalues])
    header = ["level"] + [f"state{i}" for i in range(cfg.states)]
    _emit(cfg, "eigenvalues.csv", csv_text(header, rows))
    print(" ".join(f"{h:>18}" for h in header))
    for r in rows:
        print(f"{r[0]:>18} " + " ".join(f"{v:18.15f}" for v in r[1:]))
    return EXIT_OK


def _load_solution(cfg: RunConfig, source) -> SpectralSolution:
    if source is None:
        return analysis.solution(cfg.model, cfg.filters, cfg.M, cfg.halfwidth, cfg.states)
    path = Path(source)
    if not path.exists():
        raise MissingInputError(f"no such solution document: {path}")
    sol = SpectralSolution.from_json(path.read_text())
    if sol.hamiltonian is None:
        raise MissingInputError("solution document has no model")
    return sol


def cmd_predict(cfg: RunConfig, args) -> int:
    sol = _load_solution(cfg, getattr(args, "source", None))
    fb = build_filter((sol.layout.support + 1) // 2)
    if cfg.state >= sol.n_states:
        raise UsageError("--state is not in the solution document")
    M, i = sol.level, cfg.state
    rec = predict_level(sol, i, cfg.mode, fb)
    rows = list(rec.rows())
    path = _emit(cfg, f"predict_M{M}_s{i}.csv", csv_text(rows[0], rows[1:]))
    _emit(cfg, f"predict_M{M}_s{i}.json", json.dumps(rec.to_dict(), sort_keys=True) + "\n")
    if args.svg:
        _svg(cfg, path, x="x", ys=["alpha"], title=f"alpha, level {M}")
    print(f"source level {M} state {i} E[{M}] = {rec.energy:.15f}")
    print(f"E_pred[{M + 1}] ({cfg.mode}) = {rec.e_pred:.15f}")
    print(f"selected k (theta={cfg.threshold:g}): {len(select_indices(rec, cfg.threshold))}")
    if args.secondary:
        sec = secondary_predict(rec, sol, cfg.beta_convention, fb)
        avg = smooth_average(sec.coef, cfg.window)
        header = ("k", "x", "W", "R", "lambda", "beta", "beta_avg")
        body = [(*r, a) for r, a in zip(list(sec.rows())[1:], avg)]
        cols = list(header)
        d_exact = None
        if sol.hamiltonian.model.omega is not None:
            d_exact = _exact_block(cfg, fb, sol, i, M + 2)
            body = [(*r, d) for r, d in zip(body, d_exact)]
            cols.append("d_exact")
        path = _emit(cfg, f"secondary_M{M}_s{i}.csv", csv_text(cols, body))
        _emit(cfg, f"secondary_M{M}_s{i}.json", json.dumps(sec.to_dict(), sort_keys=True) + "\n")
        if args.svg:
            _svg(cfg, path, x="x", ys=[c for c in ("beta", "beta_avg", "d_exact") if c in cols])
        print(f"E_pred[{M + 2}] (secondary, {cfg.beta_convention}) = {sec.e_pred:.15f}")
        if d_exact is not None:
            sign = _sign(cfg, fb, sol, i)
            raw = np.sqrt(np.mean((sign * sec.coef - d_exact) ** 2))
            smooth = np.sqrt(np.mean((sign * avg - d_exact) ** 2))
            print(f"RMS(beta - d_exact) = {raw:.6e}")
            print(f"RMS(beta_avg - d_exact) = {smooth:.6e}")
    return EXIT_OK


def _sign(cfg, fb, sol, i) -> float:
    d = project_exact(exact_state(i, sol.hamiltonian.model.omega), sol.layout, fb)
    return 1.0 if float(sol.vectors[:, i] @ d) >= 0 else -1.0


def _exact_block(cfg, fb, sol, i, target):
    lay = make_layout(fb, target, sol.layout.halfwidth)
    psi = exact_state(i, sol.hamiltonian.model.omega)
    return coefficient_block(project_exact(psi, lay, fb), lay, "w", target - 1)[1]


def cmd_table(cfg: RunConfig, args) -> int:
    table = analysis.energy_table(cfg.model, cfg.filters, cfg.M, cfg.states, cfg.mode, cfg.halfwidth)
    text = table.to_csv()
    path = _emit(cfg, "energy_table.csv", text)
    if args.svg:
        _svg(cfg, path, x="state0", ys=["state0"])
    sys.stdout.write(text)
    return EXIT_OK


def cmd_scaling(cfg: RunConfig, args) -> int:
    levels = range(args.from_level, cfg.M + 1)
    names = analysis.QUANTITIES if args.quantity == "all" else (args.quantity,)
    fits = analysis.scaling_series(cfg.model, cfg.filters, levels, cfg.state, cfg.halfwidth, names)
    p = cfg.genus
    reference = {"R": (-1.5, -(p + 0.5)), "lambda": (3.5, 2 + p + 0.5)}
    for name, fit in fits.items():
        rows = list(fit.rows())
        path = _emit(cfg, f"scaling_{name}.csv", csv_text(rows[0], rows[1:]))
        if args.svg:
            _svg(cfg, path, x="M", ys=["aggregate"], logy=True, title=name)
        line = f"{name:>12} slope {fit.slope:+.6f} (residual {fit.residual:.2e})"
        if name in reference:
            line += " | first-moment law {:+.1f}, vanishing-moment law {:+.1f}".format(*reference[name])
        print(line)
    return EXIT_OK


_FIGS = {
    1: ("fig1_W.csv", dict(x="x", ys=["W"], group="M", logy=True)),
    2: ("fig2_R_lambda_alpha.csv", dict(x="x", ys=["R"], group="M", logy=True)),
    3: ("fig3_energy_errors.csv", dict(x="M", ys=["eig_err", "pred_err"], group="state", logy=True)),
    4: ("fig4_error_vs_norm.csv", dict(x="norm2_diff", ys=["energy_err"], group="state", logx=True, logy=True)),
    5: ("fig5_coefficients.csv", dict(x="x", ys=["d_exact", "d_eig", "alpha", "beta", "beta_avg"])),
}


def cmd_figdata(cfg: RunConfig, args) -> int:
    m, fb = cfg.model, cfg.filters
    levels = range(0, cfg.M + 1)
    if args.fig == 1:
        rows = analysis.fig1_rows(m, fb, levels, cfg.state, cfg.halfwidth)
    elif args.fig == 2:
        rows = analysis.fig2_rows(m, fb, levels, cfg.state, cfg.halfwidth)
    elif args.fig == 3:
        rows = analysis.fig3_rows(m, fb, levels, cfg.states, cfg.mode, cfg.halfwidth)
    elif args.fig == 4:
        rows = analysis.fig4_rows(m, fb, range(2, cfg.M + 1), cfg.mode, cfg.halfwidth)
    else:
        cmp = analysis.coefficient_comparison(m, fb, cfg.M, cfg.state, cfg.mode, cfg.beta_convention,
                                              cfg.window, cfg.halfwidth)
        rows = cmp.rows()
        print(f"RMS(beta - d_exact) = {cmp.rms('beta'):.6e}")
        print(f"RMS(beta_avg - d_exact) = {cmp.rms('beta_avg'):.6e}")
    rows = list(rows)
    name, plot = _FIGS[args.fig]
    path = _emit(cfg, name, csv_text(rows[0], rows[1:]))
    if args.svg:
        _svg(cfg, path, **plot)
    print(f"wrote {path} ({len(rows) - 1} rows)")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "predict": cmd_predict, "table": cmd_table,
            "scaling": cmd_scaling, "figdata": cmd_figdata}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](cfg, args)
    except SymmetryError as exc:
        print(f"wavepred: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError) as exc:
        if isinstance(exc, UsageError) or args.command is None:
            parser.print_usage(sys.stderr)
        print(f"wavepred: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MissingInputError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"wavepred: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"wavepred: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
