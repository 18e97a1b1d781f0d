"""Command-line front end: figure data, diagnostics and CSV output.

Parameter files are flat ``key = value`` text (``#`` comments allowed):

    m = 1
    omegas = 1.0, 1.0
    e = 1
    kappa = 0.01
    sigma = 0.5
    positions = 0 0; 0.01 0
    beta = inf
    Omega0 = 10        # single-oscillator keys used by fig2
    Gamma0 = 1
    OmegaCS = 0.5

Exit codes: 0 ok, 1 numerical-accuracy failure, 2 input error,
3 parameter-regime violation.
"""
import argparse
import configparser
import sys
from pathlib import Path

import numpy as np
import scipy

from .errors import AccuracyError, DomainError, RegimeError

__all__ = ["write_csv", "load_params", "main"]

MODEL_KEYS = ("m", "omegas", "e", "kappa", "sigma", "positions", "beta")
SO_KEYS = ("Omega0", "Gamma0", "OmegaCS")

FIG1_DEFAULTS = {"m": "1", "omegas": "1, 1", "e": "1", "kappa": "0.01", "sigma": "0.5",
                 "positions": "0 0; 0.01 0", "beta": "inf"}
FIG2_DEFAULTS = {"m": "1", "Omega0": "10", "Gamma0": "1", "OmegaCS": "0.5"}


class InputError(ValueError):
    pass


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    return f"{float(x):.12g}"


def write_csv(path, columns, rows, header=()):
    """Comma-separated file with '#' comment lines, one column-name line, 12 digits."""
    from . import __version__

    lines = [f"# mcsdiss {__version__}, numpy {np.__version__}, scipy {scipy.__version__}"]
    lines += [f"# {h}" for h in header]
    lines.append(",".join(columns))
    for r in rows:
        lines.append(",".join(_fmt(x) for x in r))
    Path(path).write_text("\n".join(lines) + "\n")


# parameters -------------------------------------------------------------

def _parse_file(path):
    text = Path(path).read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                   delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string("[params]\n" + text)
    except configparser.Error as exc:
        raise InputError(f"cannot parse {path}: {exc}") from exc
    return dict(cp["params"])


def _num(key, v):
    try:
        return float(v)
    except ValueError:
        raise InputError(f"{key}: not a number: {v!r}") from None


def load_params(raw, kind="model"):
    """ModelParams or SOParams from a dict of strings."""
    from .single_osc import SOParams
    from .spectral import ModelParams

    keys = MODEL_KEYS if kind == "model" else SO_KEYS + ("m", "beta")
    unknown = set(raw) - set(MODEL_KEYS) - set(SO_KEYS)
    if unknown:
        raise InputError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    kw = {}
    for k in keys:
        if k not in raw:
            continue
        v = raw[k]
        if k == "omegas":
            kw[k] = tuple(_num(k, x) for x in v.replace(",", " ").split())
        elif k == "positions":
            try:
                kw[k] = tuple(tuple(float(x) for x in pt.replace(",", " ").split())
                              for pt in v.split(";") if pt.strip())
            except ValueError:
                raise InputError(f"positions: cannot parse {v!r}") from None
        else:
            kw[k] = _num(k, v)
    try:
        return ModelParams(**kw) if kind == "model" else SOParams(**kw)
    except DomainError as exc:
        raise InputError(str(exc)) from exc


def _raw(args, defaults):
    raw = dict(defaults)
    if args.params:
        if not Path(args.params).is_file():
            raise InputError(f"params file not found: {args.params}")
        raw.update(_parse_file(args.params))
    for kv in args.set or ():
        if "=" not in kv:
            raise InputError(f"--set expects KEY=VALUE, got {kv!r}")
        k, v = kv.split("=", 1)
        raw[k.strip()] = v.strip()
    return raw


def _header(raw, args):
    return [f"params: {'; '.join(f'{k}={v}' for k, v in sorted(raw.items()))}",
            f"tol={args.tol}", f"seed={args.seed}"]


# commands ---------------------------------------------------------------

def cmd_fig1(args, out):
    from .kernel import self_energy_time_closed, self_energy_time_grid
    from .noise import thermal_noise_grid, thermal_noise_zero_T_closed

    raw = _raw(args, FIG1_DEFAULTS)
    p = load_params(raw, "model")
    i, j = (0, 1) if p.n > 1 else (0, 0)
    x = np.linspace(0.0, 10.0, 401)
    t = x * np.sqrt(2 * p.sigma)
    sc = self_energy_time_closed(p, i, j, t)
    sq = self_energy_time_grid(p, i, j, t, spectrum="approx", causal=False).values
    nc = thermal_noise_zero_T_closed(p, i, j, t)
    nq = thermal_noise_grid(p, i, j, t, beta=np.inf, spectrum="approx")
    cols, data = ["t_over_sqrt2sigma"], [x]
    for name, c, q in (("sigma", sc, sq), ("noise", nc, nq)):
        for a, b in ((0, 0), (1, 1), (0, 1)):
            cols += [f"{name}{a + 1}{b + 1}_closed", f"{name}{a + 1}{b + 1}_quad"]
            data += [c[:, a, b], q[:, a, b]]
    dev = 0.0
    for c, q in ((sc, sq), (nc, nq)):
        mask = np.abs(q) > 1e-8
        if np.any(mask):
            dev = max(dev, float(np.max(np.abs(c - q)[mask] / np.abs(q[mask]))))
    path = out / "fig1.csv"
    write_csv(path, cols, np.column_stack(data),
              _header(raw, args) + [f"pair=({i},{j})", f"max_rel_dev={dev:.3e}"])
    print(f"wrote {path} (max relative deviation closed vs quadrature {dev:.3e})")
    if dev > args.tol:
        print(f"deviation exceeds tol {args.tol}", file=sys.stderr)
        return 1
    return 0


def cmd_fig2(args, out):
    from .single_osc import autocorr, crosscorr

    raw = _raw(args, FIG2_DEFAULTS)
    s = load_params(raw, "so")
    temps = (0.01, 0.5, 1.0)
    t = np.linspace(0.0, 40.0 / s.Omega0, 401)[1:]
    cols, data = ["t"], [t]
    for f in temps:
        sb = s.replace(beta=1.0 / (f * s.Omega0))
        cols += [f"delta12_T{f:g}", f"delta11_T{f:g}"]
        data += [np.array([crosscorr(sb, tt, tol=args.tol) for tt in t]),
                 np.array([autocorr(sb, tt, tol=args.tol) for tt in t])]
    path = out / "fig2.csv"
    write_csv(path, cols, np.column_stack(data),
              _header(raw, args) + ["temperatures in units of Omega0: " + ", ".join(map(str, temps))])
    print(f"wrote {path}")
    return 0


def cmd_diagnose(args, out):
    from .greens import breit_wigner_reduce, stationarity_check
    from .noise import fdt_check
    from .statics import positivity_check

    raw = _raw(args, FIG1_DEFAULTS)
    p = load_params(raw, "model")
    lines, status = [], 0
    pos = positivity_check(p)
    lines += ["[positivity]", pos.to_text()]
    st = stationarity_check(p)
    lines += ["[stationarity]", st.to_text()]
    if not (pos.passes and st.passes):
        status = 3
    beta = p.beta if np.isfinite(p.beta) else 1.0
    w = np.linspace(abs(p.kappa) * 1.001 + 1e-6, abs(p.kappa) + 4 * p.width, 64)
    dev = max(fdt_check(p, i, j, w, beta) for i in range(p.n) for j in range(p.n))
    lines += ["[fdt]", f"max_deviation = {dev:.3e}", f"passes = {dev <= args.tol}"]
    if dev > args.tol:
        status = status or 1
    try:
        bw = breit_wigner_reduce(p)
        lines += ["[breit_wigner]", f"markov_valid = {bw.markov_valid}",
                  "Omega_sq = " + np.array2string(bw.Omega_sq, precision=10),
                  "Gamma = " + np.array2string(bw.Gamma, precision=10),
                  "Z = " + np.array2string(bw.Z, precision=10)] + [f"note = {n}" for n in bw.notes]
        if not bw.markov_valid:
            status = status or 3
    except RegimeError as exc:
        lines += ["[breit_wigner]", f"error = {exc}"]
        status = status or 3
    text = "\n".join(lines) + "\n"
    (out / "diagnose.txt").write_text(text)
    print(text, end="")
    print("ALL PASS" if status == 0 else "FAILURES REPORTED")
    return status


COMMANDS = {"fig1": cmd_fig1, "fig2": cmd_fig2, "diagnose": cmd_diagnose}


def build_parser():
    ap = argparse.ArgumentParser(prog="mcsdiss", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--params", help="key = value parameter file")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a parameter")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=1e-4)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, out)
    except (InputError, DomainError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except AccuracyError as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return 1
    except RegimeError as exc:
        print(f"parameter regime violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
