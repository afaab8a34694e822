"""Command-line interface.

Exit codes: 0 success, 1 a reproduced assertion failed, 2 usage or input
error, 3 numerical failure. Errors are reported on stderr as
``{"error": ..., "context": ...}``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis as an
from . import circuits as cc
from . import classical as cl
from . import inverses as inv
from . import io
from . import matrep as mr
from . import noisemodels as nm
from . import protocols as pr
from . import tolerances as tol
from .errors import NumericalError, QemtkError
from .reproduce import EXAMPLES, reproduce

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def default_seed() -> int:
    raw = os.environ.get("QEMTK_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"QEMTK_SEED must be an integer, got {raw!r}") from None


def _emit(obj, out: str | None) -> None:
    text = obj if isinstance(obj, str) else io.dumps(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _verdict(ch: mr.ChannelRep, cls: str | None = None) -> dict:
    v = mr.check_properties(ch)
    out = {"class": cls, "is_cp": v.is_cp, "is_tp": v.is_tp, "is_hp": v.is_hp}
    if ch.is_square:
        ev = np.linalg.eigvals(ch.natural)
        out["eigenvalues"] = [[float(z.real), float(z.imag)] for z in ev]
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_convert(a) -> int:
    ch = io.channel_from_json(a.channel)
    _emit(io.channel_to_json(ch, a.to), a.out)
    return EXIT_OK


def cmd_check(a) -> int:
    ch = io.channel_from_json(a.channel)
    v = mr.check_properties(ch, tol_cp=a.tol_cp, tol_tp=a.tol_tp, tol_herm=a.tol_herm)
    out = v.as_dict()
    out["tolerances"] = {"tol_cp": a.tol_cp, "tol_tp": a.tol_tp, "tol_herm": a.tol_herm}
    if ch.is_square:
        out["invertibility"] = inv.classify(ch, tol_zero=a.tol_zero).kind
    _emit(out, a.out)
    return EXIT_OK


def cmd_invert(a) -> int:
    ch = io.channel_from_json(a.channel)
    if a.kind == "exact":
        res = inv.exact_inverse(ch, tol_zero=a.tol_zero)
    elif a.kind == "drazin":
        res = inv.drazin_inverse(ch, backend=a.backend, cross_check=not a.no_cross_check, tol_zero=a.tol_zero)
    else:
        res = inv.moore_penrose(ch, tol_zero=a.tol_zero)
    cls = inv.classify(ch, tol_zero=a.tol_zero).kind if ch.is_square else None
    _emit({"channel": io.channel_to_json(res, "natural"), "verdict": _verdict(res, cls)}, a.out)
    return EXIT_OK


def cmd_noise(a) -> int:
    p = a.params or []
    if a.family == "pauli":
        if len(p) != 3:
            raise UsageError("pauli needs --params p1,p2,p3")
        ch = nm.pauli_channel(*p)
    elif a.family in ("depolarizing", "phasedamping", "amplitudedamping"):
        if len(p) != 1:
            raise UsageError(f"{a.family} needs one parameter")
        make = {"depolarizing": nm.depolarizing, "phasedamping": nm.phase_damping,
                "amplitudedamping": nm.amplitude_damping}[a.family]
        ch = make(p[0])
    else:
        if not a.name:
            raise UsageError(f"fixture needs --name, one of {list(nm.FIXTURE_NAMES)}")
        ch = nm.fixture(a.name)
    _emit(io.channel_to_json(ch, a.rep or ch.rep), a.out)
    return EXIT_OK


def cmd_simulate(a) -> int:
    c = io.circuit_from_json(a.circuit)
    flag = None
    if a.mode == "ideal":
        rho = cc.ideal_output(c)
    elif a.mode == "noisy":
        rho = cc.noisy_output(c)
    else:
        if a.mode == "physical":
            res = cc.physical_inverse_output(c)
        elif a.mode == "numerical":
            res = cc.em_output(c, drazin_fallback=a.drazin_fallback)
        else:
            if not a.recovery:
                raise UsageError("effective mode needs --recovery channel.json")
            res = cc.effective_recovery_output(c, io.channel_from_json(a.recovery))
        rho, flag = res.matrix, {"valid": res.valid, "min_eigenvalue": res.min_eigenvalue}
    out = io.state_to_json(rho)
    if flag is not None:
        out.update(flag)
    _emit(out, a.out)
    return EXIT_OK


def cmd_analyze(a) -> int:
    if a.what == "bounds":
        if not a.circuit:
            raise UsageError("analyze bounds needs --circuit")
        c = io.circuit_from_json(a.circuit)
        obs = io.observables_from_json(a.observables) if a.observables else []
        _emit(an.first_order_report(c, obs).as_dict(), a.out)
        return EXIT_OK
    res = an.mismatch_experiment((a.p1, a.p2, a.p3), a.states, a.seed)
    summary = {
        "lambda_max": res.lambda_max,
        "verdict": res.verdict,
        "recovered_eigenvalues": None if res.recovered_eigenvalues is None
        else [[float(z.real), float(z.imag)] for z in res.recovered_eigenvalues],
    }
    if a.out:
        Path(a.out).write_text(res.to_csv())
        sys.stdout.write(io.dumps(summary))
    else:
        sys.stdout.write(res.to_csv() if res.rows else io.dumps(summary))
    return EXIT_OK


def cmd_protocol(a) -> int:
    if a.kind == "richardson":
        if not a.scales or not a.values:
            raise UsageError("richardson needs --scales and --values")
        value, w = pr.richardson_extrapolate(a.scales, a.values, a.fit)
        out = {"value": value, "weights": w, "fit": a.fit}
    elif a.kind == "quasiprob":
        if not a.target or not a.basis:
            raise UsageError("quasiprob needs --target and --basis")
        dec = pr.quasiprob_decompose(io.channel_from_json(a.target), [io.channel_from_json(b) for b in a.basis])
        out = {"coefficients": dec.coefficients, "cost": dec.cost, "residual": dec.residual}
    elif a.kind == "readout":
        if a.matrix is None or a.dist is None:
            raise UsageError("readout needs --matrix and --dist")
        T = np.real(io.parse_matrix(json.loads(Path(a.matrix).read_text()), "readout matrix"))
        r = pr.readout_mitigate(T, a.dist, project=a.project)
        out = {"distribution": r.distribution, "has_negative": r.has_negative, "projected": r.projected}
    else:
        if not a.state:
            raise UsageError("vd needs --state")
        rho = io.state_from_json(a.state)
        vd = pr.virtual_distill(rho, a.m)
        out = io.state_to_json(vd)
        out["purity"] = pr.purity(vd)
    _emit(out, a.out)
    return EXIT_OK


def cmd_classical(a) -> int:
    if a.kind == "bsc":
        out = {"matrix": cl.bsc(a.p)}
    elif a.kind == "repetition":
        r = cl.repetition_error_rate(a.p, a.trials, a.seed)
        out = r._asdict()
    else:
        if a.observed is None:
            raise UsageError("invert needs --observed")
        r = cl.invert_distribution(cl.bsc(a.p), a.observed)
        out = {"distribution": r.distribution, "has_negative": r.has_negative}
    _emit(out, a.out)
    return EXIT_OK


def cmd_reproduce(a) -> int:
    kw = {"seed": a.seed}
    if a.p is not None:
        kw["p"] = a.p
    rep = reproduce(a.example, **kw)
    out_dir = Path(a.out_dir) if a.out_dir else None
    report = rep.as_dict()
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in rep.artifacts.items():
            (out_dir / name).write_text(text)
        (out_dir / f"{a.example}.json").write_text(io.dumps(report))
    sys.stdout.write(io.dumps(report))
    return EXIT_OK if rep.passed else EXIT_ASSERT


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qemtk", description="Channel inverses and error-mitigation analysis.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("convert", help="change a channel's representation")
    s.add_argument("channel")
    s.add_argument("--to", choices=("natural", "choi", "kraus"), required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_convert)

    s = sub.add_parser("check", help="CP / TP / HP verdict")
    s.add_argument("channel")
    s.add_argument("--tol-cp", type=float, default=tol.TOL_CP)
    s.add_argument("--tol-tp", type=float, default=tol.TOL_TP)
    s.add_argument("--tol-herm", type=float, default=tol.TOL_HERM)
    s.add_argument("--tol-zero", type=float, default=tol.TOL_ZERO)
    s.add_argument("--out")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("invert", help="exact, Drazin or Moore-Penrose inverse")
    s.add_argument("kind", choices=("exact", "drazin", "mp"))
    s.add_argument("channel")
    s.add_argument("--backend", choices=("schur", "spectral"), default="schur")
    s.add_argument("--no-cross-check", action="store_true")
    s.add_argument("--tol-zero", type=float, default=tol.TOL_ZERO)
    s.add_argument("--out")
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("noise", help="construct noise channels")
    s.add_argument("action", choices=("make",))
    s.add_argument("family", choices=("pauli", "depolarizing", "phasedamping", "amplitudedamping", "fixture"))
    s.add_argument("--params", type=_floats)
    s.add_argument("--name")
    s.add_argument("--rep", choices=("natural", "choi", "kraus"))
    s.add_argument("--out")
    s.set_defaults(func=cmd_noise)

    s = sub.add_parser("simulate", help="evaluate a layered circuit")
    s.add_argument("--circuit", required=True)
    s.add_argument("--mode", choices=("ideal", "noisy", "physical", "numerical", "effective"), required=True)
    s.add_argument("--recovery")
    s.add_argument("--drazin-fallback", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("analyze", help="error bounds and the mismatch experiment")
    s.add_argument("what", choices=("bounds", "mismatch"))
    s.add_argument("--circuit")
    s.add_argument("--observables")
    s.add_argument("--p1", type=float, default=0.5)
    s.add_argument("--p2", type=float, default=0.0)
    s.add_argument("--p3", type=float, default=0.0)
    s.add_argument("--states", type=int, default=50)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("protocol", help="standard mitigation protocols")
    s.add_argument("kind", choices=("richardson", "quasiprob", "readout", "vd"))
    s.add_argument("--scales", type=_floats)
    s.add_argument("--values", type=_floats)
    s.add_argument("--fit", choices=("richardson", "linear", "exp"), default="richardson")
    s.add_argument("--target")
    s.add_argument("--basis", nargs="+")
    s.add_argument("--matrix")
    s.add_argument("--dist", type=_floats)
    s.add_argument("--project", action="store_true")
    s.add_argument("--state")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--out")
    s.set_defaults(func=cmd_protocol)

    s = sub.add_parser("classical", help="binary symmetric channel and repetition code")
    s.add_argument("kind", choices=("bsc", "repetition", "invert"))
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--trials", type=int, default=1_000_000)
    s.add_argument("--observed", type=_floats)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_classical)

    s = sub.add_parser("reproduce", help="run a golden check")
    s.add_argument("example", choices=sorted(EXAMPLES))
    s.add_argument("--seed", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_reproduce)
    return p


def _fail(code: int, error: str, context) -> int:
    sys.stderr.write(json.dumps({"error": error, "context": context}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", "absent") is None:
            args.seed = default_seed()
        return args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "UsageError", str(exc))
    except NumericalError as exc:
        return _fail(EXIT_NUMERICAL, type(exc).__name__, str(exc))
    except (QemtkError, ValueError) as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, str(exc))
    except OSError as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, f"{exc.filename}: {exc.strerror}")


if __name__ == "__main__":
    sys.exit(main())
