"""
Command-line front end.

Subcommands: analyze, encode, decode, eval, sweep. Failures exit nonzero
and print one JSON object on stderr, e.g.
``{"error": "E_CONFIG", "path": "$.c", "message": "..."}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_config, to_experiment
from .decoder import decode
from .frames import frame_report
from .harness import (
    load_signal, plot_frequency_responses, plot_sweep, run_experiment,
    threshold_sweep, write_csv, write_wav, z_score,
)
from .kernels import Signal, StabilityError
from .spike_codec import encode
from .spikefile import SpikeFileError, header_for, read_spikefile, write_spikefile
from .wavelets import analyze, frequency_response, lowpass_response, make_bank

EXIT_CODES = {
    "E_USAGE": 2, "E_CONFIG": 3, "E_IO": 4, "E_FORMAT": 5,
    "E_STABILITY": 6, "E_VALUE": 7, "E_INTERNAL": 1,
}
DEFAULT_THETAS = (0.025, 0.05, 0.1, 0.2, 0.4)


class UsageError(Exception):
    pass


def _experiment(args, **extra):
    if not args.config:
        raise UsageError("--config is required")
    doc = load_config(args.config)
    ov = dict(theta=args.theta, mode=args.mode, decode_mode=args.decode_mode,
              seed=args.seed)
    ov.update(extra)
    cfg = to_experiment(doc, **ov)
    return doc, cfg


def _bank(cfg, family=None):
    fam = family or cfg.families[0]
    if fam not in ("dog", "doe", "dot"):
        raise UsageError(f"family {fam!r} has no filter bank")
    return make_bank(fam, cfg.sigma1, cfg.c, cfg.K, cfg.dt, n=cfg.n, theta=cfg.theta)


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_analyze(args):
    doc, cfg = _experiment(args)
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    for fam in cfg.families:
        bank = _bank(cfg, fam)
        rng = tuple(doc["omega_range"]) if "omega_range" in doc else None
        rep = frame_report(bank, rng)
        d = rep.to_dict()
        d.update(family=fam, c=cfg.c, K=cfg.K, n=bank.n, sigma1=bank.grid.sigma1,
                 sigmaK=bank.grid.coarsest, dt=bank.dt,
                 channel_norms=[float(v) for v in bank.norms])
        _write_json(out / f"{fam}_frame_report.json", d)
        np.savetxt(out / f"{fam}_gram.csv", rep.gram, delimiter=",", fmt="%.12e")
        w = np.geomspace(0.01 / bank.grid.coarsest, np.pi / bank.dt, 512)
        cols = [w] + [np.abs(frequency_response(bank, k, w)) for k in range(1, bank.K + 1)]
        cols.append(np.abs(lowpass_response(bank, w)))
        hdr = "omega," + ",".join(f"psi{k}" for k in range(1, bank.K + 1)) + ",lowpass"
        np.savetxt(out / f"{fam}_frequency_response.csv", np.column_stack(cols),
                   delimiter=",", header=hdr, comments="", fmt="%.12e")
        plot_frequency_responses(bank, out / f"{fam}_responses.svg")
        print(f"{fam}: c={cfg.c:.6g} K={cfg.K} A={rep.A:.4e} B={rep.B:.4f} "
              f"cond={rep.condition_number:.4g}")
    return 0


def cmd_encode(args):
    _, cfg = _experiment(args)
    if not args.input or not args.output:
        raise UsageError("encode needs --input and --output")
    sig = load_signal(args.input, cfg.sample_rate_hz)
    if abs(sig.dt - cfg.dt) > 1e-9 * cfg.dt:
        raise ValueError(f"input rate {1 / sig.dt:g} Hz differs from config "
                         f"{cfg.sample_rate_hz:g} Hz")
    sig = z_score(Signal(sig.samples, cfg.dt))
    bank = _bank(cfg)
    trains = encode(analyze(sig, bank), cfg.theta, cfg.reset)
    write_spikefile(args.output, header_for(bank, len(sig), zscored=True,
                                            theta=cfg.theta), trains)
    total = sum(len(t) for t in trains)
    print(f"encoded {len(sig)} samples into {total} spikes "
          f"({total / sig.duration:.1f} spikes/s)")
    return 0


def cmd_decode(args):
    if not args.input or not args.output:
        raise UsageError("decode needs --input and --output")
    header, trains = read_spikefile(args.input)
    bank = header.bank()
    mode = args.decode_mode or "lstsq"
    ref = None
    if args.reference:
        ref = load_signal(args.reference, 1.0 / header.dt)
        ref = Signal(ref.samples, header.dt)
        if header.zscored:
            ref = z_score(ref)
        if len(ref) != header.n_samples:
            raise ValueError("reference length differs from the spike file")
    if mode == "lstsq" and ref is None:
        raise UsageError("least-squares decoding needs --reference (or use "
                         "--decode-mode identity)")
    targets = analyze(ref, bank) if (ref is not None and mode == "lstsq") else None
    rep = decode(trains, bank, targets, mode, original=ref)
    out = Path(args.output)
    if out.suffix.lower() == ".wav":
        write_wav(out, rep.reconstructed)
    else:
        write_csv(out, rep.reconstructed, name="reconstruction")
    if ref is not None:
        print(f"nRMSE={rep.nrmse:.6f}")
    return 0


def cmd_eval(args):
    _, cfg = _experiment(args)
    table = run_experiment(cfg)
    if args.output:
        out = Path(args.output)
        if out.suffix.lower() != ".csv":
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.txt").write_text(table.to_text() + "\n")
            out = out / "results.csv"
        table.to_csv(out)
    print(table.to_text())
    return 0


def cmd_sweep(args):
    doc, cfg = _experiment(args, mode="spiking")
    thetas = doc.get("thetas", DEFAULT_THETAS)
    sw = threshold_sweep(cfg, thetas)
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    sw.to_csv(out / "sweep.csv")
    plot_sweep(sw, out / "sweep.svg")
    print(sw.to_csv(), end="")
    return 0


COMMANDS = {"analyze": cmd_analyze, "encode": cmd_encode, "decode": cmd_decode,
            "eval": cmd_eval, "sweep": cmd_sweep}


def build_parser():
    p = argparse.ArgumentParser(prog="spikelet", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--input")
        s.add_argument("--output")
        s.add_argument("--theta", type=float)
        s.add_argument("--mode", choices=("exact", "spiking"))
        s.add_argument("--decode-mode", choices=("lstsq", "identity"))
        s.add_argument("--seed", type=int)
        if name == "decode":
            s.add_argument("--reference")
    return p


def _fail(code, message, path=None):
    err = {"error": code, "message": message}
    if path:
        err["path"] = path
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return EXIT_CODES[code]


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            return _fail("E_USAGE", "invalid command line")
        return 0
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("E_USAGE", str(exc))
    except ConfigError as exc:
        return _fail("E_CONFIG", str(exc), exc.path)
    except SpikeFileError as exc:
        return _fail("E_FORMAT", str(exc))
    except StabilityError as exc:
        return _fail("E_STABILITY", str(exc))
    except OSError as exc:
        return _fail("E_IO", str(exc))
    except ValueError as exc:
        return _fail("E_VALUE", str(exc))
    except Exception as exc:  # pragma: no cover
        return _fail("E_INTERNAL", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
