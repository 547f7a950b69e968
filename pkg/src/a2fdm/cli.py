"""Command-line front end: ``a2fdm ber|papr|channel-demo|replay``.

Options can come from ``--preset table1``, a ``--config`` file of flat
``key=value`` lines (keys are flag names, e.g. ``snr=0:2:20``), or flags.
Later sources win: preset < config file < flags. Every CSV is written with a
manifest next to it (``<out>.manifest``) holding the fully resolved options;
``a2fdm replay <manifest>`` reproduces the CSV byte for byte.
"""

from __future__ import annotations

import argparse
import io
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelRealization, doppler_from_kinematics, sample_realization
from .effective import banded_support, effective_channel, select_zeta, support_mask
from .errors import ConfigurationError, NumericError
from .harness import ExperimentConfig, default_workers, run_ber_sweep, run_papr_sweep, trial_rng
from .transforms import Kind

PRESETS = {
    "table1": dict(waveform="afdm", n=256, paths=10, ell_max=30, speed_kmh=100.0,
                   fc=3.5e9, df=30e3, qam=4, c2=0.0),
}

# Options recorded in manifests, in a fixed order.
COMMON_KEYS = ("waveform", "n", "mu", "c1", "c2", "qam", "paths", "ell_max", "nu_max",
               "speed_kmh", "fc", "df", "seed", "cpp", "active", "doppler", "channel", "workers")
COMMAND_KEYS = {
    "ber": ("snr", "trials", "stop_after_errors"),
    "papr": ("frames", "thresholds"),
    "channel-demo": ("threshold", "zeta_threshold", "channel_file"),
}


def fmt(v: float) -> str:
    return f"{float(v):.10g}"


def parse_range(text: str) -> np.ndarray:
    """``lo:step:hi`` inclusive, or a comma list."""
    text = str(text)
    if ":" in text:
        lo, step, hi = (float(t) for t in text.split(":"))
        if step <= 0 or hi < lo:
            raise ConfigurationError(f"bad range {text!r}")
        count = int(round((hi - lo) / step)) + 1
        return np.round(lo + step * np.arange(count), 10)
    return np.array([float(t) for t in text.split(",") if t.strip()])


def parse_c1(text: str) -> tuple[str, float, int]:
    text = str(text).strip()
    if text == "auto":
        return "full_diversity", 0.0, 2
    if text.startswith("bad:"):
        return "overlap", 0.0, int(text[4:])
    return "explicit", float(text), 2


def read_config(path) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line without '=': {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value option file")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--waveform", choices=[k.value for k in Kind], default="afdm")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--mu", type=int, default=1)
    p.add_argument("--c1", default="auto", help="auto | bad:<d> | <value>")
    p.add_argument("--c2", type=float, default=0.0)
    p.add_argument("--qam", type=int, default=4, choices=(4, 16, 64))
    p.add_argument("--paths", type=int, default=10)
    p.add_argument("--ell-max", type=int, default=30)
    p.add_argument("--nu-max", type=float, default=None,
                   help="normalised max Doppler; derived from speed/fc/df when omitted")
    p.add_argument("--speed-kmh", type=float, default=100.0)
    p.add_argument("--fc", type=float, default=3.5e9)
    p.add_argument("--df", type=float, default=30e3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cpp", type=int, default=None)
    p.add_argument("--active", type=int, default=None)
    p.add_argument("--doppler", choices=("fractional", "integer"), default="fractional")
    p.add_argument("--channel", choices=("rayleigh", "awgn"), default="rayleigh")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", help="CSV path (default: stdout, no manifest)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="a2fdm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"a2fdm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ber = sub.add_parser("ber", help="BER versus SNR sweep")
    _add_common(ber)
    ber.add_argument("--snr", default="0:2:20", help="SNR per symbol in dB, lo:step:hi")
    ber.add_argument("--trials", type=int, default=200)
    ber.add_argument("--stop-after-errors", type=int, default=None)

    papr = sub.add_parser("papr", help="CCDF of transmit PAPR")
    _add_common(papr)
    papr.add_argument("--frames", type=int, default=10000)
    papr.add_argument("--thresholds", default="0:0.25:14")

    demo = sub.add_parser("channel-demo", help="|H_eff| entries for heat maps")
    _add_common(demo)
    demo.add_argument("--threshold", type=float, default=1e-9)
    demo.add_argument("--zeta-threshold", type=float, default=0.99)
    demo.add_argument("--channel-file", default=None, help="realization text record to load")

    rep = sub.add_parser("replay", help="re-run a manifest")
    rep.add_argument("manifest")
    rep.add_argument("--out", default=None)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def resolve(argv: list[str]) -> tuple[argparse.ArgumentParser, argparse.Namespace]:
    """Parse flags with preset and config-file values as defaults."""
    parser = build_parser()
    first = parser.parse_args(argv)
    if first.command == "replay":
        return parser, first
    sp = _subparser(parser, first.command)
    merged = {}
    if first.preset:
        merged.update(PRESETS[first.preset])
    if first.config:
        merged.update(read_config(first.config))
        merged.pop("command", None)
    if merged:
        known = {a.dest for a in sp._actions}
        unknown = set(merged) - known
        if unknown:
            sp.error(f"unknown option(s) in preset/config: {', '.join(sorted(unknown))}")
        sp.set_defaults(**{k: _coerce(sp, k, v) for k, v in merged.items()})
    return parser, parser.parse_args(argv)


def _coerce(sp: argparse.ArgumentParser, key: str, value):
    for a in sp._actions:
        if a.dest == key and a.type is not None and isinstance(value, str):
            if value in ("", "None"):
                return None
            try:
                return a.type(value)
            except ValueError:
                sp.error(f"invalid value for {key}: {value!r}")
    if value == "None":
        return None
    return value


def nu_max_of(ns) -> float:
    if ns.nu_max is not None:
        return float(ns.nu_max)
    return doppler_from_kinematics(ns.speed_kmh / 3.6, ns.fc, ns.df)


def to_config(ns, snr=(0.0,), trials=1) -> ExperimentConfig:
    mode, c1, d = parse_c1(ns.c1)
    return ExperimentConfig(
        kind=ns.waveform, N=ns.n, mu=ns.mu, c2=ns.c2, order=ns.qam, L=ns.paths,
        ell_max=ns.ell_max, nu_max=nu_max_of(ns), c1_mode=mode, c1=c1, d=d,
        snr_grid_db=tuple(snr), trials_per_point=trials, master_seed=ns.seed,
        cpp_len=ns.cpp, active_count=ns.active, doppler_mode=ns.doppler,
        channel_model=ns.channel,
        stop_after_errors=getattr(ns, "stop_after_errors", None))


def manifest_text(ns, runtime: float) -> str:
    lines = [f"# a2fdm {__version__}", f"# runtime_s={runtime:.3f}", f"command={ns.command}"]
    for key in COMMON_KEYS + COMMAND_KEYS[ns.command]:
        value = getattr(ns, key)
        lines.append(f"{key}={'' if value is None else value}")
    return "\n".join(lines) + "\n"


def cmd_ber(ns) -> str:
    cfg = to_config(ns, snr=parse_range(ns.snr), trials=ns.trials)
    series = run_ber_sweep(cfg, workers=ns.workers or default_workers())
    buf = io.StringIO()
    buf.write("snr_db,ber,bit_errors,bits\n")
    for p in series.points:
        buf.write(f"{fmt(p.abscissa)},{fmt(p.value)},{p.count},{p.n_samples}\n")
    return buf.getvalue()


def cmd_papr(ns) -> str:
    cfg = to_config(ns)
    series = run_papr_sweep(cfg, ns.frames, parse_range(ns.thresholds))
    buf = io.StringIO()
    buf.write("threshold_db,ccdf,count,frames\n")
    for p in series.points:
        buf.write(f"{fmt(p.abscissa)},{fmt(p.value)},{p.count},{p.n_samples}\n")
    return buf.getvalue()


def cmd_channel_demo(ns) -> str:
    cfg = to_config(ns)
    spec = cfg.spec
    if ns.channel_file:
        chan = ChannelRealization.from_text(Path(ns.channel_file).read_text())
    elif cfg.channel_model == "awgn":
        chan = ChannelRealization(h=[1.0], ell=[0], nu=[0.0])
    else:
        chan = sample_realization(cfg.profile, trial_rng(cfg.master_seed, 0, 0),
                                  integer_doppler=cfg.doppler_mode == "integer")
    eff = effective_channel(spec, chan)
    mag = np.abs(eff.matrix)
    if spec.kind is not Kind.LA2FDM:
        comps = eff.components()
        zeta = select_zeta(spec, chan, ns.zeta_threshold, components=comps)
        widths = sorted({int(w) for w in support_mask(banded_support(spec, chan, zeta),
                                                      spec.N).sum(axis=2).ravel()})
        print(f"# zeta={zeta} support_width={','.join(map(str, widths))} "
              f"above_threshold={int(np.count_nonzero(mag > ns.threshold))}", file=sys.stderr)
    buf = io.StringIO()
    buf.write("row,col,abs\n")
    for p, q in zip(*np.nonzero(mag > ns.threshold)):
        buf.write(f"{p},{q},{fmt(mag[p, q])}\n")
    return buf.getvalue()


COMMANDS = {"ber": cmd_ber, "papr": cmd_papr, "channel-demo": cmd_channel_demo}


def _emit(ns, text: str, runtime: float) -> None:
    if ns.out:
        Path(ns.out).write_text(text)
        Path(str(ns.out) + ".manifest").write_text(manifest_text(ns, runtime))
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, ns = resolve(argv)
    if ns.command == "replay":
        cfg = read_config(ns.manifest)
        command = cfg.pop("command", None)
        if command not in COMMANDS:
            parser.error(f"manifest has no valid command: {command!r}")
        args = [command, "--config", ns.manifest]
        if ns.out:
            args += ["--out", ns.out]
        return main(args)
    sp = _subparser(parser, ns.command)
    start = time.perf_counter()
    try:
        text = COMMANDS[ns.command](ns)
    except ConfigurationError as exc:
        sp.error(str(exc))
    except (NumericError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"a2fdm: numeric failure: {exc}", file=sys.stderr)
        return 1
    _emit(ns, text, time.perf_counter() - start)
    return 0


if __name__ == "__main__":
    sys.exit(main())
