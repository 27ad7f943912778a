"""Command-line front end: label-table audit, rate estimation, code
construction and FER sweeps. All randomness flows from --seed and every
output is byte-reproducible for equal arguments (opt into wall-clock
timestamps in simulate CSVs with --timing)."""

import argparse
import json
import sys

import numpy as np

from .construction import CGA, LM_DGA, MC, MI_DGA, CodeSpec, construct_ga, \
    construct_mc
from .demapper import MM_KIND, MM_SP_KIND, SP_KIND
from .modulation import MM, SP, build_label_map
from .polar import CRC16_DEFAULT
from .rates import rate_profile
from .simulate import SimConfig, run_fer

_DEMAPPERS = {"sp": SP_KIND, "mm": MM_KIND, "mmsp": MM_SP_KIND}
_CONSTRUCTIONS = {"lm-dga": LM_DGA, "mi-dga": MI_DGA, "cga": CGA, "mc": MC}

CSV_HEADER = "snr_db,frames,frame_errors,bit_errors,fer,ber,seconds"


def _fmt_bits(row):
    return "".join(str(int(b)) for b in row)


def cmd_tables(args):
    for kind, title, aux_name in ((MM, "MM mapper", "BRGC"),
                                  (SP, "SP mapper", "LSB-BRGC")):
        lmap = build_label_map(kind, 3)
        print(f"{title} (8-ASK)")
        amps = " ".join(f"{int(a):>4d}" for a in lmap.amplitudes)
        print(f"  symbol      {amps}")
        print(f"  {aux_name:<10}  " +
              " ".join(f"{_fmt_bits(r):>4}" for r in lmap.aux_bits))
        print(f"  polar label " +
              " ".join(f"{_fmt_bits(r):>4}" for r in lmap.polar_bits))
        print("  label transforms (aux = polar . F, polar = aux . B):")
        for name, mat in (("F", lmap.forward), ("B", lmap.backward)):
            rows = "; ".join(" ".join(str(int(v)) for v in row) for row in mat)
            print(f"    {name} = [{rows}]")
        print()
    return 0


def cmd_rates(args):
    profile = rate_profile(_DEMAPPERS[args.demapper], args.snr_db,
                           args.method, args.samples, args.seed)
    if args.csv:
        print("demapper,level,method,snr_db,rate,samples,stderr")
        for j, (r, e) in enumerate(zip(profile.rates, profile.stderrs)):
            print(f"{profile.demapper},{j + 1},{profile.method},"
                  f"{profile.snr_db:.4f},{r:.6f},{profile.samples},{e:.3e}")
    else:
        print(json.dumps(profile.to_dict(), indent=2))
    return 0


def cmd_construct(args):
    method = _CONSTRUCTIONS[args.method]
    crc = CRC16_DEFAULT if args.crc16 else None
    if method == MC:
        spec = construct_mc(_DEMAPPERS[args.demapper], args.snr_db, args.n,
                            args.k, trials=args.trials, seed=args.seed, crc=crc)
    else:
        spec = construct_ga(method, _DEMAPPERS[args.demapper], args.snr_db,
                            args.n, args.k, num_samples=args.samples,
                            seed=args.seed, crc=crc)
    spec.save(args.out)
    print(f"wrote {args.out}: {method} {spec.demapper} n={spec.n} k={spec.k}")
    return 0


def _csv_row(p, timing):
    secs = p.seconds if timing else 0.0
    return (f"{p.snr_db:.4f},{p.frames},{p.frame_errors},{p.bit_errors},"
            f"{p.fer:.6e},{p.ber:.6e},{secs:.3f}")


def cmd_simulate(args):
    spec = CodeSpec.load(args.spec)
    config = SimConfig(
        spec=spec, demapper=_DEMAPPERS[args.demapper], decoder=args.decoder,
        list_size=args.list, crc_enabled=args.crc16,
        snr_start=args.snr_start, snr_stop=args.snr_stop,
        snr_step=args.snr_step, max_frames=args.max_frames,
        target_errors=args.target_errors, seed=args.seed)

    def progress(p):
        print(f"snr {p.snr_db:6.2f} dB  fer {p.fer:.3e}  "
              f"({p.frame_errors}/{p.frames} frames, {p.seconds:.1f}s)",
              file=sys.stderr)

    rows = [CSV_HEADER]
    for point in run_fer(config, progress=progress):
        rows.append(_csv_row(point, args.timing))
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="polarmod",
                                description="polar-coded modulation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tables", help="print the 8-ASK label tables")
    t.set_defaults(fn=cmd_tables)

    r = sub.add_parser("rates", help="estimate per-level achievable rates")
    r.add_argument("--demapper", choices=sorted(_DEMAPPERS), required=True)
    r.add_argument("--snr-db", type=float, required=True)
    r.add_argument("--method", choices=["lm", "gmi", "mi-hist", "mi-matched",
                                        "cga"], default="lm")
    r.add_argument("--samples", type=int, default=1_000_000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--csv", action="store_true",
                   help="CSV rows instead of JSON")
    r.set_defaults(fn=cmd_rates)

    c = sub.add_parser("construct", help="construct a code and write its spec")
    c.add_argument("--method", choices=sorted(_CONSTRUCTIONS), required=True)
    c.add_argument("--demapper", choices=sorted(_DEMAPPERS), required=True)
    c.add_argument("--snr-db", type=float, required=True,
                   help="design SNR")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--samples", type=int, default=200_000,
                   help="rate-estimation samples (GA methods)")
    c.add_argument("--trials", type=int, default=100_000,
                   help="genie trials (mc method)")
    c.add_argument("--crc16", action="store_true",
                   help="record the default 16-bit CRC in the spec")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)
    c.set_defaults(fn=cmd_construct)

    s = sub.add_parser("simulate", help="Monte Carlo FER sweep")
    s.add_argument("--spec", required=True)
    s.add_argument("--demapper", choices=sorted(_DEMAPPERS), required=True)
    s.add_argument("--decoder", choices=["sc", "scl"], default="sc")
    s.add_argument("--list", type=int, default=1)
    s.add_argument("--crc16", action="store_true")
    s.add_argument("--snr-start", type=float, required=True)
    s.add_argument("--snr-stop", type=float, required=True)
    s.add_argument("--snr-step", type=float, default=0.5)
    s.add_argument("--max-frames", type=int, default=1_000_000)
    s.add_argument("--target-errors", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--timing", action="store_true",
                   help="write wall-clock seconds into the CSV (breaks "
                        "byte-reproducibility)")
    s.add_argument("--out", help="CSV path (stdout when omitted)")
    s.set_defaults(fn=cmd_simulate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
