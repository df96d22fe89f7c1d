"""Command line front end.

Exit codes: 0 ran to completion, 2 red-flag result, 1 usage or budget error.
The global search budget comes from QUADLAT_BUDGET.
"""

import argparse
import csv
import sys

from ._config import INCONCLUSIVE, BudgetExceeded
from .genus import enumerate_genus, load_genus, save_genus, spinor_genus_partition
from .harness import local_global_experiment, local_test_suite
from .lattice import minimum, read_gram
from .linnik import gauss_check
from .local import locally_representable
from .represent import primitive_representation_count, representation_count


def _fmt(v):
    return "inconclusive" if v is INCONCLUSIVE else str(v).lower()


def cmd_disc(args):
    print(read_gram(args.file).discriminant())
    return 0


def cmd_min(args):
    print(minimum(read_gram(args.file)))
    return 0


def cmd_genus(args):
    rec = enumerate_genus(read_gram(args.file))
    if args.out:
        save_genus(rec, args.out)
    print(f"classes {len(rec.classes)}")
    print(f"mass {rec.mass}")
    print("primes " + " ".join(map(str, rec.neighbor_primes_used)))
    if rec.sampled_primes:
        print("sampled " + " ".join(map(str, rec.sampled_primes)))
    print(f"complete {_fmt(rec.complete)}")
    for i, (K, a) in enumerate(zip(rec.classes, rec.aut_orders)):
        print(i, a, minimum(K))
    if not rec.complete:
        return 1
    return 0


def cmd_spinor_genus(args):
    rec = load_genus(args.dir)
    blocks = spinor_genus_partition(rec)
    for b, blk in enumerate(blocks):
        print(b, " ".join(map(str, blk)))
    return 0


def cmd_local_rep(args):
    Ls, L = read_gram(args.sub), read_gram(args.target)
    if args.p is not None:
        res = locally_representable(Ls, L, args.p)
        print(f"{args.p} {_fmt(res)}")
        return 0
    ok, detail = local_test_suite(Ls, L)
    for k, v in detail.items():
        print(f"{k} {_fmt(v)}")
    print(f"all {_fmt(ok)}")
    return 0


def cmd_represent(args):
    Ls, L = read_gram(args.sub), read_gram(args.target)
    fn = primitive_representation_count if args.primitive else representation_count
    print(fn(Ls, L))
    return 0


def cmd_gauss_check(args):
    rows, (d1, c1, h1, _) = gauss_check(args.dmax)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["d", "count", "12h", "pass"])
    for d, c, h, ok in rows:
        w.writerow([d, c, h, str(ok).lower()])
    print(f"# d=1 exception: count {c1}, 12h {h1}", file=sys.stderr)
    return 0 if all(r[3] for r in rows) else 2


def cmd_local_global(args):
    L = read_gram(args.file)
    rep = local_global_experiment(L, args.m, args.bound)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            rep.to_csv(fh)
    else:
        sys.stdout.write(rep.to_csv())
    print(f"# rows {len(rep.rows)} exceptions {len(rep.exceptions)} threshold {rep.threshold}"
          f" inconclusive {len(rep.inconclusive)} red_flags {len(rep.red_flags)}", file=sys.stderr)
    return 2 if rep.red_flags else 0


def build_parser():
    ap = argparse.ArgumentParser(prog="quadlat", description="Integral quadratic lattice toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("disc")
    p.add_argument("file")
    p.set_defaults(fn=cmd_disc)
    p = sub.add_parser("min")
    p.add_argument("file")
    p.set_defaults(fn=cmd_min)
    p = sub.add_parser("genus")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_genus)
    p = sub.add_parser("spinor-genus")
    p.add_argument("dir")
    p.set_defaults(fn=cmd_spinor_genus)
    p = sub.add_parser("local-rep")
    p.add_argument("sub")
    p.add_argument("target")
    p.add_argument("-p", type=int)
    p.set_defaults(fn=cmd_local_rep)
    p = sub.add_parser("represent")
    p.add_argument("sub")
    p.add_argument("target")
    p.add_argument("--primitive", action="store_true")
    p.set_defaults(fn=cmd_represent)
    p = sub.add_parser("gauss-check")
    p.add_argument("--dmax", type=int, required=True)
    p.set_defaults(fn=cmd_gauss_check)
    p = sub.add_parser("local-global")
    p.add_argument("file")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--bound", type=int, required=True)
    p.add_argument("--csv")
    p.set_defaults(fn=cmd_local_global)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0
    try:
        return args.fn(args)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
