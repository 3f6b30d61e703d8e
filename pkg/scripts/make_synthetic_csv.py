"""Write a synthetic expression-style CSV that the qkgene CLI can consume.

The dataset has a block of informative genes whose class means differ by
--shift, buried in unit Gaussian noise. Labels land in the last column as
1 / -1, matching the CLI defaults (label column "label", positive label "1").

Example:
    python scripts/make_synthetic_csv.py --samples 62 --genes 2000 \
        --informative 10 --shift 2.0 --positive-fraction 0.645 \
        --out runs/colon_like.csv
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from qkgene.synth import planted_dataset


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=60)
    parser.add_argument("--genes", type=int, default=200)
    parser.add_argument("--informative", type=int, default=5)
    parser.add_argument("--shift", type=float, default=2.5,
                        help="between-class mean separation on informative genes")
    parser.add_argument("--positive-fraction", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True, help="output CSV path")
    args = parser.parse_args(argv)

    ds = planted_dataset(args.samples, args.genes, args.informative,
                         shift=args.shift, seed=args.seed,
                         positive_fraction=args.positive_fraction)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w") as fh:
        fh.write(",".join(ds.gene_names + ["label"]) + "\n")
        for row, label in zip(ds.features, ds.labels):
            cells = [repr(float(v)) for v in row] + [str(int(label))]
            fh.write(",".join(cells) + "\n")
    print(f"wrote {args.samples} samples x {args.genes} genes to {out}")
    print(f"informative genes: {ds.gene_names[:args.informative]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
