"""Entropy, nef eigenclasses and (nu^2) for the built-in fixtures."""
import argparse
import json

from surfdyn import presets
from surfdyn.spectral import entropy, integral_nu, nef_eigenclasses


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", choices=("wehler", "triple", "both"), default="both")
    args = ap.parse_args()
    fams = ("wehler", "triple") if args.family == "both" else (args.family,)
    out = {}
    for fam in fams:
        pb = presets.composite_pullback(fam)
        ent = entropy(pb)
        eig = nef_eigenclasses(pb)
        out[fam] = {"pullback": [list(r) for r in pb.matrix], "entropy": ent.to_json(),
                    "eigenclasses": eig.to_json(),
                    "nu_integral": list(integral_nu(eig).coeffs)}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
