"""Growth regimes of orbit counts on P^1 for random integer matrices."""
import argparse
import random

from surfdyn.exact_arith import normalize
from surfdyn.mobius import MobiusType, classify, growth_regime, is_periodic_point


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    print("type,matrix,point,regime,residual_linear,residual_exponential")
    counts = {MobiusType.II_two_fixed: 0, MobiusType.III_parabolic: 0}
    while min(counts.values()) < args.samples:
        F = [[rng.randint(-9, 9) for _ in range(2)] for _ in range(2)]
        tr, det = F[0][0] + F[1][1], F[0][0] * F[1][1] - F[0][1] * F[1][0]
        if det == 0:
            continue
        # parabolic matrices are rare; once type II is full, only accept tr^2 = 4 det
        if counts[MobiusType.II_two_fixed] >= args.samples and tr * tr != 4 * det:
            continue
        ty = classify(F)
        if ty not in counts or counts[ty] >= args.samples:
            continue
        x = normalize([rng.randint(-9, 9), rng.randint(1, 9)])
        if is_periodic_point(F, x):
            continue
        counts[ty] += 1
        fit = growth_regime(F, x)
        print(f'{ty.value},"{F}","{x!r}",{fit.regime},{fit.residual_linear:.4g},{fit.residual_exponential:.4g}')


if __name__ == "__main__":
    main()
