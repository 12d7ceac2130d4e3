"""Large-p expansion of log Z_p on the round sphere.

The monomials w^j are orthogonal for the Fubini-Study metric, so log Z_p is
a finite sum of log-Beta values.  We fit the expansion model twice (once
with every coefficient free, once with b1 and b0 fixed at their exact
values) and compare against the closed-form coefficients.

Run with ``python demos/sphere_expansion.py``; it takes a few seconds.
"""

from zwverify.asymptotics import FitModel, difference_extract, fit, pinned_values
from zwverify.geometry import SurfaceScenario
from zwverify.partition import log_partition
from zwverify.predictor import predict


def main():
    s = SurfaceScenario(0)
    series = [log_partition(s, p) for p in range(8, 65)]

    free = fit(series)
    pinned = fit(series, FitModel(pinned=pinned_values(s.euler_characteristic)))
    diff = difference_extract(series)
    pred = predict(s)

    print(f"{'coef':>4} {'free fit':>14} {'pinned fit':>14} {'differences':>14} {'predicted':>14}")
    for name in ("a2", "b1", "a1", "b0", "a0"):
        print(
            f"{name:>4} {free.values[name]:14.8f} {pinned.values[name]:14.8f} "
            f"{diff.values[name]:14.8f} {pred.as_dict()[name]:14.8f}"
        )
    # the nuisance columns soak up the O(log p / p) tail
    print("nuisance:", {k: round(v, 6) for k, v in free.values.items() if k.startswith("n_")})


if __name__ == "__main__":
    main()
