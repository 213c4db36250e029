"""Reference values of E_{rho,mu}(z) for the Mittag-Leffler tests.

The power series is summed at 150 digits whenever its largest term, about
exp(|z|^(1/rho)), stays below 1e90; otherwise Talbot inversion of the Laplace
transform s^(rho-mu) / (s^rho + x) at t = 1 is used. For negative z where
both apply they are required to agree to 1e-20.
"""
import itertools
import sys

import mpmath as mp

mp.mp.dps = 150


def series(rho, mu, z):
    return mp.nsum(lambda k: mp.mpf(z) ** k / mp.gamma(rho * k + mu), [0, mp.inf])


def talbot(rho, mu, z):
    x = -mp.mpf(z)
    with mp.workdps(60):
        return mp.invertlaplace(lambda s: s ** (rho - mu) / (s ** rho + x), 1, method="talbot")


def main(out):
    rhos = ["0.3", "0.5", "0.7", "1", "1.2", "1.325", "1.35", "1.375", "1.5", "1.9"]
    mus = ["1", "2"]
    zs = ["0.5", "-0.25", "-1", "-3", "-8", "-15", "-40", "-100", "-400", "-2000"]
    rows = []
    for r, m, z in itertools.product(rhos, mus, zs):
        rho, mu, zz = mp.mpf(r), mp.mpf(m), mp.mpf(z)
        if abs(zz) ** (1 / rho) < 200:
            v = series(rho, mu, zz)
            if zz < 0 and abs(zz) ** (1 / rho) < 60:
                assert abs(v - talbot(rho, mu, zz)) < mp.mpf("1e-20"), (r, m, z)
        else:
            v = talbot(rho, mu, zz)
        rows.append(f"{r},{m},{z},{mp.nstr(v, 25, min_fixed=-mp.inf, max_fixed=mp.inf)}")
    with open(out, "w") as f:
        f.write("rho,mu,z,value\n")
        f.write("\n".join(rows) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "mlf_reference.csv")
