"""Smoke test for the poisson_girsanov extension module."""

from fractions import Fraction
from math import comb, factorial

import poisson_girsanov as pg


def main():
    assert pg.stirling_first(5, 2) == -50
    explicit = sum((-1) ** j * comb(7, j) * (7 - j) ** 18 for j in range(8)) // factorial(7)
    assert pg.stirling_second(18, 7) == explicit
    assert pg.stirling_s2_assoc(6, 3) == 15
    assert pg.check_identities(10)
    assert all(pg.check_duality(n) for n in range(9))

    # C_2(x, λ) = x² − (2λ + 1)x + λ²
    assert Fraction(pg.charlier(2, "3", "1/2")) == Fraction(9) - 2 * 3 + Fraction(1, 4)
    assert Fraction(pg.central_poisson_moment(4, "2")) == 2 + 3 * 4
    assert abs(pg.charlier_mean(6, 1.5)) < 1e-9

    m = pg.step_moments([("1", "3/2"), ("-1/2", "2")], 4)
    assert m["recursive"] == m["closed"] == m["cumulant"]

    rows = pg.oracle("commutation", ["1", "3/4", "1/2"], trunc=5)
    assert rows and all(r["status"] == "pass" for r in rows)

    u = pg.HullTransform(0.2, 0.0)
    omega = pg.PointConfiguration([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])
    assert len(omega.hull()) == 4
    x, y = omega.tau((0.0, 0.0), u)
    assert abs(x - 0.2 * 0.25 / 1.25) < 1e-15 and y == 0.0
    assert omega.tau((0.9, 0.9), u) == (0.9, 0.9)
    value, flagged = omega.density_phi((0.1, 0.05), u)
    assert not flagged and abs(value + 0.2 * 0.8 / 1.16**2) < 1e-4
    assert pg.PointConfiguration([(0.1, 0.2)]).girsanov_density(u, 2.0, 64)["value"] == 1.0

    try:
        pg.HullTransform(0.3, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("oversized shift accepted")

    nil = pg.check_nilpotence(300, 4, 1, 2.0, u)
    assert nil["nonzero_cyclic_products"] == 0

    unit = pg.verify_girsanov_unit(2.0, (0.2, 0.0), 4000, 42, quad_n=64)
    assert abs(unit["z_score"]) <= 4
    again = pg.verify_girsanov_unit(2.0, (0.2, 0.0), 4000, 42, quad_n=64, threads=2)
    assert unit == again

    f = pg.verify_girsanov_functional("f3", 1.0, (0.15, 0.0), 4000, 3, quad_n=64)
    assert abs(f["z_pooled"]) <= 4

    print("smoke test passed")


if __name__ == "__main__":
    main()
