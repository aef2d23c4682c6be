"""Smoke test for the rieszlab Python bindings.

Build and install first:  pip install --no-build-isolation ./crates/rieszlab-py
"""

import math
import sys

import rieszlab as rl


def check(label, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {label} {detail}")
    return ok


def main():
    results = []

    k = rl.RieszKernel(0.5, 1)
    results.append(check("kernel", abs(k([0.0], [4.0]) - 0.5) < 1e-15, repr(k)))

    cube = rl.CubeDomain.anchored(1, 4.0)
    pts = [[0.5], [1.5], [2.5], [3.5]]
    jel = rl.e_jel(k, cube, pts)
    ueg = rl.e_ueg(k, cube, pts)
    gap = rl.jel_ueg_gap(k, cube, pts)
    results.append(check("gap", abs((ueg["total"] - jel["total"]) - gap) < 1e-10, f"{gap:.6f}"))

    grad = rl.e_jel_gradient(k, cube, pts)
    results.append(check("gradient shape", len(grad) == 4 and len(grad[0]) == 1))

    r = rl.minimize_jellium(k, rl.CubeDomain.anchored(1, 8.0), 8, seed=1, restarts=2)
    xi = r["energy"]["total"]
    results.append(check("minimize", rl.jellium_lower_bound(k, 8) <= xi < 0, f"{xi:.6f}"))

    c = rl.lattice_constant(rl.RieszKernel(1.0, 3), "bcc")
    results.append(check("bcc", abs(c["half_value"] + 1.4442) < 1e-4, f"{c['half_value']:.6f}"))

    mu = rl.GridMarginal.uniform_interval(0.0, 1.0, 8)
    sol = rl.mmot(k, mu, 2)
    xc = rl.exchange_correlation(k, mu, 2, sol["cost"])
    results.append(check("mmot", sol["cost"] > 0 and xc < 0, f"cost {sol['cost']:.6f} exc {xc:.6f}"))

    f2 = rl.monotone_1d(0.5, [0.0, 1.0], [1.0], 2)
    results.append(check("monotone", abs(f2 - 2 * math.sqrt(2)) < 1e-12, f"{f2:.12f}"))

    packing = rl.swiss_cheese(rl.CubeDomain.anchored(2, 128.0), [1.0], seed=3)
    cert = packing.verify()
    results.append(check("packing", cert["disjoint"] and cert["contained"] and cert["in_window"], f"{len(packing)} balls"))
    again = rl.BallPacking.from_json(packing.to_json())
    results.append(check("packing json", again.to_json() == packing.to_json()))

    split = rl.fg_split(rl.RieszKernel(1.0, 2), [[0.0, 0.0], [1.0, 0.3], [0.4, 1.7]], packing, seed=5, samples=500)
    results.append(check("fg split", abs(split["localized_exact"] + split["residual_exact"] - split["full"]) < 1e-9))

    est = rl.extrapolate_constant([(n, -1.0 + 0.5 / n) for n in (4.0, 8.0, 16.0, 32.0)], 1)
    results.append(check("extrapolate", abs(est["value"] + 1.0) < 1e-10, f"{est['value']:.12f}"))

    try:
        rl.RieszKernel(3.0, 1)
        results.append(check("bad kernel raises", False))
    except ValueError as e:
        results.append(check("bad kernel raises", "s" in str(e)))

    print(f"{sum(results)}/{len(results)} passed")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
