"""Smoke test for the Python bindings.

Build and install first:  pip install --no-build-isolation -e crates/py
"""
import cmath
import math

import halfline_nls as hn


def grid(length, n):
    return [length * i / (n - 1) for i in range(n)]


def main():
    xs = grid(20.0, 257)
    gauss = [complex(math.exp(-x * x)) for x in xs]

    # H^1 norm of the even Gaussian is (2 pi)^(1/4)
    norm = hn.sobolev_norm_half_line(gauss, 20.0, 1.0)
    assert abs(norm - (2 * math.pi) ** 0.25) < 1e-10, norm

    # homogeneous Neumann, linear: closed form (1+4it)^(-1/2) exp(-x^2/(1+4it))
    run = hn.solve(gauss, s=1.0, p=2.0, r=2.0, k=0.0, lam=0.0, horizon=0.1, length=20.0, dt=0.01)
    assert run["status"] == "completed", run["status"]
    z = complex(1.0, 0.4)
    err = max(abs(u - cmath.exp(-x * x / z) / cmath.sqrt(z)) for x, u in zip(run["x"], run["u_final"]))
    assert err < 1e-8, err
    assert run["t"][0] == 0.0 and abs(run["t"][-1] - 0.1) < 1e-12

    # compatible nonlinear problem against Crank-Nicolson
    exp_data = [complex(math.exp(-x)) for x in grid(20.0, 257)]
    opts = dict(p=2.0, r=2.0, k=1.0, lam=1.0, horizon=0.02, length=20.0, dt=1e-3)
    spectral = hn.solve(exp_data, s=2.0, **opts)
    cn = hn.crank_nicolson(exp_data, **opts)
    dx = 20.0 / 256
    diff = math.sqrt(dx * sum(abs(a - b) ** 2 for a, b in zip(spectral["u_final"], cn["u_final"])))
    assert diff < 1e-3, diff
    drift = max(abs(m - cn["mass"][0]) for m in cn["mass"]) / cn["mass"][0]
    assert drift < 1e-4, drift

    try:
        hn.solve([1.0], s=1.0, p=2.0, r=2.0, k=0.0, lam=0.0, horizon=0.1, length=20.0, dt=0.01)
    except ValueError:
        pass
    else:
        raise AssertionError("one-point grid accepted")

    print(f"halfline_nls {hn.__version__}: ok (norm {norm:.6f}, linear error {err:.2e}, oracle diff {diff:.2e})")


if __name__ == "__main__":
    main()
