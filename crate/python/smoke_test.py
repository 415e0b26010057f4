"""Smoke test for the heatnull Python bindings."""
import json
import math

import heatnull_py as hn


def main():
    sigma, a1, a2 = hn.sigma_star()
    assert abs(a2 - 2 * (36 / 37) ** 2) < 1e-15
    assert a1 > a2 + 0.05

    basis = hn.Basis(math.pi, 30)
    assert len(basis) == 30 and abs(basis.lambdas[2] - 9.0) < 1e-12

    ctl = hn.null_control(basis, [1.0], 1.0)
    u_t = ctl.simulate(basis, [1.0])
    res = math.sqrt(sum(c * c for c in u_t))
    assert res <= 1e-3, res
    print(f"null control: ln cost {ctl.ln_cost:.4f}, terminal residual {res:.2e}")

    assert hn.kannai_residual(basis, [0.3, -0.2, 0.5], 0.5) <= 1e-8
    assert abs(hn.longest_avoiding_ray(math.pi / 3, math.pi / 2, math.pi) - math.pi) < 1e-15

    v = hn.FundamentalSolution(1.0, math.pi / 2)
    assert abs(v.pairing_cos() - 1.0) < 1e-2
    assert v.terminal_norm <= 1e-3 * v.norm

    w = hn.FundamentalSolution(0.5, 2.2)
    tr = w.transmute(hn.Basis(math.pi, 12), 1.0, 2.2, [1.0])
    term = math.sqrt(sum(c * c for c in tr["terminal"]))
    assert term <= 1e-3, term
    assert tr["g_norm"] <= tr["v_norm"] * tr["f_ext_norm"] * (1 + 1e-6)
    print(f"transmuted: |g| = {tr['g_norm']:.4e}, |u(T)| = {term:.2e}")

    csv = hn.cost_sweep(json.dumps({"T_grid": [1.0], "modes": 12, "family_modes": 3, "random_states": 1}))
    header, row = csv.strip().splitlines()
    assert header == "T,L,cost_log,alpha_eff,n_modes,terminal_residual,status"
    assert row.endswith(",ok"), row

    try:
        hn.cost_sweep(json.dumps({"T_grid": [50.0]}))
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("bad T accepted")
    print("ok")


if __name__ == "__main__":
    main()
