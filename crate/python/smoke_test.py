"""Smoke test of the Python bindings; run after building crates/py."""

import math
from pathlib import Path

import junction_asym_py as ja

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    c_log, flux = ja.capacity(radius=0.5)
    assert abs(c_log - 0.5) < 1e-12 and flux == 1.0, (c_log, flux)
    square = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
    c_log, flux = ja.capacity(vertices=square)
    assert abs(c_log - 0.5902) < 1e-3 and abs(flux - 1.0) < 1e-6, (c_log, flux)

    fit = ja.fit_rate([(h, 2.0 * h) for h in (0.1, 0.05, 0.025)])
    assert abs(fit["slope"] - 1.0) < 1e-12, fit

    cfg = ja.Config.standard(alpha=1, h=0.05)
    assert cfg.regime == "alpha1" and cfg.n_rods == 1
    ing = ja.Ingredients(cfg)
    coeffs = ing.coefficients(0.05)
    assert len(coeffs["a"]) == 1 and math.isfinite(coeffs["a"][0])

    sol = ing.solution(0.05)
    value, part = sol.evaluate(0.5, 0.0, 0.025)
    assert part == "plate" and math.isfinite(value)
    assert sol.evaluate(5.0, 0.0, 0.025) is None
    rows = sol.probe_grid(5)
    assert {r[4] for r in rows} >= {"plate", "rod1"}

    ref = ja.Reference(cfg, level=0)
    assert ref.dofs > 0 and ref.energy > 0
    errs = sol.errors(ref)
    assert errs["rod_h1_err"] < errs["norm_of_reference_rod"], errs

    loaded = ja.Config.load(str(CONFIGS / "match_zero.toml"))
    results = ja.run_config(str(CONFIGS / "match_zero.toml"))
    assert all(passed for _, passed, _ in results), results
    print(f"ok: {cfg!r}, {loaded!r}, {len(rows)} probe rows, {len(results)} experiments")


if __name__ == "__main__":
    main()
