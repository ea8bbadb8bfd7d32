"""End-to-end acceptance checks.

Each test covers one numbered criterion and prints a one-line PASS/FAIL
verdict (run with `pytest tests/test_acceptance.py -s` to see them all).
The whole file is Monte Carlo with fixed seeds, so results are exactly
reproducible run to run.
"""

import subprocess
import sys

import numpy as np

from scenewalk import limitlaw, pipeline, stats, walk
from scenewalk.scenery import (
    IIDScenery,
    TorusCoin,
    TorusDirect,
    TorusMulti,
    generate,
)
from scenewalk.torus import FourierMode, TrigPolynomial, affine, make_torus_map
from scenewalk.walk import (
    evaluate_functional,
    expected_scaled_self_intersection,
    max_excursion,
    sample_walk,
)

CAT = make_torus_map([[2, 1], [1, 1]])
COS = FourierMode((1, 0))
HALF_PLUS = affine(0.5, [(0.5, COS)])  # (1 + cos(2 pi x)) / 2
GAUSS_LIMIT = 8.0 / (3.0 * np.sqrt(2.0 * np.pi))  # E of the limiting conditional variance


def _verdict(num: int, label: str, ok: bool) -> bool:
    print(f"[criterion {num}] {label}: {'PASS' if ok else 'FAIL'}")
    return ok


def test_criterion_1_occupation_identity():
    models = [
        IIDScenery("rademacher"),
        TorusDirect(CAT, COS),
        TorusCoin(CAT, HALF_PLUS),
        TorusMulti(CAT, (1.0, -1.0), (HALF_PLUS, affine(0.5, [(-0.5, COS)]))),
    ]
    ok = True
    for i in range(1000):
        model = models[i % len(models)]
        path = sample_walk(256, 10_000 + i)
        window = generate(model, max_excursion(path), seed=20_000 + i)
        try:
            # raises if the direct sum and the occupation-weighted sum differ
            evaluate_functional(window, path, auto_extend=False)
        except AssertionError:
            ok = False
            break
    assert _verdict(1, "direct sum equals occupation-weighted sum on 1000 pairs", ok)


def test_criterion_2_self_intersection_mean():
    reps, m = 10**5, 10**4
    v = limitlaw.sample_v_batch(reps, seed=1, method="walk", m=m)
    mean = float(v.mean())
    rel = abs(mean / GAUSS_LIMIT - 1.0)
    ok = rel < 0.02
    # cross-check against the exact finite-n oracle as well
    exact = expected_scaled_self_intersection(m)
    se = v.std(ddof=1) / np.sqrt(reps)
    ok = ok and abs(mean - exact) < 4 * se
    assert _verdict(
        2, f"mean scaled self-intersection {mean:.4f} within 2% of {GAUSS_LIMIT:.4f}", ok
    )


def _ks_and_ecf(z: np.ndarray, delta: np.ndarray):
    d = stats.ks_two_sample(z, delta).D
    t = np.linspace(-3.0, 3.0, 61)
    gap = float(np.max(np.abs(stats.ecf(z, t).phi - stats.ecf(delta, t).phi)))
    return d, gap


def test_criterion_3_baseline_convergence():
    n, reps = 2**14, 4000
    _, z = pipeline.z_samples(IIDScenery("rademacher"), n, reps, seed=2)
    delta, _ = limitlaw.sample_delta_batch(1.0, reps, seed=3, method="walk", m=n)
    d, gap = _ks_and_ecf(z, delta)
    ok = d <= 0.05 and gap <= 0.05
    assert _verdict(3, f"i.i.d. baseline KS D={d:.4f}, sup ECF gap={gap:.4f}", ok)


def test_criterion_4_dynamical_convergence():
    n, reps = 2**14, 4000
    direct = TorusDirect(CAT, COS)
    auto = stats.autocovariance(direct, P=10, reps=10**6, seed=4)
    ok = abs(auto.sigma2 - 0.5) <= 0.02
    ok = ok and bool(np.all(np.abs(auto.rho[1:]) < 4 * auto.se[1:]))
    _, z = pipeline.z_samples(direct, n, reps, seed=5)
    delta, _ = limitlaw.sample_delta_batch(auto.sigma2, reps, seed=6, method="walk", m=n)
    d_a = stats.ks_two_sample(z, delta).D
    ok = ok and d_a <= 0.05

    coin = TorusCoin(CAT, HALF_PLUS)
    auto_b = stats.autocovariance(coin, P=10, reps=10**6, seed=7)
    _, z_b = pipeline.z_samples(coin, n, reps, seed=8)
    delta_b, _ = limitlaw.sample_delta_batch(auto_b.sigma2, reps, seed=9, method="walk", m=n)
    d_b = stats.ks_two_sample(z_b, delta_b).D
    ok = ok and d_b <= 0.05
    assert _verdict(
        4,
        f"cat map sigma2={auto.sigma2:.4f}, KS D={d_a:.4f} (direct) / {d_b:.4f} (coin)",
        ok,
    )


def test_criterion_5_variance_scaling():
    n_grid = [2**10, 2**12, 2**14, 2**16]
    reps = 10**4
    ok = True
    details = []
    for model, sigma2, sigma2_tag in [
        (IIDScenery("rademacher"), 1.0, "iid"),
        (TorusDirect(CAT, COS), None, "cat"),
    ]:
        if sigma2 is None:
            sigma2 = stats.autocovariance(model, P=10, reps=10**6, seed=10).sigma2
        r = stats.variance_scaling(model, n_grid, reps=reps, seed=11)
        target = sigma2 * expected_scaled_self_intersection(n_grid[-1])
        rel = abs(r.prefactors[-1] / target - 1.0)
        ok = ok and abs(r.slope - 1.5) < 0.1 and rel < 0.05
        details.append(f"{sigma2_tag} slope={r.slope:.3f} prefactor off by {100 * rel:.1f}%")
    assert _verdict(5, "; ".join(details), ok)


def test_criterion_6_fourth_moment():
    n_grid = [8, 16, 32, 48]
    analytic = stats.fourth_moment_check(
        IIDScenery("rademacher"), n_grid, reps=0, seed=12, analytic=True
    )
    ok = bool(
        np.allclose(analytic.estimates, 3.0 - 2.0 / analytic.n_grid, rtol=0, atol=1e-12)
    )
    cat = stats.fourth_moment_check(TorusDirect(CAT, COS), n_grid, reps=30_000, seed=13)
    ok = ok and cat.max_min_ratio <= 2.0

    auto = stats.autocovariance(TorusDirect(CAT, COS), P=32, reps=2 * 10**5, seed=14)
    w = np.sqrt(1.0 + auto.lags[17:])
    increment = float(np.dot(w, np.abs(auto.rho[17:])))
    inc_se = float(np.sqrt(np.sum((w * auto.se[17:]) ** 2)))
    ok = ok and increment < 4 * inc_se
    assert _verdict(
        6,
        f"analytic exact, cat ratio {cat.max_min_ratio:.2f}, "
        f"W increment {increment:.4f} < 4 SE {4 * inc_se:.4f}",
        ok,
    )


def test_criterion_7_decorrelation():
    direct = TorusDirect(CAT, COS)
    r8 = stats.char_cov_check(
        direct, (0, 1, 9, 10), [1.0, 1.0], [1.0, 1.0], reps=30_000, seed=15
    )
    ok = r8.modulus < 4 * r8.se

    decay = stats.covariance_decay(CAT, COS, COS, n_max=10, reps=50_000, seed=16)
    ok = ok and bool(np.all(decay.estimates[1:] < 4 * decay.ses[1:]))

    two = TrigPolynomial((((1, 0), 1.0, 0.0), ((2, 1), 1.0, 0.0)))
    horizon = stats.collision_horizon(CAT, two, two, n_max=12)
    prof = stats.covariance_decay(CAT, two, two, n_max=8, reps=50_000, seed=17)
    ok = ok and bool(np.all(prof.estimates[horizon + 1 :] < 4 * prof.ses[horizon + 1 :]))
    assert _verdict(
        7,
        f"block-gap-8 cov {r8.modulus:.4f} < 4 SE, cos decay zero for n >= 1, "
        f"two-mode horizon {horizon}",
        ok,
    )


def test_criterion_8_reproducibility(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "model.variant = torus-direct\n"
        "model.map = 2,1,1,1\n"
        "model.f = 1:1,0\n"
        "run.n = 512\n"
        "run.reps = 300\n"
        "run.seed = 99\n"
        "analysis.m = 1000\n"
    )
    outputs = []
    for i, threads in enumerate(["1", "7", "1"]):
        out = tmp_path / f"out{i}"
        for cmd, name in [("simulate", "simulate.csv"), ("limit", "limit.csv")]:
            res = subprocess.run(
                [
                    sys.executable, "-m", "scenewalk.cli", cmd,
                    "--config", str(cfg), "--out", str(out), "--threads", threads,
                ],
                capture_output=True,
            )
            assert res.returncode == 0, res.stderr.decode()
        outputs.append(
            ((out / "simulate.csv").read_bytes(), (out / "limit.csv").read_bytes())
        )
    ok = outputs[0] == outputs[1] == outputs[2]
    assert _verdict(8, "byte-identical CSVs across reruns and thread counts", ok)
