"""Batch experiment driver.

Subcommands: simulate | limit | sigma | compare | check | decay.
Every output CSV starts with a comment line recording the config hash, the
effective seed and the package version, and all numbers are written in
shortest round-trip decimal form, so any file can be reproduced byte for
byte from its config.  --threads is a hint only and never changes results.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, limitlaw, pipeline, rng, stats
from .errors import BudgetExceeded, ConfigError, DegenerateVariance, SceneWalkError

OUT_ENV_VAR = "SCENEWALK_OUT"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, comment: str, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _plot(path: Path, xs, ys, xlabel: str, ylabel: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, marker="o", ms=3, lw=1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


class _Run:
    """Resolved config + output plumbing for one invocation."""

    def __init__(self, args):
        try:
            text = Path(args.config).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        self.cfg = cfgmod.parse_config(text)
        self.seed = args.seed if args.seed is not None else cfgmod.get_int(self.cfg, "run.seed")
        out = args.out or os.environ.get(OUT_ENV_VAR) or cfgmod.get(self.cfg, "output.dir")
        self.out_dir = Path(out)
        self.svg = args.svg
        self.comment = (
            f"config={cfgmod.config_hash(self.cfg)} seed={self.seed} version={__version__}"
        )

    def path(self, name: str) -> Path:
        return self.out_dir / name


def cmd_simulate(run: _Run) -> None:
    model = cfgmod.build_model(run.cfg)
    n = cfgmod.get_int(run.cfg, "run.n")
    reps = cfgmod.get_int(run.cfg, "run.reps")
    Z, z = pipeline.z_samples(model, n, reps, run.seed)
    _write_csv(
        run.path("simulate.csv"),
        run.comment,
        ["replicate", "n", "Z", "z"],
        ((i, n, Z[i], z[i]) for i in range(reps)),
    )
    if run.svg:
        _plot(run.path("simulate.svg"), np.arange(reps), z, "replicate", "z")


def _limit_samples(run: _Run, sigma2: float, reps: int):
    method = cfgmod.get(run.cfg, "analysis.v_method")
    m = cfgmod.get_int(run.cfg, "analysis.m")
    eps = cfgmod.get_float(run.cfg, "analysis.eps")
    return limitlaw.sample_delta_batch(
        sigma2, reps, rng.derive(run.seed, "limit"), method=method, m=m, eps=eps
    )


def cmd_limit(run: _Run) -> None:
    reps = cfgmod.get_int(run.cfg, "run.reps")
    sigma2 = cfgmod.get_float(run.cfg, "analysis.sigma2")
    delta, v = _limit_samples(run, sigma2, reps)
    _write_csv(
        run.path("limit.csv"),
        run.comment,
        ["replicate", "V", "delta"],
        ((i, v[i], delta[i]) for i in range(reps)),
    )
    if run.svg:
        _plot(run.path("limit.svg"), np.arange(reps), delta, "replicate", "delta")


def _sigma_series(run: _Run):
    model = cfgmod.build_model(run.cfg)
    P = cfgmod.get_int(run.cfg, "analysis.P")
    reps = cfgmod.get_int(run.cfg, "run.reps")
    return stats.autocovariance(model, P, reps, rng.derive(run.seed, "sigma"))


def cmd_sigma(run: _Run) -> None:
    series = _sigma_series(run)
    rows = [(f"rho({p})", series.rho[p], series.se[p]) for p in series.lags]
    rows.append(("sigma2", series.sigma2, series.sigma2_se))
    rows.append(("weighted_sum", series.weighted_sum, ""))
    rows.append(("tail_indicator", series.tail_indicator, ""))
    _write_csv(run.path("sigma.csv"), run.comment, ["quantity", "estimate", "se"], rows)
    if run.svg:
        _plot(run.path("sigma.svg"), series.lags, series.rho, "lag p", "rho(p)")


def _load_sample_column(path: str) -> np.ndarray:
    """Last column of a scenewalk CSV (comment + header lines skipped)."""
    try:
        with open(path) as fh:
            rows = [
                line.strip().split(",")
                for line in fh
                if line.strip() and not line.startswith("#")
            ]
    except OSError as e:
        raise ConfigError(f"cannot read sample file {path!r}: {e}") from None
    try:
        return np.array([float(r[-1]) for r in rows[1:]])
    except ValueError as e:
        raise ConfigError(f"bad sample file {path!r}: {e}") from None


def cmd_compare(run: _Run) -> None:
    t_grid = cfgmod.parse_grid(cfgmod.get(run.cfg, "analysis.t_grid"))
    if "compare.file_a" in run.cfg or "compare.file_b" in run.cfg:
        a = _load_sample_column(cfgmod.get(run.cfg, "compare.file_a"))
        b = _load_sample_column(cfgmod.get(run.cfg, "compare.file_b"))
    else:
        model = cfgmod.build_model(run.cfg)
        n = cfgmod.get_int(run.cfg, "run.n")
        reps = cfgmod.get_int(run.cfg, "run.reps")
        _, a = pipeline.z_samples(model, n, reps, run.seed)
        series = _sigma_series(run)
        if series.sigma2 <= 0:
            raise DegenerateVariance(
                f"estimated long-run variance {series.sigma2:.4g} is not positive"
            )
        b, _ = _limit_samples(run, series.sigma2, reps)
    ks = stats.ks_two_sample(a, b)
    ea = stats.ecf(a, t_grid)
    eb = stats.ecf(b, t_grid)
    dist = np.abs(ea.phi - eb.phi)
    rows = [("ks_D", ks.D, ""), ("ks_threshold", ks.threshold, "")]
    rows += [
        (f"ecf_dist(t={t_grid[i]!r})", dist[i], np.hypot(ea.se[i], eb.se[i]))
        for i in range(len(t_grid))
    ]
    _write_csv(run.path("compare.csv"), run.comment, ["quantity", "estimate", "se"], rows)
    if run.svg:
        _plot(run.path("compare.svg"), t_grid, dist, "t", "|ecf_a - ecf_b|")


def cmd_check(run: _Run) -> None:
    model = cfgmod.build_model(run.cfg)
    reps = cfgmod.get_int(run.cfg, "run.reps")
    n_grid = cfgmod.int_list(run.cfg, "analysis.n_grid")
    report = stats.fourth_moment_check(
        model, n_grid, reps, rng.derive(run.seed, "moment")
    )
    rows = [
        (int(report.n_grid[i]), report.estimates[i], report.ses[i])
        for i in range(len(report.n_grid))
    ]
    rows.append(("max_min_ratio", report.max_min_ratio, ""))
    _write_csv(run.path("moment.csv"), run.comment, ["N", "estimate", "se"], rows)

    gaps = cfgmod.int_list(run.cfg, "analysis.gaps")
    blen = cfgmod.get_int(run.cfg, "analysis.block_len")
    crows = []
    for gap in gaps:
        blocks = (0, blen - 1, blen - 1 + gap, 2 * blen - 2 + gap)
        rep = stats.char_cov_check(
            model,
            blocks,
            np.ones(blen),
            np.ones(blen),
            reps,
            rng.derive(run.seed, "charcov", gap),
        )
        crows.append((gap, rep.modulus, rep.se))
    _write_csv(run.path("charcov.csv"), run.comment, ["gap", "modulus", "se"], crows)

    if hasattr(model, "map"):
        _decay_csv(run, model)
    if run.svg:
        _plot(
            run.path("moment.svg"), report.n_grid, report.estimates, "N", "moment estimate"
        )


def _decay_csv(run: _Run, model=None) -> None:
    if model is None:
        model = cfgmod.build_model(run.cfg)
    if not hasattr(model, "map"):
        raise ConfigError("covariance decay needs a torus model")
    g = cfgmod.parse_observable(
        cfgmod.get(run.cfg, "analysis.g", run.cfg.get("model.f", ""))
    )
    h = cfgmod.parse_observable(
        cfgmod.get(run.cfg, "analysis.h", run.cfg.get("analysis.g", run.cfg.get("model.f", "")))
    )
    n_max = cfgmod.get_int(run.cfg, "analysis.n_max")
    reps = cfgmod.get_int(run.cfg, "run.reps")
    report = stats.covariance_decay(
        model.map, g, h, n_max, reps, rng.derive(run.seed, "decay")
    )
    rows = [
        (int(report.ns[i]), report.estimates[i], report.ses[i])
        for i in range(len(report.ns))
    ]
    if report.below_noise_floor:
        rows.append(("rate", "below noise floor", ""))
    else:
        rows.append(("rate", report.rate, report.residual))
    _write_csv(run.path("decay.csv"), run.comment, ["n", "estimate", "se"], rows)
    if run.svg:
        _plot(run.path("decay.svg"), report.ns, report.estimates, "n", "|Cov(g, h o T^n)|")


def cmd_decay(run: _Run) -> None:
    _decay_csv(run)


_COMMANDS = {
    "simulate": cmd_simulate,
    "limit": cmd_limit,
    "sigma": cmd_sigma,
    "compare": cmd_compare,
    "check": cmd_check,
    "decay": cmd_decay,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scenewalk", description=__doc__)
    p.add_argument("command", choices=sorted(_COMMANDS))
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--seed", type=int, default=None, help="override run.seed")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="parallelism hint (never changes results)")
    p.add_argument("--svg", action="store_true", help="also emit SVG plots")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = _Run(args)
        _COMMANDS[args.command](run)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 4
    except SceneWalkError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
