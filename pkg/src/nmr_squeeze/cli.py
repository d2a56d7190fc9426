"""Command-line entry point.

Subcommands: params, verify, fig2, evolve, sweep.  Exit codes: 0 success,
1 configuration/usage error, 2 numerical or validation failure.  Outputs are
byte-identical for identical config + seed; wall-clock stamps are opt-in
(--stamp) because they would break that guarantee.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import fields as dataclass_fields
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import diffusion_factor_matching_law
from .config import RunConfig, load_config
from .constants import TWO_PI
from .core import expectation, make_state
from .device import (
    DeviceParams,
    couplings_as_report,
    derive_couplings,
    validate_regimes,
)
from .errors import ConfigError, SimulationError
from .evolve import (
    NoiseModel,
    Propagator,
    phase_noise_ensemble,
    splitmix64,
)
from .hamiltonians import (
    NMR,
    HamiltonianKind,
    build_effective,
    build_parametric,
    build_rwa,
    full_space,
    nmr_space,
    two_mode_space,
)
from .results import CODE_VERSION, ResultTable, config_digest, write_json_report
from .squeezing import fig2_table
from .verify import run_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _metadata(cfg: RunConfig, command: str, stamp: bool) -> dict:
    meta = {
        "config_digest": config_digest(cfg.raw),
        "code_version": CODE_VERSION,
        "seed": cfg.seed,
        "command": command,
    }
    if stamp:
        meta["created_unix"] = int(time.time())
    return meta


def _out_path(args, default: str) -> Path:
    return Path(args.out) if args.out else Path(default)


# ---------------------------------------------------------------------------
# params
# ---------------------------------------------------------------------------

def cmd_params(args) -> int:
    cfg = load_config(args.config, args.seed)
    device = cfg.require_device()
    couplings = derive_couplings(device, allow_degenerate=args.allow_degenerate)
    tau = cfg.noise_tau
    report = validate_regimes(couplings, noise=cfg.noise,
                              tau=tau, threshold=args.regime_threshold)
    payload = {
        "derived": couplings_as_report(couplings),
        "regimes": report.as_dict(),
        "metadata": _metadata(cfg, "params", args.stamp),
    }
    write_json_report(_out_path(args, "params.json"), payload)
    if args.strict and not report.passed:
        print("regime validation failed (strict mode)", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    cfg = load_config(args.config, args.seed)
    couplings = None
    if args.suite in ("frohlich", "rwa"):
        cfg.require_scaled()
        couplings = cfg.require_couplings()
    report = run_suite(args.suite, couplings)
    report["metadata"] = _metadata(cfg, f"verify {args.suite}", args.stamp)
    write_json_report(_out_path(args, "report.json"), report)
    if not report["passed"]:
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        print(f"verify {args.suite}: FAILED checks: {failed}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# ---------------------------------------------------------------------------
# fig2
# ---------------------------------------------------------------------------

def _parse_ratios(text: str) -> list[float]:
    try:
        ratios = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"cannot parse --ratios {text!r} as a float list")
    if not ratios or any(r < 0 for r in ratios):
        raise ConfigError("--ratios must be a non-empty list of ratios >= 0")
    return ratios


def _mc_dim(xi: float) -> int:
    """NMR truncation keeping the squeezed-state Fock tail (which falls off
    like tanh(xi)^n) far below the ensemble leakage guard."""
    decay = -math.log(math.tanh(max(xi, 0.05)))
    return max(64, int(math.ceil(22.0 / (0.9 * decay))))


def _fig2_mc_point(r: float, xi: float, n_traj: int, seed: int,
                   backend=None) -> tuple[float, float]:
    """MC estimate of dx/x0 at squeeze parameter xi for noise ratio r.

    Dimensionless setup: kappa = 1, beta = 1/2 so 2*kappa*beta = 1, tau = xi,
    D = r.  The diffusion factor is the finite-xi factor matching the
    asymptotic law at this xi (see `calibration`).
    """
    space = nmr_space(_mc_dim(xi))
    vac = make_state(space, {NMR: 0})
    factor = diffusion_factor_matching_law(xi) if r > 0 else 1.0
    # at least 200 steps regardless of tau: the step-start phase convention
    # undercounts the walk variance by O(1/n_steps)
    dt = min(1e-3, xi / 200.0)
    noise = NoiseModel(D=r, beta=0.5, phi0=math.pi / 2,
                       n_traj=n_traj if r > 0 else 1,
                       dt=dt, master_seed=seed, diffusion_factor=factor)
    stats = phase_noise_ensemble(noise, 1.0, space, vac, tau=xi,
                                 grid_points=2, backend=backend)
    return float(stats.dx_over_x0()[-1]), float(stats.se_dx()[-1])


def cmd_fig2(args) -> int:
    cfg = load_config(args.config, args.seed)
    ratios = _parse_ratios(args.ratios)
    if args.points < 2 or args.xi_max <= 0:
        raise ConfigError("--points must be >= 2 and --xi-max > 0")
    xi_grid = np.linspace(0.0, args.xi_max, args.points)
    data = fig2_table(ratios, xi_grid)

    mc_targets: list[int] = []
    if args.mc:
        eligible = [i for i in range(1, args.points)
                    if xi_grid[i] <= args.mc_xi_max]
        if eligible:
            idx = np.linspace(0, len(eligible) - 1,
                              min(args.mc_points, len(eligible)))
            mc_targets = sorted({eligible[int(round(i))] for i in idx})

    table = ResultTable(
        columns=["xi", "r", "dx_over_x0_analytic", "dx_over_x0_mc", "mc_stderr"],
        metadata=_metadata(cfg, "fig2", args.stamp))
    for r_index, r in enumerate(data.ratios):
        curve = data.curves[r]
        for i, xi in enumerate(data.xi_grid):
            mc_val = mc_se = None
            if args.mc and i in mc_targets:
                seed = splitmix64(cfg.seed, r_index * 1_000_003 + i)
                mc_val, mc_se = _fig2_mc_point(r, float(xi), args.trajectories,
                                               seed)
            table.add_row([float(xi), r, float(curve[i]), mc_val, mc_se])
    out = _out_path(args, "fig2.csv")
    table.write_csv(out)

    minima_payload = {
        "minima": [
            {"r": m.r, "xi_star": None if m.boundary else m.xi_star,
             "dx_over_x0_min": None if m.boundary else m.value,
             "boundary": m.boundary}
            for m in data.minima
        ],
        "metadata": _metadata(cfg, "fig2", args.stamp),
    }
    write_json_report(out.with_name(out.stem + "_minima.json"), minima_payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

def _quadrature_sums(space, label: str):
    """Embedded dimensionless X, P and number operators for one mode."""
    from .core import OperatorMatrix, embed_operator, ladder_ops, number_op, single_space

    dim = space.dim_of(label)
    low, rai = ladder_ops(dim, label)
    sub = single_space(label, dim)
    x_local = OperatorMatrix(sub, (low.matrix + rai.matrix).tocsr(), True)
    p_local = OperatorMatrix(sub, (1j * (rai.matrix - low.matrix)).tocsr(), True)
    x = embed_operator(x_local, label, space)
    p = embed_operator(p_local, label, space)
    n = embed_operator(number_op(dim, label), label, space)
    return x, p, n


def _evolve_rows(model: str, cfg: RunConfig, leakage_tol: float):
    c = cfg.require_couplings()
    n_a, n_b = cfg.require_spaces()
    opts = cfg.evolve
    times = np.linspace(0.0, opts.t_max, opts.grid_points)

    from .errors import SpaceMismatchError

    if model == "full-rwa":
        space = full_space(n_a, n_b)
        h = build_rwa(c, space)
        try:
            state0 = make_state(space,
                                {k: int(v) for k, v in opts.initial.items()})
        except SpaceMismatchError as exc:
            raise ConfigError(f"bad evolve.initial block: {exc}") from exc
    elif model == "pdc":
        space = two_mode_space(n_a, n_b)
        h = build_effective(c, space, HamiltonianKind.PDC)
        init = {k: int(v) for k, v in opts.initial.items() if k != "q"}
        try:
            state0 = make_state(space, init)
        except SpaceMismatchError as exc:
            raise ConfigError(f"bad evolve.initial block: {exc}") from exc
    elif model == "parametric":
        if cfg.noise is None:
            raise ConfigError("the parametric model needs a noise block "
                              "(beta and phi0 define the drive)")
        space = nmr_space(n_b)
        h = build_parametric(c.kappa, cfg.noise.beta, cfg.noise.phi0, space)
        state0 = make_state(space, {NMR: 0})
    else:  # pragma: no cover - guarded by config parsing
        raise ConfigError(f"unknown model {model!r}")

    xb, pb, nb_op = _quadrature_sums(space, NMR)
    na_op = None
    if "a" in space.labels:
        _, _, na_op = _quadrature_sums(space, "a")
    ground = None
    if "q" in space.labels:
        from .core import OperatorMatrix, embed_operator, qubit_ops
        ground = embed_operator(qubit_ops("q")["p_ground"], "q", space)

    prop = Propagator(h)
    rows = []
    for t in times:
        try:
            psi = prop.advance(state0, float(t), leakage_tol=leakage_tol)
        except SimulationError as exc:
            raise SimulationError(f"model {model!r} at t={t!r}: {exc}") from exc
        mean_x = np.real(expectation(xb, psi))
        mean_p = np.real(expectation(pb, psi))
        xx = np.real(expectation(xb @ xb, psi))
        pp = np.real(expectation(pb @ pb, psi))
        dx = math.sqrt(max(xx - mean_x ** 2, 0.0))
        dp = math.sqrt(max(pp - mean_p ** 2, 0.0))
        exp_nb = np.real(expectation(nb_op, psi))
        exp_na = np.real(expectation(na_op, psi)) if na_op is not None else None
        qpop = np.real(expectation(ground, psi)) if ground is not None else None
        leak = max(psi.top_fraction_population(lab)
                   for lab, d in space.subsystems if d > 2)
        rows.append([float(t), model, float(exp_nb),
                     None if exp_na is None else float(exp_na),
                     dx, dp, None if qpop is None else float(qpop),
                     float(leak)])
    return rows


def cmd_evolve(args) -> int:
    cfg = load_config(args.config, args.seed)
    cfg.require_scaled()
    if cfg.evolve is None:
        raise ConfigError("evolve command needs an 'evolve' block in the config")
    table = ResultTable(
        columns=["t", "model", "exp_nb", "exp_na", "dx_over_x0",
                 "dp_over_p0", "qubit_ground_pop", "leakage"],
        metadata=_metadata(cfg, "evolve", args.stamp))
    for model in cfg.evolve.models:
        for row in _evolve_rows(model, cfg, cfg.evolve.leakage_tol):
            table.add_row(row)
    table.write_csv(_out_path(args, "timeseries.csv"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_SWEEP_ANGULAR = {"kappa", "g_a", "g_b", "lambda_a", "lambda_b", "Omega",
                  "Delta_a", "Delta_b", "delta"}
_SWEEP_PLAIN = {"theta", "sin_theta", "cos_theta", "x0", "p0"}


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.seed)
    device = cfg.require_device()
    field_name = args.param.removeprefix("device.")
    if field_name not in {f.name for f in dataclass_fields(DeviceParams)}:
        raise ConfigError(f"unknown device field {field_name!r}")
    current = getattr(device, field_name)
    if not isinstance(current, (int, float)) or isinstance(current, bool):
        raise ConfigError(f"device field {field_name!r} is not numeric")

    quantities = [q.strip() for q in args.emit.split(",") if q.strip()]
    columns = [field_name]
    for q in quantities:
        if q in _SWEEP_ANGULAR:
            columns.append(f"{q}_over_2pi_hz")
        elif q in _SWEEP_PLAIN:
            columns.append(q)
        else:
            raise ConfigError(
                f"unknown emit quantity {q!r}; choose from "
                f"{sorted(_SWEEP_ANGULAR | _SWEEP_PLAIN)}")

    values = np.linspace(args.start, args.stop, args.steps)
    table = ResultTable(columns=columns,
                        metadata=_metadata(cfg, "sweep", args.stamp))
    for val in values:
        val = float(val)
        if field_name == "m":
            val = int(round(val))
        if field_name == "n_g" and abs(val - 0.5) <= 1e-9:
            print(f"sweep: skipping degenerate n_g={val!r} (cos theta = 0)",
                  file=sys.stderr)
            continue
        try:
            dev = replace(device, **{field_name: val})
            c = derive_couplings(dev)
        except ConfigError as exc:
            print(f"sweep: skipping {field_name}={val!r}: {exc}", file=sys.stderr)
            continue
        row = [val]
        for q in quantities:
            raw = getattr(c, q)
            row.append(raw / TWO_PI if q in _SWEEP_ANGULAR else raw)
        table.add_row(row)
    table.write_csv(_out_path(args, "sweep.csv"))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="nmr-squeeze",
                     description="CPB/STLR/NMR squeezing simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output path")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--strict", action="store_true",
                       help="treat regime-validation failure as an error")
        p.add_argument("--stamp", action="store_true",
                       help="embed a wall-clock timestamp (breaks byte-identical reruns)")

    p = sub.add_parser("params", help="derived couplings and regime report")
    common(p)
    p.add_argument("--allow-degenerate", action="store_true",
                   help="permit n_g = 1/2 (kills the NMR coupling)")
    p.add_argument("--regime-threshold", type=float, default=10.0)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("verify", help="run a verification suite")
    common(p)
    p.add_argument("--suite", required=True,
                   choices=["frohlich", "rwa", "bogoliubov", "squeeze-law"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fig2", help="noisy-squeezing efficiency curves")
    common(p)
    p.add_argument("--ratios", default="0,0.001,0.01,0.05",
                   help="comma-separated noise ratios D/(2 kappa beta)")
    p.add_argument("--xi-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=301)
    p.add_argument("--mc", action="store_true",
                   help="overlay Monte-Carlo points (calibrated diffusion)")
    p.add_argument("--trajectories", type=int, default=2000)
    p.add_argument("--mc-points", type=int, default=4,
                   help="number of xi targets sampled per ratio with --mc")
    p.add_argument("--mc-xi-max", type=float, default=1.2,
                   help="largest xi sampled by --mc (cost grows fast beyond)")
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser("evolve", help="time series of the configured models")
    common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep", help="sweep a device field")
    common(p)
    p.add_argument("--param", required=True, help="device field to sweep")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--emit", required=True,
                   help="comma-separated derived quantities")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"configuration error: cannot read/write path: {exc}",
              file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:  # pragma: no cover - console-script shim
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
