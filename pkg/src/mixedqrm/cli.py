"""Command-line entry point: every computation as a reproducible run.

Each subcommand resolves its configuration (flags, optionally overridden
by --config file.json), runs one computation, writes a CSV or JSON
artifact plus a manifest.json recording the full config, code version,
truncations and any warnings.  Exit codes: 0 success, 2 invalid config,
3 convergence failure.

Numpy-heavy modules are imported lazily so RABI_THREADS can cap the
BLAS thread pool before the libraries load.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import warnings
from pathlib import Path

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_NO_CONVERGENCE = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _write_manifest(
    out_path: Path, command: str, config: dict, truncations: dict, warns: list[str]
) -> None:
    from . import __version__

    manifest = {
        "command": command,
        "config": config,
        "version": __version__,
        "truncations": truncations,
        "warnings": warns,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    manifest_path = out_path.parent / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_gnuplot_stub(out_path: Path, xlabel: str, ylabel: str) -> None:
    stub = (
        'set datafile separator ","\n'
        f'set xlabel "{xlabel}"\nset ylabel "{ylabel}"\n'
        f'plot "{out_path.name}" skip 1 using 1:2 with lines notitle\n'
    )
    (out_path.parent / (out_path.stem + ".gp")).write_text(stub)


def _model_params(cfg: dict):
    from .model import ModelParams

    return ModelParams(
        delta=cfg["delta"], g1=cfg["g1"], g2=cfg["g2"], epsilon=cfg.get("epsilon", 0.0)
    )


def _resolve_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "config") and v is not None}
    if getattr(args, "config", None):
        overrides = json.loads(Path(args.config).read_text())
        if not isinstance(overrides, dict):
            raise ValueError("--config must contain a JSON object")
        cfg.update(overrides)
    return cfg


# ---------------------------------------------------------------------------
# subcommand handlers: each returns (header, rows, truncations, plot_labels)


def _run_frame(cfg):
    from .model import build_frame, collapse_limits, pole_energy, pole_gap

    params = _model_params(cfg)
    frame = build_frame(params)
    rows = [
        ("beta", frame.beta),
        ("u", frame.u),
        ("v", frame.v),
        ("w", frame.w),
        ("w_prime", frame.w_prime),
        ("r", frame.r),
        ("h_A", frame.h_A),
        ("h_B", frame.h_B),
        ("pole_A_0", pole_energy("A", 0, params)),
        ("pole_B_0", pole_energy("B", 0, params)),
        ("pole_gap", pole_gap(params)),
        ("collapse_A", collapse_limits(params.g1)[0]),
    ]
    return ["quantity", "value"], rows, {}, ("quantity", "value")


def _run_gcurve(cfg):
    from .gfunction import scan

    params = _model_params(cfg)
    result = scan(params, cfg["window"][0], cfg["window"][1], cfg.get("resolution"), cfg.get("n_terms"))
    rows = [
        (float(e), float(s), float(m))
        for e, s, m in zip(result.E, result.sign, result.log10_magnitude)
    ]
    return ["E", "G_sign", "G_log_magnitude"], rows, {"n_terms": cfg.get("n_terms")}, ("E", "G_sign")


def _run_spectrum(cfg):
    from .gfunction import find_roots

    params = _model_params(cfg)
    spec = find_roots(params, cfg["window"][0], cfg["window"][1], cfg.get("n_terms"))
    rows = [
        (i, root.E, root.residual, root.N_used) for i, root in enumerate(spec.roots)
    ]
    return ["level_index", "E", "residual", "n_terms_used"], rows, {"n_terms": cfg.get("n_terms")}, ("level_index", "E")


def _run_sweep(cfg):
    import numpy as np

    from .gfunction import spectrum_sweep

    params = _model_params(cfg)
    grid = np.linspace(cfg["g2_min"], cfg["g2_max"], cfg["g2_points"])
    result = spectrum_sweep(params, grid, cfg["levels"], cfg.get("n_terms"))
    if result.errors:
        for g2, msg in result.errors.items():
            print(f"warning: sweep point g2={g2} failed: {msg}", file=sys.stderr)
    rows = [(g2, idx, e) for g2, idx, e in result.rows]
    return ["g2", "level_index", "E"], rows, {"n_terms": cfg.get("n_terms")}, ("g2", "E")


def _run_exceptional(cfg):
    import numpy as np

    from .exceptional import ExceptionalProblem, find_exceptional_roots

    problem = ExceptionalProblem(cfg["family"], cfg["m"], cfg["delta"], cfg["g1"])
    grid = np.linspace(cfg["g2_min"], cfg["g2_max"], cfg["g2_points"])
    roots = find_exceptional_roots(problem, grid, cfg.get("n_terms"), verify=not cfg.get("no_verify"))
    rows = [
        (r.family, r.m, r.g2_star, r.energy, r.oracle_gap if r.oracle_gap is not None else float("nan"))
        for r in roots
    ]
    return ["family", "m", "g2_star", "energy", "oracle_gap"], rows, {"n_terms": cfg.get("n_terms")}, ("g2_star", "energy")


def _run_diag(cfg):
    from .refdiag import oracle_spectrum

    params = _model_params(cfg)
    system = oracle_spectrum(params, cfg["levels"], cfg.get("fock_dim"))
    rows = [(i, float(e)) for i, e in enumerate(system.energies)]
    return ["level_index", "E"], rows, {"fock_dim": system.fock_dim}, ("level_index", "E")


def _run_effective(cfg):
    from .effective import effective_params

    params = _model_params(cfg)
    eff = effective_params(params)
    rows = [
        ("epsilon_eff", eff.epsilon_eff),
        ("omega_eff", eff.omega_eff),
        ("g1_eff", eff.g1_eff),
        ("shift", eff.shift),
        ("g1c_eff", eff.g1c_eff),
    ]
    return ["quantity", "value"], rows, {}, ("quantity", "value")


def _run_transmission(cfg):
    import numpy as np

    from .effective import compare_spectra

    params = _model_params(cfg)
    eps_grid = np.linspace(cfg["eps_min"], cfg["eps_max"], cfg["eps_points"])
    result = compare_spectra(params, eps_grid, cfg["levels"], cfg.get("fock_dim"))
    rows = [(eps, tag, n, de) for eps, tag, n, de in result["rows"]]
    return (
        ["epsilon", "model_tag", "n", "dE_n"],
        rows,
        {"fock_dim": cfg.get("fock_dim"), "symmetry_point": result["symmetry_point"]},
        ("epsilon", "dE_n"),
    )


def _run_dynamics(cfg):
    import numpy as np

    from .observables import fidelity_series

    params = _model_params(cfg)
    t_list = np.arange(0.0, cfg["t_max"] + 1e-12, cfg["t_step"])
    t, f_eff, f_1p = fidelity_series(params, t_list, cfg.get("fock_dim"))
    rows = list(zip(map(float, t), map(float, f_eff), map(float, f_1p)))
    return ["t", "F_eff", "F_1P"], rows, {"fock_dim": cfg.get("fock_dim")}, ("t", "F_eff")


def _run_wigner(cfg):
    import numpy as np

    from .observables import reduced_field_density, wigner
    from .refdiag import ground_state
    from .effective import build_effective_hamiltonian

    params = _model_params(cfg)
    if cfg.get("model") == "effective":
        h = build_effective_hamiltonian(params, cfg.get("fock_dim") or 200)
        energies, states = np.linalg.eigh(h.entries)
        state = states[:, 0].astype(complex)
    else:
        _, state = ground_state(params, cfg.get("fock_dim"))
        state = state.astype(complex)
    axis = np.linspace(-cfg["alpha_max"], cfg["alpha_max"], cfg["grid_points"])
    grid = wigner(reduced_field_density(state), axis, axis)
    rows = [
        (float(re), float(im), float(grid.values[j, i]))
        for j, im in enumerate(grid.alpha_im)
        for i, re in enumerate(grid.alpha_re)
    ]
    return ["alpha_re", "alpha_im", "W"], rows, {"fock_dim": state.size // 2}, ("alpha_re", "W")


def _run_order_params(cfg):
    import numpy as np

    from .observables import sweep_order_parameters

    ratios = np.linspace(cfg["ratio_min"], cfg["ratio_max"], cfg["ratio_points"])
    rows = sweep_order_parameters(cfg["delta"], cfg["g2_list"], ratios, cfg.get("fock_dim"))
    return ["ratio", "g2", "M", "N_ph"], list(rows), {"fock_dim": cfg.get("fock_dim")}, ("ratio", "N_ph")


_HANDLERS = {
    "frame": _run_frame,
    "gcurve": _run_gcurve,
    "spectrum": _run_spectrum,
    "sweep": _run_sweep,
    "exceptional": _run_exceptional,
    "diag": _run_diag,
    "effective": _run_effective,
    "transmission": _run_transmission,
    "dynamics": _run_dynamics,
    "wigner": _run_wigner,
    "order-params": _run_order_params,
}


def _add_model_args(p: argparse.ArgumentParser, delta=True, g2=True) -> None:
    if delta:
        p.add_argument("--delta", type=float, required=True)
    p.add_argument("--g1", type=float, required=True)
    if g2:
        p.add_argument("--g2", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.0)


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", "-o", type=str, default=None, help="artifact path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", type=str, default=None, help="JSON file overriding flags")
    p.add_argument("--gnuplot-stub", action="store_true")
    p.add_argument(
        "--n-terms",
        dest="n_terms",
        type=int,
        default=None,
        help="fixed series length (default: adaptive)",
    )
    p.add_argument("--fock-dim", dest="fock_dim", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixedqrm",
        description="Exact spectrum and observables of the mixed quantum Rabi model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frame", help="Bogoliubov frame constants, poles, pole gap")
    _add_model_args(p, delta=False)
    p.set_defaults(delta=1.0)

    p = sub.add_parser("gcurve", help="signed log-magnitude G scan over an energy window")
    _add_model_args(p)
    p.add_argument("--window", type=float, nargs=2, required=True)
    p.add_argument("--resolution", type=float, default=None)

    p = sub.add_parser("spectrum", help="regular eigenvalues in an energy window")
    _add_model_args(p)
    p.add_argument("--window", type=float, nargs=2, required=True)

    p = sub.add_parser("sweep", help="lowest levels along a g2 grid")
    _add_model_args(p, g2=False)
    p.set_defaults(g2=0.0)
    p.add_argument("--g2-min", dest="g2_min", type=float, default=0.0)
    p.add_argument("--g2-max", dest="g2_max", type=float, default=0.49)
    p.add_argument("--g2-points", dest="g2_points", type=int, default=50)
    p.add_argument("--levels", type=int, default=8)

    p = sub.add_parser("exceptional", help="exceptional eigenvalues on a pole line")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--g1", type=float, required=True)
    p.add_argument("--family", choices=("A", "B"), required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--g2-min", dest="g2_min", type=float, default=0.005)
    p.add_argument("--g2-max", dest="g2_max", type=float, default=0.495)
    p.add_argument("--g2-points", dest="g2_points", type=int, default=500)
    p.add_argument("--no-verify", action="store_true")

    p = sub.add_parser("diag", help="oracle spectrum by truncated diagonalization")
    _add_model_args(p)
    p.add_argument("--levels", type=int, default=12)

    p = sub.add_parser("effective", help="effective one-photon model parameters")
    _add_model_args(p)
    p.set_defaults(delta=1.0)

    p = sub.add_parser("transmission", help="level differences vs external bias")
    _add_model_args(p)
    p.add_argument("--eps-min", dest="eps_min", type=float, default=-1.0)
    p.add_argument("--eps-max", dest="eps_max", type=float, default=1.0)
    p.add_argument("--eps-points", dest="eps_points", type=int, default=41)
    p.add_argument("--levels", type=int, default=4)

    p = sub.add_parser("dynamics", help="fidelity of effective and one-photon evolutions")
    _add_model_args(p)
    p.add_argument("--t-max", dest="t_max", type=float, default=20.0)
    p.add_argument("--t-step", dest="t_step", type=float, default=0.02)

    p = sub.add_parser("wigner", help="ground-state Wigner function")
    _add_model_args(p)
    p.add_argument("--model", choices=("full", "effective"), default="full")
    p.add_argument("--alpha-max", dest="alpha_max", type=float, default=4.0)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=81)

    p = sub.add_parser("order-params", help="magnetization and photon number sweep")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--g2-list", dest="g2_list", type=float, nargs="+", required=True)
    p.add_argument("--ratio-min", dest="ratio_min", type=float, default=0.1)
    p.add_argument("--ratio-max", dest="ratio_max", type=float, default=1.5)
    p.add_argument("--ratio-points", dest="ratio_points", type=int, default=15)

    for name, sp in sub.choices.items():
        _add_common_args(sp)
        sp.set_defaults(func=_HANDLERS[name])
    return parser


def main(argv: list[str] | None = None) -> int:
    threads = os.environ.get("RABI_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    from .fock import TruncationError
    from .model import ParameterError
    from .refdiag import ConvergenceFailure

    warns: list[str] = []
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            header, rows, truncations, labels = args.func(cfg)
            warns = [str(w.message) for w in caught]
    except (ParameterError, KeyError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except (ConvergenceFailure, TruncationError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE

    if cfg.get("output"):
        out_path = Path(cfg["output"])
        out_path.parent.mkdir(parents=True, exist_ok=True)
        if cfg.get("format") == "json":
            payload = [dict(zip(header, row)) for row in rows]
            out_path.write_text(json.dumps(payload, indent=2) + "\n")
        else:
            _write_csv(out_path, header, rows)
        _write_manifest(out_path, args.command, cfg, truncations, warns)
        if cfg.get("gnuplot_stub"):
            _write_gnuplot_stub(out_path, *labels)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
