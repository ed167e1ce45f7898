"""Command-line entry point.

Exit codes: 0 success, 1 configuration/usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .analysis import (
    energy_basis,
    limit_cycle_check,
    structure_analysis,
    sync_report,
    thermo_report,
)
from .errors import ConfigError, NumericalError
from .liouvillian import assemble, hamiltonian_superop
from .models import PRESETS, WIRINGS, ThermalMachineParams, build_preset, sweep_preset
from .perturbation import first_order_steady_correction, split_correction
from .spectral import (
    classify,
    conjugate_symmetry_error,
    eig_left_right,
    unique_steady_state,
)
from .sweep import load_config, run_sweep, serialize

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

DEFAULTS = {
    "coupled_machines": {"epsilon": 0.01, "delta": 0.02},
    "spin1_entrainment": {"epsilon": 0.01, "delta": 0.1},
    "coupled_spin1": {"epsilon": 0.01, "delta": 0.0},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _parse_param(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise ConfigError(f"--param expects KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    try:
        return key, float(value)
    except ValueError:
        return key, value


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", default="coupled_machines", choices=sorted(PRESETS))
    p.add_argument("--epsilon", type=float, help="coupling strength")
    p.add_argument("--delta", type=float, help="detuning")
    p.add_argument("--omega", type=float, help="machine level-spacing parameter (coupled_machines)")
    p.add_argument("--wiring", choices=sorted(WIRINGS), help="bath wiring (coupled_machines)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="extra builder parameter, repeatable")


def _preset_from_args(args, epsilon: float | None = None):
    params = dict(_parse_param(t) for t in args.param)
    if args.preset == "coupled_machines":
        if args.omega is not None:
            params["omega"] = args.omega
        if args.wiring is not None:
            params["wiring"] = args.wiring
    elif args.omega is not None or args.wiring is not None:
        raise ConfigError("--omega and --wiring only apply to coupled_machines")
    if args.preset == "entanglement_machine":
        if args.epsilon is not None or args.delta is not None:
            raise ConfigError("entanglement_machine takes g1, g2, g3 and eps_detuning via --param")
        return build_preset(args.preset, **params)
    defaults = DEFAULTS[args.preset]
    eps = epsilon if epsilon is not None else (args.epsilon if args.epsilon is not None else defaults["epsilon"])
    delta = args.delta if args.delta is not None else defaults["delta"]
    try:
        return sweep_preset(args.preset, eps, delta, params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _fmt_c(z: complex) -> str:
    return f"{z.real:+.6e}{z.imag:+.6e}j"


def cmd_spectrum(args) -> int:
    preset = _preset_from_args(args)
    lmat = assemble(preset.model)
    spec = classify(eig_left_right(lmat))
    print(f"preset={preset.name} dim={preset.model.dim} liouville_dim={lmat.shape[0]}")
    print(f"norm={spec.norm:.6e} conjugate_symmetry_error={conjugate_symmetry_error(spec.eigenvalues):.3e}")
    for tag in ("steady", "oscillating_coherence", "decaying"):
        print(f"count_{tag}={spec.count(tag)}")
    limit = len(spec) if args.all else min(args.top, len(spec))
    print("index  eigenvalue                        tag")
    for mu in range(limit):
        print(f"{mu:5d}  {_fmt_c(spec.eigenvalues[mu]):32s}  {spec.tags[mu]}")
    return EXIT_OK


def cmd_steady(args) -> int:
    preset = _preset_from_args(args)
    lmat = assemble(preset.model)
    rho = unique_steady_state(lmat)
    basis = energy_basis(preset.model.h0)
    sync = sync_report(rho, basis, limit_cycle_check(preset.model))
    print(f"preset={preset.name} epsilon={preset.model.epsilon:.6g}")
    print("populations=" + " ".join(f"{p:.6e}" for p in np.real(np.diag(rho))))
    print(f"s_coh={sync.s_coh:.6e}")
    print(f"l1_coh={sync.l1_coh:.6e}")
    print(f"limit_cycle_valid={str(sync.limit_cycle_valid).lower()}")
    if isinstance(preset.params, ThermalMachineParams):
        th = thermo_report(rho, preset)
        print(f"power={th.power:.6e}")
        print(f"j_hot={th.j_hot:.6e}")
        print(f"j_cold={th.j_cold:.6e}")
        print(f"first_law_residual={th.first_law_residual:.3e}")
        print(f"power_closed_form={th.power_closed_form:.6e}")
        print(f"j_hot_closed_form={th.currents_closed_form[0]:.6e}")
        print(f"j_cold_closed_form={th.currents_closed_form[1]:.6e}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    preset = _preset_from_args(args)
    m = preset.model
    rep = structure_analysis(m.h0, m.v)
    print(f"preset={preset.name}")
    print(f"commutator_norm={rep.commutator_norm:.6e}")
    print(f"energy_conserving={str(rep.energy_conserving).lower()}")
    clusters = ", ".join(f"({e:.6g}, x{k})" for e, k in rep.degeneracy_clusters)
    print(f"degeneracy_clusters=[{clusters}]")
    degenerate = [f"({e:.6g}, x{k})" for e, k in rep.degeneracy_clusters if k > 1]
    print(f"degenerate=[{', '.join(degenerate)}]")
    print(f"v_block_confined={str(rep.v_block_confined).lower()}")
    print(f"prediction={rep.prediction.value}")
    print(f"limit_cycle_valid={str(limit_cycle_check(m)).lower()}")
    return EXIT_OK


def cmd_perturb(args) -> int:
    preset = _preset_from_args(args)
    model = preset.model
    eps = model.epsilon
    l0 = assemble(model, include_v=False)
    lv = hamiltonian_superop(model.v)
    rho0 = unique_steady_state(l0)
    rep = split_correction(model, rho0)
    print(f"preset={preset.name} epsilon={eps:.6g}")
    print(f"rho1_norm={np.linalg.norm(rep.rho1):.6e}")
    print(f"null_component={abs(rep.null_component):.3e}")
    print(f"split_h_norm={np.linalg.norm(rep.split_h):.6e}")
    print(f"split_x_norm={np.linalg.norm(rep.split_x):.6e}")
    print(f"shift_agreement={rep.shift_agreement:.3e}")
    print(f"split_discrepancy={rep.split_discrepancy:.3e}")
    first = first_order_steady_correction(l0, lv, rho0)
    print("epsilon        residual       ratio")
    prev = None
    for k in range(args.halvings + 1):
        e = eps / 2**k
        exact = unique_steady_state(l0 + e * lv)
        r = float(np.linalg.norm(exact - first.state(e)))
        ratio = f"{prev / r:.4f}" if prev is not None and r > 0 else "-"
        print(f"{e:.6e}  {r:.6e}  {ratio}")
        prev = r
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    result = run_sweep(cfg, threads=args.threads)
    fmt = args.format or cfg.format
    out = serialize(result, args.output or cfg.output_path, fmt)
    md = result.metadata
    print(f"rows={md['n_rows']} output={out}")
    print(f"max_s_coh={md['max_s_coh']}")
    print(f"max_abs_power={md['max_abs_power']}")
    print("status_counts=" + " ".join(f"{k}:{v}" for k, v in md["status_counts"].items()))
    print(f"runtime_s={result.runtime_s:.2f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="liouvsync", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="classified Liouvillian spectrum of a preset")
    _add_model_args(p)
    p.add_argument("--top", type=int, default=20, help="number of eigenvalues to list")
    p.add_argument("--all", action="store_true", help="list every eigenvalue")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("steady", help="steady state with coherence and thermodynamic reports")
    _add_model_args(p)
    p.set_defaults(func=cmd_steady)

    p = sub.add_parser("analyze", help="degeneracy and energy-conservation verdict")
    _add_model_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("perturb", help="first-order correction with an epsilon-halving table")
    _add_model_args(p)
    p.add_argument("--halvings", type=int, default=4)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("sweep", help="run an (epsilon, delta) sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, help="worker count (overrides LIOUVSYNC_THREADS)")
    p.add_argument("--output", help="override output_path")
    p.add_argument("--format", choices=("csv", "json"))
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
