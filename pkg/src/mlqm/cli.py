"""Command-line front end.

Exit codes: 0 success, 2 invalid configuration, 3 domain error, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import yaml
from pydantic import ValidationError

from .bounds import delta_S, invert_bound
from .chsh import (
    MeasurementSetting,
    chsh_value,
    optimize_settings,
    paper_settings,
    partially_entangled,
    phi_plus,
    product_up_up,
    singlet,
)
from .config import SUBCOMMANDS, RunConfig, load_config_file, merge_overrides
from .constants import PLANCK_MASS_GEV
from .correction import format_sci
from .deformation import commutativity_condition, expectation_f, f_excess, g_of, gup_bound, minimal_length
from .errors import DomainError, MLQMError
from .hilbert import (
    canonical_momentum,
    commutator,
    deformation_operator,
    deformed_spin,
    MomentumDistribution,
    expectation,
    physical_momentum,
    spin_operators,
    spin_state,
)
from .interferometer import (
    NoiseModel,
    WitnessSettings,
    estimate_E,
    simulate_counts,
    witness,
    witness_from_counts,
)
from .report import paper_report

OUTPUT_DIR_ENV = "MLQM_OUTPUT_DIR"
EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO = 2, 3, 4
ALGEBRA_SIGMA_PLANCK = 0.01

_LEVI_CIVITA = {(0, 1): 2, (1, 2): 0, (2, 0): 1}


def _fmt(x) -> str:
    return format_sci(x) if isinstance(x, float) else str(x)


def _run_algebra(cfg: RunConfig) -> tuple[list[dict], dict]:
    model = cfg.model.build()
    if cfg.distribution is None:
        # beam momenta give f - 1 ~ 1e-21; probe a Planck-scale wavepacket instead
        dist = MomentumDistribution.gaussian_radial(ALGEBRA_SIGMA_PLANCK * PLANCK_MASS_GEV, 64)
    else:
        dist = cfg.momentum_distribution()
    fhat = deformation_operator(model, dist)
    s = [deformed_spin(model, dist, i) for i in range(3)]
    rows = []
    for (i, j), k in _LEVI_CIVITA.items():
        residual = commutator(s[i], s[j]) - 1j * (s[k] @ fhat)
        rows.append({"check": f"[s_{'xyz'[i]},s_{'xyz'[j]}]", "residual_max": residual.max_abs()})
    psi = spin_state(1.0, 0.5).tensor(dist.state())
    f1 = expectation_f(model, dist, 1)
    S = spin_operators()
    for i in range(3):
        lhs = expectation(psi, s[i])
        rhs = f1.value * expectation(spin_state(1.0, 0.5), S[i])
        rows.append({"check": f"<s_{'xyz'[i]}> - <f><S_{'xyz'[i]}>", "residual_max": abs(lhs - rhs)})
    back = np.diag(canonical_momentum(model, dist).matrix).real * (1.0 + f_excess(model, dist.u_values()))
    pi = np.diag(physical_momentum(dist).matrix).real
    rows.append({"check": "(f*Pi - pi)/max(pi)",
                 "residual_max": float(np.max(np.abs(back - pi)) / np.max(pi))})
    u = dist.u_values()
    summary = {
        "model_id": model.model_id,
        "distribution_id": dist.dist_id,
        "u_max": model.u_max if math.isfinite(model.u_max) else None,
        "f_minus_1_mean": f1.epsilon,
        "g_max": float(np.max(g_of(model, u))),
        "commutativity_margin_min": float(np.min(commutativity_condition(model, u))),
    }
    return rows, summary


def _run_gup(cfg: RunConfig) -> tuple[list[dict], dict]:
    beta = cfg.model.beta
    ml = minimal_length(beta)
    rows = [{"delta_pi_GeV": dpi, "delta_x_bound_inv_GeV": gup_bound(beta, dpi)}
            for dpi in ml.delta_pi_star * np.geomspace(1e-2, 1e2, 81)]
    summary = {"beta": beta, "delta_pi_star_GeV": ml.delta_pi_star, "delta_x_min_inv_GeV": ml.delta_x_min}
    return rows, summary


def _two_qubit_state(cfg: RunConfig):
    return {
        "singlet": singlet,
        "phi_plus": phi_plus,
        "product": product_up_up,
        "partial": lambda: partially_entangled(cfg.state_theta),
    }[cfg.state]()


def _run_chsh(cfg: RunConfig) -> tuple[list[dict], dict]:
    model = cfg.model.build()
    dist = cfg.momentum_distribution()
    state = _two_qubit_state(cfg)
    summary = {}
    if cfg.optimize:
        best = optimize_settings(state, restarts=cfg.restarts)
        settings = best.settings
        summary.update(converged=best.converged, sweeps=best.sweeps)
    elif cfg.settings is not None:
        settings = tuple(MeasurementSetting.planar(t, p) for t, p in zip(cfg.settings, "AABB"))
    else:
        settings = paper_settings()
    power = cfg.power or 2
    result = chsh_value(state, *settings, correction=expectation_f(model, dist, power))
    row = result.to_row(model.model_id, dist.dist_id)
    summary.update(S=result.S.to_dict(), S_spin_half_normalization=result.s_spin_half, power=power)
    return [row], summary


def _run_interferometer(cfg: RunConfig) -> tuple[list[dict], dict]:
    model = cfg.model.build()
    dist = cfg.momentum_distribution()
    settings = WitnessSettings(*cfg.settings) if cfg.settings else WitnessSettings(0.0, math.pi / 2,
                                                                                     -math.pi / 4, math.pi / 4)
    noise = NoiseModel(cfg.visibility)
    table = simulate_counts(settings, noise, cfg.shots, cfg.seed, cfg.workers)
    rows = []
    for (alpha, chi), counts in zip(table.pairs, table.counts):
        E_hat, err = estimate_E(table, alpha, chi)
        rows.append({"alpha": alpha, "chi": chi, "N_pp": int(counts[0]), "N_pm": int(counts[1]),
                     "N_mp": int(counts[2]), "N_mm": int(counts[3]), "E_hat": E_hat, "stderr": err})
    correction = expectation_f(model, dist, cfg.power or 1)
    exact = witness(settings, noise, correction)
    measured = witness_from_counts(table, correction, cfg.visibility)
    summary = {
        "S_prime_base": format_sci(exact.S.base),
        "S_prime_epsilon": format_sci(exact.S.epsilon),
        "classical_threshold": format_sci(exact.classical_threshold),
        "S_prime_counts": measured.S.to_dict(),
        "S_prime_counts_stderr": format_sci(measured.stderr),
        "model_id": model.model_id,
        "distribution_id": dist.dist_id,
        "shots_per_setting": cfg.shots,
        "seed": cfg.seed,
    }
    return rows, summary


def _run_bounds(cfg: RunConfig) -> dict:
    beam = cfg.beam.build()
    model = cfg.model.build()
    power = cfg.power or 1
    if model.kind.value not in ("linear", "quadratic"):
        raise DomainError("bounds need a linear or quadratic model")
    report = invert_bound(model.kind, beam, power, cfg.delta).to_dict()
    report["epsilon_at_model_beta"] = delta_S(model, beam, power)
    report["model_beta"] = model.beta
    return report


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _flatten(obj, prefix: str = ""):
    if isinstance(obj, dict):
        for key, value in obj.items():
            yield from _flatten(value, f"{prefix}.{key}" if prefix else str(key))
    else:
        yield {"key": prefix, "value": obj}


def _outputs(cfg: RunConfig, subcommand: str) -> dict[Path, str]:
    fmt = cfg.format or ("json" if subcommand in ("bounds", "paper-report", "algebra") else "csv")
    target = Path(cfg.output) if cfg.output else (
        Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{subcommand}.{fmt}")

    if subcommand in ("bounds", "paper-report"):
        doc = _run_bounds(cfg) if subcommand == "bounds" else paper_report(delta=cfg.delta)
        text = _json_text(doc) if fmt == "json" else _csv_text(list(_flatten(doc)))
        return {target: text}

    runner = {"algebra": _run_algebra, "gup": _run_gup, "chsh": _run_chsh,
              "interferometer": _run_interferometer}[subcommand]
    rows, summary = runner(cfg)
    if fmt == "json":
        return {target: _json_text({"rows": rows, "summary": summary})}
    return {target: _csv_text(rows),
            target.with_name(target.stem + ".summary.json"): _json_text(summary)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlqm", description="Minimal-length quantum mechanics simulator")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="YAML/JSON run configuration")
    parser.add_argument("--model-kind", choices=("linear", "quadratic", "custom"))
    parser.add_argument("--beta", type=float)
    parser.add_argument("--M", dest="M_GeV", type=float, help="particle mass in GeV")
    parser.add_argument("--E-kin", dest="E_kin_GeV", type=float, help="kinetic energy in GeV")
    parser.add_argument("--N", dest="N_constituents", type=int)
    parser.add_argument("--alpha-scaling", type=float)
    parser.add_argument("--state", choices=("singlet", "phi_plus", "product", "partial"))
    parser.add_argument("--settings", type=float, nargs=4, metavar="RAD")
    parser.add_argument("--optimize", action="store_true", default=None)
    parser.add_argument("--visibility", type=float)
    parser.add_argument("--shots", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--power", type=int, choices=(1, 2))
    parser.add_argument("--delta", type=float)
    parser.add_argument("--output", "-o")
    parser.add_argument("--format", choices=("csv", "json"))
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    base = load_config_file(args.config) if args.config else {}
    overrides = {
        "subcommand": args.subcommand,
        "model": {"kind": args.model_kind, "beta": args.beta},
        "beam": {"M_GeV": args.M_GeV, "E_kin_GeV": args.E_kin_GeV,
                 "N_constituents": args.N_constituents, "alpha_scaling": args.alpha_scaling},
        "state": args.state,
        "settings": args.settings,
        "optimize": args.optimize,
        "visibility": args.visibility,
        "shots": args.shots,
        "seed": args.seed,
        "workers": args.workers,
        "power": args.power,
        "delta": args.delta,
        "output": args.output,
        "format": args.format,
    }
    return RunConfig.model_validate(merge_overrides(base, overrides))


def run(config: RunConfig) -> int:
    """Compute and write every output of one subcommand; nothing is written on failure."""
    outputs = _outputs(config, config.subcommand)
    for path, text in outputs.items():
        _atomic_write(path, text)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ValidationError, ValueError, yaml.YAMLError) as exc:
        print(f"mlqm: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"mlqm: cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        outputs = _outputs(cfg, cfg.subcommand)
    except (MLQMError, ValueError) as exc:
        print(f"mlqm: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        for path, text in outputs.items():
            _atomic_write(path, text)
    except OSError as exc:
        print(f"mlqm: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
