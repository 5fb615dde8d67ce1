"""Worked examples gathered into one summary document."""

from __future__ import annotations

import math

from .bounds import MUON_MASS_GEV, NEUTRON_MASS_GEV, BeamSpec, delta_S, invert_bound, linear_model_rhs
from .chsh import TSIRELSON, chsh_value, optimize_settings, paper_settings, singlet
from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .correction import format_sci
from .deformation import DeformationModel, expectation_f, minimal_length
from .interferometer import CALIBRATED_VISIBILITY, NoiseModel, witness

KINETIC_ENERGY_GEV = 0.01
NEUTRON_CONSTITUENTS = 3
# windows accepted as the quoted orders of the neutron bounds
QUOTED_BOUND_WINDOWS = {"linear": (1e19, 1e20), "quadratic": (1e39, 1e40)}


def paper_report(constants: PhysicalConstants = DEFAULT_CONSTANTS, delta: float = 1.0) -> dict:
    muon = BeamSpec(MUON_MASS_GEV, KINETIC_ENERGY_GEV)
    neutron = BeamSpec(NEUTRON_MASS_GEV, KINETIC_ENERGY_GEV, NEUTRON_CONSTITUENTS, 2.0)
    linear = DeformationModel.linear(1.0)
    quadratic = DeformationModel.quadratic(1.0)

    qm = chsh_value(singlet(), *paper_settings())
    best = optimize_settings(singlet())
    f2_muon = expectation_f(linear, muon.distribution(), 2, constants)
    mlqm = chsh_value(singlet(), *paper_settings(), correction=f2_muon)

    w_ideal = witness()
    w_noisy = witness(noise=NoiseModel(CALIBRATED_VISIBILITY))
    w_078 = witness(noise=NoiseModel(0.78))
    f1_neutron = expectation_f(linear, neutron.distribution(), 1, constants)
    w_mlqm = witness(correction=f1_neutron)

    ml = minimal_length(1.0, constants)

    bounds = {}
    for kind in ("linear", "quadratic"):
        for power in (1, 2):
            entry = invert_bound(kind, neutron, power, delta, constants).to_dict()
            lo, hi = QUOTED_BOUND_WINDOWS[kind]
            entry["within_quoted_order"] = bool(lo <= entry["beta_bound"] <= hi)
            bounds[f"{kind}_power{power}"] = entry

    return {
        "chsh": {
            "tsirelson": format_sci(TSIRELSON),
            "S_singlet": qm.S.to_dict(),
            "S_singlet_spin_half_normalization": format_sci(qm.s_spin_half),
            "S_optimized": best.result.S.to_dict(),
            "optimizer_converged": best.converged,
            "S_mlqm_muon_linear": mlqm.S.to_dict(),
        },
        "witness": {
            "S_prime_ideal": w_ideal.S.to_dict(),
            "visibility_calibrated": CALIBRATED_VISIBILITY,
            "S_prime_calibrated": w_noisy.S.to_dict(),
            "classical_threshold_calibrated": format_sci(w_noisy.classical_threshold),
            "S_prime_v078": w_078.S.to_dict(),
            "classical_threshold_v078": format_sci(w_078.classical_threshold),
            "S_prime_mlqm_neutron_linear": w_mlqm.S.to_dict(),
        },
        "delta_S": {
            "muon_linear_power2": format_sci(delta_S(linear, muon, 2, constants)),
            "muon_linear_power1": format_sci(delta_S(linear, muon, 1, constants)),
            "muon_linear_beta_sqrt_2MEkin_over_mp": format_sci(linear_model_rhs(1.0, muon, constants)),
            "muon_quadratic_power2": format_sci(delta_S(quadratic, muon, 2, constants)),
            "muon_quadratic_power1": format_sci(delta_S(quadratic, muon, 1, constants)),
        },
        "epsilon_linear": format_sci(linear_model_rhs(1.0, muon, constants)),
        "bounds": {"delta": delta, **bounds},
        "minimal_length": {
            "beta": 1.0,
            "delta_pi_star_GeV": format_sci(ml.delta_pi_star),
            "delta_x_min_inv_GeV": format_sci(ml.delta_x_min),
            "closed_form_inv_GeV": format_sci(math.sqrt(3.0) / constants.m_p_GeV),
        },
    }
