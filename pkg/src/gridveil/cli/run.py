"""Pipeline stages shared by the subcommands.

Stage order in the full pipeline: breach curve -> load-control performance
curve -> degradation slope fit (skipped on zeta_override) -> screening menus,
welfare sweep, shutdown threshold -> consumer coverage sweep and insurer
menu.  Each stage is a pure function of the validated scenario plus the
command-line seed, so identical (scenario, seed) runs produce identical
output bytes.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .. import __version__, dlc, insurance, privacy, screening
from .._kernels import BACKEND
from ..errors import NumericalError
from ..numerics import derive_seed
from . import outputs

WELFARE_P_GRID = [round(0.05 * i, 2) for i in range(1, 20)]
CONSUMER_SWEEP_POINTS = 25
EQ21_FLAG_TOL = 1e-9


@dataclass
class RunManifest:
    """What a run produced: inputs, configuration, and per-output checksums."""

    scenario_path: str
    scenario_sha256: str
    seed: int
    version: str
    kernel_backend: str
    zeta: dict
    outputs: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)
    status: str = "complete"
    failed_stage: str = None

    def to_dict(self):
        doc = {
            "scenario_path": self.scenario_path,
            "scenario_sha256": self.scenario_sha256,
            "seed": self.seed,
            "version": self.version,
            "kernel_backend": self.kernel_backend,
            "zeta": self.zeta,
            "outputs": self.outputs,
            "report": self.report,
            "status": self.status,
        }
        if self.failed_stage is not None:
            doc["failed_stage"] = self.failed_stage
        return doc


def scenario_checksum(scn):
    return hashlib.sha256(scn.source_bytes).hexdigest()


def effective_dlc_seed(scn, cli_seed):
    """Scenario seed perturbed by the command-line seed (0 leaves it as-is)."""
    base = scn.dlc.seed
    return base if cli_seed == 0 else derive_seed(base, cli_seed)


def hypothesis_pair(scn):
    return privacy.GaussianHypothesisPair(
        scn.privacy.mu1, scn.privacy.mu2, scn.privacy.sigma)


def stage_privacy(scn):
    return privacy.breach_curve(hypothesis_pair(scn), scn.privacy.intervals)


def stage_dlc(scn, cli_seed):
    """Performance curve plus fitted degradation slope.

    Returns ``(curve, zeta, source)``; with a zeta override the curve is not
    computed at all and ``curve`` is None.
    """
    if scn.screening.zeta_override is not None:
        return None, scn.screening.zeta_override, "override"
    curve = dlc.performance_curve(
        scn.dlc.intervals, restarts=scn.dlc.restarts,
        seed=effective_dlc_seed(scn, cli_seed))
    zeta = dlc.fit_linear_degradation(
        curve, [(e.q, e.interval) for e in scn.q_map])
    return curve, zeta, "fitted"


def stage_screening(scn, zeta, grid_points):
    s = screening.ScreeningScenario(
        theta_low=scn.screening.theta_low, theta_high=scn.screening.theta_high,
        p_high=scn.screening.p_high, q_bar=scn.screening.q_bar, zeta=zeta)
    closed = screening.closed_form_menu(s)
    oracle = screening.oracle_menu(s, grid_points=grid_points)
    full_info = screening.full_information_menu(s)
    welfare = screening.welfare_curve(s, WELFARE_P_GRID)
    shutdown = screening.shutdown_probability(s)
    report = screening.verify_constraints(closed, s)
    return {
        "scenario": s,
        "closed_form": closed,
        "oracle": oracle,
        "full_info": full_info,
        "welfare": welfare,
        "shutdown": shutdown,
        "constraints": report,
    }


def _derived_etas(scn, menu):
    """Map the chosen privacy settings to intervals and take their fail rates.

    The risky type is the one on the low-privacy contract: its setting maps
    (nearest q in the scenario's q table) to a shorter metering interval,
    hence a lower probability that the adversary fails.
    """
    pair = hypothesis_pair(scn)

    def interval_for(q):
        best = min(scn.q_map, key=lambda e: (abs(e.q - q), e.interval))
        return best.interval

    def failure_at(n):
        point = privacy.breach_curve(pair, [n])[0]
        return point.failure_prob

    eta_h = failure_at(interval_for(menu.q_low))
    eta_l = failure_at(interval_for(menu.q_high))
    if not 0.0 < eta_h < eta_l < 1.0:
        raise NumericalError(
            "derived insurance fail probabilities are not ordered: "
            f"eta_high_risk={eta_h} (setting {menu.q_low}), "
            f"eta_low_risk={eta_l} (setting {menu.q_high}); "
            "provide explicit etas or adjust the q table")
    return eta_h, eta_l


def stage_insurance(scn, menu, grid_points):
    """Consumer sweeps and the insurer menu.

    Etas come from the scenario when given, otherwise from the breach
    failure probabilities at the screening menu's settings.
    """
    util = insurance.UtilityFamily(
        kind=scn.insurance.utility.kind,
        parameter=scn.insurance.utility.parameter)
    if scn.insurance.eta_high_risk is not None:
        eta_h, eta_l = scn.insurance.eta_high_risk, scn.insurance.eta_low_risk
        eta_source = "scenario"
    else:
        eta_h, eta_l = _derived_etas(scn, menu)
        eta_source = "derived"

    sweep_rows = []
    for label, eta in (("high_risk", eta_h), ("low_risk", eta_l)):
        if scn.insurance.premium_rate is not None:
            rates = [scn.insurance.premium_rate]
        else:
            fair = 1.0 - eta
            top = max(min(0.99, fair + 0.5 * (1.0 - fair)), fair)
            if top <= fair:
                rates = [fair]
            else:
                rates = np.linspace(fair, top, CONSUMER_SWEEP_POINTS).tolist()
        for c in rates:
            prob = insurance.ConsumerInsuranceProblem(
                wealth=scn.insurance.y, loss=scn.insurance.loss, eta=eta,
                premium_rate=c, utility=util)
            beta = insurance.consumer_optimal_coverage(prob)
            sweep_rows.append((label, c, beta, insurance.kkt_residual(beta, prob)))

    ins_scenario = insurance.InsuranceScenario(
        wealth=scn.insurance.y, loss=scn.insurance.loss,
        eta_high_risk=eta_h, eta_low_risk=eta_l,
        p_risky=scn.insurance.p_risky, utility=util)
    menu_opt, diagnostics = insurance.insurer_optimal_menu(ins_scenario)
    oracle = insurance.insurer_oracle_menu(ins_scenario, grid_points=grid_points)
    return {
        "scenario": ins_scenario,
        "eta_source": eta_source,
        "sweep": sweep_rows,
        "menu": menu_opt,
        "diagnostics": diagnostics,
        "oracle": oracle,
    }


# ------------------------------------------------------------------ writers

def write_breach_outputs(out_dir, points, checksum, fmt):
    written = []
    if fmt in ("csv", "both"):
        path = out_dir / "breach_curve.csv"
        outputs.write_csv(
            path, ["interval", "success_prob", "failure_prob"],
            [(p.interval, p.success_prob, p.failure_prob) for p in points])
        written.append(path)
    if fmt in ("svg", "both"):
        path = out_dir / "breach_curve.svg"
        xs = [p.interval for p in points]
        outputs.write_svg_chart(
            path, "Breach probability vs metering interval",
            "sampling interval N", "probability",
            [("success", xs, [p.success_prob for p in points]),
             ("failure", xs, [p.failure_prob for p in points])],
            checksum)
        written.append(path)
    return written


def write_dlc_outputs(out_dir, curve, checksum, fmt):
    written = []
    if fmt in ("csv", "both"):
        path = out_dir / "dlc_curve.csv"
        outputs.write_csv(
            path, ["interval", "hinf_norm", "gains"],
            [(p.interval, p.hinf_norm, ";".join(repr(float(g)) for g in p.gains))
             for p in curve])
        written.append(path)
    if fmt in ("svg", "both"):
        path = out_dir / "dlc_curve.svg"
        xs = [p.interval for p in curve]
        outputs.write_svg_chart(
            path, "Control degradation vs metering interval",
            "sampling interval N", "worst-case gain",
            [("optimal gain", xs, [p.hinf_norm for p in curve])],
            checksum)
        written.append(path)
    return written


def write_screening_outputs(out_dir, result, checksum, fmt):
    written = []
    s = result["scenario"]
    if fmt in ("csv", "both"):
        path = out_dir / "contract_menu.csv"
        rows = []
        for variant in ("closed_form", "oracle", "full_info"):
            m = result[variant]
            rows.append((variant, m.q_low, m.t_low, m.q_high, m.t_high,
                         screening.expected_profit(m, s)))
        outputs.write_csv(
            path, ["variant", "q_low", "t_low", "q_high", "t_high", "profit"], rows)
        written.append(path)
    return written


def write_welfare_outputs(out_dir, points, checksum, fmt):
    written = []
    if fmt in ("csv", "both"):
        path = out_dir / "welfare.csv"
        outputs.write_csv(
            path,
            ["p", "profit", "consumer_surplus", "welfare", "welfare_eq21",
             "shutdown"],
            [(w.p, w.profit, w.consumer_surplus, w.welfare, w.welfare_eq21,
              w.shutdown) for w in points])
        written.append(path)
    if fmt in ("svg", "both"):
        path = out_dir / "welfare.svg"
        xs = [w.p for w in points]
        outputs.write_svg_chart(
            path, "Welfare decomposition vs high-type probability",
            "high-type probability p", "value",
            [("welfare", xs, [w.welfare for w in points]),
             ("profit", xs, [w.profit for w in points]),
             ("consumer surplus", xs, [w.consumer_surplus for w in points])],
            checksum)
        written.append(path)
    return written


def write_insurance_consumer_outputs(out_dir, result, checksum, fmt):
    written = []
    if fmt in ("csv", "both"):
        path = out_dir / "insurance_consumer.csv"
        outputs.write_csv(
            path, ["type", "premium_rate", "beta_star", "kkt_residual"],
            result["sweep"])
        written.append(path)
    if fmt in ("svg", "both"):
        path = out_dir / "insurance_consumer.svg"
        series = []
        for label in ("high_risk", "low_risk"):
            rows = [r for r in result["sweep"] if r[0] == label]
            series.append((label, [r[1] for r in rows], [r[2] for r in rows]))
        outputs.write_svg_chart(
            path, "Optimal coverage vs premium rate",
            "premium rate c", "coverage beta*", series, checksum)
        written.append(path)
    return written


def write_insurance_menu_outputs(out_dir, result, checksum, fmt):
    written = []
    s = result["scenario"]
    if fmt in ("csv", "both"):
        path = out_dir / "insurance_menu.csv"
        m = result["menu"]
        high_share = s.p_risky * (
            -(1.0 - s.eta_high_risk) * m.alpha_attack_high
            + s.eta_high_risk * m.alpha_premium_high)
        low_share = (1.0 - s.p_risky) * (
            -(1.0 - s.eta_low_risk) * m.alpha_attack_low
            + s.eta_low_risk * m.alpha_premium_low)
        outputs.write_csv(
            path,
            ["type", "alpha_attack", "alpha_premium", "expected_profit_share"],
            [("high_risk", m.alpha_attack_high, m.alpha_premium_high, high_share),
             ("low_risk", m.alpha_attack_low, m.alpha_premium_low, low_share)])
        written.append(path)
    return written


def run_pipeline(scn, scenario_path, out_dir, seed, fmt="both", grid_points=2001):
    """Execute every stage and write outputs plus the run manifest.

    Any stage error still produces a manifest (status "partial", with the
    failed stage named and every completed output checksummed) before the
    error propagates to the caller.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    checksum = scenario_checksum(scn)
    manifest = RunManifest(
        scenario_path=str(scenario_path), scenario_sha256=checksum,
        seed=seed, version=__version__, kernel_backend=BACKEND,
        zeta={"source": "pending", "value": None})
    written = []

    def _finish(stage=None):
        manifest.outputs = {p.name: outputs.sha256_of(p) for p in written}
        if stage is not None:
            manifest.status = "partial"
            manifest.failed_stage = stage
        outputs.write_manifest(out_dir / "run_manifest.json", manifest.to_dict())

    stage = "breach_curve"
    try:
        breach_points = stage_privacy(scn)
        written += write_breach_outputs(out_dir, breach_points, checksum, fmt)

        stage = "performance_curve"
        curve, zeta, zeta_source = stage_dlc(scn, seed)
        manifest.zeta = {"source": zeta_source,
                         "value": zeta if zeta_source == "fitted" else
                         scn.screening.zeta_override}
        if zeta_source == "override":
            manifest.zeta["note"] = "zeta: overridden; dlc stage skipped"
        if curve is not None:
            written += write_dlc_outputs(out_dir, curve, checksum, fmt)

        stage = "screening_menu"
        scr = stage_screening(scn, zeta, grid_points)
        written += write_screening_outputs(out_dir, scr, checksum, fmt)
        written += write_welfare_outputs(out_dir, scr["welfare"], checksum, fmt)

        stage = "insurance_menu"
        ins = stage_insurance(scn, scr["closed_form"], grid_points)
        written += write_insurance_consumer_outputs(out_dir, ins, checksum, fmt)
        written += write_insurance_menu_outputs(out_dir, ins, checksum, fmt)
    except Exception:
        _finish(stage)
        raise

    s = scr["scenario"]
    mismatches = sum(
        1 for w in scr["welfare"]
        if not math.isfinite(w.welfare_eq21)
        or abs(w.welfare_eq21 - w.welfare) > EQ21_FLAG_TOL * (1.0 + abs(w.welfare)))
    diag = ins["diagnostics"]
    manifest.report = {
        "shutdown_probability": scr["shutdown"].value,
        "shutdown_degenerate": scr["shutdown"].degenerate,
        "shutdown_type_ratio_reference": s.theta_low / s.theta_high,
        "shutdown_vs_type_ratio_gap": abs(
            scr["shutdown"].value - s.theta_low / s.theta_high),
        "welfare_closed_form_mismatch_points": mismatches,
        "screening_binding": {
            "ir_low": scr["constraints"].ir_low_binding,
            "ic_high": scr["constraints"].ic_high_binding,
        },
        "insurance_eta_source": ins["eta_source"],
        "insurance_eta_high_risk": ins["scenario"].eta_high_risk,
        "insurance_eta_low_risk": ins["scenario"].eta_low_risk,
        "insurance_full_insurance_gap_high": diag.full_insurance_gap_h,
        "insurance_partial_margin_low": diag.partial_insurance_margin_l,
        "insurance_profit": insurance.expected_insurer_profit(
            ins["menu"], ins["scenario"]),
        "insurance_profit_oracle": insurance.expected_insurer_profit(
            ins["oracle"], ins["scenario"]),
    }
    _finish()
    return manifest
