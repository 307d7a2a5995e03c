"""Scenario file loading and exhaustive validation.

Validation collects every problem it finds and reports them with JSON-pointer
paths (``/privacy/sigma``, ``/q_map/2/interval``, ...) rather than stopping
at the first.  Parse failures carry line and column.
"""

import json
import math
from dataclasses import dataclass, field

from ..errors import ScenarioError


@dataclass(frozen=True)
class PrivacySection:
    mu1: list
    mu2: list
    sigma: float
    intervals: list


@dataclass(frozen=True)
class DlcSection:
    intervals: list
    restarts: int
    seed: int


@dataclass(frozen=True)
class QMapEntry:
    q: float
    interval: int


@dataclass(frozen=True)
class ScreeningSection:
    theta_low: float
    theta_high: float
    p_high: float
    q_bar: float
    zeta_override: float = None


@dataclass(frozen=True)
class UtilitySection:
    kind: str
    parameter: float = 1.0


@dataclass(frozen=True)
class InsuranceSection:
    y: float
    loss: float
    p_risky: float
    utility: UtilitySection
    eta_high_risk: float = None
    eta_low_risk: float = None
    premium_rate: float = None


@dataclass(frozen=True)
class ScenarioFile:
    privacy: PrivacySection
    dlc: DlcSection
    q_map: list
    screening: ScreeningSection
    insurance: InsuranceSection
    source_bytes: bytes = field(repr=False, default=b"")


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


class _Checker:
    def __init__(self):
        self.issues = []

    def fail(self, pointer, message):
        self.issues.append((pointer, message))
        return None

    def section(self, doc, name):
        if name not in doc:
            return self.fail(f"/{name}", "required section missing")
        if not isinstance(doc[name], dict):
            return self.fail(f"/{name}", "must be an object")
        return doc[name]

    def number(self, obj, pointer, key, required=True):
        # an explicit JSON null counts as absent for optional fields
        if key not in obj or (obj[key] is None and not required):
            if required:
                self.fail(f"{pointer}/{key}", "required number missing")
            return None
        if not _is_num(obj[key]):
            return self.fail(f"{pointer}/{key}", "must be a finite number")
        return float(obj[key])

    def integer(self, obj, pointer, key, required=True):
        if key not in obj or (obj[key] is None and not required):
            if required:
                self.fail(f"{pointer}/{key}", "required integer missing")
            return None
        if not _is_int(obj[key]):
            return self.fail(f"{pointer}/{key}", "must be an integer")
        return int(obj[key])

    def num_array(self, obj, pointer, key):
        if key not in obj:
            return self.fail(f"{pointer}/{key}", "required array missing")
        arr = obj[key]
        if not isinstance(arr, list) or not arr:
            return self.fail(f"{pointer}/{key}", "must be a non-empty array")
        out = []
        ok = True
        for i, v in enumerate(arr):
            if not _is_num(v):
                self.fail(f"{pointer}/{key}/{i}", "must be a finite number")
                ok = False
            else:
                out.append(float(v))
        return out if ok else None


def _validate(doc):
    c = _Checker()
    if not isinstance(doc, dict):
        raise ScenarioError([("", "top level must be a JSON object")])

    privacy = None
    sec = c.section(doc, "privacy")
    if sec is not None:
        mu1 = c.num_array(sec, "/privacy", "mu1")
        mu2 = c.num_array(sec, "/privacy", "mu2")
        sigma = c.number(sec, "/privacy", "sigma")
        if sigma is not None and sigma <= 0:
            c.fail("/privacy/sigma", "must be > 0")
            sigma = None
        horizon = None
        if mu1 is not None and mu2 is not None:
            if len(mu1) != len(mu2):
                c.fail("/privacy", "mu1 and mu2 must have equal length")
            else:
                horizon = len(mu1)
        intervals = sec.get("intervals")
        ok_intervals = []
        if not isinstance(intervals, list) or not intervals:
            c.fail("/privacy/intervals", "must be a non-empty array")
        else:
            for i, v in enumerate(intervals):
                if not _is_int(v) or v < 1:
                    c.fail(f"/privacy/intervals/{i}", "must be an integer >= 1")
                elif horizon is not None and v >= horizon:
                    c.fail(f"/privacy/intervals/{i}",
                           f"must be < trace length {horizon}")
                else:
                    ok_intervals.append(v)
        if mu1 is not None and mu2 is not None and sigma is not None \
                and len(ok_intervals) == len(intervals or []):
            privacy = PrivacySection(mu1=mu1, mu2=mu2, sigma=sigma,
                                     intervals=ok_intervals)

    dlc = None
    sec = c.section(doc, "dlc")
    if sec is not None:
        intervals = sec.get("intervals")
        ok = True
        if not isinstance(intervals, list) or not intervals:
            c.fail("/dlc/intervals", "must be a non-empty array")
            ok = False
        else:
            for i, v in enumerate(intervals):
                if not _is_int(v) or v < 1:
                    c.fail(f"/dlc/intervals/{i}", "must be an integer >= 1")
                    ok = False
            if ok and any(b <= a for a, b in zip(intervals, intervals[1:])):
                c.fail("/dlc/intervals", "must be strictly ascending")
                ok = False
        restarts = c.integer(sec, "/dlc", "restarts")
        if restarts is not None and restarts < 1:
            c.fail("/dlc/restarts", "must be >= 1")
            restarts = None
        seed = c.integer(sec, "/dlc", "seed")
        if seed is not None and seed < 0:
            c.fail("/dlc/seed", "must be >= 0")
            seed = None
        if ok and restarts is not None and seed is not None:
            dlc = DlcSection(intervals=list(intervals), restarts=restarts, seed=seed)

    q_map = None
    if "q_map" not in doc:
        c.fail("/q_map", "required section missing")
    elif not isinstance(doc["q_map"], list) or len(doc["q_map"]) < 2:
        c.fail("/q_map", "must be an array with at least two entries")
    else:
        entries = []
        ok = True
        for i, item in enumerate(doc["q_map"]):
            if not isinstance(item, dict):
                c.fail(f"/q_map/{i}", "must be an object with q and interval")
                ok = False
                continue
            q = c.number(item, f"/q_map/{i}", "q")
            n = c.integer(item, f"/q_map/{i}", "interval")
            if n is not None and n < 1:
                c.fail(f"/q_map/{i}/interval", "must be >= 1")
                n = None
            if q is None or n is None:
                ok = False
            else:
                entries.append(QMapEntry(q=q, interval=n))
        if ok:
            by_n = sorted(entries, key=lambda e: e.interval)
            if len({e.interval for e in entries}) != len(entries):
                c.fail("/q_map", "intervals must be distinct")
                ok = False
            elif any(b.q <= a.q for a, b in zip(by_n, by_n[1:])):
                c.fail("/q_map", "q must increase strictly with the interval")
                ok = False
            if dlc is not None:
                missing = [e.interval for e in entries
                           if e.interval not in dlc.intervals]
                if missing:
                    c.fail("/q_map",
                           f"intervals {missing} not present in /dlc/intervals")
                    ok = False
        if ok:
            q_map = entries

    screening = None
    sec = c.section(doc, "screening")
    if sec is not None:
        tl = c.number(sec, "/screening", "theta_low")
        th = c.number(sec, "/screening", "theta_high")
        p = c.number(sec, "/screening", "p_high")
        qb = c.number(sec, "/screening", "q_bar")
        z = c.number(sec, "/screening", "zeta_override", required=False)
        ok = True
        if tl is not None and tl <= 0:
            c.fail("/screening/theta_low", "must be > 0")
            ok = False
        if tl is not None and th is not None and not tl < th:
            c.fail("/screening", "theta_low must be < theta_high")
            ok = False
        if p is not None and not 0 < p < 1:
            c.fail("/screening/p_high", "must lie in (0, 1)")
            ok = False
        if qb is not None and qb <= 0:
            c.fail("/screening/q_bar", "must be > 0")
            ok = False
        if "zeta_override" in sec and z is not None and z <= 0:
            c.fail("/screening/zeta_override", "must be > 0")
            ok = False
        if ok and None not in (tl, th, p, qb):
            screening = ScreeningSection(theta_low=tl, theta_high=th, p_high=p,
                                         q_bar=qb, zeta_override=z)

    insurance = None
    sec = c.section(doc, "insurance")
    if sec is not None:
        y = c.number(sec, "/insurance", "y")
        loss = c.number(sec, "/insurance", "loss")
        p_risky = c.number(sec, "/insurance", "p_risky")
        eta_h = c.number(sec, "/insurance", "eta_high_risk", required=False)
        eta_l = c.number(sec, "/insurance", "eta_low_risk", required=False)
        rate = c.number(sec, "/insurance", "premium_rate", required=False)
        ok = True
        if y is not None and loss is not None and not 0 < loss <= y:
            c.fail("/insurance/loss", "must satisfy 0 < loss <= y")
            ok = False
        if p_risky is not None and not 0 < p_risky < 1:
            c.fail("/insurance/p_risky", "must lie in (0, 1)")
            ok = False
        for name, v in (("eta_high_risk", eta_h), ("eta_low_risk", eta_l)):
            if name in sec and v is not None and not 0 < v < 1:
                c.fail(f"/insurance/{name}", "must lie in (0, 1)")
                ok = False
        if eta_h is not None and eta_l is not None and not eta_h < eta_l:
            c.fail("/insurance",
                   "eta_high_risk must be < eta_low_risk (risky type fails less often)")
            ok = False
        if (eta_h is None) != (eta_l is None):
            c.fail("/insurance",
                   "eta_high_risk and eta_low_risk must be given together "
                   "or both omitted (derived from the privacy stage)")
            ok = False
        if "premium_rate" in sec and rate is not None and not 0 < rate < 1:
            c.fail("/insurance/premium_rate", "must lie in (0, 1)")
            ok = False
        util = None
        if "utility" not in sec or not isinstance(sec["utility"], dict):
            c.fail("/insurance/utility", "required object missing")
            ok = False
        else:
            kind = sec["utility"].get("kind")
            if kind not in ("logarithmic", "exponential", "power"):
                c.fail("/insurance/utility/kind",
                       "must be one of logarithmic, exponential, power")
                ok = False
            param = c.number(sec["utility"], "/insurance/utility", "parameter",
                             required=False)
            if ok:
                util = UtilitySection(
                    kind=kind, parameter=1.0 if param is None else param)
                if kind == "exponential" and util.parameter <= 0:
                    c.fail("/insurance/utility/parameter", "must be > 0")
                    ok = False
                if kind == "power" and (util.parameter <= 0 or util.parameter == 1.0):
                    c.fail("/insurance/utility/parameter", "must be > 0 and != 1")
                    ok = False
        if ok and None not in (y, loss, p_risky) and util is not None:
            insurance = InsuranceSection(
                y=y, loss=loss, p_risky=p_risky, utility=util,
                eta_high_risk=eta_h, eta_low_risk=eta_l, premium_rate=rate)

    # cross-section: deriving insurance etas needs q_map intervals that can
    # actually subsample the privacy traces
    if insurance is not None and insurance.eta_high_risk is None \
            and q_map is not None and privacy is not None:
        horizon = len(privacy.mu1)
        bad = [e.interval for e in q_map if e.interval >= horizon]
        if bad:
            c.fail("/q_map",
                   f"intervals {bad} cannot subsample privacy traces of "
                   f"length {horizon} (needed to derive insurance etas)")

    if c.issues:
        raise ScenarioError(sorted(c.issues))
    return privacy, dlc, q_map, screening, insurance


def load_scenario(path):
    """Parse and validate a scenario file; raises ScenarioError on any problem."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ScenarioError([("", f"file is not valid UTF-8: {exc}")]) from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            [("", f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}")]
        ) from exc
    privacy, dlc, q_map, screening, insurance = _validate(doc)
    return ScenarioFile(privacy=privacy, dlc=dlc, q_map=q_map,
                        screening=screening, insurance=insurance,
                        source_bytes=raw)
