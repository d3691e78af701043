"""TOML scenario documents and figure presets.

Keys are flat. Power inputs come in explicitly-suffixed pairs
(``p_total_dbm`` / ``p_total_mw``, ``p_bar_mw`` / ``p_bar_dbm``); giving
both members of a pair is an error. Resolved configs are written back
with the canonical member only.
"""
import dataclasses
import math
import re

import tomli
import tomli_w

from .errors import ConfigError
from .numerics import db_to_linear
from .scenario import CASE1_RIS, CASE2_RIS_CLOSE, ScenarioConfig


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


SCALAR_KEYS = {
    "n_t": int,
    "n_ris": int,
    "fc_ghz": float,
    "bandwidth_hz": float,
    "noise_dbm_per_hz": float,
    "noise_figure_db": float,
    "gain_bs_dbi": float,
    "gain_ris_dbi": float,
    "gain_ue_dbi": float,
    "channel_model": str,
    "shadowing_sigma_db": float,
    "independent_ris_shadowing": bool,
    "n_paths": int,
    "trials": int,
    "seed": int,
    "alpha_step": float,
    "ao_max_iters": int,
    "ao_rel_tol": float,
}
CASE_KEYS = {
    "case1": {"sweep_niu_x_m", "p_total_dbm", "p_total_mw"},
    "case2": {"sweep_p_total_dbm", "aod_offset_rad"},
}
COMMON_KEYS = set(SCALAR_KEYS) | {"case", "methods", "p_bar_mw", "p_bar_dbm", "ris_x_m", "ris_y_m"}
ALL_KEYS = COMMON_KEYS | CASE_KEYS["case1"] | CASE_KEYS["case2"]

CASE_DEFAULTS = {
    "case1": dict(channel_model="rayleigh", ris_pos=CASE1_RIS,
                  sweep=tuple(float(x) for x in range(-75, 80, 5))),
    "case2": dict(channel_model="multipath", ris_pos=CASE2_RIS_CLOSE,
                  sweep=tuple(float(x) for x in range(0, 65, 5)),
                  methods=("m1-dft", "m2", "m3-dft", "m1", "m3-ao", "no-constraint")),
}


def _key_line(text, key):
    m = re.search(rf"^[ \t]*{re.escape(key)}[ \t]*=", text, flags=re.M)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _coerce(text, key, value, kind):
    if kind is bool:
        if not isinstance(value, bool):
            raise ParseError(f"{key} must be true or false", _key_line(text, key))
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"{key} must be an integer", _key_line(text, key))
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"{key} must be a number", _key_line(text, key))
        if not math.isfinite(value):
            raise ParseError(f"{key} must be finite", _key_line(text, key))
        return float(value)
    if not isinstance(value, str):
        raise ParseError(f"{key} must be a string", _key_line(text, key))
    return value


def _number_list(text, key, value):
    if not isinstance(value, list) or not value:
        raise ParseError(f"{key} must be a non-empty list of numbers", _key_line(text, key))
    return tuple(_coerce(text, key, v, float) for v in value)


def parse_config(text, base=None):
    """Parse a TOML scenario document into a resolved ``ScenarioConfig``.

    Missing keys come from ``base`` when given (a preset) and otherwise
    from the defaults of the document's case.
    """
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(f"malformed document: {exc}", int(m.group(1)) if m else None) from exc

    for key, value in doc.items():
        if isinstance(value, dict):
            raise ParseError(f"tables are not supported ([{key}])", _key_line(text, f"[{key}"))
        if key not in ALL_KEYS:
            raise ParseError(f"unknown key {key!r}", _key_line(text, key))

    case = doc.get("case", base.case if base is not None else "case1")
    if case not in CASE_KEYS:
        raise ParseError(f"case must be 'case1' or 'case2', got {case!r}", _key_line(text, "case"))
    other = "case2" if case == "case1" else "case1"
    for key in doc:
        if key in CASE_KEYS[other] and key not in CASE_KEYS[case]:
            raise ParseError(f"{key!r} does not apply to {case}", _key_line(text, key))

    if base is not None and base.case == case:
        fields = dataclasses.asdict(base)
    else:
        fields = dataclasses.asdict(ScenarioConfig(case=case, **CASE_DEFAULTS[case]))
    fields["case"] = case

    for key, kind in SCALAR_KEYS.items():
        if key in doc:
            fields[key] = _coerce(text, key, doc[key], kind)

    if "methods" in doc:
        methods = doc["methods"]
        if not isinstance(methods, list) or not all(isinstance(m, str) for m in methods):
            raise ParseError("methods must be a list of strings", _key_line(text, "methods"))
        fields["methods"] = tuple(methods)

    for canonical, alt, convert in (("p_total_dbm", "p_total_mw", _mw_to_dbm),
                                    ("p_bar_mw", "p_bar_dbm", db_to_linear)):
        if canonical in doc and alt in doc:
            raise ParseError(f"give either {canonical} or {alt}, not both", _key_line(text, alt))
        if canonical in doc:
            fields[canonical] = _coerce(text, canonical, doc[canonical], float)
        elif alt in doc:
            try:
                fields[canonical] = convert(_coerce(text, alt, doc[alt], float))
            except ValueError as exc:
                raise ParseError(f"{alt}: {exc}", _key_line(text, alt)) from exc
    if not fields["p_bar_mw"] > 0:
        raise ParseError("EMFE ceiling must be positive", _key_line(text, "p_bar_mw"))

    sweep_key = "sweep_niu_x_m" if case == "case1" else "sweep_p_total_dbm"
    if sweep_key in doc:
        fields["sweep"] = _number_list(text, sweep_key, doc[sweep_key])
    if "aod_offset_rad" in doc:
        fields["aod_offset_rad"] = _coerce(text, "aod_offset_rad", doc["aod_offset_rad"], float)

    ris = list(fields["ris_pos"])
    for i, key in enumerate(("ris_x_m", "ris_y_m")):
        if key in doc:
            ris[i] = _coerce(text, key, doc[key], float)
    fields["ris_pos"] = tuple(ris)
    fields["sweep"] = tuple(fields["sweep"])
    fields["methods"] = tuple(fields["methods"])

    try:
        return ScenarioConfig(**fields)
    except ConfigError as exc:
        line = None
        m = re.search(r"'([a-z0-9_-]+)'", str(exc))
        if m and m.group(1) in fields.get("methods", ()):
            line = _key_line(text, "methods")
        raise ParseError(str(exc), line) from exc


def _mw_to_dbm(mw):
    if not mw > 0:
        raise ValueError("power in mW must be positive")
    return 10.0 * math.log10(mw)


def emit_config(config):
    """Serialize a resolved config; ``parse_config`` inverts it exactly."""
    doc = {"case": config.case}
    if config.case == "case1":
        doc["sweep_niu_x_m"] = list(config.sweep)
        doc["p_total_dbm"] = config.p_total_dbm
    else:
        doc["sweep_p_total_dbm"] = list(config.sweep)
        doc["aod_offset_rad"] = config.aod_offset_rad
    doc["methods"] = list(config.methods)
    doc["p_bar_mw"] = config.p_bar_mw
    doc["ris_x_m"], doc["ris_y_m"] = config.ris_pos
    for key in SCALAR_KEYS:
        doc[key] = getattr(config, key)
    return tomli_w.dumps(doc)


FIG4_METHODS = ("m1", "m2", "m3-ao", "m3-dft", "m3-dft-risleak", "m4-ao", "m5", "m5-analytic",
                "no-constraint", "random-phase")
FIG5_METHODS = ("m1", "m1-dft", "m2", "m3-ao", "m3-dft", "m4-ao", "m4-dft", "m5",
                "no-constraint", "random-phase")


def preset(name):
    """Scenario for one of the published figures: ``fig4``, ``fig5`` or ``fig6``.

    fig6 is the close-NIU (pi/16), close-RIS panel; the other three panels
    are reached by overriding ``aod_offset_rad`` and ``ris_x_m``.
    """
    if name == "fig4":
        return ScenarioConfig(case="case1", p_bar_mw=0.005, methods=FIG4_METHODS,
                              **{k: v for k, v in CASE_DEFAULTS["case1"].items()})
    if name == "fig5":
        return ScenarioConfig(case="case1", p_bar_mw=0.5, methods=FIG5_METHODS,
                              **{k: v for k, v in CASE_DEFAULTS["case1"].items()})
    if name == "fig6":
        return ScenarioConfig(case="case2", p_bar_mw=0.1, aod_offset_rad=math.pi / 16,
                              **CASE_DEFAULTS["case2"])
    raise ConfigError(f"unknown preset {name!r}; valid presets: fig4, fig5, fig6")
