"""Run configuration: INI-style text with explicit-unit keys.

Five sections are required — [pump], [dispersion], [waveguide], [grid],
[output].  Keys carry their unit in the name (lambda_p_nm, pulse_fwhm_ps,
waist_wz_mm, ...); values are converted to SI on load.  Unknown sections
or keys are errors (fail-closed), and every parse or validation error
reports the offending line and column.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass
from importlib import resources

from .cavity import WaveguideConfig
from .dispersion import C, DispersionModel
from .errors import ConfigError
from .jsa import GridSpec
from .phasematch import PumpConfig

_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class OutputSpec:
    """Output destination: a file path ('-' for stdout) and format."""

    path: str = "-"
    format: str = "csv"

    def __post_init__(self):
        if self.format not in _FORMATS:
            raise ValueError(f"format must be one of {_FORMATS}, got {self.format!r}")
        if self.path != "-":
            parent = os.path.dirname(self.path) or "."
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ValueError(f"output path {self.path!r} is not writable")


@dataclass(frozen=True)
class RunConfig:
    pump: PumpConfig
    dispersion: DispersionModel
    waveguide: WaveguideConfig
    grid: GridSpec
    output: OutputSpec


def pump_from_units(
    lambda_p_nm: float, pulse_fwhm_ps: float, waist_wz_mm: float, theta_deg: float = 0.0
) -> PumpConfig:
    return PumpConfig(
        lambda_p=lambda_p_nm * 1e-9,
        pulse_fwhm=pulse_fwhm_ps * 1e-12,
        waist_wz=waist_wz_mm * 1e-3,
        theta=math.radians(theta_deg),
    )


def dispersion_from_units(
    n0_h: float, n0_v: float, n_group: float, lambda_ref_nm: float
) -> DispersionModel:
    if lambda_ref_nm <= 0.0:
        raise ValueError("lambda_ref_nm must be positive")
    return DispersionModel(
        n0_H=n0_h, n0_V=n0_v, n_g=n_group,
        omega_ref=2.0 * math.pi * C / (lambda_ref_nm * 1e-9),
    )


def waveguide_from_units(
    length_l_mm: float, reflectivity_r: float, modal_index_n: float
) -> WaveguideConfig:
    return WaveguideConfig(
        length_L=length_l_mm * 1e-3,
        reflectivity_R=reflectivity_r,
        modal_index_n=modal_index_n,
    )


# (section, key) -> (converter, required)
_SCHEMA = {
    ("pump", "lambda_p_nm"): (float, True),
    ("pump", "pulse_fwhm_ps"): (float, True),
    ("pump", "waist_wz_mm"): (float, True),
    ("pump", "theta_deg"): (float, False),
    ("dispersion", "n0_h"): (float, True),
    ("dispersion", "n0_v"): (float, True),
    ("dispersion", "n_group"): (float, True),
    ("dispersion", "lambda_ref_nm"): (float, True),
    ("waveguide", "length_l_mm"): (float, True),
    ("waveguide", "reflectivity_r"): (float, True),
    ("waveguide", "modal_index_n"): (float, True),
    ("grid", "points"): (int, True),
    ("grid", "span_sigmas"): (float, True),
    ("output", "path"): (str, True),
    ("output", "format"): (str, True),
}
_SECTIONS = ("pump", "dispersion", "waveguide", "grid", "output")


def _locate(text: str, section: str, key: str | None) -> tuple[int | None, int | None]:
    """1-based (line, col) of a key inside its section, or of the section
    header itself when key is None."""
    in_section = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            if in_section and key is not None:
                break
            in_section = stripped[1:-1].strip().lower() == section
            if in_section and key is None:
                return lineno, 1 + line.index("[")
            continue
        if in_section and key is not None:
            candidate = stripped.split("=")[0].split(":")[0].strip().lower()
            if candidate == key:
                return lineno, 1 + line.lower().index(key)
    return None, None


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate configuration text; raises ConfigError
    (with line/column where attributable) on any problem."""
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("content before any section header", line=exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ConfigError(f"malformed configuration: {exc.message.splitlines()[0]}",
                          line=lineno) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r}", line=exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section {exc.section!r}", line=exc.lineno) from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc

    for section in parser.sections():
        if section not in _SECTIONS:
            line, col = _locate(text, section, None)
            raise ConfigError(f"unknown section [{section}]", line=line, col=col)
        for key in parser[section]:
            if (section, key) not in _SCHEMA:
                line, col = _locate(text, section, key)
                raise ConfigError(f"unknown key {key!r} in [{section}]", line=line, col=col)

    missing = [
        f"[{sec}] {key}"
        for (sec, key), (_, required) in _SCHEMA.items()
        if required and not parser.has_option(sec, key)
    ]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    values: dict[tuple[str, str], object] = {}
    for (sec, key), (conv, _) in _SCHEMA.items():
        if not parser.has_option(sec, key):
            continue
        raw = parser.get(sec, key)
        try:
            values[(sec, key)] = conv(raw)
        except ValueError:
            line, col = _locate(text, sec, key)
            raise ConfigError(
                f"expected {conv.__name__} for {key!r}, got {raw!r}", line=line, col=col
            ) from None

    def build(section, builder, **kwargs):
        try:
            return builder(**kwargs)
        except ValueError as exc:
            line, col = _locate(text, section, None)
            raise ConfigError(str(exc), line=line, col=col) from exc

    pump = build("pump", pump_from_units,
                 lambda_p_nm=values[("pump", "lambda_p_nm")],
                 pulse_fwhm_ps=values[("pump", "pulse_fwhm_ps")],
                 waist_wz_mm=values[("pump", "waist_wz_mm")],
                 theta_deg=values.get(("pump", "theta_deg"), 0.0))
    dispersion = build("dispersion", dispersion_from_units,
                       n0_h=values[("dispersion", "n0_h")],
                       n0_v=values[("dispersion", "n0_v")],
                       n_group=values[("dispersion", "n_group")],
                       lambda_ref_nm=values[("dispersion", "lambda_ref_nm")])
    waveguide = build("waveguide", waveguide_from_units,
                      length_l_mm=values[("waveguide", "length_l_mm")],
                      reflectivity_r=values[("waveguide", "reflectivity_r")],
                      modal_index_n=values[("waveguide", "modal_index_n")])
    grid = build("grid", GridSpec,
                 points=values[("grid", "points")],
                 span_sigmas=values[("grid", "span_sigmas")])
    output = build("output", OutputSpec,
                   path=values[("output", "path")],
                   format=values[("output", "format")])
    return RunConfig(pump=pump, dispersion=dispersion, waveguide=waveguide,
                     grid=grid, output=output)


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def paper_device_text() -> str:
    """Text of the bundled measured-device preset."""
    return (resources.files("biphoton") / "data" / "paper_device.cfg").read_text("utf-8")


def default_config() -> RunConfig:
    """The bundled measured-device preset, parsed."""
    return parse_config(paper_device_text())
