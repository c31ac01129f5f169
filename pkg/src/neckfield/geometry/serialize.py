"""Declarative text format for configurations and run inputs.

The format is line-based ``key = value`` pairs grouped into ``[section]``
headers. A scene is either canonical (a ``[case]`` section with the case
tag and its parameters) or free-form (one ``[body N]`` section per body
plus a ``[groups]`` section). Floats are emitted with ``repr`` so that
parse -> emit -> parse is the identity.

Example::

    [scene]
    case = B

    [case]
    r1 = 1.0
    r2 = 0.05
    r3 = 1.0
    eps1 = 0.001
    eps2 = 0.001

    [background]
    coeffs = 0, 1

    [sweep]
    vary = eps1
    grid = 1e-05, 0.001, 6
    quantities = potential_difference_21, max_gap_gradient_12
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidParameterError
from .body import Body
from .config import (Configuration, build_case_a, build_case_b, build_case_c,
                     build_case_d, build_two_disks)
from .shapes import Disk, HarmonicBackground, SmoothBoundary


class ConfigParseError(InvalidParameterError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class RunInput:
    """Parsed contents of a run file: the scene plus optional sweep and mesh
    sections kept as raw key-value maps for the consumers that need them."""

    cfg: Configuration
    sweep: dict = field(default_factory=dict)
    mesh: dict = field(default_factory=dict)


def _parse_sections(text: str) -> dict[str, dict[str, str]]:
    sections: dict[str, dict[str, str]] = {}
    current: Optional[str] = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigParseError("unterminated section header", ln, len(raw))
            current = line[1:-1].strip().lower()
            if current in sections:
                raise ConfigParseError(f"duplicate section [{current}]", ln)
            sections[current] = {}
            continue
        if "=" not in line:
            raise ConfigParseError("expected 'key = value'", ln)
        if current is None:
            raise ConfigParseError("key outside any [section]", ln)
        key, val = line.split("=", 1)
        sections[current][key.strip().lower()] = val.strip()
    return sections


def _floats(val: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in val.split(",") if x.strip() != "")
    except ValueError as exc:
        raise InvalidParameterError(f"bad number list: {val!r}") from exc


def _complexes(val: str) -> tuple[complex, ...]:
    try:
        return tuple(complex(x.strip().replace(" ", "")) for x in val.split(","))
    except ValueError as exc:
        raise InvalidParameterError(f"bad coefficient list: {val!r}") from exc


def _parse_background(sections) -> Optional[HarmonicBackground]:
    sec = sections.get("background")
    if not sec:
        return None
    return HarmonicBackground(_complexes(sec.get("coeffs", "0, 1")))


def _parse_body(sec: dict[str, str]) -> Body:
    kind = sec.get("kind", "disk").lower()
    if kind == "disk":
        c = _floats(sec["center"])
        return Body.from_disk(Disk((c[0], c[1]), float(sec["radius"])))
    if kind == "lens":
        c1 = _floats(sec["disk1.center"])
        c2 = _floats(sec["disk2.center"])
        return Body.lens(Disk((c1[0], c1[1]), float(sec["disk1.radius"])),
                         Disk((c2[0], c2[1]), float(sec["disk2.radius"])))
    if kind == "smooth":
        c = _floats(sec["center"])
        return Body.from_smooth(SmoothBoundary(
            (c[0], c[1]),
            _floats(sec.get("cos_x", "")), _floats(sec.get("sin_x", "")),
            _floats(sec.get("cos_y", "")), _floats(sec.get("sin_y", ""))))
    raise InvalidParameterError(f"unknown body kind {kind!r}")


def parse_run(text: str) -> RunInput:
    sections = _parse_sections(text)
    background = _parse_background(sections)
    scene = sections.get("scene", {})
    case_tag = scene.get("case", "free").upper()
    if case_tag == "PAIR":
        case_tag = "pair"
    case = sections.get("case")
    if case is not None and case_tag in ("A", "B", "C", "D", "pair"):
        p = {k: float(v) for k, v in case.items()}
        try:
            if case_tag == "pair":
                cfg = build_two_disks(p["r1"], p["r2"], p["eps"],
                                      background=background)
            elif case_tag == "A":
                cfg = build_case_a(p["r1"], p["r2"], p["r3"], p["a"], p["eps"],
                                   background=background)
            elif case_tag == "B":
                cfg = build_case_b(p["r1"], p["r2"], p["r3"], p["eps1"], p["eps2"],
                                   background=background)
            elif case_tag == "C":
                cfg = build_case_c(
                    Disk((p["left_x"], 0.0), p["r1"]),
                    Disk((0.0, 0.0), p.get("center_radius", 1.0)),
                    Disk((p["right_x"], 0.0), p["r3"]),
                    p["r2"], p["eps"], background=background)
            else:
                cfg = build_case_d(
                    Disk((p["left_x"], 0.0), p["r1"]),
                    Disk((0.0, 0.0), p.get("center_radius", 1.0)),
                    Disk((p["right_x"], 0.0), p["r3"]),
                    p["r2"], p["eps1"], p["eps2"], background=background)
        except KeyError as exc:
            raise InvalidParameterError(f"case {case_tag} missing parameter {exc}") from exc
    else:
        body_secs = sorted((name for name in sections if name.startswith("body")),
                           key=lambda s: int(s.split()[1]))
        if not body_secs:
            raise InvalidParameterError("no [case] section and no [body N] sections")
        bodies = tuple(_parse_body(sections[name]) for name in body_secs)
        gsec = sections.get("groups", {})
        if "conductors" in gsec:
            groups = tuple(tuple(int(i) - 1 for i in part.split())
                           for part in gsec["conductors"].split("|"))
        else:
            groups = tuple((i,) for i in range(len(bodies)))
        cfg = Configuration(bodies, groups,
                            background or HarmonicBackground.linear_x(),
                            case_tag.upper() if case_tag in "ABCD" else "free")
    return RunInput(cfg=cfg,
                    sweep=dict(sections.get("sweep", {})),
                    mesh=dict(sections.get("mesh", {})))


def emit_configuration(cfg: Configuration) -> str:
    """Free-form serialization of any configuration; parse(emit(parse(x)))
    equals parse(x)."""
    out = ["[scene]", f"case = {cfg.case_tag}", ""]
    for i, b in enumerate(cfg.bodies, start=1):
        out.append(f"[body {i}]")
        if b.kind == "disk":
            out.append("kind = disk")
            out.append(f"center = {b.disk.center[0]!r}, {b.disk.center[1]!r}")
            out.append(f"radius = {b.disk.radius!r}")
        elif b.kind == "lens":
            out.append("kind = lens")
            for j, d in enumerate(b.lens_disks, start=1):
                out.append(f"disk{j}.center = {d.center[0]!r}, {d.center[1]!r}")
                out.append(f"disk{j}.radius = {d.radius!r}")
        else:
            s = b.smooth
            out.append("kind = smooth")
            out.append(f"center = {s.center[0]!r}, {s.center[1]!r}")
            for name in ("cos_x", "sin_x", "cos_y", "sin_y"):
                vals = getattr(s, name)
                if vals:
                    out.append(f"{name} = " + ", ".join(repr(v) for v in vals))
        out.append("")
    out.append("[groups]")
    out.append("conductors = " + " | ".join(
        " ".join(str(i + 1) for i in g) for g in cfg.groups))
    out.append("")
    out.append("[background]")
    out.append("coeffs = " + ", ".join(_emit_complex(c) for c in cfg.background.coeffs))
    out.append("")
    return "\n".join(out)


def _emit_complex(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return repr(c).strip("()")


def parse_configuration(text: str) -> Configuration:
    return parse_run(text).cfg
