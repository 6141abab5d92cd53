"""Line-oriented text format for circuits.

Grammar (UTF-8, one statement per line, '#' starts a comment):

    system bosons=<int> [fermions=<int>] cutoff=<int>
    input create <mode>+
    input superpose <complex>:<mode-list> (';' <complex>:<mode-list>)*
    bs <m1> <m2> (sym|asym|angle=<radians>)
    phase <mode> <radians>
    kerr <m1> <m2> [strength=<radians>]        # strength defaults to pi
    vertex <photon-mode> <e-mode> <p-mode> theta=<radians>
    measure all | measure <mode>+

Modes are 1-based, bosonic modes numbered before fermionic ones.  Complex
amplitudes use Python literal syntax without spaces, e.g. ``0.5``, ``1j``,
``-0.5+0.5j``; a mode list is comma-separated, e.g. ``1,2`` for one
particle in each of modes 1 and 2.  The system line must come first; a
missing ``input`` means the vacuum and a missing ``measure`` means all
modes.  Input states are normalized after parsing.
"""

from __future__ import annotations

import math
import re

from .algebra import LadderPolynomial, creation, multiply, reduce_to_ket
from .circuit import (
    ANGLE,
    ANTISYMMETRIC,
    AnnihilationVertex,
    BeamSplitter,
    Circuit,
    KerrMedium,
    PhaseShifter,
    QuadraticCustom,
    SYMMETRIC,
)
from .modes import ModeSystem

_TOKEN_RE = re.compile(r"\S+")


class CircuitParseError(Exception):
    """Malformed circuit text, with 1-based line and column positions."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self):
        return f"line {self.line}, column {self.column}: {self.message}"


def _tokenize(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(line)]


def _parse_int(text: str, what: str, lineno: int, col: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise CircuitParseError(f"expected integer {what}, got {text!r}", lineno, col)


def _parse_float(text: str, what: str, lineno: int, col: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise CircuitParseError(f"expected number {what}, got {text!r}", lineno, col)


def _parse_mode(text: str, system: ModeSystem, lineno: int, col: int) -> int:
    raw = _parse_int(text, "mode", lineno, col)
    if not 1 <= raw <= system.total_modes:
        raise CircuitParseError(
            f"mode {raw} out of range (system has {system.total_modes} modes, 1-based)",
            lineno,
            col,
        )
    return raw - 1


def _require(tokens, count: int, usage: str, lineno: int, line: str) -> None:
    if len(tokens) < count:
        raise CircuitParseError(f"too few arguments; usage: {usage}", lineno, len(line) + 1)
    if len(tokens) > count:
        text, col = tokens[count]
        raise CircuitParseError(f"unexpected token {text!r}; usage: {usage}", lineno, col)


def _keyvalue(token: str, key: str, what: str, lineno: int, col: int) -> str:
    prefix = key + "="
    if not token.startswith(prefix):
        raise CircuitParseError(f"expected {key}=<{what}>, got {token!r}", lineno, col)
    return token[len(prefix):]


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.system: ModeSystem | None = None
        self.input_poly: LadderPolynomial | None = None
        self.input_line: int | None = None
        self.elements: list = []
        self.measured: list[int] | None = None

    def parse(self) -> Circuit:
        for lineno, raw in enumerate(self.lines, 1):
            line = raw.split("#", 1)[0]
            tokens = _tokenize(line)
            if not tokens:
                continue
            keyword, col = tokens[0]
            if keyword == "system":
                self._parse_system(tokens, lineno, line)
                continue
            if self.system is None:
                raise CircuitParseError(
                    "the system must be declared before any other statement",
                    lineno,
                    col,
                )
            if keyword == "input":
                self._parse_input(tokens, lineno, line)
            elif keyword == "bs":
                self._parse_bs(tokens, lineno, line)
            elif keyword == "phase":
                self._parse_phase(tokens, lineno, line)
            elif keyword == "kerr":
                self._parse_kerr(tokens, lineno, line)
            elif keyword == "vertex":
                self._parse_vertex(tokens, lineno, line)
            elif keyword == "measure":
                self._parse_measure(tokens, lineno, line)
            else:
                raise CircuitParseError(f"unknown element {keyword!r}", lineno, col)
        return self._finish()

    # -- statements -----------------------------------------------------

    def _parse_system(self, tokens, lineno, line):
        if self.system is not None:
            raise CircuitParseError("duplicate system declaration", lineno, tokens[0][1])
        usage = "system bosons=<int> [fermions=<int>] cutoff=<int>"
        seen: dict[str, int] = {}
        for token, col in tokens[1:]:
            if "=" not in token:
                raise CircuitParseError(
                    f"expected key=value, got {token!r}; usage: {usage}", lineno, col
                )
            key, value = token.split("=", 1)
            if key not in ("bosons", "fermions", "cutoff"):
                raise CircuitParseError(f"unknown system key {key!r}", lineno, col)
            if key in seen:
                raise CircuitParseError(f"duplicate system key {key!r}", lineno, col)
            seen[key] = _parse_int(value, key, lineno, col)
        for key in ("bosons", "cutoff"):
            if key not in seen:
                raise CircuitParseError(
                    f"missing {key}= in system declaration; usage: {usage}",
                    lineno,
                    len(line) + 1,
                )
        try:
            self.system = ModeSystem(
                seen["bosons"], seen.get("fermions", 0), seen["cutoff"]
            )
        except ValueError as exc:
            raise CircuitParseError(str(exc), lineno, tokens[0][1])

    def _parse_input(self, tokens, lineno, line):
        if self.input_poly is not None:
            raise CircuitParseError("duplicate input declaration", lineno, tokens[0][1])
        if len(tokens) < 2:
            raise CircuitParseError(
                "input requires 'create' or 'superpose'", lineno, len(line) + 1
            )
        form, col = tokens[1]
        if form == "create":
            if len(tokens) < 3:
                raise CircuitParseError(
                    "input create requires at least one mode", lineno, len(line) + 1
                )
            poly = LadderPolynomial.constant(1.0)
            for text, tcol in tokens[2:]:
                mode = _parse_mode(text, self.system, lineno, tcol)
                poly = multiply(poly, creation(mode, self.system.species(mode)))
            self.input_poly = poly
        elif form == "superpose":
            offset = line.index("superpose", col - 1) + len("superpose")
            self.input_poly = self._parse_superpose(line, offset, lineno)
        else:
            raise CircuitParseError(
                f"expected 'create' or 'superpose', got {form!r}", lineno, col
            )
        self.input_line = lineno

    def _parse_superpose(self, line, offset, lineno) -> LadderPolynomial:
        body = line[offset:]
        if not body.strip():
            raise CircuitParseError("empty superposition", lineno, offset + 1)
        poly = LadderPolynomial.zero()
        pos = offset
        for chunk in body.split(";"):
            col = pos + 1 + (len(chunk) - len(chunk.lstrip()))
            term = chunk.strip()
            pos += len(chunk) + 1
            if not term:
                raise CircuitParseError("empty superposition term", lineno, col)
            if ":" not in term:
                raise CircuitParseError(
                    f"expected <complex>:<mode-list>, got {term!r}", lineno, col
                )
            amp_text, mode_text = term.split(":", 1)
            try:
                amp = complex(amp_text.strip())
            except ValueError:
                raise CircuitParseError(
                    f"invalid complex amplitude {amp_text.strip()!r}", lineno, col
                )
            mode_items = [m.strip() for m in mode_text.split(",")]
            if not any(mode_items):
                raise CircuitParseError("empty mode list", lineno, col)
            branch = LadderPolynomial.constant(amp)
            for item in mode_items:
                if not item:
                    raise CircuitParseError("empty mode in mode list", lineno, col)
                mode = _parse_mode(item, self.system, lineno, col)
                branch = multiply(branch, creation(mode, self.system.species(mode)))
            poly = poly + branch
        return poly

    def _parse_bs(self, tokens, lineno, line):
        usage = "bs <m1> <m2> (sym|asym|angle=<radians>)"
        _require(tokens, 4, usage, lineno, line)
        m1 = _parse_mode(tokens[1][0], self.system, lineno, tokens[1][1])
        m2 = _parse_mode(tokens[2][0], self.system, lineno, tokens[2][1])
        if m1 == m2:
            raise CircuitParseError("duplicate mode in beam splitter", lineno, tokens[2][1])
        spec, col = tokens[3]
        if spec == "sym":
            element = BeamSplitter(m1, m2, SYMMETRIC)
        elif spec == "asym":
            element = BeamSplitter(m1, m2, ANTISYMMETRIC)
        elif spec.startswith("angle="):
            theta = _parse_float(spec[len("angle="):], "angle", lineno, col)
            element = BeamSplitter(m1, m2, ANGLE, theta)
        else:
            raise CircuitParseError(
                f"expected sym, asym or angle=<radians>, got {spec!r}", lineno, col
            )
        self._add_element(element, lineno, tokens[0][1])

    def _parse_phase(self, tokens, lineno, line):
        usage = "phase <mode> <radians>"
        _require(tokens, 3, usage, lineno, line)
        mode = _parse_mode(tokens[1][0], self.system, lineno, tokens[1][1])
        phi = _parse_float(tokens[2][0], "phase", lineno, tokens[2][1])
        self._add_element(PhaseShifter(mode, phi), lineno, tokens[0][1])

    def _parse_kerr(self, tokens, lineno, line):
        usage = "kerr <m1> <m2> [strength=<radians>]"
        if len(tokens) not in (3, 4):
            _require(tokens, 3 if len(tokens) < 3 else 4, usage, lineno, line)
        m1 = _parse_mode(tokens[1][0], self.system, lineno, tokens[1][1])
        m2 = _parse_mode(tokens[2][0], self.system, lineno, tokens[2][1])
        if m1 == m2:
            raise CircuitParseError("duplicate mode in Kerr medium", lineno, tokens[2][1])
        strength = math.pi
        if len(tokens) == 4:
            text, col = tokens[3]
            strength = _parse_float(
                _keyvalue(text, "strength", "radians", lineno, col),
                "strength",
                lineno,
                col,
            )
        self._add_element(KerrMedium(m1, m2, strength), lineno, tokens[0][1])

    def _parse_vertex(self, tokens, lineno, line):
        usage = "vertex <photon-mode> <e-mode> <p-mode> theta=<radians>"
        _require(tokens, 5, usage, lineno, line)
        photon = _parse_mode(tokens[1][0], self.system, lineno, tokens[1][1])
        electron = _parse_mode(tokens[2][0], self.system, lineno, tokens[2][1])
        positron = _parse_mode(tokens[3][0], self.system, lineno, tokens[3][1])
        text, col = tokens[4]
        theta = _parse_float(
            _keyvalue(text, "theta", "radians", lineno, col), "theta", lineno, col
        )
        try:
            element = AnnihilationVertex(photon, electron, positron, theta)
        except ValueError as exc:
            raise CircuitParseError(str(exc), lineno, tokens[1][1])
        self._add_element(element, lineno, tokens[0][1])

    def _parse_measure(self, tokens, lineno, line):
        if self.measured is not None:
            raise CircuitParseError("duplicate measure declaration", lineno, tokens[0][1])
        if len(tokens) < 2:
            raise CircuitParseError(
                "measure requires 'all' or a mode list", lineno, len(line) + 1
            )
        if len(tokens) == 2 and tokens[1][0] == "all":
            self.measured = list(range(self.system.total_modes))
            return
        modes = []
        for text, col in tokens[1:]:
            modes.append(_parse_mode(text, self.system, lineno, col))
        self.measured = sorted(set(modes))

    def _add_element(self, element, lineno, col):
        from .circuit import _validate_element

        try:
            _validate_element(element, self.system)
        except (ValueError, IndexError) as exc:
            raise CircuitParseError(str(exc), lineno, col)
        self.elements.append(element)

    def _finish(self) -> Circuit:
        if self.system is None:
            raise CircuitParseError(
                "missing system declaration", max(1, len(self.lines)), 1
            )
        if self.input_poly is None:
            ket = reduce_to_ket(LadderPolynomial.constant(1.0), self.system)
        else:
            ket = reduce_to_ket(self.input_poly, self.system)
            if ket.norm() == 0.0:
                raise CircuitParseError(
                    "input state vanishes (Pauli exclusion or cancelling terms)",
                    self.input_line,
                    1,
                )
            ket = ket.normalized()
        measured = (
            self.measured
            if self.measured is not None
            else list(range(self.system.total_modes))
        )
        return Circuit(self.system, tuple(self.elements), ket, tuple(measured))


def parse_circuit(text: str) -> Circuit:
    """Parse circuit text; raises :class:`CircuitParseError` with position."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _render_input(circuit: Circuit) -> str | None:
    terms = circuit.input_state.poly.terms
    if not terms:
        return None
    if len(terms) == 1:
        ((factors, coeff),) = terms.items()
        if not factors:
            return None  # vacuum input is the default
        from .algebra import _gram_weight

        unit = 1.0 / math.sqrt(_gram_weight(factors))
        if abs(coeff - unit) < 1e-12:
            modes = " ".join(str(s.mode + 1) for s in factors)
            return f"input create {modes}"
    parts = []
    for factors, coeff in sorted(
        terms.items(), key=lambda item: tuple(s.mode for s in item[0])
    ):
        modes = ",".join(str(s.mode + 1) for s in factors)
        parts.append(f"{coeff!r}:{modes}")
    return "input superpose " + " ; ".join(parts)


def _render_element(element) -> str:
    if isinstance(element, BeamSplitter):
        a, b = element.mode_a + 1, element.mode_b + 1
        if element.variant == SYMMETRIC:
            return f"bs {a} {b} sym"
        if element.variant == ANTISYMMETRIC:
            return f"bs {a} {b} asym"
        return f"bs {a} {b} angle={element.theta!r}"
    if isinstance(element, PhaseShifter):
        return f"phase {element.mode + 1} {element.phase!r}"
    if isinstance(element, KerrMedium):
        return (
            f"kerr {element.mode_a + 1} {element.mode_b + 1} "
            f"strength={element.strength!r}"
        )
    if isinstance(element, AnnihilationVertex):
        return (
            f"vertex {element.photon_mode + 1} {element.electron_mode + 1} "
            f"{element.positron_mode + 1} theta={element.theta!r}"
        )
    if isinstance(element, QuadraticCustom):
        raise ValueError("custom quadratic elements have no text form")
    raise TypeError(f"unknown circuit element {element!r}")


def render_circuit(circuit: Circuit) -> str:
    """Render to DSL text that parses back to an equivalent circuit."""
    system = circuit.system
    head = f"system bosons={system.boson_modes}"
    if system.fermion_modes:
        head += f" fermions={system.fermion_modes}"
    head += f" cutoff={system.cutoff}"
    lines = [head]
    input_line = _render_input(circuit)
    if input_line is not None:
        lines.append(input_line)
    lines.extend(_render_element(e) for e in circuit.elements)
    if circuit.measured_modes == tuple(range(system.total_modes)):
        lines.append("measure all")
    else:
        lines.append("measure " + " ".join(str(m + 1) for m in circuit.measured_modes))
    return "\n".join(lines) + "\n"
