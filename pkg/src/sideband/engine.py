"""Sideband transfer matrices and photocurrent fluctuation spectra.

A compiled network maps the annihilation fluctuation operators of its inputs
at sideband frequency w to the operators at the detector ports through an
M x N complex matrix A(w), built by walking the element pipeline in
topological order.  Carriers follow the same pipeline with the sideband
factor of each delay removed, i.e. the carrier vector equals A(0) applied to
the source amplitudes.

Because every element is passive, the conjugate-operator rows need no extra
state: the da^dag response at +w is conj(A(-w)).  Photocurrent linear forms
therefore combine u = conj(alpha_k) A_kj(w) and w = alpha_k conj(A_kj(-w))
into amplitude/phase quadrature coefficients c_X = (u + w)/2 and
c_Y = i(u - w)/2 per input, and a variance spectrum is a weighted sum of the
input quadrature variances.  All spectra are normalised to the shot-noise
level of the same detector combination, which for a passive network equals
the detected carrier flux.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .network import (
    BeamSplitter,
    Combo,
    Delay,
    Loss,
    NetworkSpec,
    PhaseShift,
    QuadSpectrum,
    RESERVED_PREFIX,
    VACUUM_SPECTRUM,
    source_amp,
    source_noise,
    topo_order,
    validate,
)


class StructuralError(ValueError):
    """Raised when compiling a spec that does not pass validation."""


@dataclass(frozen=True)
class RosterEntry:
    """One network input: a declared source or an injected vacuum."""

    name: str
    noise: QuadSpectrum
    carrier: complex
    injected: bool


@dataclass(frozen=True)
class CompiledNetwork:
    """Element pipeline with resolved ports and a deterministic input roster.

    The roster lists declared sources in declaration order followed by the
    vacuum ports injected for Loss elements and open beamsplitter inputs, in
    pipeline-traversal order.  n_inputs/n_detectors give the transfer-matrix
    shape (N columns, M rows).
    """

    spec: NetworkSpec
    roster: tuple[RosterEntry, ...]
    steps: tuple["PipelineStep", ...]
    detector_names: tuple[str, ...]
    detector_ports: tuple[str, ...]
    carriers: tuple[complex, ...]  # per detector
    loss_ports: tuple[str, ...]  # input port of each Loss (for flux audits)
    unconsumed_ports: tuple[str, ...]

    @property
    def n_inputs(self) -> int:
        return len(self.roster)

    @property
    def n_detectors(self) -> int:
        return len(self.detector_names)

    def roster_index(self, name: str) -> int:
        for i, entry in enumerate(self.roster):
            if entry.name == name:
                return i
        raise KeyError(name)

    def input_spectra(self, inputs=None) -> list[QuadSpectrum]:
        """Resolve per-roster quadrature spectra.

        ``inputs`` may be None (use the declared source noise), a mapping
        from source name to QuadSpectrum overriding individual sources, or a
        full roster-aligned sequence.  Injected vacua are always (1, 1).
        """
        if isinstance(inputs, Sequence) and not isinstance(inputs, (str, bytes)):
            if len(inputs) != self.n_inputs:
                raise ValueError(
                    f"expected {self.n_inputs} roster-aligned spectra, got {len(inputs)}")
            return [VACUUM_SPECTRUM if e.injected else s
                    for e, s in zip(self.roster, inputs)]
        overrides: Mapping[str, QuadSpectrum] = inputs or {}
        unknown = set(overrides) - {e.name for e in self.roster}
        if unknown:
            raise KeyError(f"unknown source names in overrides: {sorted(unknown)}")
        return [VACUUM_SPECTRUM if e.injected else overrides.get(e.name, e.noise)
                for e in self.roster]

    def source_flux(self) -> float:
        return float(sum(abs(e.carrier) ** 2 for e in self.roster))


@dataclass(frozen=True)
class PipelineStep:
    element: object
    in_ports: tuple[str, ...]
    out_ports: tuple[str, ...]


@dataclass(frozen=True)
class TransferMatrix:
    """A(w): rows = detectors, columns = roster inputs; plus the carriers."""

    omega: float
    a: np.ndarray  # (M, N) complex
    carriers: np.ndarray  # (M,) complex


@dataclass(frozen=True)
class LinearForm:
    """Photocurrent-fluctuation coefficients over all input quadratures.

    The combined detector photocurrent fluctuation at sideband w is
    sum_j c_x[j] dX_j(w) + c_y[j] dY_j(w), units sqrt(photon flux).
    """

    omega: float
    c_x: np.ndarray  # (N,) complex
    c_y: np.ndarray  # (N,) complex
    input_names: tuple[str, ...]


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float
    absolute: float
    snl: float
    normalized: float
    db: float


def compile(spec: NetworkSpec) -> CompiledNetwork:  # noqa: A001 - domain verb
    """Compile a validated spec into an ordered pipeline with vacuum roster.

    Deterministic and idempotent: the roster is declared sources first, then
    injected vacua in traversal order (every Loss contributes exactly one).
    """
    violations = validate(spec)
    if violations:
        raise StructuralError(
            "spec does not validate: " + "; ".join(str(v) for v in violations))

    roster: list[RosterEntry] = []
    for s in spec.sources:
        roster.append(RosterEntry(
            name=s.name,
            noise=source_noise(s.spec),
            carrier=source_amp(s.spec).value,
            injected=False,
        ))

    def inject_vacuum() -> str:
        name = f"{RESERVED_PREFIX}vac{sum(1 for e in roster if e.injected)}"
        roster.append(RosterEntry(name, VACUUM_SPECTRUM, 0j, injected=True))
        return name

    steps: list[PipelineStep] = []
    loss_ports: list[str] = []
    for decl in topo_order(spec):
        el = decl.element
        ins = list(decl.inputs)
        if isinstance(el, BeamSplitter):
            while len(ins) < 2:
                ins.append(inject_vacuum())
        elif isinstance(el, Loss):
            ins.append(inject_vacuum())
            loss_ports.append(decl.inputs[0])
        steps.append(PipelineStep(el, tuple(ins), decl.output_ports()))

    consumed = {p for st in steps for p in st.in_ports}
    consumed.update(d.input for d in spec.detectors)
    produced = [s.name for s in spec.sources]
    produced += [p for st in steps for p in st.out_ports]
    unconsumed = tuple(p for p in produced if p not in consumed)

    net = CompiledNetwork(
        spec=spec,
        roster=tuple(roster),
        steps=tuple(steps),
        detector_names=spec.detector_names(),
        detector_ports=tuple(d.input for d in spec.detectors),
        carriers=(),
        loss_ports=tuple(loss_ports),
        unconsumed_ports=unconsumed,
    )
    amps = np.array([e.carrier for e in net.roster], dtype=complex)
    carriers = tuple(complex(c) for c in transfer(net, 0.0).a @ amps)
    return dataclasses.replace(net, carriers=carriers)


def _run_pipeline(net: CompiledNetwork, omega: float) -> dict[str, np.ndarray]:
    n = net.n_inputs
    state: dict[str, np.ndarray] = {}
    for j, entry in enumerate(net.roster):
        row = np.zeros(n, dtype=complex)
        row[j] = 1.0
        state[entry.name] = row
    for st in net.steps:
        el = st.element
        if isinstance(el, BeamSplitter):
            a, b = state[st.in_ports[0]], state[st.in_ports[1]]
            r = math.sqrt(max(0.0, 1.0 - el.t * el.t))
            state[st.out_ports[0]] = el.t * a + r * b
            state[st.out_ports[1]] = r * a - el.t * b
        elif isinstance(el, PhaseShift):
            state[st.out_ports[0]] = np.exp(1j * el.phi) * state[st.in_ports[0]]
        elif isinstance(el, Delay):
            factor = np.exp(1j * el.carrier_phase) * np.exp(-1j * omega * el.tau)
            state[st.out_ports[0]] = factor * state[st.in_ports[0]]
        elif isinstance(el, Loss):
            a, v = state[st.in_ports[0]], state[st.in_ports[1]]
            state[st.out_ports[0]] = math.sqrt(el.eta) * a + math.sqrt(1.0 - el.eta) * v
        else:  # pragma: no cover - union is closed
            raise TypeError(f"unknown element {el!r}")
    return state


def transfer(net: CompiledNetwork, omega: float) -> TransferMatrix:
    """Evaluate the input->detector matrix at sideband frequency omega (rad/s)."""
    state = _run_pipeline(net, omega)
    a = np.array([state[p] for p in net.detector_ports], dtype=complex)
    carriers = np.array(net.carriers, dtype=complex) if net.carriers else np.zeros(0, dtype=complex)
    return TransferMatrix(omega=omega, a=a, carriers=carriers)


ComboLike = Union[Combo, Mapping[str, float]]


def combo_weights(net: CompiledNetwork, combo: ComboLike) -> np.ndarray:
    """Per-detector weights (+1/-1/0, or arbitrary floats for custom combos)."""
    w = np.zeros(net.n_detectors)
    index = {name: k for k, name in enumerate(net.detector_names)}
    if isinstance(combo, Combo):
        if combo.kind == "single":
            w[index[combo.detectors[0]]] = 1.0
        else:
            w[index[combo.detectors[0]]] = 1.0
            w[index[combo.detectors[1]]] = 1.0 if combo.kind == "sum" else -1.0
        return w
    for name, weight in combo.items():
        w[index[name]] = weight
    return w


def photocurrent_form(net: CompiledNetwork, combo: ComboLike, omega: float) -> LinearForm:
    """Linearised photocurrent fluctuation of a detector combination."""
    weights = combo_weights(net, combo)
    alpha = np.array(net.carriers, dtype=complex)
    a_pos = transfer(net, omega).a
    a_neg = transfer(net, -omega).a
    u = (weights * np.conj(alpha)) @ a_pos
    w = (weights * alpha) @ np.conj(a_neg)
    return LinearForm(
        omega=omega,
        c_x=(u + w) / 2.0,
        c_y=1j * (u - w) / 2.0,
        input_names=tuple(e.name for e in net.roster),
    )


def spectrum(net: CompiledNetwork, combo: ComboLike, omega: float,
             inputs=None) -> SpectrumPoint:
    """Photocurrent variance spectral density of a combo at omega (rad/s).

    ``absolute`` sums |c_X|^2 V_X + |c_Y|^2 V_Y over the roster; ``snl`` is
    the same sum with every variance forced to 1; ``normalized`` is their
    ratio (NaN when no carrier reaches the combo), ``db`` its decibel value.
    """
    form = photocurrent_form(net, combo, omega)
    spectra = net.input_spectra(inputs)
    px = np.abs(form.c_x) ** 2
    py = np.abs(form.c_y) ** 2
    vx = np.array([s.vx_at(omega) for s in spectra])
    vy = np.array([s.vy_at(omega) for s in spectra])
    absolute = float(px @ vx + py @ vy)
    snl_val = float(np.sum(px) + np.sum(py))
    if snl_val > 0.0:
        normalized = absolute / snl_val
        db = 10.0 * math.log10(normalized) if normalized > 0.0 else -math.inf
    else:
        normalized = math.nan
        db = math.nan
    return SpectrumPoint(omega=omega, absolute=absolute, snl=snl_val,
                         normalized=normalized, db=db)


def snl(net: CompiledNetwork, combo: ComboLike) -> float:
    """Shot-noise level of a combo: the weighted detected carrier flux.

    Equals the coefficient-sum route in :func:`spectrum` because the rows of
    a passive network's transfer matrix are orthonormal once every hidden
    vacuum is part of the roster.
    """
    weights = combo_weights(net, combo)
    alpha = np.array(net.carriers, dtype=complex)
    return float(np.sum((weights ** 2) * np.abs(alpha) ** 2))


@dataclass(frozen=True)
class DCLevels:
    """Mean photocurrents per detector and their pairwise differences."""

    detector_names: tuple[str, ...]
    means: tuple[float, ...]

    def mean(self, detector: str) -> float:
        return self.means[self.detector_names.index(detector)]

    def difference(self, d1: str, d2: str) -> float:
        return self.mean(d1) - self.mean(d2)

    def pairwise(self) -> dict[tuple[str, str], float]:
        out = {}
        for i, a in enumerate(self.detector_names):
            for b in self.detector_names[i + 1:]:
                out[(a, b)] = self.mean(a) - self.mean(b)
        return out


def dc_levels(net: CompiledNetwork) -> DCLevels:
    """DC photocurrents |alpha_k|^2; the two-port difference traces the fringe."""
    means = tuple(float(abs(c) ** 2) for c in net.carriers)
    return DCLevels(detector_names=net.detector_names, means=means)


@dataclass(frozen=True)
class FluxAudit:
    source_flux: float
    detected_flux: float
    loss_flux: float
    unconsumed_flux: float

    @property
    def balance(self) -> float:
        return self.source_flux - (self.detected_flux + self.loss_flux
                                   + self.unconsumed_flux)


def flux_audit(net: CompiledNetwork) -> FluxAudit:
    """Carrier-flux bookkeeping: sources vs detected + discarded + unconsumed."""
    state = _run_pipeline(net, 0.0)
    amps = np.array([e.carrier for e in net.roster], dtype=complex)

    def port_flux(port: str) -> float:
        return float(abs(state[port] @ amps) ** 2)

    detected = sum(port_flux(p) for p in net.detector_ports)
    unconsumed = sum(port_flux(p) for p in net.unconsumed_ports)
    lost = 0.0
    for st in net.steps:
        if isinstance(st.element, Loss):
            lost += (1.0 - st.element.eta) * port_flux(st.in_ports[0])
    return FluxAudit(
        source_flux=net.source_flux(),
        detected_flux=float(detected),
        loss_flux=float(lost),
        unconsumed_flux=float(unconsumed),
    )
