"""Time-domain stochastic oracle for the frequency-domain engine.

Each network input carries independent stationary Gaussian quadrature
processes X(t), Y(t) with the variances of its QuadSpectrum (white across
the band, or shaped by FFT coloring for tabulated spectra, with vacuum
variance 1 per sample).  The compiled element pipeline is expanded into
delay taps per detector -- passive elements only ever combine delayed,
phase-rotated copies -- and photocurrent fluctuation streams are
dn_k(t) = 2 Re(conj(alpha_k) sum taps), sampled at a rate that makes every
delay a whole number of samples (circular-buffer shifts).

Spectra come from a Welch periodogram with a spectrum-analyzer flavour:
segment width plays the resolution bandwidth, a post-detection moving
average over segment powers emulates the video bandwidth, and a known
electronic noise floor can be subtracted in absolute power before
normalisation.  Shot-noise references are measured by re-running the same
network with vacuum inputs on an independent random substream, mirroring
how the calibration is done on the bench.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from . import engine
from .network import BeamSplitter, Delay, Loss, PhaseShift, VACUUM_SPECTRUM

DELAY_TOLERANCE = 1e-6  # max |tau*f_s - round(tau*f_s)|
STREAM_MAGIC = b"SBMCS1\x00\x00"


class MCError(ValueError):
    pass


@dataclass(frozen=True)
class MCConfig:
    """Sampling plan for the time-domain oracle."""

    sample_rate: float
    seed: int
    segment_length: int = 512
    segment_count: int = 4096
    window: str = "hann"

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise MCError("sample rate must be positive")
        if self.segment_length < 8 or self.segment_count < 2:
            raise MCError("need segment_length >= 8 and segment_count >= 2")
        if self.window not in ("hann", "rect"):
            raise MCError("window must be 'hann' or 'rect'")

    @property
    def total_samples(self) -> int:
        return self.segment_length * self.segment_count

    @property
    def duration(self) -> float:
        return self.total_samples / self.sample_rate

    def check_frequency(self, omega: float):
        if not 0.0 <= omega:
            raise MCError("measurement frequency must be >= 0")
        if omega * 4.0 > 2.0 * math.pi * self.sample_rate:
            raise MCError(
                f"sample rate {self.sample_rate:g} Hz too low: need "
                f"f_s > 4 * measurement frequency")

    def delay_samples(self, tau: float) -> int:
        exact = tau * self.sample_rate
        nearest = round(exact)
        if abs(exact - nearest) > DELAY_TOLERANCE:
            raise MCError(
                f"delay {tau:g} s is not an integer number of samples at "
                f"f_s = {self.sample_rate:g} Hz (off by {abs(exact - nearest):.3g})")
        return int(nearest)


@dataclass(frozen=True)
class AnalyzerSettings:
    """Spectrum-analyzer emulation: RBW/VBW and electronic-noise handling."""

    rbw: float = 300e3
    vbw: float = 30.0
    electronic_floor: float = 0.0  # absolute bin power
    subtract_electronic: bool = False

    def __post_init__(self):
        if self.rbw <= 0 or self.vbw <= 0:
            raise MCError("RBW and VBW must be positive")
        if self.vbw > self.rbw:
            raise MCError("VBW must not exceed RBW")


@dataclass(frozen=True)
class MCEstimate:
    omega: float
    estimate: float
    stderr: float
    segments: int


@dataclass
class MCStreams:
    """Per-detector photocurrent sample streams (DC level included)."""

    sample_rate: float
    seed: int
    detector_names: tuple[str, ...]
    streams: np.ndarray  # (M, T) float64

    @property
    def length(self) -> int:
        return self.streams.shape[1]

    def combo_stream(self, net: engine.CompiledNetwork, combo) -> np.ndarray:
        weights = engine.combo_weights(net, combo)
        return weights @ self.streams


@dataclass(frozen=True)
class CrossValidation:
    omega: float
    engine_value: float
    mc_value: float
    stderr: float
    z: float
    segments: int

    @property
    def passed(self) -> bool:
        return abs(self.z) <= 3.0

    def as_json_dict(self) -> dict:
        return {
            "omega_rad_s": self.omega,
            "frequency_hz": self.omega / (2.0 * math.pi),
            "engine": self.engine_value,
            "monte_carlo": self.mc_value,
            "stderr": self.stderr,
            "z": self.z,
            "segments": self.segments,
            "passed": self.passed,
        }


# ---------------------------------------------------------------------------
# Pipeline expansion into delay taps

def expand_taps(net: engine.CompiledNetwork, cfg: MCConfig) -> list[list[tuple[int, int, complex]]]:
    """Per-detector tap lists (roster index, delay in samples, complex gain).

    Walks the same compiled pipeline as the frequency-domain engine, so both
    views share one structural source of truth.
    """
    taps: dict[str, dict[tuple[int, int], complex]] = {}
    for j, entry in enumerate(net.roster):
        taps[entry.name] = {(j, 0): 1.0 + 0j}

    def scaled(port: str, gain: complex, shift: int = 0):
        out: dict[tuple[int, int], complex] = {}
        for (j, d), g in taps[port].items():
            out[(j, d + shift)] = g * gain
        return out

    def merged(a, b):
        out = dict(a)
        for key, g in b.items():
            out[key] = out.get(key, 0j) + g
        return out

    for st in net.steps:
        el = st.element
        if isinstance(el, BeamSplitter):
            r = math.sqrt(max(0.0, 1.0 - el.t * el.t))
            a, b = st.in_ports
            taps[st.out_ports[0]] = merged(scaled(a, el.t), scaled(b, r))
            taps[st.out_ports[1]] = merged(scaled(a, r), scaled(b, -el.t))
        elif isinstance(el, PhaseShift):
            taps[st.out_ports[0]] = scaled(st.in_ports[0], np.exp(1j * el.phi))
        elif isinstance(el, Delay):
            shift = cfg.delay_samples(el.tau)
            taps[st.out_ports[0]] = scaled(
                st.in_ports[0], np.exp(1j * el.carrier_phase), shift)
        elif isinstance(el, Loss):
            a, v = st.in_ports
            taps[st.out_ports[0]] = merged(
                scaled(a, math.sqrt(el.eta)), scaled(v, math.sqrt(1.0 - el.eta)))
        else:  # pragma: no cover
            raise TypeError(f"unknown element {el!r}")

    out = []
    for port in net.detector_ports:
        out.append([(j, d, g) for (j, d), g in sorted(taps[port].items(),
                                                      key=lambda kv: kv[0])])
    return out


def _quadrature_stream(rng: np.random.Generator, n: int, cfg: MCConfig,
                       variance_fn, constant: float | None) -> np.ndarray:
    """White or FFT-colored Gaussian samples with per-sample variance V."""
    white = rng.standard_normal(n)
    if constant is not None:
        if constant == 1.0:
            return white
        return math.sqrt(constant) * white
    freqs = np.fft.rfftfreq(n, d=1.0 / cfg.sample_rate)
    gains = np.sqrt([variance_fn(2.0 * math.pi * f) for f in freqs])
    return np.fft.irfft(np.fft.rfft(white) * gains, n)


def simulate(net: engine.CompiledNetwork, cfg: MCConfig, inputs=None,
             substream: np.random.SeedSequence | None = None) -> MCStreams:
    """Sample per-detector photocurrent streams; bit-reproducible per seed.

    Input generation is keyed by roster position on spawned substreams, so
    streams are independent of element evaluation order and may be produced
    concurrently without changing the result.
    """
    for st in net.steps:
        if isinstance(st.element, Delay):
            cfg.delay_samples(st.element.tau)  # raises early on a bad f_s

    spectra = net.input_spectra(inputs)
    taps = expand_taps(net, cfg)
    n = cfg.total_samples
    alphas = np.array(net.carriers, dtype=complex)

    root = substream if substream is not None else np.random.SeedSequence(cfg.seed)
    children = root.spawn(net.n_inputs)

    streams = np.zeros((net.n_detectors, n))
    for j, (entry, spec) in enumerate(zip(net.roster, spectra)):
        used = [(k, d, g) for k, det in enumerate(taps) for (jj, d, g) in det if jj == j]
        if not used:
            continue
        rng = np.random.default_rng(children[j])
        x = _quadrature_stream(rng, n, cfg, spec.vx_at,
                               spec.vx if spec.is_constant else None)
        y = _quadrature_stream(rng, n, cfg, spec.vy_at,
                               spec.vy if spec.is_constant else None)
        for k, d, g in used:
            z = np.conj(alphas[k]) * g
            xs = np.roll(x, d) if d else x
            ys = np.roll(y, d) if d else y
            streams[k] += z.real * xs - z.imag * ys

    streams += (np.abs(alphas) ** 2)[:, None]  # DC photocurrent
    return MCStreams(
        sample_rate=cfg.sample_rate,
        seed=cfg.seed,
        detector_names=net.detector_names,
        streams=streams,
    )


# ---------------------------------------------------------------------------
# Welch periodogram with analyzer emulation

def _window(cfg: MCConfig) -> np.ndarray:
    if cfg.window == "rect":
        return np.ones(cfg.segment_length)
    return np.hanning(cfg.segment_length)


def segment_powers(stream: np.ndarray, omega: float, settings: AnalyzerSettings,
                   cfg: MCConfig) -> np.ndarray:
    """Per-segment bin powers at omega, coherent-gain normalised.

    A sinusoid of amplitude A exactly on the bin gives A^2/2; white noise of
    variance s^2 gives s^2 / (L/2) per bin with a rectangular window.
    """
    length = cfg.segment_length
    f_nyq_omega = math.pi * cfg.sample_rate
    if not 0.0 <= omega < f_nyq_omega:
        raise MCError(f"frequency {omega:g} rad/s outside [0, pi*f_s)")
    bin_width = cfg.sample_rate / length
    if not 0.5 <= bin_width / settings.rbw <= 2.0:
        raise MCError(
            f"segment length {length} gives bin width {bin_width:g} Hz, "
            f"inconsistent with RBW {settings.rbw:g} Hz")
    if stream.size < cfg.total_samples:
        raise MCError(
            f"stream too short: {stream.size} < {cfg.total_samples} samples")

    m = int(round(omega / (2.0 * math.pi) / bin_width))
    m = min(max(m, 0), length // 2)
    win = _window(cfg)
    segments = stream[:cfg.total_samples].reshape(cfg.segment_count, length)
    segments = segments - segments.mean(axis=1, keepdims=True)
    bins = np.fft.rfft(segments * win, axis=1)[:, m]
    one_sided = 2.0 if 0 < m < length // 2 else 1.0
    return one_sided * np.abs(bins) ** 2 / (win.sum() ** 2)


def video_average(powers: np.ndarray, settings: AnalyzerSettings,
                  cfg: MCConfig) -> np.ndarray:
    """Moving average over segment powers emulating the VBW filter."""
    segment_rate = cfg.sample_rate / cfg.segment_length
    width = max(1, int(round(segment_rate / settings.vbw)))
    width = min(width, powers.size)
    if width == 1:
        return powers
    kernel = np.ones(width) / width
    return np.convolve(powers, kernel, mode="valid")


def periodogram(stream: np.ndarray, omega: float, settings: AnalyzerSettings,
                cfg: MCConfig) -> MCEstimate:
    """Welch-averaged bin power at omega with analyzer emulation.

    Segment powers pass through the VBW moving average and the estimate is
    the mean of that trace; for stationary input this is an unbiased bin
    power (and identical to the plain Welch mean when VBW covers the whole
    record).  The reported standard error is estimate * sqrt(2/K), the
    Gaussian-data convention for K averaged variance estimates.
    """
    powers = segment_powers(np.asarray(stream, dtype=float), omega, settings, cfg)
    if settings.subtract_electronic:
        powers = powers - settings.electronic_floor
    trace = video_average(powers, settings, cfg)
    estimate = float(trace.mean())
    stderr = abs(estimate) * math.sqrt(2.0 / cfg.segment_count)
    return MCEstimate(omega=omega, estimate=estimate, stderr=stderr,
                      segments=cfg.segment_count)


def cross_validate(net: engine.CompiledNetwork, combo, omega: float,
                   cfg: MCConfig, settings: AnalyzerSettings | None = None,
                   inputs=None, engine_value: float | None = None) -> CrossValidation:
    """Compare the engine's normalised spectrum against a Monte-Carlo run.

    The Monte-Carlo value is the ratio of the signal-run bin power to a
    vacuum-input re-run on an independent substream; z is the discrepancy in
    combined standard errors.  The requested frequency snaps to the nearest
    FFT bin and the engine reference is evaluated there, so both sides see
    the same sideband.  engine_value can be overridden to test deliberate
    mismatches.
    """
    cfg.check_frequency(omega)
    if settings is None:
        settings = AnalyzerSettings(rbw=cfg.sample_rate / cfg.segment_length,
                                    vbw=cfg.sample_rate / cfg.segment_length)
    bin_width = cfg.sample_rate / cfg.segment_length
    m = int(round(omega / (2.0 * math.pi) / bin_width))
    omega = 2.0 * math.pi * m * bin_width
    root = np.random.SeedSequence(cfg.seed)
    signal_ss, vacuum_ss = root.spawn(2)

    signal = simulate(net, cfg, inputs=inputs, substream=signal_ss)
    vacuum_inputs = [VACUUM_SPECTRUM] * net.n_inputs
    vacuum = simulate(net, cfg, inputs=vacuum_inputs, substream=vacuum_ss)

    est_sig = periodogram(signal.combo_stream(net, combo), omega, settings, cfg)
    est_vac = periodogram(vacuum.combo_stream(net, combo), omega, settings, cfg)
    if est_vac.estimate <= 0.0:
        raise MCError("vacuum reference power is not positive; no carrier in combo?")

    mc_value = est_sig.estimate / est_vac.estimate
    rel = math.sqrt((est_sig.stderr / est_sig.estimate) ** 2
                    + (est_vac.stderr / est_vac.estimate) ** 2)
    stderr = abs(mc_value) * rel
    if engine_value is None:
        engine_value = engine.spectrum(net, combo, omega, inputs=inputs).normalized
    z = (mc_value - engine_value) / stderr
    return CrossValidation(omega=omega, engine_value=float(engine_value),
                           mc_value=mc_value, stderr=stderr, z=float(z),
                           segments=cfg.segment_count)


# ---------------------------------------------------------------------------
# Stream dumps: little-endian float64 with a fixed binary header

def dump_streams(path, mc: MCStreams):
    header = struct.pack("<8sdQQQ", STREAM_MAGIC, mc.sample_rate,
                         len(mc.detector_names), mc.length, mc.seed)
    names = ",".join(mc.detector_names).encode()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(struct.pack("<Q", len(names)))
        fh.write(names)
        fh.write(mc.streams.astype("<f8").tobytes())


def load_streams(path) -> MCStreams:
    with open(path, "rb") as fh:
        head = fh.read(struct.calcsize("<8sdQQQ"))
        if len(head) < struct.calcsize("<8sdQQQ") or head[:8] != STREAM_MAGIC:
            raise MCError(f"not a stream dump: bad magic {head[:8]!r}")
        magic, f_s, m, length, seed = struct.unpack("<8sdQQQ", head)
        (name_len,) = struct.unpack("<Q", fh.read(8))
        names = tuple(fh.read(name_len).decode().split(",")) if name_len else ()
        data = np.frombuffer(fh.read(8 * m * length), dtype="<f8").reshape(m, length)
    return MCStreams(sample_rate=f_s, seed=seed, detector_names=names,
                     streams=data.copy())
