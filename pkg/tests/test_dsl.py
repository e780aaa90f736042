import math
import random
import re

import pytest

from sideband import dsl, presets
from sideband.network import (
    Coherent,
    Delay,
    FreqRange,
    NetworkSpec,
    SourceDecl,
    SqueezedCoherent,
    Vacuum,
    validate,
)

import netgen

C = 299792458.0


def parse_error(text: str) -> dsl.ParseDiagnostic:
    with pytest.raises(dsl.ParseError) as err:
        dsl.parse(text)
    return err.value.diagnostic


class TestParse:
    def test_minimal_program(self):
        spec = dsl.parse("source a coherent amp=100; det D1 from a;")
        assert len(spec.sources) == 1 and len(spec.detectors) == 1
        assert isinstance(spec.sources[0].spec, Coherent)
        assert spec.sources[0].spec.amp.re == 100.0
        assert validate(spec) == []

    def test_mz_preset_delay(self, mz_phase_text):
        spec = dsl.parse(mz_phase_text)
        assert validate(spec) == []
        delay = next(e.element for e in spec.elements if isinstance(e.element, Delay))
        assert delay.tau == 7.32 / C
        assert delay.tau == pytest.approx(2.4416891768504732e-08, rel=1e-15)
        assert delay.carrier_phase == pytest.approx(math.pi / 2)

    def test_all_presets_parse_and_validate(self):
        for name in presets.available():
            spec = dsl.parse(presets.load(name))
            assert validate(spec) == [], name

    def test_squeezed_source_db_units(self):
        spec = dsl.parse(
            "source s1 squeezed amp=140 vx=-2.1dB vy=+18dB; det D from s1;")
        noise = spec.sources[0].spec.noise
        assert noise.vx == pytest.approx(10 ** -0.21)
        assert noise.vy == pytest.approx(10 ** 1.8)

    def test_frequency_units_and_ranges(self):
        spec = dsl.parse(
            "source a coherent amp=1; det D from a;"
            "measure PM single(D) freqs=15MHz:25MHz:0.5MHz;")
        freqs = spec.measurements[0].freqs
        assert freqs == FreqRange(15e6, 25e6, 0.5e6)
        assert len(freqs.values()) == 21

    def test_frequency_list(self):
        spec = dsl.parse(
            "source a coherent amp=1; det D from a;"
            "measure M single(D) freqs=1MHz,2500kHz,5e6;")
        assert spec.measurements[0].freqs.values() == (1e6, 2.5e6, 5e6)

    def test_comments_and_whitespace(self):
        spec = dsl.parse(
            "# header\nsource a coherent amp=1;  # trailing\n\n\tdet D from a;\n")
        assert len(spec.detectors) == 1

    def test_length_units(self):
        spec = dsl.parse("source a coherent amp=1;"
                         "delay L from a length=732cm; det D from L.out;")
        assert spec.elements[0].element.tau == pytest.approx(7.32 / C)

    def test_open_bs_port_allowed(self):
        spec = dsl.parse("source a coherent amp=1; bs B from a t=0.5;"
                         "det D1 from B.out1; det D2 from B.out2;")
        assert validate(spec) == []


class TestParseDiagnostics:
    def test_t_out_of_range(self):
        diag = parse_error("source a coherent amp=1; bs B1 from a t=1.2;")
        assert "t out of range [0,1]" in diag.message
        assert diag.line == 1
        # the diagnostic points inside the offending value token
        assert diag.snippet[diag.column - 1:].startswith("1.2")

    def test_unknown_keyword(self):
        diag = parse_error("source a coherent amp=1; splitter B from a;")
        assert "unknown statement keyword" in diag.message
        assert diag.snippet[diag.column - 1:].startswith("splitter")

    def test_duplicate_name(self):
        diag = parse_error("source a coherent amp=1; loss a from a eta=0.5;")
        assert "duplicate name" in diag.message

    def test_unit_mismatch_on_dimensionless(self):
        diag = parse_error("source a coherent amp=1; bs B from a t=0.5m;")
        assert "unit mismatch" in diag.message

    def test_unit_mismatch_wrong_dimension(self):
        diag = parse_error("source a coherent amp=1;"
                           "delay L from a length=5Hz; det D from L.out;")
        assert "unit mismatch" in diag.message

    def test_heisenberg_violation_positioned(self):
        diag = parse_error("source s squeezed amp=1 vx=-3dB vy=0dB; det D from s;")
        assert "Heisenberg" in diag.message

    def test_missing_semicolon(self):
        diag = parse_error("source a coherent amp=1")
        assert "';'" in diag.message

    def test_missing_required_param(self):
        diag = parse_error("source a coherent amp=1; loss L from a; det D from L.out;")
        assert "missing required parameter 'eta'" in diag.message

    def test_delay_needs_exactly_one_length(self):
        diag = parse_error("source a coherent amp=1;"
                           "delay L from a tau=1ns length=1m; det D from L.out;")
        assert "exactly one of" in diag.message

    def test_reserved_word_as_name(self):
        diag = parse_error("source measure coherent amp=1;")
        assert "reserved word" in diag.message

    def test_unexpected_character(self):
        diag = parse_error("source a coherent amp=1; det D from a; @")
        assert "unexpected character" in diag.message
        assert diag.column == len("source a coherent amp=1; det D from a; ") + 1

    def test_position_is_always_in_bounds(self):
        for text in ("", ";", "det", "source a vacuum; det D from", "measure M"):
            try:
                dsl.parse(text)
            except dsl.ParseError as err:
                d = err.diagnostic
                assert d.line >= 1 and d.column >= 1
                assert d.column <= len(d.snippet) + 1


class TestSerialize:
    def test_minimal_round_trip(self):
        spec = dsl.parse("source a coherent amp=100; det D1 from a;")
        assert dsl.parse(dsl.serialize(spec)) == spec

    def test_preset_round_trips_exact_values(self, mz_phase_text):
        spec = dsl.parse(mz_phase_text)
        again = dsl.parse(dsl.serialize(spec))
        assert again == spec
        d1 = next(e.element for e in spec.elements if isinstance(e.element, Delay))
        d2 = next(e.element for e in again.elements if isinstance(e.element, Delay))
        assert d1.tau == d2.tau and d1.carrier_phase == d2.carrier_phase

    def test_rejects_compiled_artifacts(self):
        spec = NetworkSpec(sources=(SourceDecl("__vac0", Vacuum()),))
        with pytest.raises(dsl.SerializeError, match="compiled artifacts"):
            dsl.serialize(spec)

    def test_rejects_tabulated_spectra(self):
        from sideband.network import ComplexAmp, DetectorDecl, QuadSpectrum
        spec = NetworkSpec(
            sources=(SourceDecl("s", SqueezedCoherent(
                ComplexAmp(1.0),
                QuadSpectrum.tabulated([0, 1], [1, 1], [1, 1]))),),
            detectors=(DetectorDecl("D", "s"),))
        with pytest.raises(dsl.SerializeError):
            dsl.serialize(spec)


class TestGrammarDoc:
    def test_shipped_ebnf_covers_the_token_set(self):
        from importlib import resources
        text = (resources.files("sideband") / "grammar.ebnf").read_text()
        quoted = set(re.findall(r'"([^"]+)"', text))
        assert dsl.KEYWORDS <= quoted
        for table in (dsl.LENGTH_UNITS, dsl.TIME_UNITS, dsl.FREQ_UNITS):
            assert set(table) <= quoted
        assert "dB" in quoted
        for punct in ";=,():.":
            assert punct in quoted


class TestFuzzRoundTrip:
    def test_random_specs_round_trip(self):
        rng = random.Random(20260810)
        for i in range(200):
            spec = netgen.random_spec(rng)
            text = dsl.serialize(spec)
            assert dsl.parse(text) == spec, f"case {i}:\n{text}"

    def test_invalid_mutations_give_positioned_diagnostics(self):
        rng = random.Random(4242)
        mutations = ["keyword", "semicolon", "badchar", "equals", "truncate",
                     "duplicate", "badunit"]
        checked = 0
        for i in range(200):
            text = dsl.serialize(netgen.random_spec(rng))
            kind = mutations[i % len(mutations)]
            mutant = self._mutate(text, kind, rng)
            with pytest.raises(dsl.ParseError) as err:
                dsl.parse(mutant)
            d = err.value.diagnostic
            lines = mutant.splitlines() or [""]
            assert 1 <= d.line <= len(lines) + 1
            assert d.column >= 1
            checked += 1
        assert checked == 200

    @staticmethod
    def _mutate(text: str, kind: str, rng: random.Random) -> str:
        if kind == "keyword":
            return re.sub(r"^(source|bs|phase|delay|loss|det|measure)",
                          "bogus", text, count=1, flags=re.M)
        if kind == "semicolon":
            idx = text.rindex(";")
            return text[:idx] + text[idx + 1:]
        if kind == "badchar":
            pos = rng.randrange(len(text))
            return text[:pos] + "@" + text[pos:]
        if kind == "equals":
            if "=" not in text:  # vacuum-only specs may carry no params
                return text.rstrip().rstrip(";")
            idx = text.index("=")
            return text[:idx] + ":" + text[idx + 1:]
        if kind == "truncate":
            return text[:int(len(text) * 0.7)].rstrip().rstrip(";")
        if kind == "duplicate":
            first = text.splitlines()[0]
            return text + first + "\n"
        if kind == "badunit":
            if not re.search(r"=(\d)", text):
                return text.rstrip().rstrip(";")
            return re.sub(r"=(\d)", r"=\1Qz", text, count=1)
        raise AssertionError(kind)
