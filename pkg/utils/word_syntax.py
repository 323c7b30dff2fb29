"""
Text syntax for operator words

    word    := "identity" | factor (" * " factor)*
    factor  := exp(phase) | V(a, field) | W(densities) | psi(densities) | mark(V(..), V(..))
    field   := "0" | [coeff*]leaf (" + " [coeff*]leaf)*   (a missing coefficient is 1)
    phase   := "0" | term (" + " term)*   with terms n/d*turn, x*rad, x*phi(..; ..),
               x*pj(..; ..), x*conv(atom; mollifier; point)

Printing is the ``text`` property of each object; parsing a printed normal
form gives back an equal word.
"""
import re
from fractions import Fraction

from utils.algebra import (CentralMark, ConvolutionTerm, DeltaTerm, IDENTITY_WORD, LabelSum, OperatorWord,
                           PhaseExpr, PhiTerm, PsiGenerator, VGenerator, WGenerator)
from utils.config import DEFAULT_ORDER, ScenarioError, WorkbenchError
from utils.geometry import FourVector
from utils.profiles import BumpProfile, DeltaProfile, Mollifier, PlateauProfile, PointProfile, RadialBump
from utils.testfun import (ChargeDensity, PairDensity, ScalarAtom, ScalarField, TwoForm, VectorField,
                           current_probe, delta_two_form, flux_probe, gradient, vector_field)

_NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf|nan")
_INT = re.compile(r"[-+]?\d+")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message):
        snippet = self.text[self.pos:self.pos + 30]
        return ScenarioError(f"{message} at position {self.pos} near {snippet!r}")

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, literal):
        self.ws()
        return self.text.startswith(literal, self.pos)

    def accept(self, literal):
        if self.peek(literal):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal):
        if not self.accept(literal):
            raise self.error(f"expected {literal!r}")

    def _match(self, pattern, what):
        self.ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def number(self):
        return float(self._match(_NUMBER, "a number"))

    def integer(self):
        return int(self._match(_INT, "an integer"))

    def name(self):
        return self._match(_NAME, "a name")

    def fraction(self):
        num = self._match(_INT, "an integer")
        if self.accept("/"):
            return Fraction(int(num), self.integer())
        return Fraction(int(num))

    def keyword(self, key):
        self.expect(key)
        self.expect("=")

    def zero(self):
        """Consume a bare "0" standing for an empty sum."""
        self.ws()
        if re.match(r"0(?![\w.*/])", self.text[self.pos:]):
            self.pos += 1
            return True
        return False

    def optional_order(self):
        """Trailing ", k=n)" of a label; the order defaults when omitted."""
        order = DEFAULT_ORDER
        if self.accept(","):
            self.keyword("k")
            order = self.integer()
        self.expect(")")
        return order

    def at_end(self):
        self.ws()
        return self.pos >= len(self.text)

    # geometry and profiles

    def four_vector(self):
        return FourVector.of([self.number() for _ in range(4)])

    def time_profile(self):
        kind = self.name()
        self.expect("(")
        if kind == "delta":
            self.expect(")")
            return DeltaProfile()
        if kind != "bump":
            raise self.error(f"unknown time profile {kind!r}")
        self.keyword("k")
        order = self.integer()
        self.expect(",")
        self.keyword("c")
        center = self.number()
        self.expect(",")
        self.keyword("w")
        width = self.number()
        self.expect(")")
        return BumpProfile(order, center, width)

    def space_profile(self):
        kind = self.name()
        self.expect("(")
        if kind == "point":
            self.expect(")")
            return PointProfile()
        if kind == "plateau":
            self.keyword("r")
            r = self.number()
            self.expect(",")
            self.keyword("eps")
            eps = self.number()
            self.expect(",")
            self.keyword("k")
            order = self.integer()
            self.expect(")")
            return PlateauProfile(r, eps, order)
        if kind == "rbump":
            self.keyword("a")
            a = self.number()
            self.expect(",")
            self.keyword("k")
            order = self.integer()
            self.expect(")")
            return RadialBump(a, order)
        raise self.error(f"unknown radial profile {kind!r}")

    def mollifier(self):
        self.expect("mollifier(")
        self.keyword("a")
        a = self.number()
        self.expect(",")
        self.keyword("k")
        order = self.integer()
        self.expect(")")
        return Mollifier(a, order)

    # test functions

    def atom(self):
        self.expect("atom(")
        self.keyword("c")
        center = self.four_vector()
        self.expect(",")
        self.keyword("t")
        time = self.time_profile()
        self.expect(",")
        self.keyword("s")
        space = self.space_profile()
        self.expect(",")
        self.keyword("d")
        deriv = tuple(self.integer() for _ in range(4))
        self.expect(",")
        self.keyword("lap")
        lap = self.integer()
        self.expect(")")
        return ScalarAtom(center, time, space, deriv, lap)

    def _sum(self, item):
        if self.zero():
            return []
        pairs = []
        while True:
            self.ws()
            if _NAME.match(self.text, self.pos) and not _NUMBER.match(self.text, self.pos):
                coeff = 1.0
            else:
                coeff = self.number()
                self.expect("*")
            pairs.append((coeff, item()))
            if not self.accept("+"):
                return pairs

    def scalar_field(self):
        return ScalarField.combine(self._sum(self.atom))

    def two_form(self):
        self.expect("twoform(")
        comps = {}
        if not self.accept(")"):
            while True:
                key = self._match(re.compile(r"[0-3][0-3]"), "a component index")
                self.expect("=")
                comps[(int(key[0]), int(key[1]))] = self.scalar_field()
                if self.accept(")"):
                    break
                self.expect(",")
        return TwoForm.from_components(comps)

    def vector_leaf(self):
        kind = self.name()
        self.expect("(")
        if kind == "fluxprobe":
            self.keyword("c")
            c = self.four_vector()
            self.expect(",")
            self.keyword("r")
            r = self.number()
            self.expect(",")
            self.keyword("eps")
            eps = self.number()
            order = self.optional_order()
            return flux_probe(c, r, eps, order)[1].terms[0][1]
        if kind == "delta":
            field = delta_two_form(self.two_form())
        elif kind == "currentprobe":
            field = current_probe(self.vector_field())
        elif kind == "gradient":
            field = gradient(self.scalar_field())
        elif kind == "vector":
            comps = [ScalarField()] * 4
            while True:
                mu = self.integer()
                self.expect("=")
                comps[mu] = self.scalar_field()
                if not self.accept(","):
                    break
            field = vector_field(comps)
        else:
            raise self.error(f"unknown vector leaf {kind!r}")
        self.expect(")")
        if len(field.terms) != 1:
            raise self.error(f"{kind} leaf collapsed to zero")
        return field.terms[0][1]

    def vector_field(self):
        return VectorField.combine(self._sum(self.vector_leaf))

    def pair(self):
        self.expect("pair(")
        self.keyword("q")
        q = self.number()
        self.expect(",")
        self.keyword("c1")
        c1 = self.four_vector()
        self.expect(",")
        self.keyword("c2")
        c2 = self.four_vector()
        self.expect(",")
        self.keyword("moll")
        a = self.number()
        order = self.optional_order()
        return PairDensity(q, c1, c2, Mollifier(a, order))

    def charge(self):
        self.expect("charge(")
        self.keyword("q")
        q = self.number()
        self.expect(",")
        self.keyword("c")
        c = self.four_vector()
        self.expect(",")
        self.keyword("moll")
        a = self.number()
        order = self.optional_order()
        return ChargeDensity(q, c, Mollifier(a, order))

    def density(self):
        return self.pair() if self.peek("pair(") else self.charge()

    def densities(self):
        pairs = []
        for coeff, density in self._sum(self.density):
            pairs += [(coeff * c, unit) for c, unit in LabelSum.of(density).terms]
        return LabelSum.combine(pairs)

    # phases and words

    def pairing_label(self):
        return self.pair() if self.peek("pair(") else self.vector_field()

    def phase_term(self):
        start = self.pos
        self.ws()
        if re.match(r"[-+]?\d+/\d+\*turn", self.text[self.pos:]) or \
                re.match(r"[-+]?\d+\*turn", self.text[self.pos:]):
            turns = self.fraction()
            self.expect("*turn")
            return PhaseExpr(turns)
        coeff = self.number()
        self.expect("*")
        kind = self.name()
        if kind == "turn":
            self.pos = start
            raise self.error("turns take an integer or fraction coefficient")
        if kind == "rad":
            return PhaseExpr(radians=coeff)
        self.expect("(")
        if kind == "phi":
            m = self.pair()
            self.expect(";")
            term = PhiTerm(m, self.vector_field())
        elif kind == "pj":
            u = self.pairing_label()
            self.expect(";")
            term = DeltaTerm(u, self.pairing_label())
        elif kind == "conv":
            atom = self.atom()
            self.expect(";")
            moll = self.mollifier()
            self.expect(";")
            term = ConvolutionTerm(atom, moll, self.four_vector())
        else:
            raise self.error(f"unknown phase term {kind!r}")
        self.expect(")")
        return PhaseExpr.of_terms([(coeff, term)])

    def phase(self):
        if self.zero():
            return PhaseExpr()
        total = self.phase_term()
        while self.accept("+"):
            total = total + self.phase_term()
        return total

    def v_generator(self):
        self.expect("V(")
        a = self.number()
        self.expect(",")
        g = self.vector_field()
        self.expect(")")
        return VGenerator(a, g)

    def factor(self):
        if self.peek("V("):
            return self.v_generator()
        if self.accept("W("):
            m = self.densities()
            self.expect(")")
            return WGenerator(m)
        if self.accept("psi("):
            rho = self.densities()
            self.expect(")")
            return PsiGenerator(rho)
        if self.accept("mark("):
            first = self.v_generator()
            self.expect(",")
            second = self.v_generator()
            self.expect(")")
            return CentralMark(first, second)
        raise self.error("expected a generator")

    def word(self):
        if self.accept("identity"):
            return IDENTITY_WORD
        phase = PhaseExpr()
        factors = []
        while True:
            if self.accept("exp("):
                phase = phase + self.phase()
                self.expect(")")
            else:
                factors.append(self.factor())
            if not self.accept("*"):
                break
        return OperatorWord(phase, tuple(factors))


def _parse(text, rule):
    parser = _Parser(text)
    try:
        result = getattr(parser, rule)()
    except ScenarioError:
        raise
    except WorkbenchError as e:
        raise ScenarioError(f"invalid {rule.replace('_', ' ')} {text!r}: {e}") from e
    if not parser.at_end():
        raise parser.error("unexpected trailing text")
    return result


def parse_word(text):
    """
    Parse an operator word from its text form

    Args:
        text: Word text, e.g. "V(1.0, 1.0*fluxprobe(c=0.0 0.0 0.0 0.0, r=1.0, eps=0.05, k=6))"

    Returns:
        OperatorWord (not normalized)

    Raises:
        ScenarioError: on malformed text or labels violating their constructors
    """
    return _parse(text, "word")


def parse_vector_field(text):
    return _parse(text, "vector_field")


def parse_scalar_field(text):
    return _parse(text, "scalar_field")


def parse_densities(text):
    return _parse(text, "densities")


def parse_phase(text):
    return _parse(text, "phase")


def format_word(word):
    return word.text
