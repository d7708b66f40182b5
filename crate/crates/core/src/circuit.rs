//! Parameterized passive circuits.
//!
//! A circuit file is a list of line statements:
//!
//! ```text
//! modes 2
//! bs 1 2 pi/4      # beam splitter on modes 1, 2
//! ps 1 -phi        # phase shifter e^{i(-phi)} on mode 1
//! bs 2 1 pi/4
//! ```
//!
//! Every angle is an affine function `a·φ + b`, so `dU/dφ` follows exactly
//! from the product rule. Statements are applied top to bottom.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, conjugate_by_w, hermitian_eigen, non_hermiticity, realify, unitarity_residual, CMat, RMat};

/// `a·φ + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub coef: f64,
    pub offset: f64,
}

impl Affine {
    pub fn constant(b: f64) -> Self {
        Self { coef: 0.0, offset: b }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.coef * phi + self.offset
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = (self.coef, self.offset);
        if a == 0.0 {
            write!(f, "{b:?}")
        } else if b == 0.0 {
            write!(f, "{a:?}*phi")
        } else if b < 0.0 {
            write!(f, "{a:?}*phi-{:?}", -b)
        } else {
            write!(f, "{a:?}*phi+{b:?}")
        }
    }
}

/// Circuit element. Mode indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    /// `[[cos θ, −sin θ], [sin θ, cos θ]]` on modes `(m, n)`.
    BeamSplitter { m: usize, n: usize, angle: Affine },
    /// `e^{iθ}` on mode `m`.
    PhaseShifter { m: usize, phase: Affine },
}

impl Element {
    fn coef(&self) -> f64 {
        match self {
            Element::BeamSplitter { angle, .. } => angle.coef,
            Element::PhaseShifter { phase, .. } => phase.coef,
        }
    }

    /// Left-multiplies `u` by this element in place.
    fn apply(&self, u: &mut CMat, phi: f64) {
        match *self {
            Element::BeamSplitter { m, n, angle } => {
                let (s, c) = angle.eval(phi).sin_cos();
                for j in 0..u.ncols() {
                    let (um, un) = (u[(m, j)], u[(n, j)]);
                    u[(m, j)] = um * c - un * s;
                    u[(n, j)] = um * s + un * c;
                }
            }
            Element::PhaseShifter { m, phase } => {
                let z = Complex64::from_polar(1.0, phase.eval(phi));
                for j in 0..u.ncols() {
                    u[(m, j)] *= z;
                }
            }
        }
    }

    /// Adds `P† h P` to `acc`, where `h = i E† dE/dφ` for this element.
    fn add_generator_term(&self, p: &CMat, acc: &mut CMat) {
        let k = p.ncols();
        match *self {
            Element::BeamSplitter { m, n, angle } => {
                if angle.coef == 0.0 {
                    return;
                }
                let h = Complex64::new(0.0, angle.coef);
                for i in 0..k {
                    for j in 0..k {
                        acc[(i, j)] += -h * p[(m, i)].conj() * p[(n, j)] + h * p[(n, i)].conj() * p[(m, j)];
                    }
                }
            }
            Element::PhaseShifter { m, phase } => {
                if phase.coef == 0.0 {
                    return;
                }
                for i in 0..k {
                    for j in 0..k {
                        acc[(i, j)] -= p[(m, i)].conj() * p[(m, j)] * phase.coef;
                    }
                }
            }
        }
    }
}

/// A passive circuit with one real parameter.
pub trait PassiveCircuit: Sync {
    fn modes(&self) -> usize;

    /// `U(φ)`.
    fn unitary(&self, phi: f64) -> CMat;

    /// `g_φ = i U† dU/dφ`.
    fn generator_matrix(&self, phi: f64) -> CMat;

    fn spectrum(&self, phi: f64) -> GeneratorSpectrum {
        GeneratorSpectrum::from_hermitian(&self.generator_matrix(phi))
            .expect("generator of a passive circuit is Hermitian")
    }

    fn lift(&self, phi: f64) -> PhaseSpaceLift {
        PhaseSpaceLift { r: realify(&self.unitary(phi)), g: lift_generator_unchecked(&self.generator_matrix(phi)) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    modes: usize,
    elements: Vec<Element>,
}

impl ParamCircuit {
    pub fn new(modes: usize, elements: Vec<Element>) -> Result<Self> {
        if modes == 0 {
            return Err(Error::ModeOutOfRange { line: 0, msg: "a circuit needs at least one mode".into() });
        }
        for (k, e) in elements.iter().enumerate() {
            let ok = match *e {
                Element::BeamSplitter { m, n, .. } => m < modes && n < modes && m != n,
                Element::PhaseShifter { m, .. } => m < modes,
            };
            if !ok {
                return Err(Error::ModeOutOfRange { line: 0, msg: format!("element {k} is invalid") });
            }
        }
        if elements.iter().all(|e| e.coef() == 0.0) {
            return Err(Error::NoParameter);
        }
        Ok(Self { modes, elements })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Seeded random circuit; every element depends on `φ` with a random weight.
    pub fn random<R: Rng + ?Sized>(modes: usize, depth: usize, rng: &mut R) -> Self {
        let mut elements = Vec::with_capacity(depth.max(1));
        for _ in 0..depth.max(1) {
            let angle = Affine {
                coef: rng.random_range(-1.5..1.5),
                offset: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            };
            if modes > 1 && rng.random_bool(0.6) {
                let m = rng.random_range(0..modes);
                let n = (m + rng.random_range(1..modes)) % modes;
                elements.push(Element::BeamSplitter { m, n, angle });
            } else {
                elements.push(Element::PhaseShifter { m: rng.random_range(0..modes), phase: angle });
            }
        }
        if elements.iter().all(|e| e.coef() == 0.0) {
            elements.push(Element::PhaseShifter { m: 0, phase: Affine { coef: 1.0, offset: 0.0 } });
        }
        Self { modes, elements }
    }

    /// Appends φ-independent elements before and after this circuit.
    pub fn wrapped(&self, before: &[Element], after: &[Element]) -> Result<Self> {
        let elements = before.iter().chain(&self.elements).chain(after).copied().collect();
        Self::new(self.modes, elements)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("modes {}\n", self.modes);
        for e in &self.elements {
            match e {
                Element::BeamSplitter { m, n, angle } => out.push_str(&format!("bs {} {} {}\n", m + 1, n + 1, angle)),
                Element::PhaseShifter { m, phase } => out.push_str(&format!("ps {} {}\n", m + 1, phase)),
            }
        }
        out
    }
}

impl PassiveCircuit for ParamCircuit {
    fn modes(&self) -> usize {
        self.modes
    }

    fn unitary(&self, phi: f64) -> CMat {
        let mut u = CMat::identity(self.modes, self.modes);
        for e in &self.elements {
            e.apply(&mut u, phi);
        }
        u
    }

    fn generator_matrix(&self, phi: f64) -> CMat {
        let mut p = CMat::identity(self.modes, self.modes);
        let mut g = CMat::zeros(self.modes, self.modes);
        for e in &self.elements {
            e.add_generator_term(&p, &mut g);
            e.apply(&mut p, phi);
        }
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

/// Hermitian generator with eigenvalues ordered by decreasing magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpectrum {
    pub g: CMat,
    /// Columns are eigenvectors, first nonzero component real and positive.
    pub v: CMat,
    pub eps: Vec<f64>,
    pub specnorm: f64,
}

const TIE_TOL: f64 = 1e-9;

impl GeneratorSpectrum {
    pub fn from_hermitian(g: &CMat) -> Result<Self> {
        let res = non_hermiticity(g);
        if res > 1e-12 * g.iter().fold(1.0_f64, |a, z| a.max(z.norm())) {
            return Err(Error::NotHermitian(res));
        }
        let (vals, vecs) = hermitian_eigen(g);
        let n = vals.len();
        let mut pairs: Vec<(f64, Vec<Complex64>)> =
            (0..n).map(|k| (vals[k], normalize_phase(vecs.column(k).iter().copied().collect()))).collect();
        pairs.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (pairs[start].0.abs() - pairs[end].0.abs()).abs() < TIE_TOL {
                end += 1;
            }
            pairs[start..end].sort_by(|a, b| lexicographic(&b.1, &a.1));
            start = end;
        }
        let eps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let v = CMat::from_fn(n, n, |i, j| pairs[j].1[i]);
        let specnorm = eps.first().map_or(0.0, |e| e.abs());
        Ok(Self { g: g.clone(), v, eps, specnorm })
    }

    pub fn reconstruct(&self) -> CMat {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.eps.len(),
            self.eps.iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        &self.v * d * self.v.adjoint()
    }
}

fn normalize_phase(mut v: Vec<Complex64>) -> Vec<Complex64> {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = z.conj() / z.norm();
        for c in v.iter_mut() {
            *c *= phase;
        }
    }
    v
}

fn lexicographic(a: &[Complex64], b: &[Complex64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > 1e-12 {
                return p.total_cmp(&q);
            }
        }
    }
    Ordering::Equal
}

/// Real-space images of `U(φ)` and `g_φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceLift {
    /// `W† diag(U, U*) W`.
    pub r: RMat,
    /// `W† diag(g, −g*) W`.
    pub g: CMat,
}

/// `R = W† diag(U, U*) W`, checked unitary and real.
pub fn phase_space_lift(u: &CMat) -> Result<RMat> {
    let res = unitarity_residual(u);
    if res > 1e-10 {
        return Err(Error::NotUnitary(res));
    }
    let r = conjugate_by_w(u, &u.conjugate());
    let im = linalg::max_imag(&r);
    let exact = realify(u);
    let drift = (linalg::real_part(&r) - &exact).amax();
    if im > 1e-12 || drift > 1e-12 {
        return Err(Error::NotUnitary(im.max(drift)));
    }
    Ok(exact)
}

/// The lift `P` of a diagonalizer `V`.
pub fn diagonalizer_lift(v: &CMat) -> Result<RMat> {
    phase_space_lift(v)
}

/// `G = W† diag(g, −g*) W`.
pub fn lift_generator(g: &CMat) -> Result<CMat> {
    let res = non_hermiticity(g);
    if res > 1e-12 * g.iter().fold(1.0_f64, |a, z| a.max(z.norm())) {
        return Err(Error::NotHermitian(res));
    }
    Ok(lift_generator_unchecked(g))
}

fn lift_generator_unchecked(g: &CMat) -> CMat {
    conjugate_by_w(g, &(-g.conjugate()))
}

/// Real antisymmetric `K` with `G = iK`, so that `dR/dφ = R K`.
pub fn generator_rotation(g: &CMat) -> RMat {
    realify(&(g * Complex64::new(0.0, -1.0)))
}

/// Parses the circuit DSL.
pub fn parse_circuit(text: &str) -> Result<ParamCircuit> {
    let mut modes: Option<usize> = None;
    let mut elements = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(body);
        let Some(&(col0, kw)) = tokens.first() else { continue };
        let syntax = |col: usize, msg: &str| Error::SyntaxError { line, col, msg: msg.to_string() };
        let Some(m_total) = modes else {
            if kw != "modes" {
                return Err(syntax(col0, "first statement must be `modes <M>`"));
            }
            if tokens.len() != 2 {
                return Err(syntax(col0, "expected `modes <M>`"));
            }
            let (c, t) = tokens[1];
            let m: usize = t.parse().map_err(|_| syntax(c, "mode count must be a positive integer"))?;
            if m == 0 {
                return Err(syntax(c, "mode count must be a positive integer"));
            }
            modes = Some(m);
            continue;
        };
        let mode = |k: usize| -> Result<usize> {
            let (c, t) = *tokens.get(k).ok_or_else(|| syntax(body.len() + 1, "missing mode index"))?;
            let v: usize = t.parse().map_err(|_| syntax(c, "mode index must be a positive integer"))?;
            if v == 0 || v > m_total {
                return Err(Error::ModeOutOfRange { line, msg: format!("mode {v} outside 1..={m_total}") });
            }
            Ok(v - 1)
        };
        let expr = |k: usize| -> Result<Affine> {
            let &(c, _) = tokens.get(k).ok_or_else(|| syntax(body.len() + 1, "missing angle expression"))?;
            parse_expr(&body[c - 1..], line, c)
        };
        match kw {
            "bs" => {
                let (m, n) = (mode(1)?, mode(2)?);
                if m == n {
                    return Err(Error::ModeOutOfRange { line, msg: "beam splitter needs two distinct modes".into() });
                }
                elements.push(Element::BeamSplitter { m, n, angle: expr(3)? });
            }
            "ps" => elements.push(Element::PhaseShifter { m: mode(1)?, phase: expr(2)? }),
            "modes" => return Err(syntax(col0, "`modes` may appear only once")),
            _ => return Err(syntax(col0, &format!("unknown statement `{kw}`"))),
        }
    }
    let Some(modes) = modes else {
        return Err(Error::SyntaxError { line: 1, col: 1, msg: "missing `modes <M>`".into() });
    };
    if elements.iter().all(|e| e.coef() == 0.0) {
        return Err(Error::NoParameter);
    }
    Ok(ParamCircuit { modes, elements })
}

/// Whitespace tokens with 1-based columns.
fn tokenize(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(b)) => {
                out.push((b + 1, &s[b..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b + 1, &s[b..]));
    }
    out
}

struct ExprParser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    line: usize,
    col0: usize,
    src: &'a str,
}

#[derive(Clone, Copy)]
enum Factor {
    Num(f64),
    Phi,
}

impl ExprParser<'_> {
    fn col(&self) -> usize {
        self.col0 + self.chars.get(self.pos).map_or(self.src.len(), |c| c.0)
    }

    fn err(&self, msg: &str) -> Error {
        Error::SyntaxError { line: self.line, col: self.col(), msg: msg.to_string() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn factor(&mut self) -> Result<Factor> {
        self.skip_ws();
        let begin = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                if matches!(self.peek(), Some('e' | 'E'))
                    && self.chars.get(self.pos + 1).is_some_and(|c| c.1.is_ascii_digit() || c.1 == '-' || c.1 == '+')
                {
                    self.pos += 2;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                }
                let text: String = self.chars[begin..self.pos].iter().map(|c| c.1).collect();
                text.parse::<f64>().map(Factor::Num).map_err(|_| {
                    self.pos = begin;
                    self.err("malformed number")
                })
            }
            Some(c) if c.is_ascii_alphabetic() => {
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let word: String = self.chars[begin..self.pos].iter().map(|c| c.1).collect();
                match word.as_str() {
                    "pi" => Ok(Factor::Num(std::f64::consts::PI)),
                    "phi" => Ok(Factor::Phi),
                    _ => {
                        self.pos = begin;
                        Err(self.err(&format!("unknown identifier `{word}`")))
                    }
                }
            }
            _ => Err(self.err("expected a number, `pi` or `phi`")),
        }
    }

    fn term(&mut self) -> Result<Affine> {
        let mut value = 1.0;
        let mut has_phi = false;
        let mut absorb = |f: Factor, divide: bool, p: &Self| -> Result<()> {
            match (f, divide) {
                (Factor::Num(x), false) => value *= x,
                (Factor::Num(x), true) => {
                    if x == 0.0 {
                        return Err(p.err("division by zero"));
                    }
                    value /= x
                }
                (Factor::Phi, true) => return Err(p.err("cannot divide by `phi`")),
                (Factor::Phi, false) if has_phi => return Err(p.err("`phi` may appear only linearly")),
                (Factor::Phi, false) => has_phi = true,
            }
            Ok(())
        };
        let f = self.factor()?;
        absorb(f, false, self)?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    absorb(f, false, self)?;
                }
                Some('/') => {
                    self.pos += 1;
                    let f = self.factor()?;
                    absorb(f, true, self)?;
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let f = self.factor()?;
                    absorb(f, false, self)?;
                }
                _ => break,
            }
        }
        Ok(if has_phi { Affine { coef: value, offset: 0.0 } } else { Affine::constant(value) })
    }

    fn expr(&mut self) -> Result<Affine> {
        let mut acc = Affine::constant(0.0);
        let mut first = true;
        loop {
            self.skip_ws();
            let sign = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    1.0
                }
                Some('-') => {
                    self.pos += 1;
                    -1.0
                }
                None if !first => break,
                _ if first => 1.0,
                _ => return Err(self.err("expected `+` or `-`")),
            };
            let t = self.term()?;
            acc.coef += sign * t.coef;
            acc.offset += sign * t.offset;
            first = false;
        }
        Ok(acc)
    }
}

fn parse_expr(src: &str, line: usize, col: usize) -> Result<Affine> {
    let mut p = ExprParser { chars: src.char_indices().collect(), pos: 0, line, col0: col, src };
    p.expr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::linalg::{random_unitary, symplectic_form};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn cnorm(a: &CMat) -> f64 {
        a.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    fn fd_generator(c: &dyn PassiveCircuit, phi: f64, h: f64) -> CMat {
        let du = (c.unitary(phi + h) - c.unitary(phi - h)) / Complex64::new(2.0 * h, 0.0);
        c.unitary(phi).adjoint() * du * Complex64::new(0.0, 1.0)
    }

    #[test]
    fn parses_expressions() {
        let cases = [
            ("phi", 1.0, 0.0),
            ("-phi", -1.0, 0.0),
            ("0.5*phi", 0.5, 0.0),
            ("-0.5*phi", -0.5, 0.0),
            ("phi/2", 0.5, 0.0),
            ("2*phi+pi/4", 2.0, FRAC_PI_4),
            ("phi-1.5", 1.0, -1.5),
            ("3pi/2", 0.0, 1.5 * PI),
            ("pi", 0.0, PI),
            ("0", 0.0, 0.0),
            ("pi/4*phi", FRAC_PI_4, 0.0),
        ];
        for (src, a, b) in cases {
            let e = parse_expr(src, 1, 1).unwrap();
            assert!((e.coef - a).abs() < 1e-15 && (e.offset - b).abs() < 1e-15, "{src}");
        }
    }

    #[test]
    fn expression_errors_carry_columns() {
        let err = parse_circuit("modes 2\nbs 1 2 pi/x").unwrap_err();
        assert_eq!(err, Error::SyntaxError { line: 2, col: 11, msg: "unknown identifier `x`".into() });
        assert!(matches!(parse_circuit("modes 1\nps 1 phi*phi"), Err(Error::SyntaxError { .. })));
        assert!(matches!(parse_circuit("modes 1\nps 1 1/phi"), Err(Error::SyntaxError { .. })));
        assert!(matches!(parse_circuit("ps 1 phi"), Err(Error::SyntaxError { line: 1, col: 1, .. })));
        assert!(matches!(parse_circuit("modes 1\nxx 1 phi"), Err(Error::SyntaxError { line: 2, .. })));
        assert!(matches!(parse_circuit("modes 1\nps 1"), Err(Error::SyntaxError { line: 2, .. })));
    }

    #[test]
    fn parse_examples() {
        let c = parse_circuit("modes 2\nbs 1 2 pi/4\nps 1 -phi\nbs 2 1 pi/4").unwrap();
        assert_eq!(c.modes(), 2);
        assert_eq!(c.elements().len(), 3);
        assert_eq!(parse_circuit("modes 1\nps 1 0"), Err(Error::NoParameter));
        assert!(matches!(parse_circuit("modes 2\nbs 1 3 pi/4"), Err(Error::ModeOutOfRange { line: 2, .. })));
        assert!(matches!(parse_circuit("modes 2\nbs 1 1 phi"), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = ParamCircuit::random(3, 8, &mut rng);
        let back = parse_circuit(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unitary_examples() {
        let mz = corpus::mz1();
        assert!(cnorm(&(mz.unitary(0.0) - CMat::identity(2, 2))) < 1e-15);

        let two = corpus::two_mode_mixing();
        let u = two.unitary(FRAC_PI_4);
        let (s, c) = FRAC_PI_4.sin_cos();
        let expect = CMat::from_row_slice(2, 2, &[c, -s, s, c].map(|x| Complex64::new(x, 0.0)));
        assert!(cnorm(&(u - expect)) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = ParamCircuit::random(4, 12, &mut rng);
            assert!(unitarity_residual(&c.unitary(rng.random())) < 1e-12);
        }
    }

    #[test]
    fn reversed_beam_splitter_is_adjoint() {
        let a = parse_circuit("modes 2\nbs 1 2 0.3\nps 1 phi").unwrap();
        let b = parse_circuit("modes 2\nbs 2 1 0.3\nps 1 phi").unwrap();
        let ua = a.unitary(0.0);
        let ub = b.unitary(0.0);
        assert!(cnorm(&(ua.adjoint() - ub)) < 1e-15);
    }

    #[test]
    fn corpus_generator_norms() {
        let cases = [
            (corpus::mz1(), 1.0),
            (corpus::mz2(), 0.5),
            (corpus::two_mode_mixing(), 1.0),
            (corpus::three_mode_mixing(), SQRT_2),
        ];
        for (c, norm) in cases {
            for phi in [0.0, 0.37, -1.2] {
                let s = c.spectrum(phi);
                assert!((s.specnorm - norm).abs() < 1e-12);
                assert!(non_hermiticity(&s.g) < 1e-12);
                assert!(cnorm(&(s.reconstruct() - &s.g)) < 1e-12);
                assert!(unitarity_residual(&s.v) < 1e-12);
            }
        }
    }

    #[test]
    fn phase_shift_generator_sign() {
        let c = parse_circuit("modes 1\nps 1 -phi").unwrap();
        assert!((c.generator_matrix(0.2)[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let u = c.unitary(0.2)[(0, 0)];
        assert!((u - Complex64::from_polar(1.0, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn generator_matches_finite_difference_at_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let c = ParamCircuit::random(3, 10, &mut rng);
            let phi: f64 = rng.random_range(-1.0..1.0);
            let g = c.generator_matrix(phi);
            let e1 = cnorm(&(fd_generator(&c, phi, 1e-3) - &g));
            let e2 = cnorm(&(fd_generator(&c, phi, 1e-4) - &g));
            assert!(e1 < 1e-4 && e2 < 1e-6, "{e1} {e2}");
            if e1 > 1e-9 {
                let slope = (e1 / e2).log10();
                assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
            }
        }
    }

    #[test]
    fn wrapping_preserves_generator_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = ParamCircuit::random(3, 6, &mut rng);
        let before = [Element::BeamSplitter { m: 0, n: 2, angle: Affine::constant(0.7) }];
        let after = [
            Element::PhaseShifter { m: 1, phase: Affine::constant(1.1) },
            Element::BeamSplitter { m: 1, n: 0, angle: Affine::constant(-0.4) },
        ];
        let w = c.wrapped(&before, &after).unwrap();
        assert!((w.spectrum(0.3).specnorm - c.spectrum(0.3).specnorm).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_is_deterministic() {
        let g = CMat::identity(3, 3);
        let s = GeneratorSpectrum::from_hermitian(&g).unwrap();
        assert_eq!(s.v, CMat::identity(3, 3));
        let two = corpus::two_mode_mixing().spectrum(0.0);
        assert_eq!(two.eps.len(), 2);
        assert!((two.eps[0].abs() - 1.0).abs() < 1e-12);
        assert!(two.v[(0, 0)].im.abs() < 1e-15 && two.v[(0, 0)].re > 0.0);
        assert_eq!(two, corpus::two_mode_mixing().spectrum(0.0));
    }

    #[test]
    fn lift_examples() {
        assert_eq!(phase_space_lift(&CMat::identity(2, 2)).unwrap(), RMat::identity(4, 4));
        let u = CMat::from_element(1, 1, Complex64::from_polar(1.0, -PI / 2.0));
        let r = phase_space_lift(&u).unwrap();
        let expect = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((r - expect).amax() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let j = symplectic_form(4);
        for _ in 0..10 {
            let r = phase_space_lift(&random_unitary(4, &mut rng)).unwrap();
            assert!((r.transpose() * &j * &r - &j).amax() < 1e-11);
        }
        let bad = CMat::identity(2, 2) * Complex64::new(2.0, 0.0);
        assert!(matches!(phase_space_lift(&bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn lift_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_unitary(3, &mut rng);
        let b = random_unitary(3, &mut rng);
        let lhs = phase_space_lift(&(&a * &b)).unwrap();
        let rhs = phase_space_lift(&a).unwrap() * phase_space_lift(&b).unwrap();
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn lifted_generator_examples() {
        assert_eq!(lift_generator(&CMat::zeros(2, 2)).unwrap(), CMat::zeros(4, 4));
        let g = lift_generator(&CMat::identity(1, 1)).unwrap();
        let ij = linalg::to_complex(&symplectic_form(1)) * Complex64::new(0.0, 1.0);
        assert!(cnorm(&(g - ij)) < 1e-15);
        let nh = CMat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0)));
        assert!(matches!(lift_generator(&nh), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn lifted_generator_matches_finite_difference() {
        let mz = corpus::mz1();
        let h = 1e-4;
        for phi in [0.0, 0.4, 1.3] {
            let lift = mz.lift(phi);
            let dr = (realify(&mz.unitary(phi + h)) - realify(&mz.unitary(phi - h))) / (2.0 * h);
            let fd = linalg::to_complex(&(lift.r.transpose() * dr)) * Complex64::new(0.0, 1.0);
            assert!(cnorm(&(fd - &lift.g)) < 1e-6);
            let k = generator_rotation(&mz.generator_matrix(phi));
            assert!(cnorm(&(linalg::to_complex(&k) * Complex64::new(0.0, 1.0) - lift.g)) < 1e-14);
            assert!((&k + k.transpose()).amax() < 1e-15);
        }
    }

    #[test]
    fn diagonalizer_lift_examples() {
        assert_eq!(diagonalizer_lift(&CMat::identity(3, 3)).unwrap(), RMat::identity(6, 6));
        let s = corpus::mz1().spectrum(0.0);
        let p = diagonalizer_lift(&s.v).unwrap();
        let j = symplectic_form(2);
        assert!((p.transpose() * &j * &p - &j).amax() < 1e-11);
        assert!((p.transpose() * &p - RMat::identity(4, 4)).amax() < 1e-11);
        let vac = RMat::identity(4, 4) * 0.5;
        assert!((&p * &vac * p.transpose() - vac).amax() < 1e-15);
    }
}
