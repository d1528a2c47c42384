//! Sparse multivariate polynomials with exact derivatives.
//!
//! Used for conformal factors `rho(x)` and for the phase-space functions of
//! the glancing-pair classification. The JSON form is a list of
//! exponent/coefficient records, e.g. `[{"exp": [2, 0], "c": 1.0}]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub exp: Vec<u32>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PolyRepr {
    Table { nvars: Option<usize>, terms: Vec<Term> },
    Terms(Vec<Term>),
}

impl TryFrom<PolyRepr> for Polynomial {
    type Error = Error;

    fn try_from(r: PolyRepr) -> Result<Self> {
        match r {
            PolyRepr::Terms(terms) => {
                let n = terms.iter().map(|t| t.exp.len()).max().unwrap_or(0);
                Polynomial::new(n, terms)
            }
            PolyRepr::Table { nvars, terms } => {
                let n = nvars.unwrap_or_else(|| terms.iter().map(|t| t.exp.len()).max().unwrap_or(0));
                Polynomial::new(n, terms)
            }
        }
    }
}

impl From<Polynomial> for PolyRepr {
    fn from(p: Polynomial) -> Self {
        PolyRepr::Table {
            nvars: Some(p.nvars),
            terms: p.terms,
        }
    }
}

impl Polynomial {
    /// Builds a polynomial in `nvars` variables; shorter exponent lists are
    /// zero-padded and like terms are merged.
    pub fn new(nvars: usize, terms: Vec<Term>) -> Result<Self> {
        let mut merged: Vec<Term> = Vec::new();
        for mut t in terms {
            if t.exp.len() > nvars {
                return Err(Error::InvalidInput(format!(
                    "term exponent {:?} has more than {nvars} variables",
                    t.exp
                )));
            }
            if !t.c.is_finite() {
                return Err(Error::InvalidInput("non-finite coefficient".into()));
            }
            t.exp.resize(nvars, 0);
            match merged.iter_mut().find(|m| m.exp == t.exp) {
                Some(m) => m.c += t.c,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.c != 0.0);
        Ok(Polynomial { nvars, terms: merged })
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Polynomial::new(nvars, vec![Term { exp: vec![0; nvars], c }]).expect("finite constant")
    }

    /// Linear polynomial `c0 + sum coeffs[i] * v_i`.
    pub fn linear(c0: f64, coeffs: &[f64]) -> Self {
        let n = coeffs.len();
        let mut terms = vec![Term { exp: vec![0; n], c: c0 }];
        for (i, &c) in coeffs.iter().enumerate() {
            let mut exp = vec![0; n];
            exp[i] = 1;
            terms.push(Term { exp, c });
        }
        Polynomial::new(n, terms).expect("finite coefficients")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.exp.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.c * t.exp.iter().zip(v).map(|(&e, &x)| x.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exp[i] > 0)
            .map(|t| {
                let mut exp = t.exp.clone();
                let c = t.c * exp[i] as f64;
                exp[i] -= 1;
                Term { exp, c }
            })
            .collect();
        Polynomial::new(self.nvars, terms).expect("derivative of a valid polynomial")
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        Polynomial::new(
            self.nvars,
            self.terms
                .iter()
                .map(|t| Term {
                    exp: t.exp.clone(),
                    c: t.c * s,
                })
                .collect(),
        )
        .expect("finite scale")
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.nvars.max(other.nvars);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Polynomial::new(n, terms).expect("sum of valid polynomials")
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let n = self.nvars.max(other.nvars);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let exp = (0..n)
                    .map(|i| a.exp.get(i).copied().unwrap_or(0) + b.exp.get(i).copied().unwrap_or(0))
                    .collect();
                terms.push(Term { exp, c: a.c * b.c });
            }
        }
        Polynomial::new(n, terms).expect("product of valid polynomials")
    }

    pub fn powi(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Parses expressions such as `1+x^2+y^2`, `0.5*x1 - 2*x1*x2`,
    /// `1+(x-0.5)^2+y^2` or `p1^2 - x1 - p2`.
    ///
    /// `names` lists the admissible variable names in slot order; aliases are
    /// given with `|` (e.g. `"x|x1"`).
    pub fn parse(src: &str, names: &[&str]) -> Result<Polynomial> {
        let chars: Vec<char> = src.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(Error::InvalidInput("empty polynomial".into()));
        }
        let mut p = Parser {
            s: &chars,
            i: 0,
            names,
            src,
        };
        let out = p.sum()?;
        if p.i != chars.len() {
            return Err(p.err(&format!("unexpected `{}`", chars[p.i])));
        }
        Ok(out)
    }
}

struct Parser<'a> {
    s: &'a [char],
    i: usize,
    names: &'a [&'a str],
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::InvalidInput(format!("{what} in `{}`", self.src))
    }

    fn peek(&self) -> Option<char> {
        self.s.get(self.i).copied()
    }

    fn sum(&mut self) -> Result<Polynomial> {
        let n = self.names.len();
        let mut acc = Polynomial::constant(n, 0.0);
        let mut first = true;
        loop {
            let mut sign = 1.0;
            let mut had_sign = false;
            while let Some(c @ ('+' | '-')) = self.peek() {
                if c == '-' {
                    sign = -sign;
                }
                had_sign = true;
                self.i += 1;
            }
            if !first && !had_sign {
                return Ok(acc);
            }
            if matches!(self.peek(), None | Some(')')) {
                return Err(self.err("dangling sign"));
            }
            acc = acc.add(&self.product()?.scaled(sign));
            first = false;
            if !matches!(self.peek(), Some('+' | '-')) {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Polynomial> {
        let mut acc = self.power()?;
        while self.peek() == Some('*') {
            self.i += 1;
            acc = acc.mul(&self.power()?);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok(base);
        }
        self.i += 1;
        let start = self.i;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.i += 1;
        }
        let tok: String = self.s[start..self.i].iter().collect();
        let k = tok
            .parse::<u32>()
            .map_err(|_| self.err(&format!("bad exponent `{tok}`")))?;
        Ok(base.powi(k))
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let n = self.names.len();
        match self.peek() {
            Some('(') => {
                self.i += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.err("missing `)`"));
                }
                self.i += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.i;
                while let Some(c) = self.peek() {
                    let exp_sign = (c == '+' || c == '-') && self.i > start && matches!(self.s[self.i - 1], 'e' | 'E');
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                        self.i += 1;
                    } else {
                        break;
                    }
                }
                let tok: String = self.s[start..self.i].iter().collect();
                let v = tok
                    .parse::<f64>()
                    .map_err(|_| self.err(&format!("bad number `{tok}`")))?;
                Ok(Polynomial::constant(n, v))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.i;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    self.i += 1;
                }
                let tok: String = self.s[start..self.i].iter().collect();
                let k = self
                    .names
                    .iter()
                    .position(|alts| alts.split('|').any(|a| a == tok))
                    .ok_or_else(|| self.err(&format!("unknown symbol `{tok}`")))?;
                let mut exp = vec![0u32; n];
                exp[k] = 1;
                Polynomial::new(n, vec![Term { exp, c: 1.0 }])
            }
            Some(c) => Err(self.err(&format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end")),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", t.c)?;
            for (i, &e) in t.exp.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*v{}", i + 1)?,
                    _ => write!(f, "*v{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Variable names for polynomials on `R^n` (positions only).
pub fn position_names(n: usize) -> Vec<&'static str> {
    ["x|x1", "y|x2", "z|x3"][..n].to_vec()
}

/// Variable names for polynomials on `T*R^n` in `(x, p)` slot order.
pub fn phase_names(n: usize) -> Vec<&'static str> {
    let xs = ["x1|x", "x2|y", "x3|z"];
    let ps = ["p1|px", "p2|py", "p3|pz"];
    xs[..n].iter().chain(&ps[..n]).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_conformal_factor() {
        let rho = Polynomial::parse("1+x^2+y^2", &position_names(2)).unwrap();
        assert_eq!(rho.eval(&[1.0, 2.0]), 6.0);
        assert_eq!(rho.derivative(1).eval(&[1.0, 2.0]), 4.0);
        assert_eq!(rho.degree(), 2);
    }

    #[test]
    fn parse_phase_space_function() {
        let g = Polynomial::parse("p1^2 - x1 - p2", &phase_names(2)).unwrap();
        assert_eq!(g.eval(&[1.0, 0.0, 3.0, 2.0]), 9.0 - 1.0 - 2.0);
        let f = Polynomial::parse("0.5*x1*x2 - 2e-1*y", &phase_names(2)).unwrap();
        assert!((f.eval(&[2.0, 3.0, 0.0, 0.0]) - (3.0 - 0.6)).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert!(Polynomial::parse("1+w", &position_names(2)).is_err());
        assert!(Polynomial::parse("x^a", &position_names(2)).is_err());
        assert!(Polynomial::parse("", &position_names(2)).is_err());
        assert!(Polynomial::parse("(x+1", &position_names(2)).is_err());
        assert!(Polynomial::parse("x+", &position_names(2)).is_err());
    }

    #[test]
    fn parse_parentheses() {
        let p = Polynomial::parse("1+(x-0.5)^2+y^2", &position_names(2)).unwrap();
        let q = Polynomial::parse("1.25 - x + x^2 + y^2", &position_names(2)).unwrap();
        for pt in [[0.3, -1.0], [2.0, 0.5]] {
            assert!((p.eval(&pt) - q.eval(&pt)).abs() < 1e-14);
        }
        let r = Polynomial::parse("-2*(x*y - 1e-3)", &position_names(2)).unwrap();
        assert!((r.eval(&[2.0, 3.0]) + 2.0 * (6.0 - 1e-3)).abs() < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let rho = Polynomial::parse("1+x^2+y^2", &position_names(2)).unwrap();
        let s = serde_json::to_string(&rho).unwrap();
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(rho, back);
        let bare: Polynomial = serde_json::from_str(r#"[{"exp":[0,0],"c":1.0},{"exp":[2],"c":1.0}]"#).unwrap();
        assert_eq!(bare.nvars(), 2);
        assert_eq!(bare.eval(&[3.0, 5.0]), 10.0);
    }

    #[test]
    fn merges_like_terms() {
        let p = Polynomial::parse("x + x - 2*x + y", &position_names(2)).unwrap();
        assert_eq!(p.terms().len(), 1);
    }
}
