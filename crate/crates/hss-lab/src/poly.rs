//! Sparse multivariate polynomials over a prime field, input domains, and
//! the degree-bounded sharing polynomials used to split secrets.
//!
//! Polynomials are maps from exponent vectors to nonzero coefficients.
//! Exponent arithmetic stays over the integers (no reduction mod p-1):
//! substitution is a formal identity and degree bookkeeping must survive it.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::linalg::Matrix;

/// An n-variate polynomial with no stored zero coefficients; every exponent
/// vector has length `n_vars`. Equality is exact term-map equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultivariatePolynomial {
    field: Field,
    n_vars: usize,
    terms: BTreeMap<Vec<u32>, FieldElement>,
}

impl MultivariatePolynomial {
    pub fn zero(field: Field, n_vars: usize) -> Self {
        MultivariatePolynomial {
            field,
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: Field, n_vars: usize, value: FieldElement) -> Result<Self> {
        let mut poly = Self::zero(field, n_vars);
        poly.check_coeff(&value)?;
        poly.insert_term(vec![0; n_vars], value);
        Ok(poly)
    }

    /// The variable `x_var`, 1-based to match the `x1..xn` text format.
    pub fn variable(field: Field, n_vars: usize, var: usize) -> Result<Self> {
        if var == 0 || var > n_vars {
            return Err(Error::IndexOutOfRange {
                index: var,
                count: n_vars,
            });
        }
        let mut exps = vec![0u32; n_vars];
        exps[var - 1] = 1;
        Self::monomial(field, exps, field.one())
    }

    pub fn monomial(field: Field, exponents: Vec<u32>, coeff: FieldElement) -> Result<Self> {
        let mut poly = Self::zero(field, exponents.len());
        poly.check_coeff(&coeff)?;
        poly.insert_term(exponents, coeff);
        Ok(poly)
    }

    /// Accumulates terms (repeated exponent vectors add up) and drops zeros.
    pub fn from_terms(
        field: Field,
        n_vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, FieldElement)>,
    ) -> Result<Self> {
        let mut poly = Self::zero(field, n_vars);
        for (exps, coeff) in terms {
            if exps.len() != n_vars {
                return Err(Error::ArityMismatch {
                    expected: n_vars,
                    got: exps.len(),
                });
            }
            poly.check_coeff(&coeff)?;
            poly.insert_term(exps, coeff);
        }
        Ok(poly)
    }

    fn check_coeff(&self, coeff: &FieldElement) -> Result<()> {
        if coeff.modulus() != self.field.modulus() {
            return Err(Error::ModulusMismatch(
                self.field.modulus(),
                coeff.modulus(),
            ));
        }
        Ok(())
    }

    fn insert_term(&mut self, exps: Vec<u32>, coeff: FieldElement) {
        debug_assert_eq!(exps.len(), self.n_vars);
        let total = match self.terms.remove(&exps) {
            Some(existing) => existing + coeff,
            None => coeff,
        };
        if !total.is_zero() {
            self.terms.insert(exps, total);
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max exponent sum over terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u64 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as u64).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &FieldElement)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of an exponent vector, zero when absent.
    pub fn coefficient(&self, exps: &[u32]) -> FieldElement {
        self.terms
            .get(exps)
            .copied()
            .unwrap_or_else(|| self.field.zero())
    }

    /// True exactly for `x1*x2*...*xn` with coefficient 1.
    pub fn is_multilinear_monomial(&self) -> bool {
        self.n_vars >= 1
            && self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(e, c)| e.iter().all(|&v| v == 1) && c.value() == 1)
    }

    pub fn evaluate(&self, x: &[FieldElement]) -> Result<FieldElement> {
        if x.len() != self.n_vars {
            return Err(Error::ArityMismatch {
                expected: self.n_vars,
                got: x.len(),
            });
        }
        for v in x {
            if v.modulus() != self.field.modulus() {
                return Err(Error::ModulusMismatch(self.field.modulus(), v.modulus()));
            }
        }
        let mut acc = self.field.zero();
        for (exps, coeff) in &self.terms {
            let mut term = *coeff;
            for (v, &e) in x.iter().zip(exps.iter()) {
                if e > 0 {
                    term *= v.power(e as u64);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field.modulus() != other.field.modulus() {
            return Err(Error::ModulusMismatch(
                self.field.modulus(),
                other.field.modulus(),
            ));
        }
        if self.n_vars != other.n_vars {
            return Err(Error::ArityMismatch {
                expected: self.n_vars,
                got: other.n_vars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (exps, &coeff) in &other.terms {
            out.insert_term(exps.clone(), coeff);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for coeff in out.terms.values_mut() {
            *coeff = -*coeff;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.field, self.n_vars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb.iter()).map(|(&a, &b)| a + b).collect();
                out.insert_term(exps, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: FieldElement) -> Result<Self> {
        self.check_coeff(&c)?;
        let mut out = Self::zero(self.field, self.n_vars);
        if c.is_zero() {
            return Ok(out);
        }
        for (exps, &coeff) in &self.terms {
            out.insert_term(exps.clone(), coeff * c);
        }
        Ok(out)
    }

    pub fn add_constant(&self, c: FieldElement) -> Result<Self> {
        self.check_coeff(&c)?;
        let mut out = self.clone();
        out.insert_term(vec![0; self.n_vars], c);
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.field, self.n_vars, self.field.one())
            .expect("constant in own field");
        for _ in 0..e {
            acc = acc.mul(self).expect("powers share field and arity");
        }
        acc
    }

    /// The formal polynomial `h` with `h(x) = f((x + c)L + e)` for all x.
    ///
    /// `L` has one row per variable of `h` and one column per variable of
    /// `f`; `c` lives on the input side, `e` on the output side. Each
    /// variable of `f` is replaced by its affine form and the product is
    /// expanded, so the identity holds everywhere, not just on a domain.
    pub fn substitute_affine(
        &self,
        l: &Matrix,
        c: &[FieldElement],
        e: &[FieldElement],
    ) -> Result<Self> {
        if l.cols() != self.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "map produces {} coordinates but the polynomial has {} variables",
                l.cols(),
                self.n_vars
            )));
        }
        if c.len() != l.rows() || e.len() != l.cols() {
            return Err(Error::DimensionMismatch(format!(
                "offsets of lengths {} and {} for a {}x{} map",
                c.len(),
                e.len(),
                l.rows(),
                l.cols()
            )));
        }
        if l.modulus() != self.field.modulus() {
            return Err(Error::ModulusMismatch(self.field.modulus(), l.modulus()));
        }
        for v in c.iter().chain(e.iter()) {
            if v.modulus() != self.field.modulus() {
                return Err(Error::ModulusMismatch(self.field.modulus(), v.modulus()));
            }
        }
        let n_out = l.rows();
        // Constant part of the map: cL + e.
        let shift = Matrix::row_vec_mul(c, l)?
            .into_iter()
            .zip(e.iter())
            .map(|(a, &b)| a + b)
            .collect::<Vec<_>>();
        // Affine form feeding variable i of f.
        let forms: Vec<Self> = (0..self.n_vars)
            .map(|i| {
                let mut terms = Vec::with_capacity(n_out + 1);
                for k in 0..n_out {
                    let mut exps = vec![0u32; n_out];
                    exps[k] = 1;
                    terms.push((exps, l[(k, i)]));
                }
                terms.push((vec![0; n_out], shift[i]));
                Self::from_terms(self.field, n_out, terms).expect("affine form is well formed")
            })
            .collect();
        let mut out = Self::zero(self.field, n_out);
        for (exps, &coeff) in &self.terms {
            let mut term = Self::constant(self.field, n_out, coeff)?;
            for (i, &e_i) in exps.iter().enumerate() {
                if e_i > 0 {
                    term = term.mul(&forms[i].pow(e_i))?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Parses the text format `coeff*x1^e1*...*xn^en + ...`, e.g.
    /// `3*x1^2*x2 + 1`. Coefficients reduce mod p; `-` subtracts the
    /// following term; variables are `x1..xn`.
    pub fn parse(field: Field, n_vars: usize, text: &str) -> Result<Self> {
        Parser {
            field,
            n_vars,
            chars: text.char_indices().peekable(),
            text,
        }
        .run()
    }
}

impl fmt::Display for MultivariatePolynomial {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(out, "0");
        }
        // Highest exponent vector first so the leading term reads first.
        for (i, (exps, coeff)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                write!(out, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if coeff.value() != 1 || exps.iter().all(|&e| e == 0) {
                factors.push(coeff.value().to_string());
            }
            for (k, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("x{}", k + 1)),
                    _ => factors.push(format!("x{}^{}", k + 1, e)),
                }
            }
            write!(out, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    field: Field,
    n_vars: usize,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn run(mut self) -> Result<MultivariatePolynomial> {
        let mut poly = MultivariatePolynomial::zero(self.field, self.n_vars);
        self.skip_ws();
        if self.chars.peek().is_none() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut negate = false;
        if let Some(&(_, c)) = self.chars.peek() {
            if c == '-' {
                negate = true;
                self.chars.next();
            } else if c == '+' {
                self.chars.next();
            }
        }
        loop {
            let (exps, coeff) = self.term()?;
            poly.insert_term(exps, if negate { -coeff } else { coeff });
            self.skip_ws();
            match self.chars.next() {
                None => break,
                Some((_, '+')) => negate = false,
                Some((_, '-')) => negate = true,
                Some((pos, c)) => {
                    return Err(Error::Parse(format!(
                        "expected '+' or '-' at byte {pos}, found {c:?} in {:?}",
                        self.text
                    )))
                }
            }
        }
        Ok(poly)
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some(&(_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn term(&mut self) -> Result<(Vec<u32>, FieldElement)> {
        let mut coeff = self.field.one();
        let mut exps = vec![0u32; self.n_vars];
        loop {
            self.skip_ws();
            match self.chars.peek() {
                Some(&(_, c)) if c.is_ascii_digit() => {
                    let value = self.number()?;
                    coeff *= self.field.element(value);
                }
                Some(&(_, 'x')) => {
                    self.chars.next();
                    let var = self.number()? as usize;
                    if var == 0 || var > self.n_vars {
                        return Err(Error::Parse(format!(
                            "variable x{var} out of range x1..x{}",
                            self.n_vars
                        )));
                    }
                    let mut exp = 1u64;
                    if matches!(self.chars.peek(), Some(&(_, '^'))) {
                        self.chars.next();
                        exp = self.number()?;
                    }
                    if exp > u32::MAX as u64 {
                        return Err(Error::Parse(format!("exponent {exp} too large")));
                    }
                    exps[var - 1] = exps[var - 1].saturating_add(exp as u32);
                }
                Some(&(pos, c)) => {
                    return Err(Error::Parse(format!(
                        "expected a coefficient or variable at byte {pos}, found {c:?} in {:?}",
                        self.text
                    )))
                }
                None => return Err(Error::Parse("unexpected end of polynomial".into())),
            }
            self.skip_ws();
            if matches!(self.chars.peek(), Some(&(_, '*'))) {
                self.chars.next();
            } else {
                return Ok((exps, coeff));
            }
        }
    }

    fn number(&mut self) -> Result<u64> {
        let mut digits = String::new();
        while matches!(self.chars.peek(), Some(&(_, c)) if c.is_ascii_digit()) {
            digits.push(self.chars.next().unwrap().1);
        }
        if digits.is_empty() {
            let rest: String = self.chars.clone().map(|(_, c)| c).collect();
            return Err(Error::Parse(format!(
                "expected a number before {rest:?} in {:?}",
                self.text
            )));
        }
        digits
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("number {digits} does not fit in 64 bits")))
    }
}

/// An input domain for hiding experiments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    /// All of F_p^n.
    Full,
    /// (F_p*)^n: every coordinate nonzero.
    Punctured,
    /// A finite list of distinct points.
    Explicit(Vec<Vec<FieldElement>>),
}

impl Domain {
    /// Validates distinctness and uniform arity/modulus of the point list.
    pub fn explicit(points: Vec<Vec<FieldElement>>) -> Result<Self> {
        if let Some(first) = points.first() {
            let arity = first.len();
            for point in &points {
                if point.len() != arity {
                    return Err(Error::ArityMismatch {
                        expected: arity,
                        got: point.len(),
                    });
                }
                for v in point {
                    if v.modulus() != first[0].modulus() {
                        return Err(Error::ModulusMismatch(first[0].modulus(), v.modulus()));
                    }
                }
            }
            for (i, point) in points.iter().enumerate() {
                if points[i + 1..].contains(point) {
                    return Err(Error::ParamViolation(format!(
                        "explicit domain repeats the point {:?}",
                        point.iter().map(|v| v.value()).collect::<Vec<_>>()
                    )));
                }
            }
        }
        Ok(Domain::Explicit(points))
    }

    /// Number of points, saturating at `u128::MAX` for huge full spaces.
    pub fn size(&self, field: Field, n_vars: usize) -> u128 {
        let base = match self {
            Domain::Full => field.modulus() as u128,
            Domain::Punctured => (field.modulus() - 1) as u128,
            Domain::Explicit(points) => return points.len() as u128,
        };
        let mut acc: u128 = 1;
        for _ in 0..n_vars {
            acc = acc.saturating_mul(base);
        }
        acc
    }

    pub fn contains(&self, point: &[FieldElement]) -> bool {
        match self {
            Domain::Full => true,
            Domain::Punctured => point.iter().all(|v| !v.is_zero()),
            Domain::Explicit(points) => points.iter().any(|p| p == point),
        }
    }

    /// All points in a fixed order: lexicographic with the last coordinate
    /// varying fastest for the product spaces, list order for explicit sets.
    pub fn enumerate(
        &self,
        field: Field,
        n_vars: usize,
        budget: u64,
    ) -> Result<Vec<Vec<FieldElement>>> {
        let size = self.size(field, n_vars);
        if size > budget as u128 {
            return Err(Error::BudgetExceeded {
                required: size,
                budget,
            });
        }
        match self {
            Domain::Explicit(points) => {
                for point in points {
                    if point.len() != n_vars {
                        return Err(Error::ArityMismatch {
                            expected: n_vars,
                            got: point.len(),
                        });
                    }
                    for v in point {
                        if v.modulus() != field.modulus() {
                            return Err(Error::ModulusMismatch(field.modulus(), v.modulus()));
                        }
                    }
                }
                Ok(points.clone())
            }
            Domain::Full | Domain::Punctured => {
                let values: Vec<FieldElement> = match self {
                    Domain::Full => field.elements().collect(),
                    _ => field.nonzero_elements().collect(),
                };
                let mut out = Vec::with_capacity(size as usize);
                let mut indices = vec![0usize; n_vars];
                'outer: loop {
                    out.push(indices.iter().map(|&i| values[i]).collect());
                    for pos in (0..n_vars).rev() {
                        indices[pos] += 1;
                        if indices[pos] < values.len() {
                            continue 'outer;
                        }
                        indices[pos] = 0;
                    }
                    break;
                }
                Ok(out)
            }
        }
    }
}

/// A vector polynomial of degree <= t in one variable whose constant term is
/// the secret: phi(u) = x + sum of u^k * r_k. Evaluating at 0 returns the
/// secret exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharingPolynomial {
    secret: Vec<FieldElement>,
    coeffs: Vec<Vec<FieldElement>>,
}

impl SharingPolynomial {
    pub fn new(secret: Vec<FieldElement>, coeffs: Vec<Vec<FieldElement>>) -> Result<Self> {
        if secret.is_empty() {
            return Err(Error::DimensionMismatch(
                "secret needs at least one coordinate".into(),
            ));
        }
        let modulus = secret[0].modulus();
        for v in &secret {
            if v.modulus() != modulus {
                return Err(Error::ModulusMismatch(modulus, v.modulus()));
            }
        }
        for r in &coeffs {
            if r.len() != secret.len() {
                return Err(Error::ArityMismatch {
                    expected: secret.len(),
                    got: r.len(),
                });
            }
            for v in r {
                if v.modulus() != modulus {
                    return Err(Error::ModulusMismatch(modulus, v.modulus()));
                }
            }
        }
        Ok(SharingPolynomial { secret, coeffs })
    }

    pub fn arity(&self) -> usize {
        self.secret.len()
    }

    /// Degree bound t (number of random coefficient vectors).
    pub fn threshold(&self) -> usize {
        self.coeffs.len()
    }

    pub fn secret(&self) -> &[FieldElement] {
        &self.secret
    }

    pub fn randomness(&self) -> &[Vec<FieldElement>] {
        &self.coeffs
    }

    /// phi(j), componentwise.
    pub fn eval_at(&self, j: FieldElement) -> Vec<FieldElement> {
        let mut out = self.secret.clone();
        let mut j_pow = j.field().one();
        for r in &self.coeffs {
            j_pow *= j;
            for (o, &v) in out.iter_mut().zip(r.iter()) {
                *o += j_pow * v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn f(p: u64) -> Field {
        Field::new(p).unwrap()
    }

    fn pt(field: Field, vals: &[u64]) -> Vec<FieldElement> {
        vals.iter().map(|&v| field.element(v)).collect()
    }

    fn random_poly(
        field: Field,
        n_vars: usize,
        max_deg: u32,
        rng: &mut StdRng,
    ) -> MultivariatePolynomial {
        let n_terms = rng.random_range(0..5);
        let terms = (0..n_terms)
            .map(|_| {
                let exps: Vec<u32> = (0..n_vars).map(|_| rng.random_range(0..=max_deg)).collect();
                (exps, field.random_element(rng))
            })
            .collect::<Vec<_>>();
        MultivariatePolynomial::from_terms(field, n_vars, terms).unwrap()
    }

    #[test]
    fn frozen_evaluation_examples() {
        let field = f(5);
        let one = MultivariatePolynomial::constant(field, 2, field.one()).unwrap();
        assert_eq!(one.evaluate(&pt(field, &[3, 4])).unwrap(), field.one());

        let x1x2 = MultivariatePolynomial::parse(field, 2, "x1*x2").unwrap();
        assert_eq!(x1x2.evaluate(&pt(field, &[2, 3])).unwrap().value(), 1);

        let field7 = f(7);
        let cube = MultivariatePolynomial::parse(field7, 1, "x1^3").unwrap();
        assert_eq!(cube.evaluate(&pt(field7, &[2])).unwrap().value(), 1);
    }

    #[test]
    fn evaluation_arity_is_checked() {
        let field = f(5);
        let x1 = MultivariatePolynomial::variable(field, 2, 1).unwrap();
        assert_eq!(
            x1.evaluate(&pt(field, &[1])).unwrap_err(),
            Error::ArityMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn zero_coefficients_are_never_stored() {
        let field = f(5);
        let a = MultivariatePolynomial::parse(field, 1, "2*x1 + 3*x1").unwrap();
        assert!(a.is_zero());
        assert_eq!(a.degree(), 0);
        let b = MultivariatePolynomial::parse(field, 1, "x1 + 4").unwrap();
        let c = MultivariatePolynomial::parse(field, 1, "4*x1 + 1").unwrap();
        assert!(b.add(&c).unwrap().is_zero());
    }

    #[test]
    fn degree_is_max_exponent_sum() {
        let field = f(7);
        let poly = MultivariatePolynomial::parse(field, 2, "x1^2*x2 + x2^2 + 5").unwrap();
        assert_eq!(poly.degree(), 3);
        assert_eq!(MultivariatePolynomial::zero(field, 2).degree(), 0);
    }

    #[test]
    fn frozen_sharing_polynomial_examples() {
        let field = f(7);
        let phi = SharingPolynomial::new(pt(field, &[3]), vec![pt(field, &[2])]).unwrap();
        assert_eq!(phi.eval_at(field.zero()), pt(field, &[3]));
        assert_eq!(phi.eval_at(field.element(1)), pt(field, &[5]));
        assert_eq!(phi.eval_at(field.element(2)), pt(field, &[0]));
    }

    #[test]
    fn sharing_polynomial_constant_term_is_secret() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let field = f(11);
            let n = rng.random_range(1..4);
            let t = rng.random_range(0..3);
            let secret: Vec<_> = (0..n).map(|_| field.random_element(&mut rng)).collect();
            let coeffs: Vec<Vec<_>> = (0..t)
                .map(|_| (0..n).map(|_| field.random_element(&mut rng)).collect())
                .collect();
            let phi = SharingPolynomial::new(secret.clone(), coeffs).unwrap();
            assert_eq!(phi.eval_at(field.zero()), secret);
        }
    }

    #[test]
    fn identity_substitution_is_term_exact() {
        let field = f(7);
        let poly = MultivariatePolynomial::parse(field, 2, "3*x1^2*x2 + x2 + 6").unwrap();
        let id = Matrix::identity(field, 2).unwrap();
        let zero2 = pt(field, &[0, 0]);
        assert_eq!(poly.substitute_affine(&id, &zero2, &zero2).unwrap(), poly);
    }

    #[test]
    fn frozen_substitution_shift_example() {
        let field = f(5);
        let x1x2 = MultivariatePolynomial::parse(field, 2, "x1*x2").unwrap();
        let id = Matrix::identity(field, 2).unwrap();
        let shifted = x1x2
            .substitute_affine(&id, &pt(field, &[0, 0]), &pt(field, &[1, 0]))
            .unwrap();
        let expected = MultivariatePolynomial::parse(field, 2, "x1*x2 + x2").unwrap();
        assert_eq!(shifted, expected);
        // Cross-check on all 25 points.
        for a in 0..5 {
            for b in 0..5 {
                let x = pt(field, &[a, b]);
                let mapped = pt(field, &[(a + 1) % 5, b]);
                assert_eq!(
                    shifted.evaluate(&x).unwrap(),
                    x1x2.evaluate(&mapped).unwrap()
                );
            }
        }
    }

    #[test]
    fn frozen_substitution_scaling_example() {
        let field = f(5);
        let square = MultivariatePolynomial::parse(field, 1, "x1^2").unwrap();
        let two = Matrix::from_residues(field, &[vec![2]]).unwrap();
        let scaled = square
            .substitute_affine(&two, &pt(field, &[0]), &pt(field, &[0]))
            .unwrap();
        assert_eq!(
            scaled,
            MultivariatePolynomial::parse(field, 1, "4*x1^2").unwrap()
        );
        for a in 0..5 {
            assert_eq!(
                scaled.evaluate(&pt(field, &[a])).unwrap(),
                square.evaluate(&pt(field, &[2 * a % 5])).unwrap()
            );
        }
    }

    #[test]
    fn substitution_agrees_pointwise_exhaustively() {
        let mut rng = StdRng::seed_from_u64(17);
        for p in [2u64, 3, 5, 7] {
            let field = f(p);
            for n_vars in 1..=2usize {
                for _ in 0..8 {
                    let poly = random_poly(field, n_vars, 3, &mut rng);
                    let l = Matrix::from_rows(
                        (0..n_vars)
                            .map(|_| {
                                (0..n_vars)
                                    .map(|_| field.random_element(&mut rng))
                                    .collect()
                            })
                            .collect(),
                    )
                    .unwrap();
                    let c: Vec<_> = (0..n_vars)
                        .map(|_| field.random_element(&mut rng))
                        .collect();
                    let e: Vec<_> = (0..n_vars)
                        .map(|_| field.random_element(&mut rng))
                        .collect();
                    let sub = poly.substitute_affine(&l, &c, &e).unwrap();
                    for x in Domain::Full.enumerate(field, n_vars, 1 << 20).unwrap() {
                        let moved: Vec<_> = Matrix::row_vec_mul(
                            &x.iter()
                                .zip(c.iter())
                                .map(|(&a, &b)| a + b)
                                .collect::<Vec<_>>(),
                            &l,
                        )
                        .unwrap()
                        .iter()
                        .zip(e.iter())
                        .map(|(&a, &b)| a + b)
                        .collect();
                        assert_eq!(
                            sub.evaluate(&x).unwrap(),
                            poly.evaluate(&moved).unwrap(),
                            "p={p} n={n_vars} poly={poly} x={x:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn substitution_roundtrip_through_inverse_map() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..30 {
            let field = f(7);
            let n_vars = rng.random_range(1..=3usize);
            let poly = random_poly(field, n_vars, 2, &mut rng);
            let l = crate::linalg::tests::random_invertible(7, n_vars, &mut rng);
            let c: Vec<_> = (0..n_vars)
                .map(|_| field.random_element(&mut rng))
                .collect();
            let e: Vec<_> = (0..n_vars)
                .map(|_| field.random_element(&mut rng))
                .collect();
            let forward = poly.substitute_affine(&l, &c, &e).unwrap();
            let l_inv = l.mat_inverse().unwrap();
            let neg_c: Vec<_> = c.iter().map(|&v| -v).collect();
            let neg_e: Vec<_> = e.iter().map(|&v| -v).collect();
            let back = forward.substitute_affine(&l_inv, &neg_e, &neg_c).unwrap();
            assert_eq!(back, poly);
        }
    }

    #[test]
    fn substitution_degree_bound() {
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..30 {
            let field = f(5);
            let poly = random_poly(field, 2, 3, &mut rng);
            let l = crate::linalg::tests::random_invertible(5, 2, &mut rng);
            let c: Vec<_> = (0..2).map(|_| field.random_element(&mut rng)).collect();
            let e: Vec<_> = (0..2).map(|_| field.random_element(&mut rng)).collect();
            let sub = poly.substitute_affine(&l, &c, &e).unwrap();
            assert_eq!(sub.degree(), poly.degree());
        }
    }

    #[test]
    fn parse_and_display_roundtrip() {
        let field = f(7);
        let poly = MultivariatePolynomial::parse(field, 2, "3*x1^2*x2 + 1").unwrap();
        assert_eq!(poly.term_count(), 2);
        assert_eq!(poly.coefficient(&[2, 1]).value(), 3);
        assert_eq!(poly.coefficient(&[0, 0]).value(), 1);
        assert_eq!(poly.to_string(), "3*x1^2*x2 + 1");
        assert_eq!(
            MultivariatePolynomial::parse(field, 2, &poly.to_string()).unwrap(),
            poly
        );
    }

    #[test]
    fn parse_handles_signs_whitespace_and_reduction() {
        let field = f(5);
        let a = MultivariatePolynomial::parse(field, 1, " 7*x1 - 3 ").unwrap();
        assert_eq!(
            a,
            MultivariatePolynomial::parse(field, 1, "2*x1+2").unwrap()
        );
        let b = MultivariatePolynomial::parse(field, 1, "-x1 + x1 + 1").unwrap();
        assert_eq!(
            b,
            MultivariatePolynomial::constant(field, 1, field.one()).unwrap()
        );
        let c = MultivariatePolynomial::parse(field, 1, "0").unwrap();
        assert!(c.is_zero());
        assert_eq!(c.to_string(), "0");
        // x1*x1 accumulates into x1^2.
        let d = MultivariatePolynomial::parse(field, 1, "x1*x1").unwrap();
        assert_eq!(d, MultivariatePolynomial::parse(field, 1, "x1^2").unwrap());
    }

    #[test]
    fn parse_rejects_garbage() {
        let field = f(5);
        for bad in ["", "x0", "x3", "x1 & x2", "3*", "^2", "x1^", "y1", "+"] {
            assert!(
                matches!(
                    MultivariatePolynomial::parse(field, 2, bad),
                    Err(Error::Parse(_)) | Err(Error::IndexOutOfRange { .. })
                ),
                "{bad:?} should fail"
            );
        }
    }

    #[test]
    fn multilinear_monomial_detection() {
        let field = f(5);
        assert!(MultivariatePolynomial::parse(field, 2, "x1*x2")
            .unwrap()
            .is_multilinear_monomial());
        for not_it in ["2*x1*x2", "x1", "x1*x2 + 1", "x1^2*x2"] {
            assert!(
                !MultivariatePolynomial::parse(field, 2, not_it)
                    .unwrap()
                    .is_multilinear_monomial(),
                "{not_it:?}"
            );
        }
    }

    #[test]
    fn domain_enumeration_order_and_contents() {
        let field = f(3);
        let full = Domain::Full.enumerate(field, 2, 100).unwrap();
        assert_eq!(full.len(), 9);
        assert_eq!(full[0], pt(field, &[0, 0]));
        assert_eq!(full[1], pt(field, &[0, 1]));
        assert_eq!(full[3], pt(field, &[1, 0]));
        let punct = Domain::Punctured.enumerate(field, 2, 100).unwrap();
        assert_eq!(punct.len(), 4);
        assert!(punct.iter().all(|p| p.iter().all(|v| !v.is_zero())));
        assert!(Domain::Punctured.contains(&pt(field, &[1, 2])));
        assert!(!Domain::Punctured.contains(&pt(field, &[1, 0])));
    }

    #[test]
    fn domain_budget_is_enforced() {
        let field = f(7);
        assert_eq!(
            Domain::Full.enumerate(field, 4, 100).unwrap_err(),
            Error::BudgetExceeded {
                required: 2401,
                budget: 100
            }
        );
    }

    #[test]
    fn explicit_domain_validation() {
        let field = f(5);
        let ok = Domain::explicit(vec![pt(field, &[1, 2]), pt(field, &[2, 1])]).unwrap();
        assert_eq!(ok.size(field, 2), 2);
        assert!(ok.contains(&pt(field, &[1, 2])));
        assert!(!ok.contains(&pt(field, &[0, 0])));
        assert!(matches!(
            Domain::explicit(vec![pt(field, &[1, 2]), pt(field, &[1, 2])]),
            Err(Error::ParamViolation(_))
        ));
        assert!(matches!(
            Domain::explicit(vec![pt(field, &[1, 2]), pt(field, &[1])]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    proptest! {
        /// Property: evaluation is a ring homomorphism; evaluating a sum or
        /// product equals the sum or product of evaluations.
        #[test]
        fn evaluation_respects_ring_ops(seed in 0u64..500, p in prop::sample::select(vec![3u64, 5, 7])) {
            let field = f(p);
            let mut rng = StdRng::seed_from_u64(seed);
            let a = random_poly(field, 2, 3, &mut rng);
            let b = random_poly(field, 2, 3, &mut rng);
            let x = [field.random_element(&mut rng), field.random_element(&mut rng)];
            let va = a.evaluate(&x).unwrap();
            let vb = b.evaluate(&x).unwrap();
            prop_assert_eq!(a.add(&b).unwrap().evaluate(&x).unwrap(), va + vb);
            prop_assert_eq!(a.mul(&b).unwrap().evaluate(&x).unwrap(), va * vb);
            prop_assert_eq!(a.neg().evaluate(&x).unwrap(), -va);
        }
    }
}
