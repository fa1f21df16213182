//! The secret-sharing scheme: a secret vector is split through a random
//! degree-t vector polynomial, each server evaluates a bounded-degree
//! function on its share locally, and the outputs recombine through
//! Lagrange coefficients at zero.
//!
//! Correctness needs d*t < m: the composed polynomial f(phi(u)) has degree
//! at most d*t, so m evaluations pin down its constant term f(x).

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::poly::{MultivariatePolynomial, SharingPolynomial};

/// Scheme parameters: p prime, n input arity, m servers, t privacy
/// threshold, d degree bound on evaluated functions.
///
/// Server j holds the share phi(j) where j is reduced mod p. When m >= p
/// the points 1..=m wrap: they can repeat or hit zero, which degrades
/// privacy and (at m > p) makes the decoding coefficients undefined. Such
/// parameter sets are accepted so the degradation itself can be studied;
/// `points_distinct_nonzero` reports whether a set avoids it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeParams {
    field: Field,
    n: usize,
    m: usize,
    t: usize,
    d: u64,
}

impl SchemeParams {
    pub fn new(p: u64, n: usize, m: usize, t: usize, d: u64) -> Result<Self> {
        let field = Field::new(p)?;
        if n == 0 {
            return Err(Error::ParamViolation(
                "input arity n must be positive".into(),
            ));
        }
        if m == 0 {
            return Err(Error::ParamViolation(
                "server count m must be positive".into(),
            ));
        }
        if t == 0 {
            return Err(Error::ParamViolation(
                "privacy threshold t must be positive".into(),
            ));
        }
        let dt = d.checked_mul(t as u64).ok_or_else(|| {
            Error::ParamViolation("degree bound times threshold overflows".into())
        })?;
        if dt >= m as u64 {
            return Err(Error::ParamViolation(format!(
                "need d*t < m for decoding, got d*t = {dt} with m = {m}"
            )));
        }
        Ok(SchemeParams { field, n, m, t, d })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn modulus(&self) -> u64 {
        self.field.modulus()
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn server_count(&self) -> usize {
        self.m
    }

    pub fn threshold(&self) -> usize {
        self.t
    }

    pub fn degree_bound(&self) -> u64 {
        self.d
    }

    /// The residues of 1..=m, in server order.
    pub fn evaluation_points(&self) -> Vec<FieldElement> {
        (1..=self.m as u64).map(|j| self.field.element(j)).collect()
    }

    /// True when the m evaluation points are pairwise distinct and nonzero
    /// (equivalent to m < p), the regime with full t-privacy.
    pub fn points_distinct_nonzero(&self) -> bool {
        (self.m as u64) < self.field.modulus()
    }

    /// |F_p^n|^t, the number of sharing-randomness tuples (saturating).
    pub fn randomness_space(&self) -> u128 {
        let mut acc: u128 = 1;
        for _ in 0..self.n * self.t {
            acc = acc.saturating_mul(self.field.modulus() as u128);
        }
        acc
    }
}

/// The m shares of one secret together with the randomness that produced
/// them, so experiments can replay or pair sharings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareSet {
    shares: Vec<Vec<FieldElement>>,
    randomness: Vec<Vec<FieldElement>>,
}

impl ShareSet {
    /// Shares in server order: element j-1 belongs to server j.
    pub fn shares(&self) -> &[Vec<FieldElement>] {
        &self.shares
    }

    /// Share of server j (1-based).
    pub fn share(&self, j: usize) -> Result<&[FieldElement]> {
        if j == 0 || j > self.shares.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                count: self.shares.len(),
            });
        }
        Ok(&self.shares[j - 1])
    }

    /// The t random coefficient vectors of the sharing polynomial.
    pub fn randomness(&self) -> &[Vec<FieldElement>] {
        &self.randomness
    }
}

fn check_secret(params: &SchemeParams, x: &[FieldElement]) -> Result<()> {
    if x.len() != params.n {
        return Err(Error::ArityMismatch {
            expected: params.n,
            got: x.len(),
        });
    }
    for v in x {
        if v.modulus() != params.modulus() {
            return Err(Error::ModulusMismatch(params.modulus(), v.modulus()));
        }
    }
    Ok(())
}

/// Splits x into m shares with fresh randomness from `rng`.
pub fn share(params: &SchemeParams, x: &[FieldElement], rng: &mut impl Rng) -> Result<ShareSet> {
    let randomness: Vec<Vec<FieldElement>> = (0..params.t)
        .map(|_| {
            (0..params.n)
                .map(|_| params.field.random_element(rng))
                .collect()
        })
        .collect();
    share_with_randomness(params, x, randomness)
}

/// Splits x using the given t coefficient vectors; deterministic, used to
/// enumerate or pair sharings.
pub fn share_with_randomness(
    params: &SchemeParams,
    x: &[FieldElement],
    randomness: Vec<Vec<FieldElement>>,
) -> Result<ShareSet> {
    check_secret(params, x)?;
    if randomness.len() != params.t {
        return Err(Error::LengthMismatch {
            expected: params.t,
            got: randomness.len(),
        });
    }
    let phi = SharingPolynomial::new(x.to_vec(), randomness)?;
    let shares = params
        .evaluation_points()
        .into_iter()
        .map(|j| phi.eval_at(j))
        .collect();
    Ok(ShareSet {
        shares,
        randomness: phi.randomness().to_vec(),
    })
}

/// Runs every randomness tuple through `visit`, in a fixed odometer order
/// (last coordinate fastest). Fails upfront if the space exceeds `budget`.
pub fn for_each_randomness(
    params: &SchemeParams,
    budget: u64,
    mut visit: impl FnMut(&[Vec<FieldElement>]),
) -> Result<()> {
    let space = params.randomness_space();
    if space > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: space,
            budget,
        });
    }
    let field = params.field;
    let digits = params.n * params.t;
    let mut indices = vec![0u64; digits];
    let mut buffer: Vec<Vec<FieldElement>> = vec![vec![field.zero(); params.n]; params.t];
    loop {
        for u in 0..params.t {
            for i in 0..params.n {
                buffer[u][i] = field.element(indices[u * params.n + i]);
            }
        }
        visit(&buffer);
        let mut pos = digits;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < field.modulus() {
                break;
            }
            indices[pos] = 0;
        }
    }
}

/// Server j's local step: y_j = f(s_j). The index j is bookkeeping only;
/// the output depends on the share alone.
pub fn eval(
    params: &SchemeParams,
    _j: usize,
    f: &MultivariatePolynomial,
    s_j: &[FieldElement],
) -> Result<FieldElement> {
    if f.field().modulus() != params.modulus() {
        return Err(Error::ModulusMismatch(
            params.modulus(),
            f.field().modulus(),
        ));
    }
    if f.n_vars() != params.n {
        return Err(Error::ArityMismatch {
            expected: params.n,
            got: f.n_vars(),
        });
    }
    if f.degree() > params.d {
        return Err(Error::DegreeViolation {
            degree: f.degree(),
            bound: params.d,
        });
    }
    f.evaluate(s_j)
}

/// Lagrange coefficients at zero for the points 1..=m:
/// lambda_j = prod over k != j of k * (k - j)^-1, all as residues mod p.
///
/// For m <= p these always exist (a zero point only zeroes the product).
/// For m > p two integer points collide mod p and the inversion fails
/// with `ZeroInverse`.
pub fn lagrange_coeffs(params: &SchemeParams) -> Result<Vec<FieldElement>> {
    let field = params.field;
    let mut coeffs = Vec::with_capacity(params.m);
    for j in 1..=params.m as u64 {
        let mut lambda = field.one();
        for k in 1..=params.m as u64 {
            if k == j {
                continue;
            }
            let num = field.element(k);
            let den = field.element(k) - field.element(j);
            lambda *= num * den.inverse()?;
        }
        coeffs.push(lambda);
    }
    Ok(coeffs)
}

/// Recombines the m server outputs: y = sum of lambda_j * y_j. Accepts any
/// m field values; it does not know where they came from.
pub fn decode(params: &SchemeParams, ys: &[FieldElement]) -> Result<FieldElement> {
    if ys.len() != params.m {
        return Err(Error::LengthMismatch {
            expected: params.m,
            got: ys.len(),
        });
    }
    for y in ys {
        if y.modulus() != params.modulus() {
            return Err(Error::ModulusMismatch(params.modulus(), y.modulus()));
        }
    }
    let coeffs = lagrange_coeffs(params)?;
    let mut acc = params.field.zero();
    for (lambda, &y) in coeffs.iter().zip(ys.iter()) {
        acc += *lambda * y;
    }
    Ok(acc)
}

/// The shares of the servers in T (1-based indices), in increasing index
/// order with duplicates collapsed. Models what a coalition T sees.
pub fn restrict_shares(share_set: &ShareSet, t_set: &[usize]) -> Result<Vec<Vec<FieldElement>>> {
    let mut indices: Vec<usize> = t_set.to_vec();
    indices.sort_unstable();
    indices.dedup();
    indices
        .into_iter()
        .map(|j| share_set.share(j).map(|s| s.to_vec()))
        .collect()
}
