//! Affine equivalences between experiment instances: an invertible change
//! of input coordinates plus an affine change of the output value. Two
//! instances related this way have identical hiding behavior, and a
//! distinguisher against one side transfers to the other with its exact
//! advantage preserved.

use std::sync::Arc;

use crate::ctxhide::{Distinguisher, GuessRule};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::linalg::Matrix;
use crate::poly::{Domain, MultivariatePolynomial};

/// The instance map (alpha, beta, gamma, L, c, e): it turns f into
///
///   g(x) = alpha * (f((x + c) L + e) + beta) + gamma
///
/// with alpha nonzero and L invertible (points are row vectors). Applying
/// it to points means the inner map x -> (x + c) L + e.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceTransform {
    alpha: FieldElement,
    beta: FieldElement,
    gamma: FieldElement,
    l: Matrix,
    c: Vec<FieldElement>,
    e: Vec<FieldElement>,
}

impl EquivalenceTransform {
    pub fn new(
        alpha: FieldElement,
        beta: FieldElement,
        gamma: FieldElement,
        l: Matrix,
        c: Vec<FieldElement>,
        e: Vec<FieldElement>,
    ) -> Result<Self> {
        let modulus = l.modulus();
        for v in [alpha, beta, gamma].iter().chain(c.iter()).chain(e.iter()) {
            if v.modulus() != modulus {
                return Err(Error::ModulusMismatch(modulus, v.modulus()));
            }
        }
        if alpha.is_zero() {
            return Err(Error::ParamViolation(
                "the output scale alpha must be nonzero".into(),
            ));
        }
        if !l.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "the coordinate map must be square, got {}x{}",
                l.rows(),
                l.cols()
            )));
        }
        if c.len() != l.rows() || e.len() != l.rows() {
            return Err(Error::DimensionMismatch(format!(
                "shifts of lengths {} and {} for {} coordinates",
                c.len(),
                e.len(),
                l.rows()
            )));
        }
        if !l.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(EquivalenceTransform {
            alpha,
            beta,
            gamma,
            l,
            c,
            e,
        })
    }

    /// The transform that leaves every instance unchanged.
    pub fn identity(field: Field, n: usize) -> Result<Self> {
        Self::new(
            field.one(),
            field.zero(),
            field.zero(),
            Matrix::identity(field, n)?,
            vec![field.zero(); n],
            vec![field.zero(); n],
        )
    }

    pub fn field(&self) -> Field {
        self.l.field()
    }

    pub fn arity(&self) -> usize {
        self.l.rows()
    }

    pub fn alpha(&self) -> FieldElement {
        self.alpha
    }

    pub fn beta(&self) -> FieldElement {
        self.beta
    }

    pub fn gamma(&self) -> FieldElement {
        self.gamma
    }

    pub fn matrix(&self) -> &Matrix {
        &self.l
    }

    pub fn input_shift(&self) -> &[FieldElement] {
        &self.c
    }

    pub fn output_shift(&self) -> &[FieldElement] {
        &self.e
    }

    /// (x + c) L + e.
    pub fn apply_to_point(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if x.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: x.len(),
            });
        }
        let shifted: Vec<FieldElement> =
            x.iter().zip(self.c.iter()).map(|(&a, &b)| a + b).collect();
        Ok(Matrix::row_vec_mul(&shifted, &self.l)?
            .into_iter()
            .zip(self.e.iter())
            .map(|(a, &b)| a + b)
            .collect())
    }

    /// alpha * (y + beta) + gamma, the output-value half of the transform.
    pub fn apply_to_output(&self, y: FieldElement) -> FieldElement {
        self.alpha * (y + self.beta) + self.gamma
    }

    /// Builds g = alpha * (f((x + c) L + e) + beta) + gamma together with
    /// the domain f must be read on when g is used on `g_domain`. Full
    /// spaces map to themselves; explicit sets map pointwise; a punctured
    /// space stays punctured only when the point map fixes it (no shifts,
    /// generalized permutation matrix), otherwise the image is
    /// materialized, which costs an enumeration bounded by `budget`.
    pub fn apply_to_polynomial(
        &self,
        f: &MultivariatePolynomial,
        g_domain: &Domain,
        budget: u64,
    ) -> Result<(MultivariatePolynomial, Domain)> {
        if f.field().modulus() != self.field().modulus() {
            return Err(Error::ModulusMismatch(
                self.field().modulus(),
                f.field().modulus(),
            ));
        }
        if f.n_vars() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: f.n_vars(),
            });
        }
        let g = f
            .substitute_affine(&self.l, &self.c, &self.e)?
            .scale(self.alpha)?
            .add_constant(self.alpha * self.beta + self.gamma)?;
        let f_domain = match g_domain {
            Domain::Full => Domain::Full,
            Domain::Punctured if self.fixes_punctured() => Domain::Punctured,
            Domain::Punctured => {
                let mapped = g_domain
                    .enumerate(self.field(), self.arity(), budget)?
                    .iter()
                    .map(|x| self.apply_to_point(x))
                    .collect::<Result<Vec<_>>>()?;
                Domain::explicit(mapped)?
            }
            Domain::Explicit(points) => {
                let mapped = points
                    .iter()
                    .map(|x| self.apply_to_point(x))
                    .collect::<Result<Vec<_>>>()?;
                Domain::explicit(mapped)?
            }
        };
        Ok((g, f_domain))
    }

    /// Whether the point map sends nonzero-coordinate vectors exactly onto
    /// themselves: both shifts zero and one nonzero entry per row and
    /// column of L.
    fn fixes_punctured(&self) -> bool {
        if self.c.iter().any(|v| !v.is_zero()) || self.e.iter().any(|v| !v.is_zero()) {
            return false;
        }
        let n = self.arity();
        let mut col_hits = vec![0usize; n];
        for r in 0..n {
            let mut row_hits = 0usize;
            for (col, hits) in col_hits.iter_mut().enumerate() {
                if !self.l[(r, col)].is_zero() {
                    row_hits += 1;
                    *hits += 1;
                }
            }
            if row_hits != 1 {
                return false;
            }
        }
        col_hits.iter().all(|&h| h == 1)
    }

    /// The transform undoing this one: applying both in either order acts
    /// as the identity on instances and on points.
    pub fn invert(&self) -> Self {
        let alpha_inv = self.alpha.inverse().expect("alpha is nonzero");
        let l_inv = self.l.mat_inverse().expect("L is invertible");
        EquivalenceTransform {
            alpha: alpha_inv,
            beta: -self.gamma,
            gamma: -self.beta,
            l: l_inv,
            c: self.e.iter().map(|&v| -v).collect(),
            e: self.c.iter().map(|&v| -v).collect(),
        }
    }

    /// The single transform acting like `earlier` followed by `self`:
    /// compose(S2, S1) applied to f equals S2 applied to S1 applied to f.
    /// On points the order flips: the composed map is S1's map after S2's.
    pub fn compose(&self, earlier: &Self) -> Result<Self> {
        if self.field().modulus() != earlier.field().modulus() {
            return Err(Error::ModulusMismatch(
                self.field().modulus(),
                earlier.field().modulus(),
            ));
        }
        if self.arity() != earlier.arity() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose transforms on {} and {} coordinates",
                self.arity(),
                earlier.arity()
            )));
        }
        let l = self.l.mat_mul(&earlier.l)?;
        let e2_plus_c1: Vec<FieldElement> = self
            .e
            .iter()
            .zip(earlier.c.iter())
            .map(|(&a, &b)| a + b)
            .collect();
        let e: Vec<FieldElement> = Matrix::row_vec_mul(&e2_plus_c1, &earlier.l)?
            .into_iter()
            .zip(earlier.e.iter())
            .map(|(a, &b)| a + b)
            .collect();
        Ok(EquivalenceTransform {
            alpha: self.alpha * earlier.alpha,
            beta: earlier.beta,
            gamma: self.alpha * earlier.gamma + self.alpha * self.beta + self.gamma,
            l,
            c: self.c.clone(),
            e,
        })
    }

    /// Carries a distinguisher across the equivalence: given one against
    /// g = self(f), builds one against f with the same exact advantage.
    /// The secrets move through the point map and the guess first undoes
    /// the output map on every share.
    pub fn transfer_distinguisher(
        &self,
        f: &MultivariatePolynomial,
        dist_g: &Distinguisher,
    ) -> Result<Distinguisher> {
        if dist_g.x0().len() != self.arity() {
            return Err(Error::DimensionMismatch(format!(
                "distinguisher secrets have {} coordinates, transform has {}",
                dist_g.x0().len(),
                self.arity()
            )));
        }
        let x0 = self.apply_to_point(dist_g.x0())?;
        let x1 = self.apply_to_point(dist_g.x1())?;
        let alpha = self.alpha;
        let beta = self.beta;
        let gamma = self.gamma;
        let inner = dist_g.guess_rule();
        let rule: GuessRule = Arc::new(move |ys: &[FieldElement]| {
            let mapped: Vec<FieldElement> =
                ys.iter().map(|&y| alpha * (y + beta) + gamma).collect();
            inner(&mapped)
        });
        Distinguisher::new(f, x0, x1, rule)
    }
}
