//! The context-hiding experiment: an adversary picks two secrets on which a
//! function agrees, receives the server outputs for a sharing of one of
//! them, and tries to tell which. Output shares hide the input exactly when
//! their distribution over the sharing randomness is the same for both
//! secrets; this module measures that, both exactly (full enumeration, as a
//! rational number) and by seeded Monte-Carlo sampling.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::hss::{self, SchemeParams};
use crate::poly::{Domain, MultivariatePolynomial};

/// A deterministic guess: maps the m output shares to a bit, `false` for
/// "the first secret" and `true` for "the second".
pub type GuessRule = Arc<dyn Fn(&[FieldElement]) -> bool + Send + Sync>;

/// An adversary in the hiding experiment: two admissible secrets plus a
/// guessing rule over output shares.
#[derive(Clone)]
pub struct Distinguisher {
    x0: Vec<FieldElement>,
    x1: Vec<FieldElement>,
    guess: GuessRule,
}

impl fmt::Debug for Distinguisher {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.debug_struct("Distinguisher")
            .field("x0", &self.x0)
            .field("x1", &self.x1)
            .field("guess", &"<rule>")
            .finish()
    }
}

impl Distinguisher {
    /// Validates admissibility: the secrets differ but f agrees on them, so
    /// correct decoding gives the adversary nothing for free.
    pub fn new(
        f: &MultivariatePolynomial,
        x0: Vec<FieldElement>,
        x1: Vec<FieldElement>,
        guess: GuessRule,
    ) -> Result<Self> {
        let y0 = f.evaluate(&x0)?;
        let y1 = f.evaluate(&x1)?;
        if x0 == x1 {
            return Err(Error::InvalidPair("the two secrets must differ".into()));
        }
        if y0 != y1 {
            return Err(Error::InvalidPair(format!(
                "the function must agree on both secrets, got {} and {}",
                y0.value(),
                y1.value()
            )));
        }
        Ok(Distinguisher { x0, x1, guess })
    }

    pub fn x0(&self) -> &[FieldElement] {
        &self.x0
    }

    pub fn x1(&self) -> &[FieldElement] {
        &self.x1
    }

    pub fn guess(&self, ys: &[FieldElement]) -> bool {
        (self.guess)(ys)
    }

    pub fn guess_rule(&self) -> GuessRule {
        Arc::clone(&self.guess)
    }
}

/// Advantage measurement, either exact over the whole randomness space or
/// estimated from seeded samples with a 99% Hoeffding half-width.
#[derive(Debug, Clone, PartialEq)]
pub enum AdvantageReport {
    Exact {
        advantage: BigRational,
    },
    MonteCarlo {
        estimate: f64,
        trials: u64,
        half_width: f64,
        seed: u64,
    },
}

impl AdvantageReport {
    pub fn numeric(&self) -> f64 {
        match self {
            AdvantageReport::Exact { advantage } => advantage.to_f64().unwrap_or(f64::NAN),
            AdvantageReport::MonteCarlo { estimate, .. } => *estimate,
        }
    }
}

fn check_function(params: &SchemeParams, f: &MultivariatePolynomial) -> Result<()> {
    if f.field().modulus() != params.modulus() {
        return Err(Error::ModulusMismatch(
            params.modulus(),
            f.field().modulus(),
        ));
    }
    if f.n_vars() != params.arity() {
        return Err(Error::ArityMismatch {
            expected: params.arity(),
            got: f.n_vars(),
        });
    }
    if f.degree() > params.degree_bound() {
        return Err(Error::DegreeViolation {
            degree: f.degree(),
            bound: params.degree_bound(),
        });
    }
    Ok(())
}

fn output_shares(
    params: &SchemeParams,
    f: &MultivariatePolynomial,
    x: &[FieldElement],
    randomness: &[Vec<FieldElement>],
) -> Result<Vec<FieldElement>> {
    let ss = hss::share_with_randomness(params, x, randomness.to_vec())?;
    ss.shares().iter().map(|s| f.evaluate(s)).collect()
}

/// One round: a uniform secret bit, a fresh sharing, local evaluation, and
/// the adversary's guess. Returns whether the guess was right.
pub fn run_experiment(
    params: &SchemeParams,
    f: &MultivariatePolynomial,
    dist: &Distinguisher,
    rng: &mut impl Rng,
) -> Result<bool> {
    check_function(params, f)?;
    let b = rng.random_range(0..2u64) == 1;
    let x = if b { dist.x1() } else { dist.x0() };
    let ss = hss::share(params, x, rng)?;
    let ys: Vec<FieldElement> = ss
        .shares()
        .iter()
        .map(|s| f.evaluate(s))
        .collect::<Result<_>>()?;
    Ok(dist.guess(&ys) == b)
}

/// Runs `trials` seeded experiment rounds and reports |success rate - 1/2|
/// with the half-width of a 99% Hoeffding confidence interval.
pub fn estimate_advantage(
    params: &SchemeParams,
    f: &MultivariatePolynomial,
    dist: &Distinguisher,
    trials: u64,
    seed: u64,
) -> Result<AdvantageReport> {
    if trials == 0 {
        return Err(Error::ParamViolation("trial count must be positive".into()));
    }
    check_function(params, f)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut successes = 0u64;
    for _ in 0..trials {
        if run_experiment(params, f, dist, &mut rng)? {
            successes += 1;
        }
    }
    let estimate = (successes as f64 / trials as f64 - 0.5).abs();
    let half_width = (f64::ln(2.0 / 0.01) / (2.0 * trials as f64)).sqrt();
    Ok(AdvantageReport::MonteCarlo {
        estimate,
        trials,
        half_width,
        seed,
    })
}

/// The exact advantage |Pr[guess right] - 1/2| as a rational number, by
/// enumerating every randomness tuple for both secrets. The enumeration
/// has size |F_p^n|^t and is refused beyond `budget`.
pub fn exact_advantage(
    params: &SchemeParams,
    f: &MultivariatePolynomial,
    dist: &Distinguisher,
    budget: u64,
) -> Result<BigRational> {
    check_function(params, f)?;
    let mut right0 = 0u64;
    let mut right1 = 0u64;
    hss::for_each_randomness(params, budget, |r| {
        let ys0 = output_shares(params, f, dist.x0(), r).expect("validated inputs");
        if !dist.guess(&ys0) {
            right0 += 1;
        }
        let ys1 = output_shares(params, f, dist.x1(), r).expect("validated inputs");
        if dist.guess(&ys1) {
            right1 += 1;
        }
    })?;
    let space = params.randomness_space() as u64;
    let correct = BigInt::from(right0) + BigInt::from(right1);
    let total = BigInt::from(2u64) * BigInt::from(space);
    Ok(BigRational::new(correct - BigInt::from(space), total).abs())
}

/// The distribution of the output-share vector (y_1..y_m) over all sharing
/// randomness for the fixed secret x, as residue-vector counts.
pub fn exact_output_distribution(
    params: &SchemeParams,
    f: &MultivariatePolynomial,
    x: &[FieldElement],
    budget: u64,
) -> Result<BTreeMap<Vec<u64>, u64>> {
    check_function(params, f)?;
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    hss::for_each_randomness(params, budget, |r| {
        let ys = output_shares(params, f, x, r).expect("validated inputs");
        *counts
            .entry(ys.iter().map(|y| y.value()).collect())
            .or_insert(0) += 1;
    })?;
    Ok(counts)
}

/// Verdict of the exhaustive hiding check over a function's domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HidingVerdict {
    /// Every pair of same-output secrets induces identical output-share
    /// distributions (vacuously true when all preimage classes are
    /// singletons).
    PerfectlyHiding,
    NotHiding(HidingViolation),
}

/// The first pair of same-output secrets whose output-share distributions
/// differ, with a share vector witnessing the difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HidingViolation {
    pub x0: Vec<u64>,
    pub x1: Vec<u64>,
    pub share_vector: Vec<u64>,
    pub count0: u64,
    pub count1: u64,
}

fn classes_in_order(
    f: &MultivariatePolynomial,
    domain: &Domain,
    budget: u64,
) -> Result<Vec<(u64, Vec<Vec<FieldElement>>)>> {
    let points = domain.enumerate(f.field(), f.n_vars(), budget)?;
    let mut order: Vec<u64> = Vec::new();
    let mut classes: BTreeMap<u64, Vec<Vec<FieldElement>>> = BTreeMap::new();
    for x in points {
        let value = f.evaluate(&x)?.value();
        let class = classes.entry(value).or_insert_with(|| {
            order.push(value);
            Vec::new()
        });
        class.push(x);
    }
    Ok(order
        .into_iter()
        .map(|v| {
            let members = classes.remove(&v).expect("class recorded");
            (v, members)
        })
        .collect())
}

/// Groups the domain by function value: value -> points mapping to it, in
/// domain enumeration order.
pub fn preimage_classes(
    f: &MultivariatePolynomial,
    domain: &Domain,
    budget: u64,
) -> Result<BTreeMap<u64, Vec<Vec<u64>>>> {
    Ok(classes_in_order(f, domain, budget)?
        .into_iter()
        .map(|(v, members)| {
            (
                v,
                members
                    .into_iter()
                    .map(|x| x.iter().map(|c| c.value()).collect())
                    .collect(),
            )
        })
        .collect())
}

/// Checks exact output-share distribution equality across every preimage
/// class of f over the domain. Scans classes by first appearance and
/// members in domain order, so a violation is reported for the earliest
/// possible pair; the witness is the smallest share vector whose counts
/// under the two secrets differ.
///
/// The total work is (number of domain points + 1) sharings-space
/// enumerations; both the domain size and the randomness space must fit
/// the budget.
pub fn verify_perfect_hiding(
    params: &SchemeParams,
    f: &MultivariatePolynomial,
    domain: &Domain,
    budget: u64,
) -> Result<HidingVerdict> {
    check_function(params, f)?;
    let work = domain
        .size(params.field(), params.arity())
        .saturating_mul(params.randomness_space());
    if work > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: work,
            budget,
        });
    }
    for (_, members) in classes_in_order(f, domain, budget)? {
        if members.len() < 2 {
            continue;
        }
        let rep = &members[0];
        let rep_dist = exact_output_distribution(params, f, rep, budget)?;
        for member in &members[1..] {
            let member_dist = exact_output_distribution(params, f, member, budget)?;
            if member_dist == rep_dist {
                continue;
            }
            // Walk the union of keys in order for the first count mismatch.
            let keys: std::collections::BTreeSet<&Vec<u64>> =
                rep_dist.keys().chain(member_dist.keys()).collect();
            for key in keys {
                let c0 = rep_dist.get(key).copied().unwrap_or(0);
                let c1 = member_dist.get(key).copied().unwrap_or(0);
                if c0 != c1 {
                    return Ok(HidingVerdict::NotHiding(HidingViolation {
                        x0: rep.iter().map(|v| v.value()).collect(),
                        x1: member.iter().map(|v| v.value()).collect(),
                        share_vector: key.clone(),
                        count0: c0,
                        count1: c1,
                    }));
                }
            }
            unreachable!("distributions differ but all counts matched");
        }
    }
    Ok(HidingVerdict::PerfectlyHiding)
}

/// The linear-combination distinguisher against the product of all d input
/// variables (d >= 2). It solves for weights a on the first d*t - d + 2
/// output shares whose weighted power sums vanish on every exponent in
/// (d-1)..=(d*t) except the lowest, then guesses "first secret" exactly
/// when the weighted share sum is zero. Against the secrets 0^d and
/// (0,..,0,1) its advantage is (p-1)^(d-1) / (2 p^(d-1)).
pub fn multilinear_distinguisher(params: &SchemeParams, d: u64) -> Result<Distinguisher> {
    if d < 2 {
        return Err(Error::ParamViolation(
            "the product attack needs degree at least 2".into(),
        ));
    }
    if params.arity() as u64 != d {
        return Err(Error::ParamViolation(format!(
            "the product of {d} variables needs n = {d}, got n = {}",
            params.arity()
        )));
    }
    if params.degree_bound() < d {
        return Err(Error::ParamViolation(format!(
            "degree bound {} does not admit the degree-{d} product",
            params.degree_bound()
        )));
    }
    let field = params.field();
    let t = params.threshold() as u64;
    let k = d * t - d + 2;
    let points: Vec<FieldElement> = (1..=k).map(|j| field.element(j)).collect();
    let a = crate::linalg::power_matrix(&points, (d - 1)..=(d * t))?;
    let mut rhs = vec![field.zero(); k as usize];
    rhs[0] = field.one();
    let weights = a.solve(&rhs)?;
    let n = d as usize;
    let f = MultivariatePolynomial::monomial(field, vec![1; n], field.one())?;
    let x0 = vec![field.zero(); n];
    let mut x1 = vec![field.zero(); n];
    x1[n - 1] = field.one();
    let rule: GuessRule = Arc::new(move |ys: &[FieldElement]| {
        let mut acc = field.zero();
        for (&w, &y) in weights.iter().zip(ys.iter()) {
            acc += w * y;
        }
        !acc.is_zero()
    });
    Distinguisher::new(&f, x0, x1, rule)
}

/// Closed-form advantage of `multilinear_distinguisher`:
/// (p-1)^(d-1) / (2 p^(d-1)).
pub fn multilinear_attack_advantage(p: u64, d: u64) -> BigRational {
    let e = (d - 1) as u32;
    BigRational::new(
        BigInt::from(p - 1).pow(e),
        BigInt::from(2u64) * BigInt::from(p).pow(e),
    )
}

/// Checks the coordinate-scaling pairing between two sharings: with
/// x1 = c . x0 pointwise, pairing the randomness r'_u = c . r_u must give
/// identical output shares for every server. Enumerates the whole
/// randomness space when it fits the budget, otherwise checks 4096 seeded
/// samples. Returns whether the pairing held everywhere it looked.
pub fn pairing_witness_check(
    params: &SchemeParams,
    f: &MultivariatePolynomial,
    x0: &[FieldElement],
    x1: &[FieldElement],
    scalars: &[FieldElement],
    budget: u64,
    seed: u64,
) -> Result<bool> {
    check_function(params, f)?;
    if x0.len() != params.arity() || x1.len() != params.arity() || scalars.len() != params.arity() {
        return Err(Error::ArityMismatch {
            expected: params.arity(),
            got: x0.len().max(x1.len()).max(scalars.len()),
        });
    }
    for (&a, (&b, &c)) in x0.iter().zip(x1.iter().zip(scalars.iter())) {
        if c * a != b {
            return Err(Error::ScalarMismatch);
        }
    }
    let pair = |r: &[Vec<FieldElement>]| -> bool {
        let paired: Vec<Vec<FieldElement>> = r
            .iter()
            .map(|ru| {
                ru.iter()
                    .zip(scalars.iter())
                    .map(|(&v, &c)| c * v)
                    .collect()
            })
            .collect();
        let ys0 = output_shares(params, f, x0, r).expect("validated inputs");
        let ys1 = output_shares(params, f, x1, &paired).expect("validated inputs");
        ys0 == ys1
    };
    let mut all_equal = true;
    if params.randomness_space() <= budget as u128 {
        hss::for_each_randomness(params, budget, |r| {
            if !pair(r) {
                all_equal = false;
            }
        })?;
    } else {
        let field = params.field();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for _ in 0..4096 {
            let r: Vec<Vec<FieldElement>> = (0..params.threshold())
                .map(|_| {
                    (0..params.arity())
                        .map(|_| field.random_element(&mut rng))
                        .collect()
                })
                .collect();
            if !pair(&r) {
                all_equal = false;
            }
        }
    }
    Ok(all_equal)
}

/// Convenience: the product monomial x1 * ... * xn.
pub fn product_monomial(field: Field, n: usize) -> MultivariatePolynomial {
    MultivariatePolynomial::monomial(field, vec![1; n], field.one())
        .expect("unit coefficient in own field")
}
