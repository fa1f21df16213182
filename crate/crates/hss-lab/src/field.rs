//! Prime-field arithmetic on canonical residues.
//!
//! A [`Field`] is an explicit context for a prime modulus `p < 2^61`; every
//! [`FieldElement`] is created through one and carries the modulus with it.
//! Residues stay in `[0, p)` and products go through `u128`, so no operation
//! can overflow or leave the canonical range. Mixing elements of different
//! fields is a programming error and panics; fallible constructors return
//! [`Error`](crate::Error) instead.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::Rng;

use crate::error::{Error, Result};

/// Moduli must stay below this bound so that `a * b` fits in `u128`
/// with room to spare and sums never wrap `u64`.
pub const MAX_MODULUS: u64 = 1 << 61;

const fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

const fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin. The witness set below is exact for all
/// `n < 3.3 * 10^24`, far past the `2^61` modulus cap.
fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for w in WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for w in WITNESSES {
        let mut x = pow_mod(w, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime field F_p, used as the explicit context that mints elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    p: u64,
}

impl Field {
    /// Checks `p` prime and below [`MAX_MODULUS`] before constructing.
    pub fn new(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Field { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Canonical residue of `v`.
    pub fn element(&self, v: u64) -> FieldElement {
        FieldElement {
            value: v % self.p,
            modulus: self.p,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// All residues `0..p` in ascending order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.p).map(move |v| self.element(v))
    }

    /// All nonzero residues `1..p` in ascending order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (1..self.p).map(move |v| self.element(v))
    }

    /// Uniform residue.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        self.element(rng.random_range(0..self.p))
    }
}

/// A residue in `[0, p)` tagged with its modulus.
///
/// Arithmetic between elements of different fields panics: a silent wrap
/// across moduli is the one bug this representation exists to rule out.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    modulus: u64,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The context this element belongs to.
    pub fn field(&self) -> Field {
        Field { p: self.modulus }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse via Fermat: `a^(p-2)`.
    pub fn inverse(&self) -> Result<FieldElement> {
        if self.value == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.power(self.modulus - 2))
    }

    /// Square-and-multiply; `power(0)` is 1 for every element, including 0.
    pub fn power(&self, exp: u64) -> FieldElement {
        FieldElement {
            value: pow_mod(self.value, exp, self.modulus),
            modulus: self.modulus,
        }
    }

    fn assert_same_field(&self, other: &FieldElement) {
        assert_eq!(
            self.modulus, other.modulus,
            "field elements from different moduli ({} and {})",
            self.modulus, other.modulus
        );
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        let mut v = self.value + rhs.value;
        if v >= self.modulus {
            v -= self.modulus;
        }
        FieldElement {
            value: v,
            modulus: self.modulus,
        }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;

    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + self.modulus - rhs.value
        };
        FieldElement {
            value: v,
            modulus: self.modulus,
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.assert_same_field(&rhs);
        FieldElement {
            value: mul_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        FieldElement {
            value: if self.value == 0 {
                0
            } else {
                self.modulus - self.value
            },
            modulus: self.modulus,
        }
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: FieldElement) {
        *self = *self + rhs;
    }
}

impl SubAssign for FieldElement {
    fn sub_assign(&mut self, rhs: FieldElement) {
        *self = *self - rhs;
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: FieldElement) {
        *self = *self * rhs;
    }
}
