use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::ClassGroupError;

/// Largest `|Δ|` accepted by [`enumerate_reduced`] and [`class_number`].
pub const ENUMERATION_GUARD: u64 = 10_000_000;

/// A negative discriminant, `Δ ≡ 0, 1 (mod 4)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Discriminant(BigInt);

impl Discriminant {
    pub fn new(value: impl Into<BigInt>) -> Result<Self, ClassGroupError> {
        let value = value.into();
        let residue = value.mod_floor(&BigInt::from(4));
        if !value.is_negative() || !(residue.is_zero() || residue.is_one()) {
            return Err(ClassGroupError::InvalidDiscriminant(value));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }

    /// The identity class: `(1, 0, −Δ/4)` or `(1, 1, (1 − Δ)/4)`.
    pub fn principal_form(&self) -> QuadraticForm {
        let b = self.0.mod_floor(&BigInt::from(2));
        let c = (&b * &b - &self.0) / BigInt::from(4);
        QuadraticForm { a: BigInt::one(), b, c }
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Binary quadratic form `ax² + bxy + cy²`.
///
/// Construction does not validate; operations reject forms that are not
/// positive definite.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadraticForm {
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

impl QuadraticForm {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        Self { a: a.into(), b: b.into(), c: c.into() }
    }

    /// Builds the form with leading coefficient `a` and middle coefficient `b`
    /// on discriminant `Δ`, if `4a` divides `b² − Δ`.
    pub fn from_ab(a: impl Into<BigInt>, b: impl Into<BigInt>, disc: &Discriminant) -> Option<Self> {
        let (a, b) = (a.into(), b.into());
        if !a.is_positive() {
            return None;
        }
        let (c, rem) = (&b * &b - disc.value()).div_rem(&(BigInt::from(4) * &a));
        rem.is_zero().then_some(Self { a, b, c })
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - BigInt::from(4) * &self.a * &self.c
    }

    fn check_definite(&self) -> Result<BigInt, ClassGroupError> {
        let disc = self.discriminant();
        if !self.a.is_positive() || !disc.is_negative() {
            return Err(ClassGroupError::InvalidForm { a: self.a.clone(), b: self.b.clone(), c: self.c.clone() });
        }
        Ok(disc)
    }

    pub fn is_reduced(&self) -> bool {
        let abs_b = self.b.abs();
        if abs_b > self.a || self.a > self.c {
            return false;
        }
        if (abs_b == self.a || self.a == self.c) && self.b.is_negative() {
            return false;
        }
        true
    }

    /// Gauss reduction to the unique reduced representative of the class.
    pub fn reduce(&self) -> Result<Self, ClassGroupError> {
        self.check_definite()?;
        let (mut a, mut b, mut c) = (self.a.clone(), self.b.clone(), self.c.clone());
        let two = BigInt::from(2);
        loop {
            // x -> x + r y brings b into (−a, a]
            if b > a || b <= -&a {
                let r = (&a - &b).div_floor(&(&two * &a));
                c = &a * &r * &r + &b * &r + &c;
                b += &two * &a * &r;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b.is_negative() {
                b = -b;
            }
            return Ok(Self { a, b, c });
        }
    }

    /// Dirichlet composition followed by reduction.
    pub fn compose(&self, other: &Self) -> Result<Self, ClassGroupError> {
        let disc = self.check_definite()?;
        let other_disc = other.check_definite()?;
        if disc != other_disc {
            return Err(ClassGroupError::DiscriminantMismatch { left: disc, right: other_disc });
        }
        let (a1, b1) = (&self.a, &self.b);
        let (a2, b2) = (&other.a, &other.b);
        let s = (b1 + b2) / BigInt::from(2);

        // u·a1 + v·a2 + w·s = e = gcd(a1, a2, s)
        let (d, x1, y1) = ext_gcd(a1, a2);
        let (e, x2, w) = ext_gcd(&d, &s);
        let u = &x1 * &x2;
        let v = &y1 * &x2;

        let a3 = a1 * a2 / (&e * &e);
        let numer = &u * a1 * b2 + &v * a2 * b1 + &w * (b1 * b2 + &disc) / BigInt::from(2);
        let b3 = (numer / &e).mod_floor(&(BigInt::from(2) * &a3));
        let c3 = (&b3 * &b3 - &disc) / (BigInt::from(4) * &a3);
        Self { a: a3, b: b3, c: c3 }.reduce()
    }

    /// The opposite form `(a, −b, c)`, reduced.
    pub fn inverse(&self) -> Result<Self, ClassGroupError> {
        Self { a: self.a.clone(), b: -&self.b, c: self.c.clone() }.reduce()
    }

    /// `self` composed with itself `n` times, by square-and-multiply.
    pub fn pow(&self, n: u64) -> Result<Self, ClassGroupError> {
        let disc = Discriminant::new(self.check_definite()?)?;
        let mut result = disc.principal_form();
        let mut base = self.reduce()?;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.compose(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base)?;
            }
        }
        Ok(result)
    }

    pub fn is_principal(&self) -> bool {
        self.a.is_one()
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

fn ext_gcd(x: &BigInt, y: &BigInt) -> (BigInt, BigInt, BigInt) {
    let eg = x.extended_gcd(y);
    if eg.gcd.is_negative() {
        (-eg.gcd, -eg.x, -eg.y)
    } else {
        (eg.gcd, eg.x, eg.y)
    }
}

fn small_abs(disc: &Discriminant) -> Result<i64, ClassGroupError> {
    let abs = disc.value().abs();
    if abs > BigInt::from(ENUMERATION_GUARD) {
        return Err(ClassGroupError::TooLarge { value: abs, guard: ENUMERATION_GUARD });
    }
    Ok(i64::try_from(abs).expect("guarded"))
}

/// All primitive reduced forms of discriminant `Δ`, sorted by `(a, b)`.
pub fn enumerate_reduced(disc: &Discriminant) -> Result<Vec<QuadraticForm>, ClassGroupError> {
    let abs = small_abs(disc)?;
    let d = -abs;
    let mut forms = Vec::new();
    // a ≤ √(|Δ|/3) for reduced forms
    let mut a: i64 = 1;
    while 3 * a * a <= abs {
        for b in (-a + 1)..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            forms.push(QuadraticForm::new(a, b, c));
        }
        a += 1;
    }
    Ok(forms)
}

/// `h(Δ)`, counted by enumerating reduced forms.
pub fn class_number(disc: &Discriminant) -> Result<u64, ClassGroupError> {
    Ok(enumerate_reduced(disc)?.len() as u64)
}
