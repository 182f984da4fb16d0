//! Exact arithmetic in Q(2cos(pi/L)).
//!
//! Every Gram entry of a Coxeter system with finite labels dividing L lies in the
//! real cyclotomic field Q(x) with x = 2cos(pi/L).  Scalars are polynomial residues
//! with rational coefficients modulo the (monic, integer) minimal polynomial of x.
//! Equality is coefficient equality of the canonical residue; signs are certified
//! by refining a rational isolating interval for x, which exists because x is the
//! largest real root of its minimal polynomial.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{CoxError, Result};

/// Hard cap on interval bisections during sign certification.  Reaching it is
/// treated as an internal defect, never a silent fallback.
const SIGN_BISECTION_CAP: usize = 8192;

// ---------------------------------------------------------------------------
// integer polynomial helpers (ascending coefficient order)
// ---------------------------------------------------------------------------

fn int_poly_trim(p: &mut Vec<BigInt>) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

/// Exact division of integer polynomials; the divisor must divide evenly.
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = num.to_vec();
    int_poly_trim(&mut rem);
    let mut den = den.to_vec();
    int_poly_trim(&mut den);
    let dlead = den.last().expect("division by zero polynomial").clone();
    if rem.len() < den.len() {
        assert!(rem.is_empty(), "inexact polynomial division");
        return vec![];
    }
    let mut quot = vec![BigInt::zero(); rem.len() - den.len() + 1];
    for k in (0..quot.len()).rev() {
        let lead = rem[k + den.len() - 1].clone();
        if lead.is_zero() {
            continue;
        }
        let (q, r) = num_integer::Integer::div_rem(&lead, &dlead);
        assert!(r.is_zero(), "inexact polynomial division");
        quot[k] = q.clone();
        for (j, dj) in den.iter().enumerate() {
            rem[k + j] -= &q * dj;
        }
    }
    int_poly_trim(&mut rem);
    assert!(rem.is_empty(), "inexact polynomial division");
    quot
}

/// n-th cyclotomic polynomial, integer coefficients ascending.
fn cyclotomic(n: u64) -> Vec<BigInt> {
    // (z^n - 1) divided by the cyclotomic polynomials of all proper divisors.
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    let mut acc = num;
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic(d);
            acc = int_poly_div_exact(&acc, &phi_d);
        }
    }
    acc
}

/// Chebyshev-like basis polynomials: D_0 = 2, D_1 = x, D_k = x D_{k-1} - D_{k-2};
/// they satisfy D_k(2 cos t) = 2 cos(k t).
fn dickson(k: usize) -> Vec<BigInt> {
    let mut prev: Vec<BigInt> = vec![BigInt::from(2)];
    if k == 0 {
        return prev;
    }
    let mut cur: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for _ in 1..k {
        // next = x*cur - prev
        let mut next = vec![BigInt::zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] = c.clone();
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Minimal polynomial of 2cos(pi/level), monic with integer coefficients.
fn minimal_poly_two_cos(level: u64) -> Vec<BigInt> {
    if level <= 1 {
        // 2cos(pi) = -2, minimal polynomial x + 2.
        return vec![BigInt::from(2), BigInt::one()];
    }
    let n = 2 * level;
    let phi = cyclotomic(n);
    let d = phi.len() - 1;
    debug_assert!(d % 2 == 0, "phi(2L) is even for 2L > 2");
    let half = d / 2;
    // phi is palindromic; z^{-d/2} phi(z) = a_{d/2} + sum a_{d/2+k} (z^k + z^-k)
    // and z^k + z^-k = D_k(x) for x = z + z^-1.
    let mut psi = vec![phi[half].clone()];
    for k in 1..=half {
        let dk = dickson(k);
        let coeff = phi[half + k].clone();
        if psi.len() < dk.len() {
            psi.resize(dk.len(), BigInt::zero());
        }
        for (i, c) in dk.iter().enumerate() {
            psi[i] += &coeff * c;
        }
    }
    int_poly_trim(&mut psi);
    debug_assert!(psi.last().unwrap().is_one(), "minimal polynomial is monic");
    psi
}

// ---------------------------------------------------------------------------
// rational polynomial helpers
// ---------------------------------------------------------------------------

fn rat_poly_trim(p: &mut Vec<BigRational>) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

fn rat_poly_eval(p: &[BigRational], at: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * at + c;
    }
    acc
}

fn int_poly_eval_rat(p: &[BigInt], at: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * at + BigRational::from_integer(c.clone());
    }
    acc
}

/// Remainder of a by b in Q[x].
fn rat_poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut rem = a.to_vec();
    rat_poly_trim(&mut rem);
    let mut b = b.to_vec();
    rat_poly_trim(&mut b);
    let blead = b.last().expect("rem by zero polynomial").clone();
    while rem.len() >= b.len() && !rem.is_empty() {
        let q = rem.last().unwrap() / &blead;
        let shift = rem.len() - b.len();
        for (j, bj) in b.iter().enumerate() {
            let t = &q * bj;
            rem[shift + j] -= t;
        }
        rat_poly_trim(&mut rem);
    }
    rem
}

fn rat_poly_deriv(p: &[BigRational]) -> Vec<BigRational> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

fn sign_of(q: &BigRational) -> i8 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

// ---------------------------------------------------------------------------
// the field
// ---------------------------------------------------------------------------

/// Shared data of the ambient field Q(2cos(pi/level)).
pub struct FieldData {
    level: u64,
    /// Monic integer minimal polynomial of x = 2cos(pi/level), ascending.
    modulus: Vec<BigInt>,
    degree: usize,
    /// Isolating interval (lo, hi) for x together with sign of psi at lo.
    window: RwLock<(BigRational, BigRational, i8)>,
}

pub type Field = Arc<FieldData>;

impl fmt::Debug for FieldData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field(Q(2cos(pi/{})), degree {})", self.level, self.degree)
    }
}

impl FieldData {
    /// Field for the given level L; all finite labels >= 3 of the system must
    /// divide L (use L = 1 when there are none).
    pub fn new(level: u64) -> Field {
        let level = level.max(1);
        let modulus = minimal_poly_two_cos(level);
        let degree = modulus.len() - 1;
        let window = if degree == 1 {
            // Rational root -modulus[0]; an exact degenerate window.
            let root = BigRational::from_integer(-modulus[0].clone());
            (root.clone(), root, 0)
        } else {
            isolate_largest_root(&modulus)
        };
        Arc::new(FieldData {
            level,
            modulus,
            degree,
            window: RwLock::new(window),
        })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn modulus(&self) -> &[BigInt] {
        &self.modulus
    }

    /// One bisection step on the isolating interval.
    fn refine_window(&self) {
        let mut w = self.window.write().unwrap();
        let (lo, hi, sign_lo) = (&w.0, &w.1, w.2);
        let two = BigRational::from_integer(BigInt::from(2));
        let mid = (lo + hi) / two;
        // psi has no rational roots when degree >= 2 (it is irreducible).
        let smid = sign_of(&int_poly_eval_rat(&self.modulus, &mid));
        debug_assert!(smid != 0);
        if smid == sign_lo {
            *w = (mid, w.1.clone(), sign_lo);
        } else {
            *w = (w.0.clone(), mid, sign_lo);
        }
    }

    fn window_snapshot(&self) -> (BigRational, BigRational) {
        let w = self.window.read().unwrap();
        (w.0.clone(), w.1.clone())
    }
}

/// Sturm-sequence isolation of the largest real root of a squarefree integer
/// polynomial.  Returns (lo, hi, sign at lo) with exactly one root in (lo, hi).
fn isolate_largest_root(poly: &[BigInt]) -> (BigRational, BigRational, i8) {
    let p0: Vec<BigRational> = poly
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let p1 = rat_poly_deriv(&p0);
    let mut chain = vec![p0.clone(), p1];
    loop {
        let n = chain.len();
        let r = rat_poly_rem(&chain[n - 2], &chain[n - 1]);
        if r.is_empty() {
            break;
        }
        chain.push(r.iter().map(|c| -c).collect());
    }
    let variations = |at: &BigRational| -> usize {
        let mut count = 0;
        let mut last: i8 = 0;
        for p in &chain {
            let s = sign_of(&rat_poly_eval(p, at));
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    };
    // Cauchy-style bound on root magnitude.
    let lead = poly.last().unwrap().magnitude().clone();
    let maxc = poly
        .iter()
        .map(|c| c.magnitude().clone())
        .max()
        .unwrap();
    let bound = BigRational::from_integer(BigInt::from(
        num_traits::ToPrimitive::to_i64(&(maxc / lead)).unwrap_or(i64::MAX - 1) + 2,
    ));
    let count = |lo: &BigRational, hi: &BigRational| variations(lo) - variations(hi);
    let mut lo = -bound.clone();
    let mut hi = bound;
    let two = BigRational::from_integer(BigInt::from(2));
    while count(&lo, &hi) > 1 {
        let mid = (&lo + &hi) / &two;
        if count(&mid, &hi) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert_eq!(count(&lo, &hi), 1);
    // With a single simple root inside, the endpoint signs differ; record lo's.
    let mut sign_lo = sign_of(&int_poly_eval_rat(poly, &lo));
    if sign_lo == 0 {
        // lo itself is not a root (irreducible, degree >= 2), defensive only.
        sign_lo = -sign_of(&int_poly_eval_rat(poly, &hi));
    }
    // Pre-refine so that routine sign queries converge in a step or two.
    let mut w = (lo, hi, sign_lo);
    for _ in 0..48 {
        let mid = (&w.0 + &w.1) / &two;
        let smid = sign_of(&int_poly_eval_rat(poly, &mid));
        if smid == w.2 {
            w.0 = mid;
        } else {
            w.1 = mid;
        }
    }
    w
}

// ---------------------------------------------------------------------------
// scalars
// ---------------------------------------------------------------------------

/// An element of Q(2cos(pi/L)): canonical residue modulo the minimal polynomial.
#[derive(Clone)]
pub struct Scalar {
    field: Field,
    /// Rational coefficients, ascending, length < field.degree, trailing zeros trimmed.
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{}", c),
                1 => format!("{}*x", c),
                _ => format!("{}*x^{}", c, i),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.field.level == other.field.level && self.coeffs == other.coeffs
    }
}
impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl Scalar {
    pub fn zero(field: &Field) -> Self {
        Scalar {
            field: field.clone(),
            coeffs: vec![],
        }
    }

    pub fn one(field: &Field) -> Self {
        Scalar::from_integer(field, 1)
    }

    pub fn from_integer(field: &Field, n: i64) -> Self {
        Scalar::from_rational(field, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(field: &Field, q: BigRational) -> Self {
        let mut coeffs = vec![q];
        rat_poly_trim(&mut coeffs);
        let mut s = Scalar {
            field: field.clone(),
            coeffs,
        };
        s.reduce();
        s
    }

    /// The generator x = 2cos(pi/level).
    pub fn generator(field: &Field) -> Self {
        let mut s = Scalar {
            field: field.clone(),
            coeffs: vec![BigRational::zero(), BigRational::one()],
        };
        s.reduce();
        s
    }

    pub fn from_int_poly(field: &Field, poly: &[BigInt]) -> Self {
        let mut s = Scalar {
            field: field.clone(),
            coeffs: poly
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        };
        s.reduce();
        s
    }

    /// 2cos(pi/m) as an element of this field; m must be 1, 2 or a divisor of level.
    pub fn two_cos_pi_over(field: &Field, m: u64) -> Result<Self> {
        match m {
            1 => Ok(Scalar::from_integer(field, -2)),
            2 => Ok(Scalar::zero(field)),
            _ => {
                if field.level % m != 0 {
                    return Err(CoxError::Internal(format!(
                        "label {} does not divide field level {}",
                        m, field.level
                    )));
                }
                let k = (field.level / m) as usize;
                Ok(Scalar::from_int_poly(field, &dickson(k)))
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Rational value when the scalar is a constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    fn reduce(&mut self) {
        let d = self.field.degree;
        while self.coeffs.len() > d {
            let c = self.coeffs.pop().unwrap();
            if c.is_zero() {
                continue;
            }
            let k = self.coeffs.len() - d;
            for (j, m) in self.field.modulus.iter().take(d).enumerate() {
                let t = &c * BigRational::from_integer(m.clone());
                self.coeffs[k + j] -= t;
            }
        }
        rat_poly_trim(&mut self.coeffs);
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        debug_assert_eq!(self.field.level, other.field.level);
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < other.coeffs.len() {
            coeffs.resize(other.coeffs.len(), BigRational::zero());
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        rat_poly_trim(&mut coeffs);
        Scalar {
            field: self.field.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        Scalar {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        debug_assert_eq!(self.field.level, other.field.level);
        if self.is_zero() || other.is_zero() {
            return Scalar::zero(&self.field);
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut s = Scalar {
            field: self.field.clone(),
            coeffs,
        };
        s.reduce();
        s
    }

    pub fn scale(&self, q: &BigRational) -> Scalar {
        let mut coeffs: Vec<BigRational> = self.coeffs.iter().map(|c| c * q).collect();
        rat_poly_trim(&mut coeffs);
        Scalar {
            field: self.field.clone(),
            coeffs,
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[x].
    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(CoxError::Internal("division by zero scalar".into()));
        }
        if self.coeffs.len() == 1 {
            return Ok(Scalar::from_rational(
                &self.field,
                self.coeffs[0].recip(),
            ));
        }
        // Extended Euclid on (modulus, self), tracking only the Bezout
        // coefficient of self.
        let modulus: Vec<BigRational> = self
            .field
            .modulus
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let mut r0 = modulus;
        let mut r1 = self.coeffs.clone();
        let mut t0: Vec<BigRational> = vec![];
        let mut t1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            // Division with remainder: r0 = q*r1 + rem.
            let mut q: Vec<BigRational> =
                vec![BigRational::zero(); r0.len().saturating_sub(r1.len()) + 1];
            let mut rem = r0.clone();
            let lead = r1.last().unwrap().clone();
            while rem.len() >= r1.len() && !rem.is_empty() {
                let c = rem.last().unwrap() / &lead;
                let shift = rem.len() - r1.len();
                q[shift] = c.clone();
                for (j, bj) in r1.iter().enumerate() {
                    let t = &c * bj;
                    rem[shift + j] -= t;
                }
                rat_poly_trim(&mut rem);
            }
            rat_poly_trim(&mut q);
            // tnext = t0 - q*t1
            let mut tnext = t0.clone();
            if !q.is_empty() && !t1.is_empty() {
                let need = q.len() + t1.len() - 1;
                if tnext.len() < need {
                    tnext.resize(need, BigRational::zero());
                }
                for (i, a) in q.iter().enumerate() {
                    for (j, b) in t1.iter().enumerate() {
                        let t = a * b;
                        tnext[i + j] -= t;
                    }
                }
            }
            rat_poly_trim(&mut tnext);
            r0 = std::mem::replace(&mut r1, rem);
            t0 = std::mem::replace(&mut t1, tnext);
        }
        // r0 = gcd (a nonzero constant since the modulus is irreducible).
        debug_assert_eq!(r0.len(), 1, "modulus must be irreducible");
        let g = r0[0].clone();
        let mut inv = Scalar {
            field: self.field.clone(),
            coeffs: t0.iter().map(|c| c / &g).collect(),
        };
        inv.reduce();
        debug_assert!(inv.mul(self).is_one());
        Ok(inv)
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inv()?))
    }

    /// Certified sign: -1, 0 or +1.
    pub fn sign(&self) -> Result<i8> {
        if self.coeffs.is_empty() {
            return Ok(0);
        }
        if self.coeffs.len() == 1 {
            return Ok(sign_of(&self.coeffs[0]));
        }
        for iter in 0..SIGN_BISECTION_CAP {
            let (lo, hi) = self.field.window_snapshot();
            let (vlo, vhi) = interval_eval(&self.coeffs, &lo, &hi);
            if vlo.is_positive() {
                return Ok(1);
            }
            if vhi.is_negative() {
                return Ok(-1);
            }
            let _ = iter;
            self.field.refine_window();
        }
        Err(CoxError::PrecisionExceeded(SIGN_BISECTION_CAP))
    }

    pub fn is_positive(&self) -> Result<bool> {
        Ok(self.sign()? > 0)
    }

    pub fn is_negative(&self) -> Result<bool> {
        Ok(self.sign()? < 0)
    }

    pub fn cmp_scalar(&self, other: &Scalar) -> Result<Ordering> {
        Ok(match self.sub(other).sign()? {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        })
    }

    /// Double-precision approximation (for reports only, never for decisions).
    pub fn to_f64(&self) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        if self.field.degree == 1 || self.coeffs.len() == 1 {
            return ratio_to_f64(&self.coeffs[0]);
        }
        // Refine the window to ~2^-64 and evaluate at the midpoint.
        for _ in 0..4 {
            self.field.refine_window();
        }
        loop {
            let (lo, hi) = self.field.window_snapshot();
            let width = &hi - &lo;
            let eps = BigRational::new(BigInt::one(), BigInt::from(1u64 << 60));
            if width < eps {
                let two = BigRational::from_integer(BigInt::from(2));
                let mid = (lo + hi) / two;
                return ratio_to_f64(&rat_poly_eval(&self.coeffs, &mid));
            }
            self.field.refine_window();
        }
    }

    /// Canonical byte encoding; equal scalars encode equally, used for
    /// deterministic ordering and hashing of matrices.
    pub fn canon_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.coeffs.len() as u32).to_le_bytes());
        for c in &self.coeffs {
            let (ns, nb) = c.numer().to_bytes_le();
            let (_, db) = c.denom().to_bytes_le();
            out.push(match ns {
                num_bigint::Sign::Minus => 0,
                num_bigint::Sign::NoSign => 1,
                num_bigint::Sign::Plus => 2,
            });
            out.extend_from_slice(&(nb.len() as u32).to_le_bytes());
            out.extend_from_slice(&nb);
            out.extend_from_slice(&(db.len() as u32).to_le_bytes());
            out.extend_from_slice(&db);
        }
    }
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(q).unwrap_or_else(|| {
        // Fall back to a scaled division for extreme magnitudes.
        let n = q.numer();
        let d = q.denom();
        let nf = num_traits::ToPrimitive::to_f64(n).unwrap_or(f64::MAX);
        let df = num_traits::ToPrimitive::to_f64(d).unwrap_or(f64::MAX);
        nf / df
    })
}

/// Interval Horner evaluation of p over [lo, hi].
fn interval_eval(
    p: &[BigRational],
    lo: &BigRational,
    hi: &BigRational,
) -> (BigRational, BigRational) {
    let mut alo = p.last().unwrap().clone();
    let mut ahi = alo.clone();
    for c in p.iter().rev().skip(1) {
        let c1 = &alo * lo;
        let c2 = &alo * hi;
        let c3 = &ahi * lo;
        let c4 = &ahi * hi;
        let mut mn = c1.clone();
        let mut mx = c1;
        for v in [c2, c3, c4] {
            if v < mn {
                mn = v.clone();
            }
            if v > mx {
                mx = v;
            }
        }
        alo = mn + c;
        ahi = mx + c;
    }
    (alo, ahi)
}
