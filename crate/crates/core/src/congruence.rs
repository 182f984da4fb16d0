//! The congruence subgroup Gamma, reflection orbit decomposition, shapes,
//! and the permutation action on orbit indices.
//!
//! Gamma is the kernel of reduction modulo an odd unramified prime.  When the
//! Gram form is degenerate the representation is first pushed to the radical
//! quotient E/E0; the radical acts trivially there, so translations along the
//! radical stay in Gamma and the orbit count matches the mirror picture (for
//! the infinite dihedral group this gives Gamma generated by st and Lambda = 2
//! rather than an index inflated by the prime).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{CoxError, Result};
use crate::group::{inversion_set, Ball, Element, GroupCtx, Reflection};
use crate::matrix::Mat;
use crate::scalar::Scalar;

// ---------------------------------------------------------------------------
// polynomial arithmetic over F_p (ascending coefficients)

fn pinv(a: u64, p: u64) -> u64 {
    // extended Euclid on integers
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1, "not invertible mod p");
    t0.rem_euclid(p as i128) as u64
}

fn ptrim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn pmul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    ptrim(out)
}

fn psub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = (x + p - y) % p;
    }
    ptrim(out)
}

/// Remainder of a by b (b nonzero).
fn prem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let b = ptrim(b.to_vec());
    assert!(!b.is_empty());
    let lead_inv = pinv(*b.last().unwrap(), p);
    let mut r = ptrim(a.to_vec());
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let coef = (*r.last().unwrap() * lead_inv) % p;
        let mut sub = vec![0u64; shift];
        sub.extend(b.iter().map(|&x| (x * coef) % p));
        r = psub(&r, &sub, p);
    }
    r
}

fn pgcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = ptrim(a.to_vec());
    let mut b = ptrim(b.to_vec());
    while !b.is_empty() {
        let r = prem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn pderiv(a: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![];
    for (i, &c) in a.iter().enumerate().skip(1) {
        out.push((c * (i as u64 % p)) % p);
    }
    ptrim(out)
}

/// a^e mod f over F_p.
fn ppowmod(a: &[u64], e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut base = prem(a, f, p);
    let mut acc = vec![1u64];
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = prem(&pmul(&acc, &base, p), f, p);
        }
        base = prem(&pmul(&base, &base, p), f, p);
        e >>= 1;
    }
    acc
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    if d == 1 {
        return true;
    }
    // Frobenius iterates: y^(p^k) mod f, computed by k applications of z -> z^p.
    let frob = |k: usize| -> Vec<u64> {
        let mut z = vec![0u64, 1];
        for _ in 0..k {
            z = ppowmod(&z, p, f, p);
        }
        z
    };
    // f irreducible iff y^(p^d) = y mod f and gcd(y^(p^(d/l)) - y, f) = 1
    // for every prime l dividing d.
    let y = vec![0u64, 1];
    if frob(d) != prem(&y, f, p) {
        return false;
    }
    let mut m = d;
    let mut l = 2;
    let mut prime_divs = vec![];
    while l * l <= m {
        if m % l == 0 {
            prime_divs.push(l);
            while m % l == 0 {
                m /= l;
            }
        }
        l += 1;
    }
    if m > 1 {
        prime_divs.push(m);
    }
    for l in prime_divs {
        let g = pgcd(&psub(&frob(d / l), &y, p), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// finite field F_p[y]/(g)

/// Finite field F_p[y]/(g) with g an irreducible factor of the scalar field's
/// minimal polynomial mod p.  Elements are coefficient vectors of length
/// deg(g), ascending.
#[derive(Debug, Clone)]
pub struct Fq {
    p: u64,
    modulus: Vec<u64>,
}

pub type FqElem = Vec<u64>;

impl Fq {
    pub fn new(p: u64, modulus: Vec<u64>) -> Fq {
        assert!(modulus.len() >= 2);
        Fq { p, modulus }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    fn pad(&self, a: Vec<u64>) -> FqElem {
        let mut a = a;
        a.resize(self.degree(), 0);
        a
    }

    pub fn zero(&self) -> FqElem {
        vec![0; self.degree()]
    }

    pub fn one(&self) -> FqElem {
        self.pad(vec![1])
    }

    pub fn from_u64(&self, v: u64) -> FqElem {
        self.pad(vec![v % self.p])
    }

    pub fn is_zero(&self, a: &FqElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect()
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.pad(prem(&pmul(a, b, self.p), &self.modulus, self.p))
    }

    pub fn inv(&self, a: &FqElem) -> Result<FqElem> {
        if self.is_zero(a) {
            return Err(CoxError::Internal("division by zero in F_q".into()));
        }
        // extended Euclid in F_p[y] tracking the coefficient of a
        let p = self.p;
        let mut r0 = self.modulus.clone();
        let mut r1 = ptrim(a.clone());
        let mut t0: Vec<u64> = vec![];
        let mut t1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            // one division step
            let lead_inv = pinv(*r1.last().unwrap(), p);
            let mut q: Vec<u64> = vec![0; r0.len().saturating_sub(r1.len()) + 1];
            let mut r = r0.clone();
            while r.len() >= r1.len() && !r.is_empty() {
                let shift = r.len() - r1.len();
                let coef = (*r.last().unwrap() * lead_inv) % p;
                q[shift] = (q[shift] + coef) % p;
                let mut sub = vec![0u64; shift];
                sub.extend(r1.iter().map(|&x| (x * coef) % p));
                r = psub(&r, &sub, p);
            }
            let tnext = psub(&t0, &pmul(&ptrim(q), &t1, p), p);
            r0 = std::mem::replace(&mut r1, r);
            t0 = std::mem::replace(&mut t1, tnext);
        }
        // r0 is a nonzero constant gcd
        let c = pinv(r0[0], p);
        Ok(self.pad(ptrim(t0.iter().map(|&x| (x * c) % p).collect())))
    }
}

/// Small dense matrix over F_q.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqMat {
    n: usize,
    a: Vec<FqElem>,
}

impl FqMat {
    pub fn identity(fq: &Fq, n: usize) -> FqMat {
        let mut a = vec![fq.zero(); n * n];
        for i in 0..n {
            a[i * n + i] = fq.one();
        }
        FqMat { n, a }
    }

    pub fn from_rows(n: usize, a: Vec<FqElem>) -> FqMat {
        assert_eq!(a.len(), n * n);
        FqMat { n, a }
    }

    pub fn at(&self, i: usize, j: usize) -> &FqElem {
        &self.a[i * self.n + j]
    }

    pub fn mul(&self, fq: &Fq, other: &FqMat) -> FqMat {
        let n = self.n;
        let mut out = vec![fq.zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                if fq.is_zero(self.at(i, k)) {
                    continue;
                }
                for j in 0..n {
                    let t = fq.mul(self.at(i, k), other.at(k, j));
                    out[i * n + j] = fq.add(&out[i * n + j], &t);
                }
            }
        }
        FqMat { n, a: out }
    }

    pub fn is_identity(&self, fq: &Fq) -> bool {
        *self == FqMat::identity(fq, self.n)
    }

    /// Inverse by Gauss-Jordan elimination; panics on singular input
    /// (images of group elements are always invertible).
    pub fn inverse(&self, fq: &Fq) -> Result<FqMat> {
        let n = self.n;
        let mut m = self.clone();
        let mut inv = FqMat::identity(fq, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !fq.is_zero(m.at(r, col)))
                .ok_or_else(|| CoxError::Internal("singular matrix over F_q".into()))?;
            if pivot != col {
                for j in 0..n {
                    m.a.swap(pivot * n + j, col * n + j);
                    inv.a.swap(pivot * n + j, col * n + j);
                }
            }
            let pinv = fq.inv(m.at(col, col))?;
            for j in 0..n {
                m.a[col * n + j] = fq.mul(&m.a[col * n + j], &pinv);
                inv.a[col * n + j] = fq.mul(&inv.a[col * n + j], &pinv);
            }
            for r in 0..n {
                if r == col || fq.is_zero(m.at(r, col)) {
                    continue;
                }
                let factor = m.at(r, col).clone();
                for j in 0..n {
                    let t = fq.mul(&factor, m.at(col, j));
                    m.a[r * n + j] = fq.sub(&m.a[r * n + j], &t);
                    let t = fq.mul(&factor, inv.at(col, j));
                    inv.a[r * n + j] = fq.sub(&inv.a[r * n + j], &t);
                }
            }
        }
        Ok(inv)
    }

    pub fn canon_bytes(&self) -> Vec<u8> {
        let mut out = vec![];
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for e in &self.a {
            for &c in e {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// congruence context

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn bigint_mod(v: &BigInt, p: u64) -> u64 {
    v.mod_floor(&BigInt::from(p)).to_u64().unwrap()
}

/// Reduction data for the congruence kernel Gamma.
pub struct CongruenceCtx {
    prime: u64,
    fq: Fq,
    /// dimension of the reduced representation (rank of the Gram form)
    dim: usize,
    /// full basis [complement | radical]; identity when the form is nondegenerate
    basis: Option<(Mat, Mat)>,
    /// images of x^k in F_q, k < degree of the scalar field
    xpow: Vec<FqElem>,
}

impl CongruenceCtx {
    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn fq(&self) -> &Fq {
        &self.fq
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn psi_mod_p(psi: &[BigInt], p: u64) -> Vec<u64> {
    ptrim(psi.iter().map(|c| bigint_mod(c, p)).collect())
}

/// Check oddness, primality and unramifiedness of p for the minimal polynomial.
fn check_prime(psi: &[BigInt], p: u64) -> Result<()> {
    if p == 2 {
        return Err(CoxError::BadPrime {
            prime: p,
            reason: "prime must be odd".into(),
        });
    }
    if !is_prime(p) {
        return Err(CoxError::BadPrime {
            prime: p,
            reason: "not prime".into(),
        });
    }
    let pm = psi_mod_p(psi, p);
    if pm.len() != psi.len() {
        return Err(CoxError::BadPrime {
            prime: p,
            reason: "leading coefficient vanishes mod p".into(),
        });
    }
    let g = pgcd(&pm, &pderiv(&pm, p), p);
    if g.len() > 1 {
        return Err(CoxError::BadPrime {
            prime: p,
            reason: "ramified: minimal polynomial not squarefree mod p".into(),
        });
    }
    Ok(())
}

/// Smallest odd unramified prime >= 3.
pub fn default_prime(ctx: &GroupCtx) -> u64 {
    let psi = ctx.system().field().modulus().to_vec();
    let mut p = 3;
    loop {
        if is_prime(p) && check_prime(&psi, p).is_ok() {
            return p;
        }
        p += 2;
    }
}

fn irreducible_factor(psi: &[u64], p: u64) -> Vec<u64> {
    let deg = psi.len() - 1;
    for d in 1..=deg {
        // monic candidates of degree d, low coefficients counting up
        let total = p.pow(d as u32);
        for code in 0..total {
            let mut f = vec![0u64; d + 1];
            f[d] = 1;
            let mut c = code;
            for fi in f.iter_mut().take(d) {
                *fi = c % p;
                c /= p;
            }
            if prem(psi, &f, p).is_empty() && is_irreducible(&f, p) {
                return f;
            }
        }
    }
    unreachable!("a polynomial always has an irreducible factor")
}

/// Build the congruence context.  `prime` defaults to the smallest odd
/// unramified prime.  When the Gram form is degenerate the representation is
/// reduced on the radical quotient.
pub fn build_context(ctx: &GroupCtx, prime: Option<u64>) -> Result<CongruenceCtx> {
    let psi = ctx.system().field().modulus().to_vec();
    let p = prime.unwrap_or_else(|| default_prime(ctx));
    check_prime(&psi, p)?;
    let pm = psi_mod_p(&psi, p);
    let factor = if pm.len() == 2 {
        pm.clone()
    } else {
        irreducible_factor(&pm, p)
    };
    let fq = Fq::new(p, factor);
    // x maps to the class of y; precompute x^k
    let deg = ctx.system().field().degree();
    let mut xpow = vec![fq.one()];
    let y = fq.pad(vec![0, 1]);
    for _ in 1..deg.max(1) {
        let last = xpow.last().unwrap().clone();
        xpow.push(fq.mul(&last, &y));
    }

    let n = ctx.rank();
    let gram = ctx.system().gram();
    let kernel = gram.kernel_basis()?;
    let dim = n - kernel.len();
    let basis = if kernel.is_empty() {
        None
    } else {
        // complement: greedy standard basis vectors keeping [C | kernel] full rank
        let field = ctx.system().field().clone();
        let mut cols: Vec<Vec<Scalar>> = vec![];
        for j in 0..n {
            if cols.len() == dim {
                break;
            }
            let mut e = vec![Scalar::zero(&field); n];
            e[j] = Scalar::one(&field);
            let mut trial = cols.clone();
            trial.push(e.clone());
            for k in &kernel {
                trial.push(k.clone());
            }
            let mut a = Vec::with_capacity(n * trial.len());
            // rank test on the n x k matrix padded to square
            let k = trial.len();
            for i in 0..n {
                for col in trial.iter() {
                    a.push(col[i].clone());
                }
                for _ in k..n {
                    a.push(Scalar::zero(&field));
                }
            }
            let m = Mat::from_rows(n, a);
            if m.rank()? == k {
                cols.push(e);
            }
        }
        if cols.len() != dim {
            return Err(CoxError::Internal("failed to complete radical complement".into()));
        }
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for col in cols.iter().chain(kernel.iter()) {
                a.push(col[i].clone());
            }
        }
        let m = Mat::from_rows(n, a);
        let minv = m.inverse()?;
        Some((m, minv))
    };
    Ok(CongruenceCtx {
        prime: p,
        fq,
        dim,
        basis,
        xpow,
    })
}

impl CongruenceCtx {
    /// Reduce an exact scalar into F_q; fails if a denominator is divisible by p.
    pub fn reduce_scalar(&self, s: &Scalar) -> Result<FqElem> {
        let mut out = self.fq.zero();
        for (k, c) in s.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let num = c.numer();
            let den = c.denom();
            let dm = bigint_mod(&den.abs(), self.prime);
            if dm == 0 {
                return Err(CoxError::BadPrime {
                    prime: self.prime,
                    reason: format!("denominator {} not invertible", den),
                });
            }
            let mut v = bigint_mod(num, self.prime);
            if den.is_negative() {
                v = (self.prime - v) % self.prime;
            }
            let coef = (v * pinv(dm, self.prime)) % self.prime;
            let term = self.fq.mul(&self.fq.from_u64(coef), &self.xpow[k]);
            out = self.fq.add(&out, &term);
        }
        Ok(out)
    }

    /// Reduced image of a group element: the radical-quotient block of its
    /// matrix, with entries pushed into F_q.
    pub fn image(&self, g: &Element) -> Result<FqMat> {
        let m = match &self.basis {
            None => g.mat().clone(),
            Some((b, binv)) => {
                let conj = binv.mul(g.mat()).mul(b);
                // block structure [[A, 0], [*, K]] in the (complement, radical)
                // basis: the radical is invariant
                let n = conj.size();
                for i in 0..self.dim {
                    for j in self.dim..n {
                        if !conj.at(i, j).is_zero() {
                            return Err(CoxError::Internal(
                                "radical not invariant under element".into(),
                            ));
                        }
                    }
                }
                conj
            }
        };
        let mut a = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                a.push(self.reduce_scalar(m.at(i, j))?);
            }
        }
        Ok(FqMat::from_rows(self.dim, a))
    }

    pub fn is_in_gamma(&self, g: &Element) -> Result<bool> {
        Ok(self.image(g)?.is_identity(&self.fq))
    }
}

// ---------------------------------------------------------------------------
// torsion certificate

#[derive(Debug, Clone)]
pub struct TorsionCertificate {
    pub prime: u64,
    pub radius: usize,
    pub gamma_elements: usize,
    pub order_bound: usize,
    /// ShortLex word of a torsion element found, if any.
    pub torsion_witness: Option<Vec<usize>>,
}

/// Scan Gamma intersected with a ball for torsion: check g^k != e for all
/// nontrivial members and k up to `order_bound`.
pub fn torsion_certificate(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    radius: usize,
    order_bound: usize,
    cap: usize,
) -> Result<TorsionCertificate> {
    let ball = Ball::new(ctx, radius, cap)?;
    let mut gamma_elements = 0;
    let mut torsion_witness = None;
    for i in 0..ball.len() {
        let g = ball.get(i);
        if !cong.is_in_gamma(g)? {
            continue;
        }
        gamma_elements += 1;
        if g.is_identity() {
            continue;
        }
        let mut pow = g.clone();
        for _k in 2..=order_bound {
            pow = pow.mul(g);
            if pow.is_identity() {
                torsion_witness = Some(ball.word_of(i));
                break;
            }
        }
        if torsion_witness.is_some() {
            break;
        }
    }
    Ok(TorsionCertificate {
        prime: cong.prime,
        radius,
        gamma_elements,
        order_bound,
        torsion_witness,
    })
}

// ---------------------------------------------------------------------------
// orbit decomposition

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitStatus {
    Stabilized,
    LowerBound,
}

/// Decomposition of the enumerated reflections into Gamma-conjugacy orbits.
pub struct OrbitPartition {
    pub reflections: Vec<Reflection>,
    /// orbit index per reflection, in 0..lambda
    pub orbit_of: Vec<usize>,
    pub lambda: usize,
    pub status: OrbitStatus,
    /// number of distinct reduced images among reflections (certified lower bound)
    pub image_lower_bound: usize,
    /// true when lambda equals the certified lower bound
    pub certified: bool,
    pub refl_radius: usize,
    pub conj_radius: usize,
}

impl OrbitPartition {
    pub fn orbit_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.lambda];
        for &o in &self.orbit_of {
            sizes[o] += 1;
        }
        sizes
    }

    pub fn orbit_index_of(&self, t: &Element) -> Option<usize> {
        self.reflections
            .iter()
            .position(|r| r.element == *t)
            .map(|i| self.orbit_of[i])
    }
}

/// Closure of a set of elements of the finite quotient under multiplication.
fn subgroup_closure(fq: &Fq, gens: &[FqMat], dim: usize) -> Vec<FqMat> {
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
    let id = FqMat::identity(fq, dim);
    seen.insert(id.canon_bytes(), ());
    let mut members = vec![id];
    let mut frontier: Vec<usize> = vec![0];
    while let Some(mi) = frontier.pop() {
        let m = members[mi].clone();
        for g in gens {
            let h = m.mul(fq, g);
            if seen.insert(h.canon_bytes(), ()).is_none() {
                members.push(h);
                frontier.push(members.len() - 1);
            }
        }
    }
    members
}

/// Decompose reflections into Gamma-orbits.
///
/// Every reflection is connected to a base reflection of its W-conjugacy
/// class by a chain of generator conjugations t -> s t s, recording the
/// reduced image of a transport element w with t = w t0 w^-1.  Every
/// non-tree edge of the conjugation graph yields a Schreier element
/// w_j^-1 s w_i that centralizes t0 exactly; their images generate a subgroup
/// C of the finite quotient.  Two reflections are merged exactly when their
/// transport images lie in the same left coset of C: coset equality exhibits
/// an explicit member of Gamma conjugating one onto the other, so every merge
/// is certified and the result is always a refinement of the true orbit
/// partition.  `conj_radius` widens the chain region: chains may pass through
/// reflections of length up to refl_radius + 2 * conj_radius.  Stabilized
/// when shrinking the chain allowance by one and by two leaves the orbit
/// count unchanged.
pub fn gamma_orbits(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    refl_radius: usize,
    conj_radius: usize,
    cap: usize,
) -> Result<OrbitPartition> {
    let chain_radius = refl_radius + 2 * conj_radius;
    let all = crate::group::reflections_up_to(ctx, chain_radius, cap)?;
    let keep: Vec<usize> = (0..all.len())
        .filter(|&i| all[i].length <= refl_radius)
        .collect();
    let n_all = all.len();
    // reduced images are constant on orbits; distinct image count bounds lambda
    let mut images: HashMap<Vec<u8>, ()> = HashMap::new();
    for &i in &keep {
        images.insert(cong.image(&all[i].element)?.canon_bytes(), ());
    }
    let image_lower_bound = images.len();

    if conj_radius == 0 {
        let reflections: Vec<Reflection> = keep.iter().map(|&i| all[i].clone()).collect();
        let n = reflections.len();
        return Ok(OrbitPartition {
            orbit_of: (0..n).collect(),
            lambda: n,
            status: OrbitStatus::LowerBound,
            image_lower_bound,
            certified: n == image_lower_bound,
            refl_radius,
            conj_radius,
            reflections,
        });
    }

    let index: HashMap<Element, usize> = all
        .iter()
        .enumerate()
        .map(|(i, r)| (r.element.clone(), i))
        .collect();
    let fq = cong.fq();
    let mut gen_img = Vec::with_capacity(ctx.rank());
    for s in 0..ctx.rank() {
        gen_img.push(cong.image(&ctx.generator(s))?);
    }

    let compute = |chain: usize| -> Result<(usize, Vec<usize>)> {
        // spanning forest over the conjugation graph restricted to
        // reflections of length <= chain, plus Schreier harvesting
        let mut root_of: Vec<usize> = vec![usize::MAX; n_all];
        let mut transport_img: Vec<Option<FqMat>> = vec![None; n_all];
        let mut roots: Vec<usize> = vec![];
        let mut cent: HashMap<usize, HashMap<Vec<u8>, FqMat>> = HashMap::new();
        for start in 0..n_all {
            if root_of[start] != usize::MAX || all[start].length > chain {
                continue;
            }
            roots.push(start);
            root_of[start] = start;
            transport_img[start] = Some(FqMat::identity(fq, cong.dim()));
            cent.insert(start, HashMap::new());
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                let wi = transport_img[i].clone().unwrap();
                for s in 0..ctx.rank() {
                    let gen = ctx.generator(s);
                    let conj = gen.mul(&all[i].element).mul(&gen);
                    let j = match index.get(&conj) {
                        Some(&j) if all[j].length <= chain => j,
                        _ => continue,
                    };
                    if root_of[j] == usize::MAX {
                        root_of[j] = start;
                        transport_img[j] = Some(gen_img[s].mul(fq, &wi));
                        queue.push_back(j);
                    } else {
                        debug_assert_eq!(root_of[j], start);
                        // Schreier element w_j^-1 s w_i centralizes t_root
                        let rel = transport_img[j]
                            .as_ref()
                            .unwrap()
                            .inverse(fq)?
                            .mul(fq, &gen_img[s])
                            .mul(fq, &wi);
                        cent.get_mut(&start)
                            .unwrap()
                            .entry(rel.canon_bytes())
                            .or_insert(rel);
                    }
                }
            }
        }
        // close the harvested centralizer images into subgroups, then label
        // the retained reflections by the left coset of their transport image
        let mut labels: HashMap<(usize, Vec<u8>), usize> = HashMap::new();
        let mut coset_rep: HashMap<(usize, Vec<u8>), Vec<u8>> = HashMap::new();
        let mut sub: HashMap<usize, Vec<FqMat>> = HashMap::new();
        for &r in &roots {
            let gens: Vec<FqMat> = cent[&r].values().cloned().collect();
            sub.insert(r, subgroup_closure(fq, &gens, cong.dim()));
        }
        let mut orbit_of = vec![0usize; keep.len()];
        for (ki, &i) in keep.iter().enumerate() {
            let r = root_of[i];
            let w = transport_img[i].as_ref().unwrap();
            let key = (r, w.canon_bytes());
            let canon = match coset_rep.get(&key) {
                Some(c) => c.clone(),
                None => {
                    let c = sub[&r]
                        .iter()
                        .map(|m| w.mul(fq, m).canon_bytes())
                        .min()
                        .unwrap();
                    coset_rep.insert(key, c.clone());
                    c
                }
            };
            let next = labels.len();
            orbit_of[ki] = *labels.entry((r, canon)).or_insert(next);
        }
        Ok((labels.len(), orbit_of))
    };

    let (lambda, orbit_of) = compute(chain_radius)?;
    let status = if conj_radius >= 2 {
        let (l1, _) = compute(refl_radius + 2 * (conj_radius - 1))?;
        let (l2, _) = compute(refl_radius + 2 * (conj_radius - 2))?;
        if l1 == lambda && l2 == lambda {
            OrbitStatus::Stabilized
        } else {
            OrbitStatus::LowerBound
        }
    } else {
        OrbitStatus::LowerBound
    };
    let reflections: Vec<Reflection> = keep.iter().map(|&i| all[i].clone()).collect();
    let certified = lambda == image_lower_bound;
    Ok(OrbitPartition {
        reflections,
        orbit_of,
        lambda,
        status,
        image_lower_bound,
        certified,
        refl_radius,
        conj_radius,
    })
}

// ---------------------------------------------------------------------------
// shape and the permutation action

/// Shape of gamma in Gamma: component i counts the inversions of gamma lying
/// in orbit i.  The components sum to the word length.
pub fn shape(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    partition: &OrbitPartition,
    gamma: &Element,
) -> Result<Vec<usize>> {
    if !cong.is_in_gamma(gamma)? {
        return Err(CoxError::Precondition(
            "shape is defined for members of Gamma".into(),
        ));
    }
    let index: HashMap<&Element, usize> = partition
        .reflections
        .iter()
        .enumerate()
        .map(|(i, r)| (&r.element, i))
        .collect();
    let mut out = vec![0usize; partition.lambda];
    for t in inversion_set(ctx, gamma)? {
        match index.get(&t) {
            Some(&i) => out[partition.orbit_of[i]] += 1,
            None => {
                let w = ctx.shortlex_word(&t)?;
                return Err(CoxError::PartitionCoverage(ctx.word_string(&w)));
            }
        }
    }
    Ok(out)
}

/// The permutation pi(g) of orbit indices: g T_i g^-1 = T_{pi(g)(i)}.
/// Cross-checked on a second representative per orbit when available.
pub fn pi_permutation(
    _ctx: &GroupCtx,
    partition: &OrbitPartition,
    g: &Element,
) -> Result<Vec<usize>> {
    let index: HashMap<&Element, usize> = partition
        .reflections
        .iter()
        .enumerate()
        .map(|(i, r)| (&r.element, i))
        .collect();
    let ginv = g.inv()?;
    let mut out = vec![usize::MAX; partition.lambda];
    let mut checked = vec![0usize; partition.lambda];
    for (i, r) in partition.reflections.iter().enumerate() {
        let orbit = partition.orbit_of[i];
        if checked[orbit] >= 2 {
            continue;
        }
        let conj = g.mul(&r.element).mul(&ginv);
        let target = match index.get(&conj) {
            Some(&j) => partition.orbit_of[j],
            None => return Err(CoxError::ConjugateEscapes(orbit)),
        };
        if out[orbit] == usize::MAX {
            out[orbit] = target;
        } else if out[orbit] != target {
            return Err(CoxError::Internal(format!(
                "pi not well defined on truncation: orbit {} maps to both {} and {}",
                orbit, out[orbit], target
            )));
        }
        checked[orbit] += 1;
    }
    let mut seen = vec![false; partition.lambda];
    for &v in &out {
        if v == usize::MAX || seen[v] {
            return Err(CoxError::Internal("pi is not a permutation".into()));
        }
        seen[v] = true;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::{parse_coxeter_graph, CoxeterSystem};
    use crate::group::BALL_ELEMENT_CAP;

    fn ctx(text: &str) -> GroupCtx {
        GroupCtx::new(CoxeterSystem::new(parse_coxeter_graph(text).unwrap()).unwrap())
    }

    const DINF: &str = "vertices: s t\ns t inf\n";
    const FIGURE: &str = "vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n";

    #[test]
    fn fq_basics() {
        // F_3
        let f3 = Fq::new(3, vec![0, 1]);
        assert_eq!(f3.degree(), 1);
        let two = f3.from_u64(2);
        assert_eq!(f3.mul(&two, &two), f3.from_u64(1));
        assert_eq!(f3.inv(&two).unwrap(), two);
        // F_9 = F_3[y]/(y^2 - y - 1), the golden-ratio field mod 3
        let f9 = Fq::new(3, vec![2, 2, 1]);
        let y = f9.pad(vec![0, 1]);
        let a = f9.add(&y, &f9.one());
        let ainv = f9.inv(&a).unwrap();
        assert_eq!(f9.mul(&a, &ainv), f9.one());
        // Fermat: a^8 = 1
        let mut pow = f9.one();
        for _ in 0..8 {
            pow = f9.mul(&pow, &a);
        }
        assert_eq!(pow, f9.one());
    }

    #[test]
    fn irreducibility_checks() {
        // y^2 + 1 irreducible mod 3, reducible mod 5
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        // y^2 - y - 1: double root mod 5 (ramified), irreducible mod 3
        assert!(!is_irreducible(&[4, 4, 1], 5));
        assert!(is_irreducible(&[2, 2, 1], 3));
    }

    #[test]
    fn prime_validation() {
        let g = ctx(DINF);
        assert!(matches!(
            build_context(&g, Some(2)),
            Err(CoxError::BadPrime { .. })
        ));
        assert!(matches!(
            build_context(&g, Some(9)),
            Err(CoxError::BadPrime { .. })
        ));
        assert_eq!(default_prime(&g), 3);
        // pentagon field: psi = x^2 - x - 1, discriminant 5, so 5 is ramified
        let g5 = ctx("vertices: s t\ns t 5\n");
        assert!(matches!(
            build_context(&g5, Some(5)),
            Err(CoxError::BadPrime { .. })
        ));
        assert!(build_context(&g5, Some(3)).is_ok());
    }

    #[test]
    fn dinf_image_order_in_gl2_f3() {
        // order of the full geometric image of st mod 3 is 3 (st is unipotent);
        // this is why the kernel is taken after passing to the radical quotient
        let g = ctx(DINF);
        let st = g.generator(0).mul(&g.generator(1));
        let f3 = Fq::new(3, vec![0, 1]);
        let reduce = |m: &Mat| -> FqMat {
            let mut a = vec![];
            for i in 0..2 {
                for j in 0..2 {
                    let r = m.at(i, j).as_rational().unwrap();
                    let v = bigint_mod(r.numer(), 3);
                    a.push(f3.from_u64(v));
                }
            }
            FqMat::from_rows(2, a)
        };
        let m = reduce(st.mat());
        let mut pow = m.clone();
        let mut order = 1;
        while !pow.is_identity(&f3) {
            pow = pow.mul(&f3, &m);
            order += 1;
            assert!(order <= 48);
        }
        assert_eq!(order, 3);
    }

    #[test]
    fn dinf_gamma_membership() {
        let g = ctx(DINF);
        let cong = build_context(&g, None).unwrap();
        assert_eq!(cong.prime(), 3);
        // degenerate form: quotient is one-dimensional
        assert_eq!(cong.dim(), 1);
        let s = g.generator(0);
        let t = g.generator(1);
        assert!(!cong.is_in_gamma(&s).unwrap());
        assert!(!cong.is_in_gamma(&t).unwrap());
        // after the radical quotient the even subgroup is exactly Gamma
        assert!(cong.is_in_gamma(&s.mul(&t)).unwrap());
        assert!(cong.is_in_gamma(&t.mul(&s)).unwrap());
        assert!(!cong.is_in_gamma(&s.mul(&t).mul(&s)).unwrap());
    }

    #[test]
    fn figure_gamma_membership_and_kernel_property() {
        let g = ctx(FIGURE);
        let cong = build_context(&g, None).unwrap();
        assert_eq!(cong.prime(), 3);
        assert_eq!(cong.dim(), 4);
        for s in 0..4 {
            assert!(!cong.is_in_gamma(&g.generator(s)).unwrap());
        }
        // kernel property: image is a homomorphism on sampled pairs
        let ball = Ball::new(&g, 3, BALL_ELEMENT_CAP).unwrap();
        for i in (0..ball.len()).step_by(7) {
            for j in (0..ball.len()).step_by(11) {
                let a = ball.get(i);
                let b = ball.get(j);
                let lhs = cong.image(&a.mul(b)).unwrap();
                let rhs = cong.image(a).unwrap().mul(cong.fq(), &cong.image(b).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn torsion_scans() {
        let g = ctx(DINF);
        let cong = build_context(&g, Some(3)).unwrap();
        let cert = torsion_certificate(&g, &cong, 8, 24, BALL_ELEMENT_CAP).unwrap();
        assert!(cert.torsion_witness.is_none());
        assert!(cert.gamma_elements >= 9); // identity and (st)^k, (ts)^k for k <= 4

        let g = ctx(FIGURE);
        let cong = build_context(&g, Some(5)).unwrap();
        let cert = torsion_certificate(&g, &cong, 6, 24, BALL_ELEMENT_CAP).unwrap();
        assert!(cert.torsion_witness.is_none());
    }

    #[test]
    fn dinf_orbits() {
        let g = ctx(DINF);
        let cong = build_context(&g, None).unwrap();
        let part = gamma_orbits(&g, &cong, 9, 4, BALL_ELEMENT_CAP).unwrap();
        assert_eq!(part.lambda, 2);
        assert_eq!(part.status, OrbitStatus::Stabilized);
        // reflections come in pairs per odd length; each pair splits across orbits
        assert_eq!(part.reflections.len(), 10);
        for k in 0..5 {
            assert_ne!(part.orbit_of[2 * k], part.orbit_of[2 * k + 1]);
        }
        assert_eq!(part.orbit_sizes(), vec![5, 5]);
        // hand-verified orbit structure: s and tst are conjugate via (ts),
        // t and sts via (st)
        let s = g.generator(0);
        let t = g.generator(1);
        let tst = t.mul(&s).mul(&t);
        let sts = s.mul(&t).mul(&s);
        assert_eq!(
            part.orbit_index_of(&s).unwrap(),
            part.orbit_index_of(&tst).unwrap()
        );
        assert_eq!(
            part.orbit_index_of(&t).unwrap(),
            part.orbit_index_of(&sts).unwrap()
        );
        assert_ne!(
            part.orbit_index_of(&s).unwrap(),
            part.orbit_index_of(&t).unwrap()
        );
    }

    #[test]
    fn zero_conj_radius_gives_singletons() {
        let g = ctx(DINF);
        let cong = build_context(&g, None).unwrap();
        let part = gamma_orbits(&g, &cong, 5, 0, BALL_ELEMENT_CAP).unwrap();
        assert_eq!(part.lambda, part.reflections.len());
        assert_eq!(part.status, OrbitStatus::LowerBound);
    }

    #[test]
    fn orbit_count_monotone_in_conj_radius() {
        let g = ctx(FIGURE);
        let cong = build_context(&g, None).unwrap();
        let mut prev = usize::MAX;
        for c in 0..=3 {
            let part = gamma_orbits(&g, &cong, 5, c, BALL_ELEMENT_CAP).unwrap();
            assert!(part.lambda <= prev);
            assert!(part.lambda >= part.image_lower_bound);
            prev = part.lambda;
        }
    }

    #[test]
    fn dinf_shapes() {
        let g = ctx(DINF);
        let cong = build_context(&g, None).unwrap();
        // inversions of (st)^n reach length 4n - 1, hence the large refl radius
        let part = gamma_orbits(&g, &cong, 15, 4, BALL_ELEMENT_CAP).unwrap();
        let st = g.generator(0).mul(&g.generator(1));
        let mut p = g.identity();
        for n in 1..=4 {
            p = p.mul(&st);
            let sh = shape(&g, &cong, &part, &p).unwrap();
            assert_eq!(sh, vec![n, n]);
        }
        // non-member rejected
        assert!(shape(&g, &cong, &part, &g.generator(0)).is_err());
        // insufficient partition coverage detected
        let small = gamma_orbits(&g, &cong, 3, 4, BALL_ELEMENT_CAP).unwrap();
        let g3 = st.mul(&st).mul(&st);
        assert!(matches!(
            shape(&g, &cong, &small, &g3),
            Err(CoxError::PartitionCoverage(_))
        ));
    }

    #[test]
    fn shape_additivity_figure() {
        let g = ctx(FIGURE);
        let cong = build_context(&g, None).unwrap();
        // shortest nontrivial members of Gamma have length 6 here; their
        // inversions reach length 11
        let part = gamma_orbits(&g, &cong, 11, 2, BALL_ELEMENT_CAP).unwrap();
        let ball = Ball::new(&g, 6, BALL_ELEMENT_CAP).unwrap();
        let mut checked = 0;
        for i in 0..ball.len() {
            let gamma = ball.get(i);
            if !cong.is_in_gamma(gamma).unwrap() {
                continue;
            }
            let sh = shape(&g, &cong, &part, gamma).unwrap();
            assert_eq!(sh.iter().sum::<usize>(), ball.length_of(i));
            checked += 1;
        }
        assert_eq!(checked, 3);
    }

    #[test]
    fn pi_is_identity_on_gamma_and_consistent() {
        let g = ctx(DINF);
        let cong = build_context(&g, None).unwrap();
        let part = gamma_orbits(&g, &cong, 11, 4, BALL_ELEMENT_CAP).unwrap();
        let st = g.generator(0).mul(&g.generator(1));
        assert_eq!(pi_permutation(&g, &part, &st).unwrap(), vec![0, 1]);
        // conjugation by s preserves the two mirror families
        let pi_s = pi_permutation(&g, &part, &g.generator(0)).unwrap();
        assert_eq!(pi_s, vec![0, 1]);
        // pi(gamma g) = pi(g)
        let pi_sts_t = pi_permutation(&g, &part, &st.mul(&g.generator(0))).unwrap();
        assert_eq!(pi_sts_t, pi_s);
    }
}
