//! Finitely supported l^2 functions on the group, convolution, operator-norm
//! lower bounds, and the randomized inequality experiments.
//!
//! Group arithmetic stays exact; coefficients are f64. Inequalities are
//! checked with tolerances far above accumulation error at this scale.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::congruence::{shape, CongruenceCtx, OrbitPartition};
use crate::error::{CoxError, Result};
use crate::group::{Ball, Element, GroupCtx};

/// A finitely supported real function on group elements.
///
/// Terms are kept sorted by canonical matrix bytes; zero coefficients are
/// pruned. All public output is deterministic.
#[derive(Debug, Clone)]
pub struct BallFunction {
    terms: Vec<(Element, f64)>,
}

const PRUNE_EPS: f64 = 0.0;

impl BallFunction {
    pub fn zero() -> BallFunction {
        BallFunction { terms: vec![] }
    }

    pub fn delta(g: &Element) -> BallFunction {
        BallFunction {
            terms: vec![(g.clone(), 1.0)],
        }
    }

    /// Accumulate terms, prune zeros, sort canonically.
    pub fn from_terms(terms: Vec<(Element, f64)>) -> BallFunction {
        let mut acc: HashMap<Vec<u8>, (Element, f64)> = HashMap::new();
        for (g, c) in terms {
            let e = acc.entry(g.canon_bytes()).or_insert_with(|| (g.clone(), 0.0));
            e.1 += c;
        }
        let mut out: Vec<(Vec<u8>, (Element, f64))> = acc
            .into_iter()
            .filter(|(_, (_, c))| c.abs() > PRUNE_EPS)
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        BallFunction {
            terms: out.into_iter().map(|(_, t)| t).collect(),
        }
    }

    pub fn terms(&self) -> &[(Element, f64)] {
        &self.terms
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, g: &Element) -> f64 {
        let key = g.canon_bytes();
        self.terms
            .iter()
            .find(|(e, _)| e.canon_bytes() == key)
            .map(|&(_, c)| c)
            .unwrap_or(0.0)
    }

    pub fn norm2(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, a: f64) -> BallFunction {
        BallFunction::from_terms(self.terms.iter().map(|(g, c)| (g.clone(), a * c)).collect())
    }

    pub fn add(&self, other: &BallFunction) -> BallFunction {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        BallFunction::from_terms(terms)
    }
}

/// Group convolution (f*h)(x) = sum_g f(g) h(g^-1 x), exact supports.
pub fn convolve(f: &BallFunction, h: &BallFunction, cap: usize) -> Result<BallFunction> {
    if f.support_size() * h.support_size() > cap {
        return Err(CoxError::ResourceCap(format!(
            "convolution support product {} x {}",
            f.support_size(),
            h.support_size()
        )));
    }
    let mut terms = Vec::with_capacity(f.support_size() * h.support_size());
    for (g, a) in &f.terms {
        for (k, b) in &h.terms {
            terms.push((g.mul(k), a * b));
        }
    }
    Ok(BallFunction::from_terms(terms))
}

/// Orthogonal decomposition of a Gamma-supported function by shape vector.
/// Components are returned sorted by shape; they sum to h and their squared
/// norms sum to the squared norm of h by construction (disjoint supports).
pub fn shape_decompose(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    partition: &OrbitPartition,
    h: &BallFunction,
) -> Result<Vec<(Vec<usize>, BallFunction)>> {
    let mut buckets: HashMap<Vec<usize>, Vec<(Element, f64)>> = HashMap::new();
    for (g, c) in h.terms() {
        let s = shape(ctx, cong, partition, g)?;
        buckets.entry(s).or_default().push((g.clone(), *c));
    }
    let mut out: Vec<(Vec<usize>, BallFunction)> = buckets
        .into_iter()
        .map(|(s, terms)| (s, BallFunction::from_terms(terms)))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Distinct shapes realized by a pool of Gamma elements, with class sizes,
/// sorted by (total, lexicographic).
pub fn realizable_shapes(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    partition: &OrbitPartition,
    pool: &[Element],
) -> Result<Vec<(Vec<usize>, usize)>> {
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for g in pool {
        *counts.entry(shape(ctx, cong, partition, g)?).or_insert(0) += 1;
    }
    let mut out: Vec<(Vec<usize>, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| {
        let (sa, sb) = (a.0.iter().sum::<usize>(), b.0.iter().sum::<usize>());
        sa.cmp(&sb).then_with(|| a.0.cmp(&b.0))
    });
    Ok(out)
}

/// Report of a randomized norm-inequality check.
#[derive(Debug, Clone)]
pub struct HaagerupReport {
    pub trials: usize,
    pub seed: u64,
    /// bound p used in the denominator.
    pub bound: f64,
    /// max over trials of |f*h|_2 / (bound * |f|_2 * |h|_2).
    pub max_ratio: f64,
    /// size of the shape class (or length class) h was drawn from.
    pub class_size: usize,
}

const HAAGERUP_TOL: f64 = 1e-9;

fn random_function(rng: &mut ChaCha8Rng, pool: &[Element]) -> BallFunction {
    let terms = pool
        .iter()
        .map(|g| (g.clone(), rng.gen_range(-1.0..1.0)))
        .collect();
    BallFunction::from_terms(terms)
}

/// Elements of Gamma inside a ball, canonically ordered.
pub fn gamma_ball(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    radius: usize,
    cap: usize,
) -> Result<Vec<Element>> {
    let ball = Ball::new(ctx, radius, cap)?;
    let mut out = vec![];
    for bi in 0..ball.len() {
        let el = ball.get(bi);
        if cong.is_in_gamma(el)? {
            out.push(el.clone());
        }
    }
    Ok(out)
}

/// Randomized check of the shape inequality: for f supported on Gamma and h
/// supported on elements of exactly the given shape,
/// |f*h|_2 <= prod(n_i + 1) |f|_2 |h|_2.
pub fn haagerup_gamma_check(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    partition: &OrbitPartition,
    shape_vec: &[usize],
    gamma_pool: &[Element],
    trials: usize,
    seed: u64,
    cap: usize,
) -> Result<HaagerupReport> {
    if trials == 0 {
        return Err(CoxError::Precondition("trials must be positive".into()));
    }
    let mut class = vec![];
    for g in gamma_pool {
        if shape(ctx, cong, partition, g)? == shape_vec {
            class.push(g.clone());
        }
    }
    if class.is_empty() {
        return Err(CoxError::Precondition(format!(
            "no enumerated Gamma element has shape {:?}",
            shape_vec
        )));
    }
    let bound: f64 = shape_vec.iter().map(|&n| (n + 1) as f64).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let f = random_function(&mut rng, gamma_pool);
        let h = random_function(&mut rng, &class);
        let ratio = convolve(&f, &h, cap)?.norm2() / (bound * f.norm2() * h.norm2());
        if ratio > 1.0 + HAAGERUP_TOL {
            return Err(CoxError::Internal(format!(
                "shape inequality violated: ratio {}",
                ratio
            )));
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(HaagerupReport {
        trials,
        seed,
        bound,
        max_ratio,
        class_size: class.len(),
    })
}

/// Randomized check of the length inequality on Gamma:
/// |f*h|_2 <= (n+1)^{3 Lambda / 2} |f|_2 |h|_2 for h supported on
/// Gamma-elements of length exactly n.
pub fn haagerup_length_check(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    partition: &OrbitPartition,
    n: usize,
    gamma_pool: &[Element],
    trials: usize,
    seed: u64,
    cap: usize,
) -> Result<HaagerupReport> {
    if trials == 0 {
        return Err(CoxError::Precondition("trials must be positive".into()));
    }
    let mut class = vec![];
    for g in gamma_pool {
        if ctx.length(g)? == n {
            class.push(g.clone());
        }
    }
    if class.is_empty() {
        return Err(CoxError::Precondition(format!(
            "no enumerated Gamma element has length {}",
            n
        )));
    }
    for g in &class {
        if !cong.is_in_gamma(g)? {
            return Err(CoxError::Precondition(
                "length class contains an element outside Gamma".into(),
            ));
        }
    }
    let lambda = partition.lambda as f64;
    let bound = ((n + 1) as f64).powf(1.5 * lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    for _ in 0..trials {
        let f = random_function(&mut rng, gamma_pool);
        let h = random_function(&mut rng, &class);
        let ratio = convolve(&f, &h, cap)?.norm2() / (bound * f.norm2() * h.norm2());
        if ratio > 1.0 + HAAGERUP_TOL {
            return Err(CoxError::Internal(format!(
                "length inequality violated: ratio {}",
                ratio
            )));
        }
        max_ratio = max_ratio.max(ratio);
    }
    Ok(HaagerupReport {
        trials,
        seed,
        bound,
        max_ratio,
        class_size: class.len(),
    })
}

/// Lower bound for the operator norm of left convolution by f, from the
/// compression to the span of delta functions on a finite element set.
#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub value: f64,
    pub basis_size: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value of the compressed convolution operator by power
/// iteration on A^T A. Any finite basis of distinct elements gives a valid
/// lower bound for the full operator norm.
pub fn opnorm_lower(
    f: &BallFunction,
    basis: &[Element],
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<NormEstimate> {
    if basis.is_empty() {
        return Err(CoxError::Precondition("empty compression basis".into()));
    }
    let index: HashMap<Vec<u8>, usize> = basis
        .iter()
        .enumerate()
        .map(|(i, g)| (g.canon_bytes(), i))
        .collect();
    // sparse action: row (g y) gains c * x[y] for each term (g, c)
    let mut moves: Vec<(usize, usize, f64)> = vec![]; // (from, to, coeff)
    for (g, c) in f.terms() {
        for (yi, y) in basis.iter().enumerate() {
            let z = g.mul(y);
            if let Some(&zi) = index.get(&z.canon_bytes()) {
                moves.push((yi, zi, *c));
            }
        }
    }
    let n = basis.len();
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(from, to, c) in &moves {
            out[to] += c * x[from];
        }
        out
    };
    let apply_t = |x: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(from, to, c) in &moves {
            out[from] += c * x[to];
        }
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nx = norm(&x);
    for xi in &mut x {
        *xi /= nx;
    }
    let mut sigma = 0.0f64;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..max_iter {
        iterations = it + 1;
        let y = apply_t(&apply(&x));
        let ny = norm(&y);
        if ny == 0.0 {
            sigma = 0.0;
            converged = true;
            break;
        }
        let next = ny.sqrt();
        x = y.iter().map(|a| a / ny).collect();
        if (next - sigma).abs() <= tol * next.max(1.0) {
            sigma = next;
            converged = true;
            break;
        }
        sigma = next;
    }
    Ok(NormEstimate {
        value: sigma,
        basis_size: n,
        iterations,
        converged,
    })
}

/// Compression to the span of delta functions on a whole group ball.
pub fn opnorm_lower_ball(
    ctx: &GroupCtx,
    f: &BallFunction,
    truncation_radius: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
    cap: usize,
) -> Result<NormEstimate> {
    let ball = Ball::new(ctx, truncation_radius, cap)?;
    opnorm_lower(f, ball.elements(), max_iter, tol, seed)
}

/// All reduced words of at most max_syllables letters over two elements and
/// their inverses, as group elements (duplicates removed).
pub fn word_basis(
    h: &Element,
    v: &Element,
    max_syllables: usize,
    cap: usize,
) -> Result<Vec<Element>> {
    let letters = [h.clone(), h.inv()?, v.clone(), v.inv()?];
    let inverse_of = [1usize, 0, 3, 2];
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
    let mut out = vec![];
    let id = letters[0].mul(&letters[1]);
    seen.insert(id.canon_bytes(), ());
    out.push(id);
    let mut frontier: Vec<(Element, usize)> = vec![];
    for l in 0..4 {
        frontier.push((letters[l].clone(), l));
    }
    for _ in 0..max_syllables {
        let mut next = vec![];
        for (el, last) in frontier {
            if out.len() > cap {
                return Err(CoxError::ResourceCap(format!(
                    "word basis exceeded {} elements",
                    cap
                )));
            }
            if seen.insert(el.canon_bytes(), ()).is_none() {
                out.push(el.clone());
            }
            for l in 0..4 {
                if l == inverse_of[last] {
                    continue;
                }
                next.push((el.mul(&letters[l]), l));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(out)
}

/// Words of bounded syllable length over an arbitrary alphabet of elements
/// and their inverses.
fn conjugate_word_basis(letters: &[Element], depth: usize, cap: usize) -> Result<Vec<Element>> {
    let mut alphabet = vec![];
    for l in letters {
        alphabet.push(l.clone());
        alphabet.push(l.inv()?);
    }
    let m = alphabet.len();
    let inverse_of = |i: usize| i ^ 1;
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
    let mut out = vec![];
    let id = alphabet[0].mul(&alphabet[1]);
    seen.insert(id.canon_bytes(), ());
    out.push(id);
    let mut frontier: Vec<(Element, usize)> = (0..m).map(|l| (alphabet[l].clone(), l)).collect();
    for _ in 0..depth {
        let mut next = vec![];
        for (el, last) in frontier {
            if out.len() > cap {
                return Err(CoxError::ResourceCap(format!(
                    "word basis exceeded {} elements",
                    cap
                )));
            }
            if seen.insert(el.canon_bytes(), ()).is_none() {
                out.push(el.clone());
            }
            for l in 0..m {
                if l == inverse_of(last) {
                    continue;
                }
                next.push((el.mul(&alphabet[l]), l));
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(out)
}

/// Powers-style averaging experiment: norm estimates of the averages
/// (1/n) sum_{j=1..n} delta_{v^j k v^-j} for n = 1..n_max.
///
/// The estimates are compression lower bounds, so the report asserts only the
/// sound side: every value must stay below 1 (average of unitaries) and the
/// last value is reported for trend inspection.
#[derive(Debug, Clone)]
pub struct PowersReport {
    pub estimates: Vec<f64>,
    pub word_depth: usize,
    pub basis_size: usize,
    /// opnorm_lower(sum a_j delta_{v^-j k v^j}) / ||a||_2 for a random a.
    pub coefficient_ratio: f64,
}

pub fn powers_average_experiment(
    k: &Element,
    v: &Element,
    n_max: usize,
    word_depth: usize,
    seed: u64,
    cap: usize,
) -> Result<PowersReport> {
    if n_max == 0 {
        return Err(CoxError::Precondition("n_max must be positive".into()));
    }
    // conjugates u_j = v^j k v^-j
    let mut conjugates = vec![];
    let mut vj = v.clone();
    for _ in 0..n_max {
        conjugates.push(vj.mul(k).mul(&vj.inv()?));
        vj = vj.mul(v);
    }
    let basis = conjugate_word_basis(&conjugates, word_depth, cap)?;
    // one move table per conjugate letter, shared by all the averages
    let index: HashMap<Vec<u8>, usize> = basis
        .iter()
        .enumerate()
        .map(|(i, g)| (g.canon_bytes(), i))
        .collect();
    let mut tables: Vec<Vec<(usize, usize)>> = vec![];
    for u in &conjugates {
        let mut t = vec![];
        for (yi, y) in basis.iter().enumerate() {
            if let Some(&zi) = index.get(&u.mul(y).canon_bytes()) {
                t.push((yi, zi));
            }
        }
        tables.push(t);
    }
    let dim = basis.len();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut estimates = vec![];
    for n in 1..=n_max {
        let c = 1.0 / n as f64;
        let apply = |x: &[f64], transpose: bool| -> Vec<f64> {
            let mut out = vec![0.0; dim];
            for t in &tables[..n] {
                for &(from, to) in t {
                    if transpose {
                        out[from] += c * x[to];
                    } else {
                        out[to] += c * x[from];
                    }
                }
            }
            out
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nx = norm(&x);
        for xi in &mut x {
            *xi /= nx;
        }
        let mut sigma = 0.0f64;
        for _ in 0..300 {
            let y = apply(&apply(&x, false), true);
            let ny = norm(&y);
            if ny == 0.0 {
                sigma = 0.0;
                break;
            }
            let next = ny.sqrt();
            x = y.iter().map(|a| a / ny).collect();
            if (next - sigma).abs() <= 1e-10 * next.max(1.0) {
                sigma = next;
                break;
            }
            sigma = next;
        }
        if sigma > 1.0 + HAAGERUP_TOL {
            return Err(CoxError::Internal(format!(
                "average of unitaries estimated above 1: {}",
                sigma
            )));
        }
        estimates.push(sigma);
    }
    // coefficient form: random a, f = sum a_j delta_{v^-j k v^j}; the
    // free-group Haagerup bound 2 ||a||_2 must dominate the lower estimate
    let mut inverses = vec![];
    let mut vj = v.inv()?;
    for _ in 0..n_max {
        inverses.push(vj.mul(k).mul(&vj.inv()?));
        vj = vj.mul(&v.inv()?);
    }
    let inv_basis = conjugate_word_basis(&inverses, word_depth, cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..n_max).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = BallFunction::from_terms(
        inverses
            .iter()
            .zip(&a)
            .map(|(u, &c)| (u.clone(), c))
            .collect(),
    );
    let a_norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let est = opnorm_lower(&f, &inv_basis, 300, 1e-10, seed)?;
    let coefficient_ratio = est.value / (2.0 * a_norm);
    if coefficient_ratio > 1.0 + HAAGERUP_TOL {
        return Err(CoxError::Internal(format!(
            "coefficient inequality violated: ratio {}",
            coefficient_ratio
        )));
    }
    Ok(PowersReport {
        estimates,
        word_depth,
        basis_size: basis.len(),
        coefficient_ratio,
    })
}

/// Count distinct conjugates g w g^-1 over growing balls. With
/// require_strict (for systems where every non-trivial class is infinite)
/// the counts must strictly increase across the supplied radii.
pub fn icc_scan(
    ctx: &GroupCtx,
    w: &Element,
    radii: &[usize],
    require_strict: bool,
    cap: usize,
) -> Result<Vec<usize>> {
    if w.is_identity() {
        return Err(CoxError::Precondition(
            "icc scan needs a non-trivial element".into(),
        ));
    }
    let max_r = radii.iter().copied().max().unwrap_or(0);
    let ball = Ball::new(ctx, max_r, cap)?;
    let mut counts = vec![];
    for &r in radii {
        let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
        for bi in 0..ball.len() {
            if ball.length_of(bi) > r {
                break;
            }
            let g = ball.get(bi);
            let c = g.mul(w).mul(&g.inv()?);
            seen.insert(c.canon_bytes(), ());
        }
        counts.push(seen.len());
    }
    if require_strict {
        for pair in counts.windows(2) {
            if pair[1] <= pair[0] {
                return Err(CoxError::Internal(format!(
                    "conjugate counts not strictly increasing: {:?}",
                    counts
                )));
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::{build_context, gamma_orbits};
    use crate::coxeter::{parse_coxeter_graph, CoxeterSystem};
    use crate::trees::{ping_pong_pair, valency_witness};

    const CAP: usize = 2_000_000;

    fn ctx(graph: &str) -> GroupCtx {
        GroupCtx::new(CoxeterSystem::new(parse_coxeter_graph(graph).unwrap()).unwrap())
    }

    fn dinf() -> GroupCtx {
        ctx("vertices: s t\ns t inf\n")
    }

    fn figure() -> GroupCtx {
        ctx("vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n")
    }

    #[test]
    fn dihedral_convolution_oracle() {
        let g = ctx("vertices: s t\ns t 3\n");
        let s = g.generator(0);
        let t = g.generator(1);
        let f = BallFunction::from_terms(vec![(s.clone(), 1.0), (t.clone(), 1.0)]);
        let sq = convolve(&f, &f, CAP).unwrap();
        // (d_s + d_t) * (d_s + d_t) = 2 d_e + d_st + d_ts
        assert_eq!(sq.support_size(), 3);
        assert_eq!(sq.coefficient(&g.identity()), 2.0);
        assert_eq!(sq.coefficient(&s.mul(&t)), 1.0);
        assert_eq!(sq.coefficient(&t.mul(&s)), 1.0);
        assert_eq!(sq.coefficient(&s), 0.0);
    }

    #[test]
    fn convolution_bilinear_and_associative() {
        let g = ctx("vertices: s t\ns t 3\n");
        let ball = Ball::new(&g, 3, CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rand_fn = |rng: &mut ChaCha8Rng| {
            BallFunction::from_terms(
                ball.elements()
                    .iter()
                    .map(|e| (e.clone(), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
        };
        for _ in 0..5 {
            let (f, h, k) = (rand_fn(&mut rng), rand_fn(&mut rng), rand_fn(&mut rng));
            let lhs = convolve(&convolve(&f, &h, CAP).unwrap(), &k, CAP).unwrap();
            let rhs = convolve(&f, &convolve(&h, &k, CAP).unwrap(), CAP).unwrap();
            for (e, c) in lhs.terms() {
                assert!((c - rhs.coefficient(e)).abs() <= 1e-12 * c.abs().max(1.0));
            }
            let bil = convolve(&f.add(&h.scale(2.0)), &k, CAP).unwrap();
            let expect = convolve(&f, &k, CAP)
                .unwrap()
                .add(&convolve(&h, &k, CAP).unwrap().scale(2.0));
            for (e, c) in bil.terms() {
                assert!((c - expect.coefficient(e)).abs() <= 1e-12 * c.abs().max(1.0));
            }
        }
        // support cap respected
        let big = rand_fn(&mut rng);
        assert!(matches!(
            convolve(&big, &big, 10),
            Err(CoxError::ResourceCap(_))
        ));
    }

    #[test]
    fn dinf_shapes_and_parseval() {
        let g = dinf();
        let cong = build_context(&g, Some(3)).unwrap();
        let part = gamma_orbits(&g, &cong, 15, 4, CAP).unwrap();
        assert_eq!(part.lambda, 2);
        let pool = gamma_ball(&g, &cong, 8, CAP).unwrap();
        assert_eq!(pool.len(), 9);
        // shape((st)^n) = (n, n); components sum to the length
        for el in &pool {
            let s = shape(&g, &cong, &part, el).unwrap();
            let n = g.length(el).unwrap();
            assert_eq!(s, vec![n / 2, n / 2]);
        }
        // (st)^2 and (ts)^2 share a shape, so they land in one component
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = BallFunction::from_terms(
            pool.iter()
                .map(|e| (e.clone(), rng.gen_range(-1.0..1.0)))
                .collect(),
        );
        let parts = shape_decompose(&g, &cong, &part, &h).unwrap();
        assert_eq!(parts.len(), 5); // shapes (0,0)..(4,4)
        let mut total = 0.0;
        let mut sum = BallFunction::zero();
        for (s, comp) in &parts {
            assert_eq!(s[0], s[1]);
            assert_eq!(comp.support_size(), if s[0] == 0 { 1 } else { 2 });
            total += comp.norm2().powi(2);
            sum = sum.add(comp);
        }
        assert!((total - h.norm2().powi(2)).abs() <= 1e-12 * total);
        for (e, c) in h.terms() {
            assert!((c - sum.coefficient(e)).abs() <= 1e-12);
        }
    }

    #[test]
    fn dinf_haagerup_shape_and_length() {
        let g = dinf();
        let cong = build_context(&g, Some(3)).unwrap();
        let part = gamma_orbits(&g, &cong, 15, 4, CAP).unwrap();
        let pool = gamma_ball(&g, &cong, 8, CAP).unwrap();
        for n in 1..=4usize {
            let r = haagerup_gamma_check(&g, &cong, &part, &[n, n], &pool, 100, 5, CAP).unwrap();
            assert_eq!(r.class_size, 2);
            assert_eq!(r.bound, ((n + 1) * (n + 1)) as f64);
            assert!(r.max_ratio <= 1.0 + 1e-9);
        }
        // zero shape: h is a multiple of d_e, ratio at most 1
        let r = haagerup_gamma_check(&g, &cong, &part, &[0, 0], &pool, 20, 5, CAP).unwrap();
        assert_eq!(r.class_size, 1);
        assert!(r.max_ratio <= 1.0 + 1e-9);
        // unrealizable shape refused
        assert!(matches!(
            haagerup_gamma_check(&g, &cong, &part, &[1, 0], &pool, 5, 5, CAP),
            Err(CoxError::Precondition(_))
        ));
        let r = haagerup_length_check(&g, &cong, &part, 4, &pool, 100, 5, CAP).unwrap();
        assert_eq!(r.bound, 125.0); // (4+1)^(3*2/2)
        assert!(r.max_ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn figure_shapes_additive_and_haagerup() {
        let g = figure();
        let cong = build_context(&g, Some(3)).unwrap();
        // wide partition: covers every inversion of Gamma-elements up to length 8
        let part = gamma_orbits(&g, &cong, 15, 2, CAP).unwrap();
        let pool = gamma_ball(&g, &cong, 8, CAP).unwrap();
        assert_eq!(pool.len(), 7);
        for el in &pool {
            let s = shape(&g, &cong, &part, el).unwrap();
            assert_eq!(s.iter().sum::<usize>(), g.length(el).unwrap());
        }
        // exactly three distinct non-zero shapes are realizable here
        let shapes = realizable_shapes(&g, &cong, &part, &pool).unwrap();
        assert_eq!(shapes.len(), 4);
        assert_eq!(shapes[0].0.iter().sum::<usize>(), 0);
        for (sv, count) in &shapes[1..] {
            assert_eq!(*count, 2);
            let r = haagerup_gamma_check(&g, &cong, &part, sv, &pool, 50, 5, CAP).unwrap();
            assert!(r.max_ratio <= 1.0 + 1e-9);
        }
        let r = haagerup_length_check(&g, &cong, &part, 6, &pool, 50, 5, CAP).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn opnorm_calibration() {
        let g = dinf();
        let s = g.generator(0);
        let st = s.mul(&g.generator(1));
        // point masses act isometrically
        for el in [s.clone(), st.clone(), g.identity()] {
            let est =
                opnorm_lower_ball(&g, &BallFunction::delta(&el), 4, 200, 1e-12, 3, CAP).unwrap();
            assert!((est.value - 1.0).abs() <= 1e-10, "got {}", est.value);
        }
        // d_e + d_s is twice a projection: norm exactly 2, found at any radius
        let f = BallFunction::delta(&g.identity()).add(&BallFunction::delta(&s));
        let small = opnorm_lower_ball(&g, &f, 4, 300, 1e-12, 3, CAP).unwrap();
        let large = opnorm_lower_ball(&g, &f, 6, 300, 1e-12, 3, CAP).unwrap();
        assert!((small.value - 2.0).abs() <= 1e-9);
        assert!(large.value + 1e-10 >= small.value); // monotone in radius
        assert!(matches!(
            opnorm_lower(&f, &[], 10, 1e-8, 3),
            Err(CoxError::Precondition(_))
        ));
    }

    #[test]
    fn free_pair_kesten_and_powers() {
        let g = figure();
        let cong = build_context(&g, Some(3)).unwrap();
        let w = valency_witness(&g, &cong, &g.generator(0), 8, 10, CAP).unwrap();
        let ball = Ball::new(&g, 6, CAP).unwrap();
        let h = (1..ball.len())
            .map(|bi| ball.get(bi))
            .find(|el| cong.is_in_gamma(el).unwrap())
            .unwrap()
            .clone();
        let cert = ping_pong_pair(&g, &cong, &w, &h, CAP).unwrap();
        let f = BallFunction::from_terms(vec![
            (cert.h.clone(), 1.0),
            (cert.h.inv().unwrap(), 1.0),
            (cert.v.clone(), 1.0),
            (cert.v.inv().unwrap(), 1.0),
        ]);
        // Kesten norm of the rank-2 free group: 2 sqrt(3), approached from below
        let kesten = 2.0 * 3.0f64.sqrt();
        let mut prev = 0.0;
        for depth in [6usize, 8] {
            let basis = word_basis(&cert.h, &cert.v, depth, CAP).unwrap();
            assert_eq!(basis.len(), 2 * 3usize.pow(depth as u32) - 1);
            let est = opnorm_lower(&f, &basis, 400, 1e-10, 7).unwrap();
            assert!(est.converged);
            assert!(est.value <= kesten + 1e-9);
            assert!(est.value + 1e-10 >= prev); // monotone in depth
            prev = est.value;
        }
        assert!(prev >= 0.95 * kesten, "kesten estimate {} too small", prev);

        let rep = powers_average_experiment(&cert.h, &cert.v, 16, 2, 7, CAP).unwrap();
        assert_eq!(rep.estimates.len(), 16);
        assert!((rep.estimates[0] - 1.0).abs() <= 1e-9); // single unitary
        for pair in rep.estimates.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-6); // non-increasing within jitter
        }
        for v in &rep.estimates {
            assert!(*v <= 1.0 + 1e-9);
        }
        assert!(rep.estimates[15] < 0.7);
        assert!(rep.coefficient_ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn icc_scans() {
        let g = figure();
        let a = g.generator(0);
        let ab = a.mul(&g.generator(1));
        // non-degenerate indefinite system: strict growth asserted
        let counts = icc_scan(&g, &a, &[2, 4, 6], true, CAP).unwrap();
        assert_eq!(counts, vec![8, 30, 102]);
        let counts = icc_scan(&g, &ab, &[2, 4, 6], true, CAP).unwrap();
        assert_eq!(counts, vec![10, 45, 173]);
        // degenerate control: the class of st in the infinite dihedral group
        // is just {st, ts}; counts reported, strictness refused
        let d = dinf();
        let st = d.generator(0).mul(&d.generator(1));
        let counts = icc_scan(&d, &st, &[2, 4, 6], false, CAP).unwrap();
        assert_eq!(counts, vec![2, 2, 2]);
        assert!(icc_scan(&d, &st, &[2, 4, 6], true, CAP).is_err());
        assert!(matches!(
            icc_scan(&g, &g.identity(), &[2], false, CAP),
            Err(CoxError::Precondition(_))
        ));
    }
}
