//! Coxeter graphs, the Gram form, its exact classification, and the
//! amenability / simplicity verdict.

use std::collections::HashMap;

use num_integer::Integer;

use crate::error::{CoxError, Result};
use crate::matrix::Mat;
use crate::scalar::{Field, FieldData, Scalar};

/// Edge label m(s,t) of a Coxeter graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Finite(u64),
    Infinite,
}

impl Label {
    pub fn as_str(&self) -> String {
        match self {
            Label::Finite(m) => m.to_string(),
            Label::Infinite => "inf".to_string(),
        }
    }
}

/// Validated Coxeter matrix: generator names plus the symmetric label table.
#[derive(Debug, Clone)]
pub struct CoxeterMatrix {
    names: Vec<String>,
    labels: Vec<Vec<Label>>,
}

impl CoxeterMatrix {
    pub fn new(names: Vec<String>, labels: Vec<Vec<Label>>) -> Result<CoxeterMatrix> {
        let rank = names.len();
        if rank == 0 {
            return Err(CoxError::Precondition("empty generator list".into()));
        }
        if labels.len() != rank || labels.iter().any(|r| r.len() != rank) {
            return Err(CoxError::Precondition("label table shape mismatch".into()));
        }
        for i in 0..rank {
            if labels[i][i] != Label::Finite(1) {
                return Err(CoxError::Precondition(format!(
                    "diagonal label of {} must be 1",
                    names[i]
                )));
            }
            for j in 0..rank {
                if labels[i][j] != labels[j][i] {
                    return Err(CoxError::Precondition("label table not symmetric".into()));
                }
                if i != j {
                    if let Label::Finite(m) = labels[i][j] {
                        if m < 2 {
                            return Err(CoxError::Precondition(format!(
                                "off-diagonal label {} between {} and {} is below 2",
                                m, names[i], names[j]
                            )));
                        }
                    }
                }
            }
        }
        Ok(CoxeterMatrix { names, labels })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn label(&self, i: usize, j: usize) -> Label {
        self.labels[i][j]
    }

    pub fn generator_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CoxError::UnknownGenerator(name.to_string()))
    }

    /// lcm of all finite labels >= 3 (1 when there are none).
    pub fn field_level(&self) -> u64 {
        let mut level: u64 = 1;
        for i in 0..self.rank() {
            for j in (i + 1)..self.rank() {
                if let Label::Finite(m) = self.labels[i][j] {
                    if m >= 3 {
                        level = level.lcm(&m);
                    }
                }
            }
        }
        level
    }
}

/// Parse the line-oriented graph format:
/// `vertices: v1 v2 ... vk` then lines `vi vj m` (m an integer >= 3 or `inf`);
/// unlisted pairs default to label 2; `#` starts a comment.
pub fn parse_coxeter_graph(text: &str) -> Result<CoxeterMatrix> {
    let mut names: Option<Vec<String>> = None;
    let mut edges: Vec<(usize, usize, Label, usize)> = vec![];
    let mut name_index: HashMap<String, usize> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if names.is_none() {
            let rest = line.strip_prefix("vertices:").ok_or(CoxError::Parse {
                line: lineno,
                msg: "expected `vertices: v1 v2 ...` as the first non-comment line".into(),
            })?;
            let vs: Vec<String> = rest.split_whitespace().map(|s| s.to_string()).collect();
            if vs.is_empty() {
                return Err(CoxError::Parse {
                    line: lineno,
                    msg: "empty vertex list".into(),
                });
            }
            for (i, v) in vs.iter().enumerate() {
                if !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(CoxError::Parse {
                        line: lineno,
                        msg: format!("vertex name `{}` is not an ASCII identifier", v),
                    });
                }
                if name_index.insert(v.clone(), i).is_some() {
                    return Err(CoxError::Parse {
                        line: lineno,
                        msg: format!("duplicate vertex name `{}`", v),
                    });
                }
            }
            names = Some(vs);
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(CoxError::Parse {
                line: lineno,
                msg: format!("expected `vi vj m`, got `{}`", line),
            });
        }
        let i = *name_index.get(parts[0]).ok_or_else(|| CoxError::Parse {
            line: lineno,
            msg: format!("unknown vertex `{}`", parts[0]),
        })?;
        let j = *name_index.get(parts[1]).ok_or_else(|| CoxError::Parse {
            line: lineno,
            msg: format!("unknown vertex `{}`", parts[1]),
        })?;
        if i == j {
            return Err(CoxError::Parse {
                line: lineno,
                msg: format!("self-edge on `{}`", parts[0]),
            });
        }
        let label = if parts[2] == "inf" {
            Label::Infinite
        } else {
            let m: u64 = parts[2].parse().map_err(|_| CoxError::Parse {
                line: lineno,
                msg: format!("bad label `{}`", parts[2]),
            })?;
            if m < 2 {
                return Err(CoxError::Parse {
                    line: lineno,
                    msg: format!("off-diagonal label {} is below 2", m),
                });
            }
            Label::Finite(m)
        };
        edges.push((i, j, label, lineno));
    }
    let names = names.ok_or(CoxError::Parse {
        line: 0,
        msg: "missing vertex list".into(),
    })?;
    let rank = names.len();
    let mut labels = vec![vec![Label::Finite(2); rank]; rank];
    for i in 0..rank {
        labels[i][i] = Label::Finite(1);
    }
    let mut seen: HashMap<(usize, usize), Label> = HashMap::new();
    for (i, j, label, lineno) in edges {
        let key = (i.min(j), i.max(j));
        if let Some(prev) = seen.insert(key, label) {
            if prev != label {
                return Err(CoxError::Parse {
                    line: lineno,
                    msg: format!(
                        "contradictory labels for edge {} {}: {} vs {}",
                        names[key.0],
                        names[key.1],
                        prev.as_str(),
                        label.as_str()
                    ),
                });
            }
        }
        labels[i][j] = label;
        labels[j][i] = label;
    }
    CoxeterMatrix::new(names, labels)
}

/// A Coxeter matrix together with its exact scalar field and Gram form.
#[derive(Clone)]
pub struct CoxeterSystem {
    cm: CoxeterMatrix,
    field: Field,
    gram: Mat,
}

impl CoxeterSystem {
    pub fn new(cm: CoxeterMatrix) -> Result<CoxeterSystem> {
        let field = FieldData::new(cm.field_level());
        let gram = gram_matrix(&cm, &field)?;
        Ok(CoxeterSystem { cm, field, gram })
    }

    pub fn matrix(&self) -> &CoxeterMatrix {
        &self.cm
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.cm.rank()
    }
}

/// B(e_s,e_t) = 1 on the diagonal, -cos(pi/m) for finite labels, -1 for `inf`.
pub fn gram_matrix(cm: &CoxeterMatrix, field: &Field) -> Result<Mat> {
    let n = cm.rank();
    let half = num_rational::BigRational::new(
        num_bigint::BigInt::from(-1),
        num_bigint::BigInt::from(2),
    );
    let mut a = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let entry = if i == j {
                Scalar::one(field)
            } else {
                match cm.label(i, j) {
                    Label::Infinite => Scalar::from_integer(field, -1),
                    Label::Finite(m) => {
                        // -cos(pi/m) = -(1/2) * 2cos(pi/m)
                        Scalar::two_cos_pi_over(field, m)?.scale(&half)
                    }
                }
            };
            a.push(entry);
        }
    }
    Ok(Mat::from_rows(n, a))
}

/// Category of a symmetric bilinear form, a pure function of its signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormCategory {
    PositiveDefinite,
    AffineDegenerate,
    IndefiniteNondegenerate,
    IndefiniteDegenerate,
}

impl FormCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormCategory::PositiveDefinite => "positive-definite",
            FormCategory::AffineDegenerate => "affine-degenerate",
            FormCategory::IndefiniteNondegenerate => "indefinite-nondegenerate",
            FormCategory::IndefiniteDegenerate => "indefinite-degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormClass {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
    pub category: FormCategory,
}

impl FormClass {
    fn from_signature(n_plus: usize, n_minus: usize, n_zero: usize) -> FormClass {
        let category = match (n_minus, n_zero) {
            (0, 0) => FormCategory::PositiveDefinite,
            (0, _) => FormCategory::AffineDegenerate,
            (_, 0) => FormCategory::IndefiniteNondegenerate,
            _ => FormCategory::IndefiniteDegenerate,
        };
        FormClass {
            n_plus,
            n_minus,
            n_zero,
            category,
        }
    }
}

/// Exact signature by symmetric (congruence) elimination with certified pivot
/// signs.  The zero count equals the dimension of the radical.
pub fn classify_form(gram: &Mat) -> Result<FormClass> {
    let n = gram.size();
    let mut m = gram.clone();
    let mut active: Vec<usize> = (0..n).collect();
    let mut n_plus = 0;
    let mut n_minus = 0;
    while !active.is_empty() {
        // Prefer a nonzero diagonal pivot.
        let diag = active
            .iter()
            .position(|&i| !m.at(i, i).is_zero());
        if let Some(pos) = diag {
            let i = active.remove(pos);
            let pivot = m.at(i, i).clone();
            match pivot.sign()? {
                1 => n_plus += 1,
                -1 => n_minus += 1,
                _ => unreachable!(),
            }
            let pinv = pivot.inv()?;
            let pivot_row: Vec<Scalar> = active.iter().map(|&c| m.at(i, c).clone()).collect();
            for &r in &active {
                if m.at(r, i).is_zero() {
                    continue;
                }
                let factor = m.at(r, i).mul(&pinv);
                for (ci, &c) in active.iter().enumerate() {
                    let t = factor.mul(&pivot_row[ci]);
                    let v = m.at(r, c).sub(&t);
                    m.set(r, c, v);
                }
            }
            for &r in &active {
                let z = Scalar::zero(pivot.field());
                m.set(r, i, z.clone());
                m.set(i, r, z);
            }
            continue;
        }
        // All active diagonal entries vanish; look for a nonzero off-diagonal
        // entry and fold column j into i (congruence), which produces the
        // diagonal entry 2*a_ij != 0.
        let mut found = None;
        'outer: for (pi, &i) in active.iter().enumerate() {
            for &j in active.iter().skip(pi + 1) {
                if !m.at(i, j).is_zero() {
                    found = Some((i, j));
                    break 'outer;
                }
            }
        }
        match found {
            None => {
                // Remaining block is zero: its size is the radical dimension.
                let n_zero = active.len();
                return Ok(FormClass::from_signature(n_plus, n_minus, n_zero));
            }
            Some((i, j)) => {
                // Row/column operation e_i <- e_i + e_j on both sides.
                for &c in &active {
                    let v = m.at(i, c).add(m.at(j, c));
                    m.set(i, c, v);
                }
                for &r in &active {
                    let v = m.at(r, i).add(m.at(r, j));
                    m.set(r, i, v);
                }
            }
        }
    }
    Ok(FormClass::from_signature(n_plus, n_minus, 0))
}

/// Principal sub-matrix of the Gram form on a generator subset.
pub fn sub_gram(gram: &Mat, subset: &[usize]) -> Mat {
    let k = subset.len();
    let mut a = Vec::with_capacity(k * k);
    for &i in subset {
        for &j in subset {
            a.push(gram.at(i, j).clone());
        }
    }
    Mat::from_rows(k, a)
}

/// Connected components of the graph whose edges are the pairs with label != 2.
pub fn indecomposable_components(cm: &CoxeterMatrix) -> Vec<Vec<usize>> {
    let n = cm.rank();
    let mut seen = vec![false; n];
    let mut comps = vec![];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = vec![];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for w in 0..n {
                if !seen[w] && v != w && cm.label(v, w) != Label::Finite(2) {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Report of the Moussong hyperbolicity criterion.
#[derive(Debug, Clone)]
pub struct MoussongReport {
    /// Disjoint subset pairs with all cross labels 2 and both parabolics infinite.
    pub commuting_infinite_pairs: Vec<(Vec<usize>, Vec<usize>)>,
    /// Subsets of size >= 3 generating an irreducible affine parabolic.
    pub affine_subsets: Vec<Vec<usize>>,
    pub hyperbolic: bool,
}

pub const MOUSSONG_RANK_CAP: usize = 12;

/// Exhaustive subset scan for Moussong's criterion, with memoised
/// sub-classifications.  Errors above the rank cap.
pub fn moussong_check(sys: &CoxeterSystem, rank_cap: usize) -> Result<MoussongReport> {
    let n = sys.rank();
    if n > rank_cap {
        return Err(CoxError::RankCap { rank: n, cap: rank_cap });
    }
    let cm = sys.matrix();
    let gram = sys.gram();
    let mut class_of: HashMap<u32, FormClass> = HashMap::new();
    let mut classify_mask = |mask: u32| -> Result<FormClass> {
        if let Some(c) = class_of.get(&mask) {
            return Ok(*c);
        }
        let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let c = classify_form(&sub_gram(gram, &subset))?;
        class_of.insert(mask, c);
        Ok(c)
    };
    let infinite = |c: FormClass| c.category != FormCategory::PositiveDefinite;

    // (a) pairs of disjoint subsets, all cross labels 2, both infinite.
    let mut pairs = vec![];
    // Ternary assignment: 0 = neither, 1 = S1, 2 = S2.
    let mut assign = vec![0u8; n];
    'next: loop {
        let mut m1: u32 = 0;
        let mut m2: u32 = 0;
        for (i, &a) in assign.iter().enumerate() {
            match a {
                1 => m1 |= 1 << i,
                2 => m2 |= 1 << i,
                _ => {}
            }
        }
        if m1 != 0 && m2 != 0 && m1.trailing_zeros() < m2.trailing_zeros() {
            let s1: Vec<usize> = (0..n).filter(|&i| m1 & (1 << i) != 0).collect();
            let s2: Vec<usize> = (0..n).filter(|&i| m2 & (1 << i) != 0).collect();
            let commuting = s1
                .iter()
                .all(|&i| s2.iter().all(|&j| cm.label(i, j) == Label::Finite(2)));
            if commuting && infinite(classify_mask(m1)?) && infinite(classify_mask(m2)?) {
                pairs.push((s1, s2));
            }
        }
        // increment ternary counter
        for a in assign.iter_mut() {
            if *a < 2 {
                *a += 1;
                continue 'next;
            }
            *a = 0;
        }
        break;
    }

    // (b) irreducible affine parabolic of rank >= 3.
    let mut affine = vec![];
    for mask in 1u32..(1 << n) {
        if (mask.count_ones() as usize) < 3 {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if !subset_connected(cm, &subset) {
            continue;
        }
        if classify_mask(mask)?.category == FormCategory::AffineDegenerate {
            affine.push(subset);
        }
    }

    let hyperbolic = pairs.is_empty() && affine.is_empty();
    Ok(MoussongReport {
        commuting_infinite_pairs: pairs,
        affine_subsets: affine,
        hyperbolic,
    })
}

fn subset_connected(cm: &CoxeterMatrix, subset: &[usize]) -> bool {
    if subset.is_empty() {
        return true;
    }
    let mut seen = vec![false; subset.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(p) = stack.pop() {
        for (q, &j) in subset.iter().enumerate() {
            if !seen[q] && cm.label(subset[p], j) != Label::Finite(2) {
                seen[q] = true;
                count += 1;
                stack.push(q);
            }
        }
    }
    count == subset.len()
}

/// Verdict for one indecomposable component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentVerdict {
    Finite,
    AffineAmenable,
    NilpotentNormalNotSimple,
    SimpleUniqueTrace,
}

impl ComponentVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComponentVerdict::Finite => "finite",
            ComponentVerdict::AffineAmenable => "affine, amenable",
            ComponentVerdict::NilpotentNormalNotSimple => {
                "nilpotent normal subgroup, not simple"
            }
            ComponentVerdict::SimpleUniqueTrace => "reduced C*-algebra simple with unique trace",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplicityReport {
    pub components: Vec<(Vec<usize>, FormClass, ComponentVerdict)>,
    /// Simple overall iff every factor verdict is simple.
    pub overall_simple: bool,
}

pub fn simplicity_verdict(sys: &CoxeterSystem) -> Result<SimplicityReport> {
    let comps = indecomposable_components(sys.matrix());
    let mut out = vec![];
    for comp in comps {
        let class = classify_form(&sub_gram(sys.gram(), &comp))?;
        let verdict = match class.category {
            FormCategory::PositiveDefinite => ComponentVerdict::Finite,
            FormCategory::AffineDegenerate => ComponentVerdict::AffineAmenable,
            FormCategory::IndefiniteDegenerate => ComponentVerdict::NilpotentNormalNotSimple,
            FormCategory::IndefiniteNondegenerate => ComponentVerdict::SimpleUniqueTrace,
        };
        out.push((comp, class, verdict));
    }
    let overall_simple = out
        .iter()
        .all(|(_, _, v)| *v == ComponentVerdict::SimpleUniqueTrace);
    Ok(SimplicityReport {
        components: out,
        overall_simple,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn system(text: &str) -> CoxeterSystem {
        CoxeterSystem::new(parse_coxeter_graph(text).unwrap()).unwrap()
    }

    #[test]
    fn parse_basics() {
        let cm = parse_coxeter_graph("vertices: a b\na b 3\n").unwrap();
        assert_eq!(cm.rank(), 2);
        assert_eq!(cm.label(0, 1), Label::Finite(3));
        // unlisted pairs default to 2
        let cm = parse_coxeter_graph("# comment\nvertices: a b c\na b 3\n").unwrap();
        assert_eq!(cm.label(0, 2), Label::Finite(2));
        assert_eq!(cm.label(1, 2), Label::Finite(2));
    }

    #[test]
    fn parse_figure_group() {
        let cm = parse_coxeter_graph(
            "vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n",
        )
        .unwrap();
        assert_eq!(cm.label(0, 2), Label::Finite(2)); // a c
        assert_eq!(cm.label(2, 3), Label::Finite(2)); // c d
        assert_eq!(cm.label(1, 2), Label::Infinite);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_coxeter_graph("vertices: a b\na b 1\n").is_err());
        assert!(parse_coxeter_graph("vertices: a b\na b 3\na b 4\n").is_err());
        assert!(parse_coxeter_graph("a b 3\n").is_err());
        assert!(parse_coxeter_graph("vertices: a b\na a 3\n").is_err());
    }

    #[test]
    fn gram_entries_exact() {
        // infinite dihedral: [[1,-1],[-1,1]]
        let sys = system("vertices: s t\ns t inf\n");
        let g = sys.gram();
        assert!(g.at(0, 0).is_one());
        assert_eq!(*g.at(0, 1), Scalar::from_integer(sys.field(), -1));
        // m=3: off-diagonal -1/2 exactly
        let sys = system("vertices: s t\ns t 3\n");
        let half = num_rational::BigRational::new(
            num_bigint::BigInt::from(-1),
            num_bigint::BigInt::from(2),
        );
        assert_eq!(
            *sys.gram().at(0, 1),
            Scalar::from_rational(sys.field(), half)
        );
        // m=2: off-diagonal 0
        let sys = system("vertices: s t\n");
        assert!(sys.gram().at(0, 1).is_zero());
    }

    #[test]
    fn classify_examples() {
        // infinite dihedral: (1,0,1) affine-degenerate, det exactly 0
        let sys = system("vertices: s t\ns t inf\n");
        let c = classify_form(sys.gram()).unwrap();
        assert_eq!((c.n_plus, c.n_minus, c.n_zero), (1, 0, 1));
        assert_eq!(c.category, FormCategory::AffineDegenerate);
        assert!(sys.gram().determinant().unwrap().is_zero());
        // A2: (2,0,0)
        let sys = system("vertices: s t\ns t 3\n");
        let c = classify_form(sys.gram()).unwrap();
        assert_eq!((c.n_plus, c.n_minus, c.n_zero), (2, 0, 0));
        assert_eq!(c.category, FormCategory::PositiveDefinite);
        // (2,3,7) triangle group: (2,1,0)
        let sys = system("vertices: a b c\na b 2\na c 3\nb c 7\n");
        let c = classify_form(sys.gram()).unwrap();
        assert_eq!((c.n_plus, c.n_minus, c.n_zero), (2, 1, 0));
        assert_eq!(c.category, FormCategory::IndefiniteNondegenerate);
        // figure group: indefinite non-degenerate
        let sys = system("vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n");
        let c = classify_form(sys.gram()).unwrap();
        assert_eq!(c.category, FormCategory::IndefiniteNondegenerate);
        assert_eq!(c.n_plus + c.n_minus + c.n_zero, 4);
    }

    #[test]
    fn classify_cross_check_t237_minors() {
        // Independent route: signs of the three leading principal minors via
        // exact determinants.  PD 2x2 block then a negative 3x3 determinant
        // gives signature (2,1,0) by Jacobi's rule.
        let sys = system("vertices: a b c\na b 2\na c 3\nb c 7\n");
        let g = sys.gram();
        let d1 = sub_gram(g, &[0]).determinant().unwrap();
        let d2 = sub_gram(g, &[0, 1]).determinant().unwrap();
        let d3 = g.determinant().unwrap();
        assert_eq!(d1.sign().unwrap(), 1);
        assert_eq!(d2.sign().unwrap(), 1);
        assert_eq!(d3.sign().unwrap(), -1);
    }

    #[test]
    fn components() {
        let sys = system("vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n");
        assert_eq!(
            indecomposable_components(sys.matrix()),
            vec![vec![0, 1, 2, 3]]
        );
        let sys = system("vertices: a b\n");
        assert_eq!(indecomposable_components(sys.matrix()), vec![vec![0], vec![1]]);
        let sys = system("vertices: a\n");
        assert_eq!(indecomposable_components(sys.matrix()), vec![vec![0]]);
    }

    #[test]
    fn moussong() {
        // figure group: not hyperbolic, {a,b,d} is affine of rank 3
        let sys = system("vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n");
        let rep = moussong_check(&sys, MOUSSONG_RANK_CAP).unwrap();
        assert!(!rep.hyperbolic);
        assert!(rep.affine_subsets.contains(&vec![0, 1, 3]));
        // (2,3,7): hyperbolic
        let sys = system("vertices: a b c\na b 2\na c 3\nb c 7\n");
        let rep = moussong_check(&sys, MOUSSONG_RANK_CAP).unwrap();
        assert!(rep.hyperbolic);
        assert!(rep.commuting_infinite_pairs.is_empty());
        // A2: finite, hyperbolic trivially
        let sys = system("vertices: s t\ns t 3\n");
        assert!(moussong_check(&sys, MOUSSONG_RANK_CAP).unwrap().hyperbolic);
    }

    #[test]
    fn verdicts() {
        let sys = system("vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n");
        let rep = simplicity_verdict(&sys).unwrap();
        assert_eq!(rep.components.len(), 1);
        assert_eq!(rep.components[0].2, ComponentVerdict::SimpleUniqueTrace);
        assert!(rep.overall_simple);

        let sys = system("vertices: s t\ns t inf\n");
        let rep = simplicity_verdict(&sys).unwrap();
        assert_eq!(rep.components[0].2, ComponentVerdict::AffineAmenable);
        assert!(!rep.overall_simple);

        // A2 x (2,3,7): not simple overall (finite factor)
        let sys = system(
            "vertices: s t a b c\ns t 3\na b 2\na c 3\nb c 7\n",
        );
        let rep = simplicity_verdict(&sys).unwrap();
        assert_eq!(rep.components.len(), 2);
        assert!(!rep.overall_simple);
        let verdicts: Vec<_> = rep.components.iter().map(|c| c.2).collect();
        assert!(verdicts.contains(&ComponentVerdict::Finite));
        assert!(verdicts.contains(&ComponentVerdict::SimpleUniqueTrace));
    }

    #[test]
    fn signature_invariant_under_permutation() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let sys = system("vertices: a b c d\na b 3\na d 3\nb d 3\nb c inf\n");
        let base = classify_form(sys.gram()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let mut perm: Vec<usize> = (0..4).collect();
            perm.shuffle(&mut rng);
            let permuted = sub_gram(sys.gram(), &perm);
            let c = classify_form(&permuted).unwrap();
            assert_eq!((c.n_plus, c.n_minus, c.n_zero), (base.n_plus, base.n_minus, base.n_zero));
        }
    }

    #[test]
    fn pd_principal_submatrices_stay_pd() {
        // A3: s t 3, t u 3
        let sys = system("vertices: s t u\ns t 3\nt u 3\n");
        assert_eq!(
            classify_form(sys.gram()).unwrap().category,
            FormCategory::PositiveDefinite
        );
        for mask in 1u32..8 {
            let subset: Vec<usize> = (0..3).filter(|&i| mask & (1 << i) != 0).collect();
            let c = classify_form(&sub_gram(sys.gram(), &subset)).unwrap();
            assert_eq!(c.category, FormCategory::PositiveDefinite);
        }
    }
}
