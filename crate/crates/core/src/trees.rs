//! Finite truncations of the orbit trees, structural lemma checks, and the
//! ping-pong free-subgroup construction.
//!
//! For a reflection orbit T_i the tree has one vertex per connected component
//! of the chamber system cut along the mirrors of T_i, and one edge per mirror.
//! Two views are provided:
//!
//! * [`build_tree`] materialises the portion visible inside a ball of chambers,
//!   with vertex classes computed exactly from inversion sets (valid whenever
//!   the reflection window covers every separating mirror of the ball);
//! * [`valency_witness`] certifies a lower bound on the valency of a single
//!   vertex of the infinite tree, using explicit Gamma-conjugates of the orbit
//!   representative as mirrors and the quotient image as a separating invariant.
//!
//! The second view exists because orbits can be sparse: a small chamber ball
//! may intersect few mirrors of any single orbit even when every vertex of the
//! infinite tree has large valency.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::congruence::{CongruenceCtx, OrbitPartition, OrbitStatus};
use crate::error::{CoxError, Result};
use crate::group::{inversion_set, Ball, Element, GroupCtx};

/// The visible portion of an orbit tree inside a chamber ball.
#[derive(Debug, Clone)]
pub struct TruncatedTree {
    pub orbit_index: usize,
    pub radius: usize,
    /// vertex id for each ball index.
    pub vertex_of: Vec<usize>,
    /// ball indices per vertex, sorted.
    pub classes: Vec<Vec<usize>>,
    /// (smaller vertex, larger vertex, reflection index into the partition).
    pub edges: Vec<(usize, usize, usize)>,
    /// adjacency: vertex -> (neighbour vertex, reflection index).
    pub adj: Vec<Vec<(usize, usize)>>,
    /// vertex touches the outermost sphere (its valency may be undercounted).
    pub boundary: Vec<bool>,
    /// vertex containing the identity chamber.
    pub base_vertex: usize,
}

impl TruncatedTree {
    pub fn vertex_count(&self) -> usize {
        self.classes.len()
    }

    /// BFS distance between two vertices; None if not connected in the window.
    pub fn graph_distance(&self, u: usize, v: usize) -> Option<usize> {
        if u == v {
            return Some(0);
        }
        let mut dist = vec![usize::MAX; self.classes.len()];
        dist[u] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    if y == v {
                        return Some(dist[y]);
                    }
                    queue.push_back(y);
                }
            }
        }
        None
    }
}

/// Inversion sets of all ball elements as sorted reflection-index sets.
/// Errors if some inversion lies outside the partition window.
pub fn inversion_indices(
    ctx: &GroupCtx,
    partition: &OrbitPartition,
    ball: &Ball,
) -> Result<Vec<Vec<usize>>> {
    let index: HashMap<Vec<u8>, usize> = partition
        .reflections
        .iter()
        .enumerate()
        .map(|(i, r)| (r.element.canon_bytes(), i))
        .collect();
    let mut out = Vec::with_capacity(ball.len());
    for bi in 0..ball.len() {
        let inv = inversion_set(ctx, ball.get(bi))?;
        let mut idx = Vec::with_capacity(inv.len());
        for t in &inv {
            match index.get(&t.canon_bytes()) {
                Some(&i) => idx.push(i),
                None => {
                    let word = ctx.shortlex_word(t)?;
                    return Err(CoxError::PartitionCoverage(ctx.word_string(&word)));
                }
            }
        }
        idx.sort_unstable();
        out.push(idx);
    }
    Ok(out)
}

/// Build the visible portion of the tree for orbit i from a chamber ball.
///
/// Requires a stabilized partition whose reflection window covers every mirror
/// separating two ball chambers (refl_radius >= 2*radius - 1); otherwise vertex
/// classes would be computed from incomplete inversion data.
pub fn build_tree(
    ctx: &GroupCtx,
    partition: &OrbitPartition,
    ball: &Ball,
    inv_idx: &[Vec<usize>],
    i: usize,
) -> Result<TruncatedTree> {
    if partition.status != OrbitStatus::Stabilized {
        return Err(CoxError::Precondition(
            "orbit partition not stabilized; trees would misassign mirrors".into(),
        ));
    }
    if i >= partition.lambda {
        return Err(CoxError::Precondition(format!(
            "orbit index {} out of range (lambda = {})",
            i, partition.lambda
        )));
    }
    let radius = ball.radius();
    if radius > 0 && partition.refl_radius < 2 * radius - 1 {
        return Err(CoxError::TruncationTooSmall(format!(
            "refl_radius {} < 2*radius-1 = {}",
            partition.refl_radius,
            2 * radius - 1
        )));
    }
    // vertex key: the set of orbit-i mirrors separating the chamber from the
    // identity chamber.
    let mut vid: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut classes: Vec<Vec<usize>> = vec![];
    let mut vertex_of = Vec::with_capacity(ball.len());
    for bi in 0..ball.len() {
        let key: Vec<usize> = inv_idx[bi]
            .iter()
            .copied()
            .filter(|&t| partition.orbit_of[t] == i)
            .collect();
        let v = match vid.get(&key) {
            Some(&v) => v,
            None => {
                let v = classes.len();
                vid.insert(key, v);
                classes.push(vec![]);
                v
            }
        };
        classes[v].push(bi);
        vertex_of.push(v);
    }
    // edges: Cayley neighbours separated by an orbit-i mirror.
    let refl_index: HashMap<Vec<u8>, usize> = partition
        .reflections
        .iter()
        .enumerate()
        .map(|(k, r)| (r.element.canon_bytes(), k))
        .collect();
    let mut edge_set: HashMap<(usize, usize), usize> = HashMap::new();
    for bi in 0..ball.len() {
        let g = ball.get(bi);
        for s in 0..ctx.rank() {
            let h = g.mul(&ctx.generator(s));
            let hi = match ball.index_of(&h) {
                Some(hi) => hi,
                None => continue,
            };
            if vertex_of[bi] == vertex_of[hi] {
                continue;
            }
            let mirror = h.mul(&g.inv()?);
            let t = match refl_index.get(&mirror.canon_bytes()) {
                Some(&t) => t,
                None => {
                    let word = ctx.shortlex_word(&mirror)?;
                    return Err(CoxError::PartitionCoverage(ctx.word_string(&word)));
                }
            };
            debug_assert_eq!(partition.orbit_of[t], i);
            let key = (
                vertex_of[bi].min(vertex_of[hi]),
                vertex_of[bi].max(vertex_of[hi]),
            );
            edge_set.entry(key).or_insert(t);
        }
    }
    let mut edges: Vec<(usize, usize, usize)> =
        edge_set.into_iter().map(|((u, v), t)| (u, v, t)).collect();
    edges.sort_unstable();
    let mut adj = vec![vec![]; classes.len()];
    for &(u, v, t) in &edges {
        adj[u].push((v, t));
        adj[v].push((u, t));
    }
    // boundary: the class contains a chamber on the outermost sphere.
    let sphere_start = ball.len() - ball.sphere(radius).len();
    let mut boundary = vec![false; classes.len()];
    for bi in sphere_start..ball.len() {
        boundary[vertex_of[bi]] = true;
    }
    Ok(TruncatedTree {
        orbit_index: i,
        radius,
        base_vertex: vertex_of[0],
        vertex_of,
        classes,
        edges,
        adj,
        boundary,
    })
}

/// Acyclicity check; returns a cycle witness (vertex list) on failure.
pub fn check_acyclic(tree: &TruncatedTree) -> Option<Vec<usize>> {
    let n = tree.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for (ei, &(u, v, _)) in tree.edges.iter().enumerate() {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru == rv {
            // u and v already connected by earlier edges: BFS a path u -> v
            // avoiding this edge, then close the cycle.
            let mut prev = vec![usize::MAX; n];
            prev[u] = u;
            let mut queue = VecDeque::from([u]);
            while let Some(x) = queue.pop_front() {
                for (ej, &(a, b, _)) in tree.edges.iter().enumerate() {
                    if ej == ei {
                        continue;
                    }
                    for (p, q) in [(a, b), (b, a)] {
                        if p == x && prev[q] == usize::MAX {
                            prev[q] = x;
                            queue.push_back(q);
                        }
                    }
                }
            }
            let mut path = vec![v];
            let mut cur = v;
            while cur != u {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        parent[ru.max(rv)] = ru.min(rv);
    }
    None
}

/// Valency classification of a truncated tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeClass {
    I1,
    I2,
    I3,
}

impl TreeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TreeClass::I1 => "I1",
            TreeClass::I2 => "I2",
            TreeClass::I3 => "I3",
        }
    }
}

/// Classify a truncated tree and return the interior valency histogram
/// (histogram[k] = number of interior vertices of valency k).
///
/// Visible valencies only undercount the infinite tree, so a valency >= 3
/// anywhere is conclusive for I3; I1/I2 describe the window.
pub fn valency_profile(tree: &TruncatedTree) -> (TreeClass, Vec<usize>) {
    let mut hist = vec![];
    for v in 0..tree.vertex_count() {
        if tree.boundary[v] {
            continue;
        }
        let val = tree.adj[v].len();
        if hist.len() <= val {
            hist.resize(val + 1, 0);
        }
        hist[val] += 1;
    }
    let max_any = (0..tree.vertex_count())
        .map(|v| tree.adj[v].len())
        .max()
        .unwrap_or(0);
    let class = if max_any >= 3 {
        TreeClass::I3
    } else if tree.vertex_count() == 2 && tree.edges.len() == 1 {
        TreeClass::I1
    } else {
        TreeClass::I2
    };
    (class, hist)
}

/// Result of letting a group element act on a truncated tree.
#[derive(Debug, Clone)]
pub struct TreeAction {
    /// index of the tree the image lands in (= source index for gamma in Gamma).
    pub target_tree: usize,
    /// vertex -> image vertex in the target tree, where representable.
    pub vertex_map: Vec<Option<usize>>,
    /// vertices whose image chambers all left the ball.
    pub escaped: usize,
}

/// Act by g on the tree of orbit i; the image tree index is pi(g)(i).
///
/// Checks that all representable chambers of each class land in a single
/// target class (well-definedness) and that adjacency is preserved on edges
/// with both endpoints mapped.
pub fn act_on_tree(
    ctx: &GroupCtx,
    partition: &OrbitPartition,
    ball: &Ball,
    trees: &[TruncatedTree],
    i: usize,
    g: &Element,
) -> Result<TreeAction> {
    let pi = crate::congruence::pi_permutation(ctx, partition, g)?;
    let target = pi[i];
    let tree = &trees[i];
    let ttree = &trees[target];
    let mut vertex_map: Vec<Option<usize>> = vec![None; tree.vertex_count()];
    let mut escaped = 0;
    for (v, class) in tree.classes.iter().enumerate() {
        let mut image: Option<usize> = None;
        let mut any = false;
        for &bi in class {
            let img = g.mul(ball.get(bi));
            if let Some(bj) = ball.index_of(&img) {
                any = true;
                let w = ttree.vertex_of[bj];
                match image {
                    None => image = Some(w),
                    Some(prev) if prev != w => {
                        return Err(CoxError::Internal(format!(
                            "action not well defined on vertex {} of tree {}",
                            v, i
                        )));
                    }
                    _ => {}
                }
            }
        }
        if !any {
            escaped += 1;
        }
        vertex_map[v] = image;
    }
    for &(u, v, _) in &tree.edges {
        if let (Some(iu), Some(iv)) = (vertex_map[u], vertex_map[v]) {
            if iu != iv && !ttree.adj[iu].iter().any(|&(w, _)| w == iv) {
                return Err(CoxError::Internal(format!(
                    "adjacency not preserved on edge ({}, {}) of tree {}",
                    u, v, i
                )));
            }
        }
    }
    Ok(TreeAction {
        target_tree: target,
        vertex_map,
        escaped,
    })
}

/// What a tree automorphism does, as far as the truncation shows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslationKind {
    /// some vertex is fixed.
    Fixed(usize),
    /// some edge is flipped.
    Inversion(usize, usize),
    /// minimal displacement and the vertices attaining it.
    Translation { amplitude: usize, axis: Vec<usize> },
    /// too little of the action is visible to decide.
    Undetermined,
}

/// Classify the action of an automorphism of the same tree from its visible
/// vertex displacements.
pub fn detect_translation(tree: &TruncatedTree, action: &TreeAction) -> Result<TranslationKind> {
    if action.target_tree != tree.orbit_index {
        return Err(CoxError::Precondition(
            "translation detection needs an automorphism of the same tree".into(),
        ));
    }
    let mut displacements: Vec<(usize, usize)> = vec![];
    for (v, img) in action.vertex_map.iter().enumerate() {
        if let Some(w) = img {
            if let Some(d) = tree.graph_distance(v, *w) {
                displacements.push((v, d));
            }
        }
    }
    for &(v, d) in &displacements {
        if d == 0 {
            return Ok(TranslationKind::Fixed(v));
        }
    }
    for &(u, v, _) in &tree.edges {
        if action.vertex_map[u] == Some(v) && action.vertex_map[v] == Some(u) {
            return Ok(TranslationKind::Inversion(u, v));
        }
    }
    let amplitude = match displacements.iter().map(|&(_, d)| d).min() {
        Some(a) => a,
        None => return Ok(TranslationKind::Undetermined),
    };
    let axis: Vec<usize> = displacements
        .iter()
        .filter(|&&(_, d)| d == amplitude)
        .map(|&(v, _)| v)
        .collect();
    if axis.len() < 2 {
        return Ok(TranslationKind::Undetermined);
    }
    Ok(TranslationKind::Translation { amplitude, axis })
}

/// Find a tree on which gamma acts as a translation; returns the orbit index
/// and the witness. Trees are tried in order; Undetermined everywhere means
/// the truncation is too small.
pub fn find_translation_tree(
    ctx: &GroupCtx,
    partition: &OrbitPartition,
    ball: &Ball,
    trees: &[TruncatedTree],
    gamma: &Element,
) -> Result<(usize, TranslationKind)> {
    for i in 0..trees.len() {
        let action = act_on_tree(ctx, partition, ball, trees, i, gamma)?;
        if action.target_tree != i {
            continue;
        }
        if let TranslationKind::Translation { amplitude, axis } =
            detect_translation(&trees[i], &action)?
        {
            return Ok((i, TranslationKind::Translation { amplitude, axis }));
        }
    }
    Err(CoxError::TruncationTooSmall(
        "no tree shows a translation at this radius".into(),
    ))
}

/// Certified lower bound on the valency of one vertex of the infinite tree of
/// the Gamma-orbit of t0.
///
/// Mirrors are explicit conjugates gamma t0 gamma^-1 (gamma in the ball), so
/// orbit membership is certain; the chamber component is explored blocking
/// every crossing whose mirror has the same quotient image as t0, a necessary
/// condition for orbit membership. Blocking too much only shrinks the
/// component, so the reported valency is a sound lower bound.
#[derive(Debug, Clone)]
pub struct ValencyWitness {
    pub orbit_rep: Element,
    pub chamber_radius: usize,
    pub conj_radius: usize,
    /// number of distinct certified mirrors adjacent to the witness component.
    pub valency: usize,
    /// a chamber inside the witness component.
    pub vertex_chamber: Element,
    /// the adjacent certified mirrors, canonically sorted.
    pub mirrors: Vec<Element>,
    /// certified orbit elements used (conjugates of the representative).
    pub orbit_sample: Vec<Element>,
    pub component_size: usize,
}

pub fn valency_witness(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    t0: &Element,
    chamber_radius: usize,
    conj_radius: usize,
    cap: usize,
) -> Result<ValencyWitness> {
    let t0_image = cong.image(t0)?.canon_bytes();
    let conj_ball = Ball::new(ctx, conj_radius, cap)?;
    let mut gammas: Vec<Element> = vec![];
    for bi in 0..conj_ball.len() {
        let el = conj_ball.get(bi);
        if cong.is_in_gamma(el)? {
            gammas.push(el.clone());
        }
    }
    // enrich with pairwise products (still in Gamma) when the list is small
    let mut conjugators = gammas.clone();
    if gammas.len() <= 64 {
        for a in &gammas {
            for b in &gammas {
                conjugators.push(a.mul(b));
            }
        }
    }
    let mut orbit_set: HashSet<Vec<u8>> = HashSet::new();
    let mut orbit_sample: Vec<Element> = vec![];
    for el in &conjugators {
        let t = el.mul(t0).mul(&el.inv()?);
        if orbit_set.insert(t.canon_bytes()) {
            orbit_sample.push(t);
        }
    }
    // close once under conjugation by the sample itself: u t u stays in the
    // orbit because u does (reflections preserve their own orbit)
    if orbit_sample.len() <= 256 {
        let snapshot = orbit_sample.clone();
        for u in &snapshot {
            for t in &snapshot {
                let c = u.mul(t).mul(u);
                if orbit_set.insert(c.canon_bytes()) {
                    orbit_sample.push(c);
                }
            }
        }
    }
    let ball = Ball::new(ctx, chamber_radius, cap)?;
    let mut component_of: Vec<usize> = vec![usize::MAX; ball.len()];
    let mut best: Option<(usize, usize, Vec<Vec<u8>>)> = None; // (valency, start, mirrors)
    let mut ncomp = 0;
    for start in 0..ball.len() {
        if component_of[start] != usize::MAX {
            continue;
        }
        component_of[start] = ncomp;
        let mut adjacent: HashSet<Vec<u8>> = HashSet::new();
        let mut frontier = vec![start];
        while let Some(bi) = frontier.pop() {
            let g = ball.get(bi);
            for s in 0..ctx.rank() {
                let h = g.mul(&ctx.generator(s));
                let hi = match ball.index_of(&h) {
                    Some(hi) => hi,
                    None => continue,
                };
                let mirror = h.mul(&g.inv()?);
                if cong.image(&mirror)?.canon_bytes() == t0_image {
                    if orbit_set.contains(&mirror.canon_bytes()) {
                        adjacent.insert(mirror.canon_bytes());
                    }
                } else if component_of[hi] == usize::MAX {
                    component_of[hi] = ncomp;
                    frontier.push(hi);
                }
            }
        }
        let better = match &best {
            None => true,
            Some((v, _, _)) => adjacent.len() > *v,
        };
        if better {
            let mut mirrors: Vec<Vec<u8>> = adjacent.into_iter().collect();
            mirrors.sort_unstable();
            best = Some((mirrors.len(), start, mirrors));
        }
        ncomp += 1;
    }
    let (valency, start, mirror_bytes) =
        best.ok_or_else(|| CoxError::Internal("empty chamber ball".into()))?;
    let best_comp = component_of[start];
    let component_size = component_of.iter().filter(|&&c| c == best_comp).count();
    let by_bytes: HashMap<Vec<u8>, Element> = orbit_sample
        .iter()
        .map(|t| (t.canon_bytes(), t.clone()))
        .collect();
    let mirrors: Vec<Element> = mirror_bytes
        .iter()
        .map(|b| by_bytes[b].clone())
        .collect();
    Ok(ValencyWitness {
        orbit_rep: t0.clone(),
        chamber_radius,
        conj_radius,
        valency,
        vertex_chamber: ball.get(start).clone(),
        mirrors,
        orbit_sample,
        component_size,
    })
}

/// Bounds on the tree displacement d_i(chamber, g chamber): the number of
/// orbit mirrors separating the two chambers. Lower bound counts certified
/// orbit members among the separating mirrors, upper bound counts all
/// separating mirrors with the orbit's quotient image. Equal bounds give the
/// exact displacement.
pub fn displacement_bounds(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    witness: &ValencyWitness,
    g: &Element,
    chamber: &Element,
) -> Result<(usize, usize)> {
    let t0_image = cong.image(&witness.orbit_rep)?.canon_bytes();
    let orbit_set: HashSet<Vec<u8>> = witness
        .orbit_sample
        .iter()
        .map(|t| t.canon_bytes())
        .collect();
    let inv_a = inversion_set(ctx, chamber)?;
    let moved = g.mul(chamber);
    let inv_b = inversion_set(ctx, &moved)?;
    let bytes_a: HashSet<Vec<u8>> = inv_a.iter().map(|t| t.canon_bytes()).collect();
    let bytes_b: HashSet<Vec<u8>> = inv_b.iter().map(|t| t.canon_bytes()).collect();
    let mut lower = 0;
    let mut upper = 0;
    let separating = inv_a
        .iter()
        .filter(|t| !bytes_b.contains(&t.canon_bytes()))
        .chain(inv_b.iter().filter(|t| !bytes_a.contains(&t.canon_bytes())));
    for t in separating {
        if cong.image(t)?.canon_bytes() == t0_image {
            upper += 1;
            if orbit_set.contains(&t.canon_bytes()) {
                lower += 1;
            }
        }
    }
    Ok((lower, upper))
}

/// Free-subgroup certificate from a valency witness.
#[derive(Debug, Clone)]
pub struct PingPongCertificate {
    /// first generator (caller-supplied verified translation).
    pub h: Element,
    /// constructed second generator, a product of two orbit mirrors.
    pub v: Element,
    pub t1: Element,
    pub t2: Element,
    /// exact amplitude-2 displacement of the witness chamber under v, when the
    /// displacement bounds coincide.
    pub v_amplitude_exact: Option<usize>,
    /// powers of both generators checked non-trivial with exact matrices.
    pub order_checked_to: usize,
    /// half-space containment samples that verified (mirror side flips).
    pub containment_samples: usize,
}

/// Construct the second free generator v = t1 t2 from two mirrors of the
/// witness vertex and verify the ping-pong data on samples.
pub fn ping_pong_pair(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    witness: &ValencyWitness,
    h: &Element,
    cap: usize,
) -> Result<PingPongCertificate> {
    if witness.valency < 3 {
        return Err(CoxError::Precondition(format!(
            "ping-pong needs a valency >= 3 vertex, witness shows {}",
            witness.valency
        )));
    }
    let t1 = witness.mirrors[0].clone();
    let t2 = witness.mirrors[1].clone();
    let v = t1.mul(&t2);
    if v.is_identity() {
        return Err(CoxError::Internal("degenerate mirror pair".into()));
    }
    // exact order checks: no power up to the bound may be trivial.
    let order_bound = 12usize;
    for g in [&v, h] {
        let mut p = g.clone();
        for _ in 0..order_bound {
            if p.is_identity() {
                return Err(CoxError::Precondition(
                    "generator has finite order; not a translation".into(),
                ));
            }
            p = p.mul(g);
        }
    }
    // displacement of the witness chamber under v: adjacent distinct mirrors
    // give amplitude 2.
    let (lo, hi) = displacement_bounds(ctx, cong, witness, &v, &witness.vertex_chamber)?;
    let v_amplitude_exact = if lo == hi { Some(lo) } else { None };
    // half-space samples: v moves chambers across its own mirrors; check the
    // t1-side indicator flips on sample chambers near the witness vertex.
    let sample_ball = Ball::new(ctx, 3.min(witness.chamber_radius), cap)?;
    let base = &witness.vertex_chamber;
    let mut containment_samples = 0;
    for bi in 0..sample_ball.len() {
        let c = base.mul(sample_ball.get(bi));
        let side = |g: &Element| -> Result<bool> {
            Ok(inversion_set(ctx, g)?
                .iter()
                .any(|t| t == &t1))
        };
        let s0 = side(&c)?;
        let s1 = side(&v.mul(&c))?;
        if s0 != s1 {
            containment_samples += 1;
        }
    }
    Ok(PingPongCertificate {
        h: h.clone(),
        v,
        t1,
        t2,
        v_amplitude_exact,
        order_checked_to: order_bound,
        containment_samples,
    })
}

/// Exhaustive freeness check: every non-empty reduced word in h^{+-1}, v^{+-1}
/// of at most max_syllables letters must differ from the identity, evaluated
/// with exact matrices. Returns the number of words checked, or the offending
/// word as an error.
pub fn freeness_check(
    h: &Element,
    v: &Element,
    max_syllables: usize,
    cap: usize,
) -> Result<usize> {
    let letters = [h.clone(), h.inv()?, v.clone(), v.inv()?];
    let names = ["h", "h'", "v", "v'"];
    // letter i cancels letter i^1 (pairwise inverses are adjacent in `letters`)
    let inverse_of = [1usize, 0, 3, 2];
    let mut frontier: Vec<(Element, usize, Vec<usize>)> = vec![];
    let mut checked = 0usize;
    for l in 0..4 {
        frontier.push((letters[l].clone(), l, vec![l]));
    }
    for _ in 0..max_syllables {
        let mut next = vec![];
        for (el, last, word) in frontier {
            if el.is_identity() {
                let pretty: Vec<&str> = word.iter().map(|&l| names[l]).collect();
                return Err(CoxError::Internal(format!(
                    "reduced word evaluates to the identity: {}",
                    pretty.join(" ")
                )));
            }
            checked += 1;
            if checked > cap {
                return Err(CoxError::ResourceCap(format!(
                    "freeness check exceeded {} words",
                    cap
                )));
            }
            if word.len() < max_syllables {
                for l in 0..4 {
                    if l == inverse_of[last] {
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(l);
                    next.push((el.mul(&letters[l]), l, w));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(checked)
}

/// Verify the product-metric identity: the word length of g^-1 h equals the
/// sum over orbits of the per-tree displacements |N_g triangle N_h ∩ T_i|.
/// Returns the number of pairs checked.
pub fn d1_isometry_check(
    partition: &OrbitPartition,
    inv_idx: &[Vec<usize>],
    ball: &Ball,
    ctx: &GroupCtx,
) -> Result<usize> {
    let mut checked = 0;
    for a in 0..ball.len() {
        let sa: HashSet<usize> = inv_idx[a].iter().copied().collect();
        for b in (a + 1)..ball.len() {
            let sb: HashSet<usize> = inv_idx[b].iter().copied().collect();
            let mut per_orbit = vec![0usize; partition.lambda];
            for &t in sa.symmetric_difference(&sb) {
                per_orbit[partition.orbit_of[t]] += 1;
            }
            let total: usize = per_orbit.iter().sum();
            let quotient = ball.get(a).inv()?.mul(ball.get(b));
            let len = ctx.length(&quotient)?;
            if total != len {
                return Err(CoxError::Internal(format!(
                    "d1 identity fails for pair ({}, {}): {} vs {}",
                    a, b, total, len
                )));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Free-action check on the product of trees: for each non-trivial
/// gamma in Gamma within the conjugator ball and each sample chamber g, the
/// embedded vertex tuple moves: some orbit shows a positive displacement.
/// Returns the number of (gamma, chamber) pairs verified.
pub fn free_action_check(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    partition: &OrbitPartition,
    conj_radius: usize,
    sample_radius: usize,
    cap: usize,
) -> Result<usize> {
    let index: HashMap<Vec<u8>, usize> = partition
        .reflections
        .iter()
        .enumerate()
        .map(|(i, r)| (r.element.canon_bytes(), i))
        .collect();
    let conj_ball = Ball::new(ctx, conj_radius, cap)?;
    let sample_ball = Ball::new(ctx, sample_radius, cap)?;
    let mut checked = 0;
    for ci in 1..conj_ball.len() {
        let gamma = conj_ball.get(ci);
        if !cong.is_in_gamma(gamma)? {
            continue;
        }
        for bi in 0..sample_ball.len() {
            let g = sample_ball.get(bi);
            let moved = gamma.mul(g);
            let n_g: HashSet<Vec<u8>> = inversion_set(ctx, g)?
                .iter()
                .map(|t| t.canon_bytes())
                .collect();
            let n_m: HashSet<Vec<u8>> = inversion_set(ctx, &moved)?
                .iter()
                .map(|t| t.canon_bytes())
                .collect();
            let mut per_orbit = vec![0usize; partition.lambda];
            for t in n_g.symmetric_difference(&n_m) {
                match index.get(t) {
                    Some(&ti) => per_orbit[partition.orbit_of[ti]] += 1,
                    None => {
                        return Err(CoxError::PartitionCoverage(
                            "free-action check needs a larger reflection window".into(),
                        ))
                    }
                }
            }
            if per_orbit.iter().all(|&d| d == 0) {
                return Err(CoxError::Internal(format!(
                    "gamma at conjugator index {} fixes the vertex tuple of chamber {}",
                    ci, bi
                )));
            }
            checked += 1;
        }
    }
    Ok(checked)
}
