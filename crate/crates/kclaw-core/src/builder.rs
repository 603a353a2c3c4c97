//! Greedy descent of the interlacing tree: enumerate candidate claws,
//! evaluate every child's expected reduced Gram polynomial exactly, and
//! keep the child with the smallest largest root.
//!
//! A build places `d` complete claw matchings, one claw at a time. The
//! first matching is fixed to the canonical one (all first-matching leaves
//! are isospectral under permutation conjugation); every later placement
//! is chosen greedily. Node values are computed by the expected-completion
//! pipeline and compared through exact root bracketing, so the descent is
//! deterministic and certifiable.

use std::cmp::Ordering;

use num_traits::Zero;
use rayon::prelude::*;

use crate::conv::{expected_union_gram, ConvDims, TrivialValue};
use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::poly::{cmp_max_roots, RatPoly, RootBracket};
use crate::rat::{binomial, pow2, rat, ratio};
use crate::theta::{expected_completion, gram_poly_from_completion, theta_hat, FrameDims};

/// Bracket width recorded in the trail; comparisons never depend on it.
const TRAIL_BRACKET_BITS: i64 = -64;

/// One complete or partial claw matching: pairs of a right vertex and its
/// `k` left vertices, kept sorted by right vertex (0-based ids).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClawMatching {
    claws: Vec<(usize, Vec<usize>)>,
}

impl ClawMatching {
    pub fn empty() -> Self {
        Self { claws: Vec::new() }
    }

    /// The canonical complete matching: right vertex `j` takes left
    /// vertices `{j, n+j, .., (k-1)n+j}`, the stacked-identity layout.
    pub fn canonical(n: usize, k: usize) -> Self {
        let claws = (0..n)
            .map(|j| (j, (0..k).map(|c| c * n + j).collect()))
            .collect();
        Self { claws }
    }

    pub fn len(&self) -> usize {
        self.claws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.claws.is_empty()
    }

    pub fn claws(&self) -> &[(usize, Vec<usize>)] {
        &self.claws
    }

    fn insert(&mut self, right: usize, mut lefts: Vec<usize>) {
        lefts.sort_unstable();
        let pos = self.claws.partition_point(|(r, _)| *r < right);
        self.claws.insert(pos, (right, lefts));
    }

    fn uses_right(&self, right: usize) -> bool {
        self.claws.iter().any(|(r, _)| *r == right)
    }

    fn uses_left(&self, left: usize) -> bool {
        self.claws.iter().any(|(_, ls)| ls.contains(&left))
    }
}

/// A candidate claw: the canonical right vertex paired with a k-subset of
/// the free left vertices (0-based ids, lefts sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub right: usize,
    pub lefts: Vec<usize>,
}

/// Construction state: completed matchings plus the partial current one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildState {
    n: usize,
    k: usize,
    d: usize,
    completed: Vec<ClawMatching>,
    current: ClawMatching,
}

impl BuildState {
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self> {
        if n < 1 || k < 1 || d < 1 {
            return Err(Error::OutOfDomain("build state needs n, k, d >= 1".into()));
        }
        Ok(Self {
            n,
            k,
            d,
            completed: Vec::new(),
            current: ClawMatching::empty(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn completed(&self) -> &[ClawMatching] {
        &self.completed
    }

    pub fn current(&self) -> &ClawMatching {
        &self.current
    }

    /// Claws placed in the current matching.
    pub fn t(&self) -> usize {
        self.current.len()
    }

    /// Free claws remaining in the current matching.
    pub fn l(&self) -> usize {
        self.n - self.t()
    }

    pub fn is_leaf(&self) -> bool {
        self.completed.len() == self.d && self.current.is_empty()
    }

    /// Left vertices unused by the current matching, ascending.
    pub fn free_lefts(&self) -> Vec<usize> {
        (0..self.k * self.n)
            .filter(|&v| !self.current.uses_left(v))
            .collect()
    }

    /// Right vertices unused by the current matching, ascending.
    pub fn free_rights(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| !self.current.uses_right(v))
            .collect()
    }

    /// Integer multiplicity matrix of all placed claws (completed
    /// matchings plus the current partial one).
    pub fn union_matrix(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.k * self.n, self.n);
        for matching in self.completed.iter().chain(std::iter::once(&self.current)) {
            for (right, lefts) in matching.claws() {
                for &left in lefts {
                    let v = m.at(left, *right) + rat(1);
                    m.set(left, *right, v);
                }
            }
        }
        m
    }

    fn validate_candidate(&self, cand: &Candidate) -> Result<()> {
        if self.completed.len() == self.d {
            return Err(Error::OutOfDomain(
                "all matchings are already complete".into(),
            ));
        }
        if cand.lefts.len() != self.k {
            return Err(Error::OutOfDomain(format!(
                "candidate needs exactly k={} left vertices",
                self.k
            )));
        }
        if self.current.uses_right(cand.right) || cand.right >= self.n {
            return Err(Error::OutOfDomain(format!(
                "right vertex {} not free",
                cand.right
            )));
        }
        let mut seen = cand.lefts.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.k {
            return Err(Error::OutOfDomain(
                "candidate left vertices must be distinct".into(),
            ));
        }
        for &left in &cand.lefts {
            if left >= self.k * self.n || self.current.uses_left(left) {
                return Err(Error::OutOfDomain(format!("left vertex {left} not free")));
            }
        }
        Ok(())
    }

    /// State with the candidate placed but no rollover: the current
    /// matching may momentarily hold all `n` claws.
    fn applied(&self, cand: &Candidate) -> Result<Self> {
        self.validate_candidate(cand)?;
        let mut next = self.clone();
        next.current.insert(cand.right, cand.lefts.clone());
        Ok(next)
    }

    /// State after placing the candidate; a completed current matching
    /// rolls over into the completed list.
    pub fn child(&self, cand: &Candidate) -> Result<Self> {
        let mut next = self.applied(cand)?;
        if next.current.len() == next.n {
            let full = std::mem::replace(&mut next.current, ClawMatching::empty());
            next.completed.push(full);
        }
        Ok(next)
    }
}

/// All `binom(kl, k)` candidate claws of a node, in lexicographic order of
/// their left k-subsets, each headed by the smallest free right vertex.
pub fn enumerate_candidates(state: &BuildState) -> Result<Vec<Candidate>> {
    if state.completed.len() == state.d {
        return Err(Error::OutOfDomain(
            "all matchings are already complete".into(),
        ));
    }
    if state.l() == 0 {
        return Err(Error::OutOfDomain("current matching is complete".into()));
    }
    let free_lefts = state.free_lefts();
    let right = state.free_rights()[0];
    let k = state.k;
    let mut out = Vec::new();
    let mut pick = vec![0usize; k];
    // Lexicographic k-subsets of the ascending free-left list.
    fn rec(
        free: &[usize],
        k: usize,
        start: usize,
        depth: usize,
        pick: &mut Vec<usize>,
        right: usize,
        out: &mut Vec<Candidate>,
    ) {
        if depth == k {
            out.push(Candidate {
                right,
                lefts: pick.clone(),
            });
            return;
        }
        for i in start..=free.len() - (k - depth) {
            pick[depth] = free[i];
            rec(free, k, i + 1, depth + 1, pick, right, out);
        }
    }
    rec(&free_lefts, k, 0, 0, &mut pick, right, &mut out);
    Ok(out)
}

/// Union adjacency with the candidate applied, rows and columns permuted
/// so the free left vertices occupy the first `kl` rows and the free right
/// vertices the first `l` columns (ascending original ids within each
/// group), plus the averaged completion block `(1/l) J` on the free block.
pub fn assemble_a_plus(state: &BuildState, cand: Option<&Candidate>) -> Result<RatMatrix> {
    let eff = match cand {
        Some(c) => state.applied(c)?,
        None => state.clone(),
    };
    let (permuted, l) = permuted_union(&eff);
    if l == 0 {
        return Ok(permuted);
    }
    let share = ratio(1, l as i64);
    Ok(RatMatrix::from_fn(
        permuted.rows(),
        permuted.cols(),
        |i, j| {
            let mut v = permuted.at(i, j).clone();
            if i < eff.k * l && j < l {
                v += &share;
            }
            v
        },
    ))
}

fn permuted_union(state: &BuildState) -> (RatMatrix, usize) {
    let union = state.union_matrix();
    let l = state.l();
    let mut row_order = state.free_lefts();
    row_order.extend((0..state.k * state.n).filter(|&v| state.current.uses_left(v)));
    let mut col_order = state.free_rights();
    col_order.extend((0..state.n).filter(|&v| state.current.uses_right(v)));
    let permuted = RatMatrix::from_fn(state.k * state.n, state.n, |i, j| {
        union.at(row_order[i], col_order[j]).clone()
    });
    (permuted, l)
}

/// The reduced node value: expected Gram characteristic polynomial over
/// all completions of the current matching and all `d - r` future
/// matchings, with the exact trivial root `r²k` stripped (`r` = matchings
/// in play). Degree `n - 1`; the full bipartite expectation is recovered
/// as `x^(kn-n) (x² - d²k) S(result)`.
pub fn node_gram_poly(state: &BuildState, cand: Option<&Candidate>) -> Result<RatPoly> {
    let (n, k, d) = (state.n, state.k, state.d);
    if state.is_leaf() {
        if cand.is_some() {
            return Err(Error::OutOfDomain("leaf state admits no candidate".into()));
        }
        let g = state.union_matrix().gram_charpoly();
        return g
            .divide_out_root(&rat((d * d * k) as i64))
            .map_err(|e| Error::Internal(format!("leaf trivial root d²k not exact: {e}")));
    }
    let r = state.completed.len() + 1;
    let eff = match cand {
        Some(c) => state.applied(c)?,
        None => state.clone(),
    };
    let (l_eff, t_eff) = (eff.l(), eff.t());
    let g = if l_eff == 0 {
        // The candidate completed the matching: nothing random remains.
        eff.union_matrix().gram_charpoly()
    } else {
        let a_plus = assemble_a_plus(&eff, None)?;
        let tab = theta_hat(&a_plus, k, l_eff, t_eff)?;
        let dims = FrameDims::new(k * n, n, k * l_eff - 1, l_eff - 1)?;
        let plus = expected_completion(&tab, &dims, k)?;
        gram_poly_from_completion(&plus)
    };
    let reduced = g
        .divide_out_root(&rat((r * r * k) as i64))
        .map_err(|e| Error::Internal(format!("trivial root r²k = {} not exact: {e}", r * r * k)))?;
    if d == r {
        return Ok(reduced);
    }
    // Future matchings enter through the convolution, one summand each.
    let single = RatPoly::from_roots(&vec![rat(k as i64); n - 1]);
    let mut p_list = vec![reduced];
    let mut a_list = vec![TrivialValue::new(rat(r as i64), rat(k as i64))?];
    for _ in 0..d - r {
        p_list.push(single.clone());
        a_list.push(TrivialValue::sqrt_of(rat(k as i64))?);
    }
    let (folded, trivial) = expected_union_gram(&p_list, &a_list, ConvDims::new(k * n, n)?)?;
    debug_assert_eq!(trivial.value_sq(), rat((d * d * k) as i64));
    Ok(folded)
}

/// Evaluates every candidate of the node concurrently and returns the one
/// with the smallest largest root (exact comparison; lexicographically
/// first on ties). The winner is checked against the parent value.
pub fn greedy_step(state: &BuildState) -> Result<(Candidate, RatPoly)> {
    let cands = enumerate_candidates(state)?;
    let polys: Vec<RatPoly> = cands
        .par_iter()
        .map(|c| node_gram_poly(state, Some(c)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for i in 1..polys.len() {
        if cmp_max_roots(&polys[i], &polys[best])? == Ordering::Less {
            best = i;
        }
    }
    let winner = cands[best].clone();
    let poly = polys[best].clone();
    if poly.degree().is_some_and(|deg| deg >= 1) {
        let parent = node_gram_poly(state, None)?;
        if cmp_max_roots(&poly, &parent)? == Ordering::Greater {
            return Err(Error::Internal(
                "greedy winner exceeds the parent root; interlacing violated".into(),
            ));
        }
    }
    Ok((winner, poly))
}

/// Completed multigraph adjacency: a `kn x n` integer multiplicity matrix
/// with row sums `d` and column sums `kd`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigraphAdjacency {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    mult: RatMatrix,
}

impl BigraphAdjacency {
    pub fn new(n: usize, k: usize, d: usize, mult: RatMatrix) -> Result<Self> {
        if mult.rows() != k * n || mult.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "adjacency must be {}x{}, got {}x{}",
                k * n,
                n,
                mult.rows(),
                mult.cols()
            )));
        }
        for i in 0..mult.rows() {
            for j in 0..mult.cols() {
                let v = mult.at(i, j);
                if !v.is_integer() || v < &rat(0) {
                    return Err(Error::OutOfDomain(format!(
                        "multiplicity at ({i},{j}) must be a nonnegative integer, got {v}"
                    )));
                }
            }
        }
        Ok(Self { n, k, d, mult })
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.mult
    }

    /// Edges as 1-based `(left, right, multiplicity)` triples, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, u64)> {
        use num_traits::ToPrimitive;
        let mut out = Vec::new();
        for i in 0..self.mult.rows() {
            for j in 0..self.mult.cols() {
                let v = self.mult.at(i, j);
                if !v.is_zero() {
                    out.push((i + 1, j + 1, v.to_integer().to_u64().unwrap_or(u64::MAX)));
                }
            }
        }
        out
    }

    /// `n k d` header plus one `left right multiplicity` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.k, self.d);
        for (l, r, m) in self.edges() {
            out.push_str(&format!("{l} {r} {m}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty adjacency".into()))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|w| {
                w.parse()
                    .map_err(|_| Error::Parse(format!("bad header field '{w}'")))
            })
            .collect::<Result<_>>()?;
        let [n, k, d] = fields[..] else {
            return Err(Error::Parse(
                "adjacency header needs exactly 'n k d'".into(),
            ));
        };
        if n < 1 || k < 1 || d < 1 {
            return Err(Error::Parse(
                "adjacency header values must be positive".into(),
            ));
        }
        let mut mult = RatMatrix::zeros(k * n, n);
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [l, r, m] = fields[..] else {
                return Err(Error::Parse(format!("bad edge line '{line}'")));
            };
            let parse = |w: &str| -> Result<usize> {
                w.parse()
                    .map_err(|_| Error::Parse(format!("bad edge field '{w}'")))
            };
            let (l, r, m) = (parse(l)?, parse(r)?, parse(m)?);
            if l < 1 || l > k * n || r < 1 || r > n {
                return Err(Error::Parse(format!("edge ({l},{r}) out of range")));
            }
            if !mult.at(l - 1, r - 1).is_zero() {
                return Err(Error::Parse(format!("duplicate edge ({l},{r})")));
            }
            mult.set(l - 1, r - 1, rat(m as i64));
        }
        Self::new(n, k, d, mult)
    }
}

/// One placement in the construction trail (vertex ids 0-based).
#[derive(Debug, Clone)]
pub struct TrailStep {
    pub matching: usize,
    pub step: usize,
    pub candidate: Candidate,
    pub poly: RatPoly,
    pub bracket: Option<RootBracket>,
    pub forced: bool,
    pub num_candidates: usize,
}

/// Result of a full construction.
#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub graph: BigraphAdjacency,
    pub trail: Vec<TrailStep>,
    pub final_poly: RatPoly,
}

fn trail_bracket(poly: &RatPoly) -> Result<Option<RootBracket>> {
    if poly.degree().is_some_and(|deg| deg >= 1) {
        Ok(Some(poly.max_root(&pow2(TRAIL_BRACKET_BITS))?))
    } else {
        Ok(None)
    }
}

/// Builds an `(n, k, d)` multigraph by greedy descent. The first matching
/// is the canonical one; each of its placements is still pushed through
/// the node pipeline and checked against the parent value. Later matchings
/// place one claw per greedy step.
pub fn construct(n: usize, k: usize, d: usize) -> Result<BuildOutcome> {
    use num_traits::ToPrimitive;
    let mut state = BuildState::new(n, k, d)?;
    let mut trail = Vec::with_capacity(d * n);
    let canonical = ClawMatching::canonical(n, k);
    let parent = node_gram_poly(&state, None)?;
    for (right, lefts) in canonical.claws() {
        let cand = Candidate {
            right: *right,
            lefts: lefts.clone(),
        };
        let poly = node_gram_poly(&state, Some(&cand))?;
        if poly != parent {
            return Err(Error::Internal(
                "canonical placement changed the node polynomial".into(),
            ));
        }
        let num_candidates = binomial(k * state.l(), k).to_usize().unwrap_or(usize::MAX);
        trail.push(TrailStep {
            matching: 1,
            step: state.t(),
            candidate: cand.clone(),
            poly: poly.clone(),
            bracket: trail_bracket(&poly)?,
            forced: true,
            num_candidates,
        });
        state = state.child(&cand)?;
    }
    for matching in 2..=d {
        for _ in 0..n {
            let step = state.t();
            let num_candidates = enumerate_candidates(&state)?.len();
            let (cand, poly) = greedy_step(&state)?;
            trail.push(TrailStep {
                matching,
                step,
                candidate: cand.clone(),
                poly: poly.clone(),
                bracket: trail_bracket(&poly)?,
                forced: num_candidates == 1,
                num_candidates,
            });
            state = state.child(&cand)?;
        }
    }
    debug_assert!(state.is_leaf());
    let final_poly = node_gram_poly(&state, None)?;
    let graph = BigraphAdjacency::new(n, k, d, state.union_matrix())?;
    Ok(BuildOutcome {
        graph,
        trail,
        final_poly,
    })
}

/// State file: `n k d` header, `completed <count>` followed by that many
/// matchings of `n` claw lines each, then `current <t>` and `t` claw
/// lines. A claw line is the 1-based right vertex followed by its `k`
/// 1-based left vertices.
pub fn state_to_text(state: &BuildState) -> String {
    let mut out = format!("{} {} {}\n", state.n, state.k, state.d);
    out.push_str(&format!("completed {}\n", state.completed.len()));
    let claw_line = |out: &mut String, right: usize, lefts: &[usize]| {
        let ids: Vec<String> = lefts.iter().map(|l| (l + 1).to_string()).collect();
        out.push_str(&format!("{} {}\n", right + 1, ids.join(" ")));
    };
    for matching in &state.completed {
        for (right, lefts) in matching.claws() {
            claw_line(&mut out, *right, lefts);
        }
    }
    out.push_str(&format!("current {}\n", state.current.len()));
    for (right, lefts) in state.current.claws() {
        claw_line(&mut out, *right, lefts);
    }
    out
}

pub fn state_from_text(text: &str) -> Result<BuildState> {
    fn take<'a>(lines: &[&'a str], pos: &mut usize, what: &str) -> Result<&'a str> {
        let line = lines
            .get(*pos)
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?;
        *pos += 1;
        Ok(line)
    }
    fn tagged_count(lines: &[&str], pos: &mut usize, tag: &str) -> Result<usize> {
        let line = take(lines, pos, &format!("'{tag}' section"))?;
        let (word, count) = line
            .split_once(' ')
            .ok_or_else(|| Error::Parse(format!("bad '{tag}' line '{line}'")))?;
        if word != tag {
            return Err(Error::Parse(format!("expected '{tag}', got '{word}'")));
        }
        count
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad '{tag}' count")))
    }
    fn parse_claw(
        lines: &[&str],
        pos: &mut usize,
        n: usize,
        k: usize,
    ) -> Result<(usize, Vec<usize>)> {
        let line = take(lines, pos, "claw line")?;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|w| {
                w.parse()
                    .map_err(|_| Error::Parse(format!("bad vertex id '{w}'")))
            })
            .collect::<Result<_>>()?;
        let [right, lefts @ ..] = ids.as_slice() else {
            return Err(Error::Parse("empty claw line".into()));
        };
        if lefts.len() != k {
            return Err(Error::Parse(format!("claw needs k={k} left vertices")));
        }
        if *right < 1 || *right > n || lefts.iter().any(|&l| l < 1 || l > k * n) {
            return Err(Error::Parse("claw vertex out of range".into()));
        }
        Ok((right - 1, lefts.iter().map(|&l| l - 1).collect()))
    }

    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let mut pos = 0;
    let header = take(&lines, &mut pos, "state header")?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|w| {
            w.parse()
                .map_err(|_| Error::Parse(format!("bad header field '{w}'")))
        })
        .collect::<Result<_>>()?;
    let [n, k, d] = fields[..] else {
        return Err(Error::Parse("state header needs exactly 'n k d'".into()));
    };
    let mut state = BuildState::new(n, k, d)?;
    let completed_count = tagged_count(&lines, &mut pos, "completed")?;
    if completed_count > d {
        return Err(Error::Parse("more completed matchings than d".into()));
    }
    for _ in 0..completed_count {
        let mut matching = ClawMatching::empty();
        for _ in 0..n {
            let (right, lefts) = parse_claw(&lines, &mut pos, n, k)?;
            if matching.uses_right(right) || lefts.iter().any(|&l| matching.uses_left(l)) {
                return Err(Error::Parse("matching reuses a vertex".into()));
            }
            matching.insert(right, lefts);
        }
        state.completed.push(matching);
    }
    let current_count = tagged_count(&lines, &mut pos, "current")?;
    if current_count >= n {
        return Err(Error::Parse(
            "a full current matching must be listed as completed".into(),
        ));
    }
    if completed_count == d && current_count > 0 {
        return Err(Error::Parse(
            "leaf state cannot carry a partial matching".into(),
        ));
    }
    for _ in 0..current_count {
        let (right, lefts) = parse_claw(&lines, &mut pos, n, k)?;
        if state.current.uses_right(right) || lefts.iter().any(|&l| state.current.uses_left(l)) {
            return Err(Error::Parse("current matching reuses a vertex".into()));
        }
        state.current.insert(right, lefts);
    }
    if pos != lines.len() {
        return Err(Error::Parse("trailing data after state".into()));
    }
    Ok(state)
}
