//! Arbitrary curvature: interval partitions mixed with bi-pooling segments.
//!
//! Pair atoms are the tangency points of bi-tangent lines of `u`. Every
//! placement of singles and pairs within the signal budget is solved with the
//! shared sweep, checked for feasibility, and ranked by payoff.

use serde::Serialize;

use super::engine::{CutoffRule, Iteration, SegmentKind, Setup};
use super::sshaped::sign_changes;
use super::SolverOptions;
use crate::error::{Error, Result};
use crate::funcmodel::FunctionModel;
use crate::structures::{BiPoolingSolution, Residuals, Segment};
use crate::value::ValueFunction;

const SCAN: usize = 256;
const SUPPORT_GRID: usize = 512;
const BITANGENT_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-9;
const FEASIBILITY_GRID: usize = 2048;
const FEASIBILITY_TOL: f64 = 1e-10;
const RELAXATION: [f64; 3] = [1.0, 0.5, 0.2];

/// A line touching `u` at `x1 < x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bitangent {
    pub x1: f64,
    pub x2: f64,
    /// The line lies above `u` between the touching points.
    pub upper: bool,
    /// Largest of the slope mismatch and the tangency gap.
    pub residual: f64,
}

/// Pieces of constant curvature sign: `(left, right, convex)`.
fn curvature_pieces(u2: &FunctionModel) -> Vec<(f64, f64, bool)> {
    let changes = sign_changes(u2);
    let Some(first) = changes.first() else {
        return Vec::new();
    };
    let mut pieces = Vec::with_capacity(changes.len() + 1);
    let mut left = 0.0;
    let mut convex = first.1;
    for (x, _) in &changes {
        pieces.push((left, *x, convex));
        left = *x;
        convex = !convex;
    }
    pieces.push((left, 1.0, convex));
    pieces
}

/// Point of `[a, b]` where `u′` equals `d`; `u′` is monotone there.
fn slope_preimage(u: &ValueFunction, a: f64, b: f64, d: f64) -> Option<f64> {
    let (ga, gb) = (u.slope(a) - d, u.slope(b) - d);
    if ga * gb > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (u.slope(mid) - d > 0.0) == (ga > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

fn tangency_gap(u: &ValueFunction, x1: f64, x2: f64) -> f64 {
    u.value(x2) - u.value(x1) - u.slope(x1) * (x2 - x1)
}

fn supports(u: &ValueFunction, x1: f64, x2: f64, upper: bool) -> bool {
    let d = u.slope(x1);
    let u1 = u.value(x1);
    (1..SUPPORT_GRID).all(|i| {
        let t = x1 + (x2 - x1) * i as f64 / SUPPORT_GRID as f64;
        let gap = u1 + d * (t - x1) - u.value(t);
        if upper {
            gap >= -1e-9
        } else {
            gap <= 1e-9
        }
    })
}

/// All bi-tangent lines of `u`, each touching two pieces of equal curvature
/// sign on either side of opposite-sign pieces.
pub fn find_bitangents(u: &ValueFunction) -> Vec<Bitangent> {
    let pieces = curvature_pieces(u.curvature());
    let mut out = Vec::new();
    for i in 0..pieces.len() {
        for k in (i + 2..pieces.len()).step_by(2) {
            let (a0, a1, convex) = pieces[i];
            let (b0, b1, _) = pieces[k];
            let gap_at = |x1: f64| slope_preimage(u, b0, b1, u.slope(x1)).map(|x2| (x2, tangency_gap(u, x1, x2)));
            let mut prev: Option<(f64, f64)> = None;
            for j in 0..=SCAN {
                let x1 = a0 + (a1 - a0) * j as f64 / SCAN as f64;
                let Some((_, g)) = gap_at(x1) else {
                    prev = None;
                    continue;
                };
                if let Some((xp, gp)) = prev {
                    if (gp > 0.0) != (g > 0.0) || g == 0.0 {
                        if let Some(bt) = refine(u, &gap_at, xp, x1, gp, !convex) {
                            if !out
                                .iter()
                                .any(|o: &Bitangent| (o.x1 - bt.x1).abs() < 1e-8 && (o.x2 - bt.x2).abs() < 1e-8)
                            {
                                out.push(bt);
                            }
                        }
                    }
                }
                prev = Some((x1, g));
            }
        }
    }
    out.sort_by(|a, b| a.x1.total_cmp(&b.x1));
    out
}

fn refine(
    u: &ValueFunction,
    gap_at: &impl Fn(f64) -> Option<(f64, f64)>,
    mut lo: f64,
    mut hi: f64,
    glo: f64,
    upper: bool,
) -> Option<Bitangent> {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let (_, g) = gap_at(mid)?;
        if (g > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let x1 = 0.5 * (lo + hi);
    let (x2, g) = gap_at(x1)?;
    let residual = (u.slope(x1) - u.slope(x2)).abs().max(g.abs());
    if residual > BITANGENT_TOL || !supports(u, x1, x2, upper) {
        return None;
    }
    Some(Bitangent { x1, x2, upper, residual })
}

/// Grid verdict for two atoms replacing the prior on `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairFeasibility {
    pub feasible: bool,
    /// Prior mean of the segment.
    pub mean: f64,
    pub mass1: f64,
    pub mass2: f64,
    /// Largest `I_G − I_F` on the segment; positive means a violation.
    pub excess: f64,
    pub at: f64,
}

/// Checks that atoms `x1 < x2` with mean-preserving masses are a
/// contraction of the prior restricted to `(a, b)`.
pub fn check_bipooling_feasibility(f: &FunctionModel, a: f64, b: f64, x1: f64, x2: f64) -> Result<PairFeasibility> {
    if !(a < b && x1 < x2) {
        return Err(Error::Domain { a, b });
    }
    let (m0, m1) = f.moments(a, b);
    if m0 <= 0.0 {
        return Err(Error::ZeroMass { a, b });
    }
    let mean = a + m1 / m0;
    let inside = a <= x1 && x2 <= b && x1 <= mean && mean <= x2;
    let w1 = ((x2 - mean) / (x2 - x1)).clamp(0.0, 1.0);
    let (mass1, mass2) = (w1 * m0, (1.0 - w1) * m0);
    let mut worst = (a, f64::NEG_INFINITY);
    let pts = (0..=FEASIBILITY_GRID).map(|i| a + (b - a) * i as f64 / FEASIBILITY_GRID as f64).chain([x1, x2]);
    for t in pts.filter(|t| (a..=b).contains(t)) {
        let (c0, c1) = f.moments(a, t);
        let ifc = (t - a) * c0 - c1;
        let igc = mass1 * (t - x1).max(0.0) + mass2 * (t - x2).max(0.0);
        let e = igc - ifc;
        if e > worst.1 {
            worst = (t, e);
        }
    }
    Ok(PairFeasibility {
        feasible: inside && worst.1 <= FEASIBILITY_TOL,
        mean,
        mass1,
        mass2,
        excess: worst.1,
        at: worst.0,
    })
}

/// Outcome of one candidate structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    /// `S` for a single, `P` for a pair, left to right.
    pub label: String,
    pub pairs: Vec<(f64, f64)>,
    pub payoff: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct GeneralSolution {
    pub best: BiPoolingSolution,
    pub bitangents: Vec<Bitangent>,
    pub candidates: Vec<Candidate>,
    /// Other feasible structures within tolerance of the best payoff.
    pub ties: Vec<BiPoolingSolution>,
}

fn label(segments: &[SegmentKind]) -> String {
    segments.iter().map(|s| if matches!(s, SegmentKind::Pair(..)) { 'P' } else { 'S' }).collect()
}

/// Cutoffs between rough positions of each segment: pairs sit on their
/// atoms, singles are spread evenly through the gaps.
fn natural_seed(segments: &[SegmentKind]) -> Vec<f64> {
    let k = segments.len();
    let mut spans: Vec<Option<(f64, f64)>> = segments
        .iter()
        .map(|s| match s {
            SegmentKind::Pair(a, b) => Some((*a, *b)),
            SegmentKind::Fixed(x) => Some((*x, *x)),
            SegmentKind::Free => None,
        })
        .collect();
    let mut i = 0;
    while i < k {
        if spans[i].is_some() {
            i += 1;
            continue;
        }
        let start = i;
        while i < k && spans[i].is_none() {
            i += 1;
        }
        let lo = if start == 0 { 0.0 } else { spans[start - 1].unwrap().1 };
        let hi = if i == k { 1.0 } else { spans[i].unwrap().0 };
        let m = i - start;
        for (j, span) in spans[start..i].iter_mut().enumerate() {
            let x = lo + (hi - lo) * (j as f64 + 0.5) / m as f64;
            *span = Some((x, x));
        }
    }
    spans.windows(2).map(|w| 0.5 * (w[0].unwrap().1 + w[1].unwrap().0)).collect()
}

/// Solves one structure of singles and pairs and checks feasibility.
pub fn solve_structure(
    f: &FunctionModel,
    u: &ValueFunction,
    segments: &[SegmentKind],
    opts: &SolverOptions,
) -> Result<BiPoolingSolution> {
    let k = segments.len();
    if k == 0 {
        return Err(Error::InvalidOptions("empty structure".into()));
    }
    let mut seeds = vec![natural_seed(segments), vec![0.0; k - 1], vec![1.0; k - 1]];
    if let super::Seeding::Custom(s) = &opts.seeding {
        if s.len() + 1 == k {
            seeds.insert(0, s.clone());
        }
    }
    let mut best: Option<BiPoolingSolution> = None;
    let mut last_err = None;
    for seed in seeds {
        // a plain sweep first; damped sweeps settle oscillating iterates
        for relax in RELAXATION {
            let setup = Setup {
                f,
                rule: CutoffRule::Barycenter(u.curvature()),
                segments: segments.to_vec(),
                clamp: true,
                ceiling: None,
                relax,
            };
            let mut it = Iteration::new(setup, &seed);
            let outcome = it
                .run(opts.max_iter, opts.step_tol, opts.tol)
                .and_then(|r| it.check_collapse().map(|_| r))
                .and_then(|r| assemble(f, u, segments, it.cutoffs(), it.atoms(), r));
            match outcome {
                Ok(sol) => {
                    if best.as_ref().is_none_or(|b| sol.payoff > b.payoff) {
                        best = Some(sol);
                    }
                    break;
                }
                Err(e @ Error::NoConvergence { .. }) => last_err = Some(e),
                Err(e) => {
                    last_err = Some(e);
                    break;
                }
            }
        }
    }
    best.ok_or_else(|| last_err.expect("at least one seed"))
}

fn assemble(
    f: &FunctionModel,
    u: &ValueFunction,
    kinds: &[SegmentKind],
    cutoffs: &[f64],
    atoms: &[f64],
    residuals: Residuals,
) -> Result<BiPoolingSolution> {
    let mut segments = Vec::with_capacity(kinds.len());
    let mut payoff = 0.0;
    let mut bitangency = 0.0f64;
    for (i, kind) in kinds.iter().enumerate() {
        let (a, b) = (cutoffs[i], cutoffs[i + 1]);
        match *kind {
            SegmentKind::Pair(x1, x2) => {
                let chk = check_bipooling_feasibility(f, a, b, x1, x2)?;
                if !(x1 <= chk.mean && chk.mean <= x2) {
                    return Err(Error::Precondition(format!(
                        "segment ({a:.6}, {b:.6}) has mean {:.6} outside its pair",
                        chk.mean
                    )));
                }
                if !chk.feasible {
                    return Err(Error::MpcViolation { x: chk.at, excess: chk.excess });
                }
                payoff += chk.mass1 * u.value(x1) + chk.mass2 * u.value(x2);
                bitangency = bitangency.max((u.slope(x1) - u.slope(x2)).abs()).max(tangency_gap(u, x1, x2).abs());
                segments.push(Segment::Pair { x1, x2, mass1: chk.mass1, mass2: chk.mass2 });
            }
            SegmentKind::Free | SegmentKind::Fixed(_) => {
                let mass = f.integrate(a, b)?;
                let x = if let SegmentKind::Fixed(x) = *kind { x } else { f.phi(a, b)? };
                debug_assert!(matches!(kind, SegmentKind::Fixed(_)) || (x - atoms[i]).abs() < 1e-6);
                payoff += mass * u.value(x);
                segments.push(Segment::Single { x, mass });
            }
        }
    }
    Ok(BiPoolingSolution { cutoffs: cutoffs.to_vec(), segments, payoff, residuals, bitangency_residual: bitangency })
}

/// Every way to interleave `singles` free segments with the given ordered pairs.
fn interleavings(singles: usize, pairs: &[Bitangent]) -> Vec<Vec<SegmentKind>> {
    fn go(s: usize, p: &[Bitangent], cur: &mut Vec<SegmentKind>, out: &mut Vec<Vec<SegmentKind>>) {
        if s == 0 && p.is_empty() {
            out.push(cur.clone());
            return;
        }
        if s > 0 {
            cur.push(SegmentKind::Free);
            go(s - 1, p, cur, out);
            cur.pop();
        }
        if let Some((first, rest)) = p.split_first() {
            cur.push(SegmentKind::Pair(first.x1, first.x2));
            go(s, rest, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(singles, pairs, &mut Vec::new(), &mut out);
    out
}

/// Ordered, non-overlapping subsets of `pairs` of size `p`.
fn pair_subsets(pairs: &[Bitangent], p: usize) -> Vec<Vec<Bitangent>> {
    fn go(pairs: &[Bitangent], start: usize, p: usize, cur: &mut Vec<Bitangent>, out: &mut Vec<Vec<Bitangent>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..pairs.len() {
            if cur.last().is_some_and(|l| l.x2 >= pairs[i].x1) {
                continue;
            }
            cur.push(pairs[i]);
            go(pairs, i + 1, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pairs, 0, p, &mut Vec::new(), &mut out);
    out
}

/// Best signal structure within a budget of `opts.n` signals.
pub fn solve_general(f: &FunctionModel, u: &ValueFunction, opts: &SolverOptions) -> Result<GeneralSolution> {
    opts.validate()?;
    let bitangents: Vec<Bitangent> = find_bitangents(u).into_iter().filter(|b| b.upper).collect();
    let n = opts.n;
    let mut structures = Vec::new();
    for p in 0..=n / 2 {
        for subset in pair_subsets(&bitangents, p) {
            for singles in 0..=(n - 2 * p) {
                if singles + p == 0 {
                    continue;
                }
                structures.extend(interleavings(singles, &subset));
            }
        }
    }

    let mut candidates = Vec::with_capacity(structures.len());
    let mut solved: Vec<(String, BiPoolingSolution)> = Vec::new();
    for segs in &structures {
        let pairs =
            segs.iter().filter_map(|s| if let SegmentKind::Pair(a, b) = s { Some((*a, *b)) } else { None }).collect();
        let name = label(segs);
        match solve_structure(f, u, segs, opts) {
            Ok(sol) => {
                candidates.push(Candidate {
                    label: name.clone(),
                    pairs,
                    payoff: Some(sol.payoff),
                    status: "feasible".into(),
                });
                solved.push((name, sol));
            }
            Err(e) => candidates.push(Candidate { label: name, pairs, payoff: None, status: e.to_string() }),
        }
    }
    let Some(best_idx) = (0..solved.len()).max_by(|&a, &b| solved[a].1.payoff.total_cmp(&solved[b].1.payoff)) else {
        return Err(Error::NoFeasibleCandidate(candidates.len()));
    };
    let best_payoff = solved[best_idx].1.payoff;
    let (best_label, best) = solved.swap_remove(best_idx);
    let ties = solved
        .into_iter()
        .filter(|(name, s)| {
            (s.payoff - best_payoff).abs() <= TIE_TOL * (1.0 + best_payoff.abs())
                && (name != &best_label || s.cutoffs.iter().zip(&best.cutoffs).any(|(a, b)| (a - b).abs() > 1e-6))
        })
        .map(|(_, s)| s)
        .collect();
    Ok(GeneralSolution { best, bitangents, candidates, ties })
}
