//! Brute-force maximization of the primal payoff.
//!
//! Nothing here touches the fixed-point solvers: cutoffs are searched
//! exhaustively on a grid (the payoff is additive over segments, so the
//! search over all monotone cutoff vectors is a dynamic program), then
//! polished by coordinate descent.

use crate::funcmodel::FunctionModel;
use crate::structures::{BiPoolingSolution, IntervalSolution, Residuals, Segment};
use crate::value::ValueFunction;

pub const DEFAULT_GRID_N2: usize = 200;
pub const DEFAULT_GRID_N3: usize = 120;
const REFINE_ROUNDS: usize = 3;

/// Default grid for a budget of `n` signals.
pub fn default_grid(n: usize) -> usize {
    if n <= 2 {
        DEFAULT_GRID_N2
    } else {
        DEFAULT_GRID_N3
    }
}

fn segment_value(f: &FunctionModel, u: &ValueFunction, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (m0, m1) = f.moments(a, b);
    if m0 <= 0.0 {
        return 0.0;
    }
    m0 * u.value(a + m1 / m0)
}

fn interval_payoff(f: &FunctionModel, u: &ValueFunction, cutoffs: &[f64]) -> f64 {
    cutoffs.windows(2).map(|w| segment_value(f, u, w[0], w[1])).sum()
}

/// Best interval partition with `n` cells among grid cutoffs, refined.
pub fn oracle_interval(f: &FunctionModel, u: &ValueFunction, n: usize, grid: usize) -> IntervalSolution {
    let g = grid.max(n);
    let mut cutoffs = vec![0.0; n + 1];
    cutoffs[n] = 1.0;
    if n > 1 {
        let pts: Vec<f64> = (0..=g).map(|i| i as f64 / g as f64).collect();
        let mut v = vec![0.0; (g + 1) * (g + 1)];
        for i in 0..g {
            for j in i + 1..=g {
                v[i * (g + 1) + j] = segment_value(f, u, pts[i], pts[j]);
            }
        }
        // best[k][j]: best value of k cells covering [0, pts[j]]
        let mut best = vec![vec![f64::NEG_INFINITY; g + 1]; n + 1];
        let mut arg = vec![vec![0usize; g + 1]; n + 1];
        best[0][0] = 0.0;
        for k in 1..=n {
            for j in k..=g {
                for i in k - 1..j {
                    let c = best[k - 1][i] + v[i * (g + 1) + j];
                    if c > best[k][j] {
                        best[k][j] = c;
                        arg[k][j] = i;
                    }
                }
            }
        }
        let mut j = g;
        for k in (1..=n).rev() {
            let i = arg[k][j];
            cutoffs[k - 1] = pts[i];
            j = i;
        }
        let h = 1.0 / g as f64;
        coordinate_descent(&mut cutoffs, h, |c| interval_payoff(f, u, c));
    }
    let mut sol = IntervalSolution::from_cutoffs(f, u, cutoffs).expect("oracle cutoffs have positive mass");
    sol.residuals = Residuals::default();
    sol
}

/// Polishes interior coordinates with halving steps, keeping them ordered.
fn coordinate_descent(x: &mut [f64], h: f64, payoff: impl Fn(&[f64]) -> f64) {
    let last = x.len() - 1;
    let mut best = payoff(x);
    let mut step = h;
    for _ in 0..REFINE_ROUNDS {
        step *= 0.5;
        let mut moved = true;
        while moved {
            moved = false;
            for i in 1..last {
                for dir in [-1.0, 1.0] {
                    loop {
                        let old = x[i];
                        let new = old + dir * step;
                        if new <= x[i - 1] || new >= x[i + 1] {
                            break;
                        }
                        x[i] = new;
                        let v = payoff(x);
                        if v > best {
                            best = v;
                            moved = true;
                        } else {
                            x[i] = old;
                            break;
                        }
                    }
                }
            }
        }
    }
}

/// Point where the conditional CDF on `(a, b)` reaches the first atom's
/// weight, with the MPC slack `I_F − I_G` there. `None` if the atoms are not
/// strictly inside the segment around its mean.
///
/// `I_G − I_F` is concave between the atoms and maximal at that point, so it
/// alone decides feasibility.
fn tangent_point(f: &FunctionModel, a: f64, b: f64, x1: f64, x2: f64) -> Option<(f64, f64)> {
    if !(a < x1 && x1 < x2 && x2 < b) {
        return None;
    }
    let (m0, m1) = f.moments(a, b);
    if m0 <= 0.0 {
        return None;
    }
    let mean = a + m1 / m0;
    if !(x1 < mean && mean < x2) {
        return None;
    }
    let w1 = (x2 - mean) / (x2 - x1);
    let target = f.cdf(a) + w1 * m0;
    let (mut lo, mut hi) = (a, b);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f.cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = hi.clamp(x1, x2);
    let (c0, c1) = f.moments(a, t);
    // ∫_a^t (F(s) − F(a)) ds = (t − a) m0 − ∫_a^t (s − a) f
    let ifc = (t - a) * c0 - c1;
    Some((hi, ifc - w1 * m0 * (t - x1)))
}

/// Whether two atoms with the mean-preserving weights form a contraction of
/// the prior restricted to `(a, b)`.
pub fn pair_feasible(f: &FunctionModel, a: f64, b: f64, x1: f64, x2: f64) -> bool {
    tangent_point(f, a, b, x1, x2).is_some_and(|(_, slack)| slack >= -1e-12)
}

/// Segments with at most one pair: pair atoms are given for segment `pair`.
fn bipooling_payoff(
    f: &FunctionModel,
    u: &ValueFunction,
    cutoffs: &[f64],
    pair: usize,
    atoms: (f64, f64),
) -> Option<f64> {
    let mut total = 0.0;
    for (k, w) in cutoffs.windows(2).enumerate() {
        if k == pair {
            total += pair_value(f, u, w[0], w[1], atoms.0, atoms.1)?;
        } else {
            total += segment_value(f, u, w[0], w[1]);
        }
    }
    Some(total)
}

fn pair_value(f: &FunctionModel, u: &ValueFunction, a: f64, b: f64, x1: f64, x2: f64) -> Option<f64> {
    if x1 == x2 {
        let (m0, m1) = f.moments(a, b);
        let mean = a + m1 / m0;
        return ((mean - x1).abs() < 1e-15).then(|| m0 * u.value(x1));
    }
    if !pair_feasible(f, a, b, x1, x2) {
        return None;
    }
    let (m0, m1) = f.moments(a, b);
    let mean = a + m1 / m0;
    let w2 = (mean - x1) / (x2 - x1);
    Some(m0 * ((1.0 - w2) * u.value(x1) + w2 * u.value(x2)))
}

/// Best structure of `n − 2` single segments plus one two-atom segment
/// (possibly degenerate) on grid cutoffs and grid atoms, refined.
pub fn oracle_bipooling(f: &FunctionModel, u: &ValueFunction, n: usize, grid: usize) -> BiPoolingSolution {
    if n < 2 {
        let sol = oracle_interval(f, u, 1, grid);
        return BiPoolingSolution::from_interval(&sol);
    }
    let g = grid.max(n);
    let h = 1.0 / g as f64;
    let pts: Vec<f64> = (0..=g).map(|i| i as f64 / g as f64).collect();
    let uvals: Vec<f64> = pts.iter().map(|x| u.value(*x)).collect();
    let k_segments = n - 1;

    // best pair split of each grid segment
    let mut pair_cache: std::collections::HashMap<(usize, usize), (f64, f64, f64)> = Default::default();
    let mut pair_best = |i: usize, j: usize| -> (f64, f64, f64) {
        *pair_cache.entry((i, j)).or_insert_with(|| {
            let (a, b) = (pts[i], pts[j]);
            let (m0, m1) = f.moments(a, b);
            let mean = a + m1 / m0;
            let mut best = (m0 * u.value(mean), mean, mean);
            for p in i + 1..j {
                if pts[p] >= mean {
                    break;
                }
                for q in (p + 1..j).rev() {
                    if pts[q] <= mean {
                        break;
                    }
                    let w2 = (mean - pts[p]) / (pts[q] - pts[p]);
                    let v = m0 * ((1.0 - w2) * uvals[p] + w2 * uvals[q]);
                    if v > best.0 && pair_feasible(f, a, b, pts[p], pts[q]) {
                        best = (v, pts[p], pts[q]);
                    }
                }
            }
            best
        })
    };

    let mut single = vec![f64::NAN; (g + 1) * (g + 1)];
    let mut sv = |i: usize, j: usize| -> f64 {
        let c = &mut single[i * (g + 1) + j];
        if c.is_nan() {
            *c = segment_value(f, u, pts[i], pts[j]);
        }
        *c
    };

    // dp[k][j][used]: best over k segments covering [0, pts[j]]
    let neg = f64::NEG_INFINITY;
    let mut dp = vec![vec![[neg; 2]; g + 1]; k_segments + 1];
    let mut from = vec![vec![[(0usize, false); 2]; g + 1]; k_segments + 1];
    dp[0][0][0] = 0.0;
    for k in 1..=k_segments {
        let last = k == k_segments;
        for j in k..=g {
            if last && j != g {
                continue;
            }
            for i in k - 1..j {
                for used in 0..2 {
                    let base = dp[k - 1][i][used];
                    if base == neg {
                        continue;
                    }
                    let c = base + sv(i, j);
                    if c > dp[k][j][used] {
                        dp[k][j][used] = c;
                        from[k][j][used] = (i, false);
                    }
                    if used == 0 {
                        let c = base + pair_best(i, j).0;
                        if c > dp[k][j][1] {
                            dp[k][j][1] = c;
                            from[k][j][1] = (i, true);
                        }
                    }
                }
            }
        }
    }

    let mut idx = vec![0usize; k_segments + 1];
    idx[k_segments] = g;
    let mut pair_at = 0;
    let (mut j, mut used) = (g, 1usize);
    for k in (1..=k_segments).rev() {
        let (i, is_pair) = from[k][j][used];
        if is_pair {
            pair_at = k - 1;
            used = 0;
        }
        idx[k - 1] = i;
        j = i;
    }
    let (_, x1, x2) = pair_best(idx[pair_at], idx[pair_at + 1]);

    // coordinates: interior cutoffs, then the two atoms
    let mut cutoffs: Vec<f64> = idx.iter().map(|i| pts[*i]).collect();
    let mut atoms = (x1, x2);
    let eval = |c: &[f64], at: (f64, f64)| bipooling_payoff(f, u, c, pair_at, at).unwrap_or(neg);
    let mut best = eval(&cutoffs, atoms);
    let mut step = h;
    for _ in 0..REFINE_ROUNDS {
        step *= 0.5;
        let mut moved = true;
        while moved {
            moved = false;
            let n_coords = cutoffs.len() - 2 + 2;
            for c in 0..n_coords {
                for dir in [-1.0, 1.0] {
                    loop {
                        let mut cand_cut = cutoffs.clone();
                        let mut cand_at = atoms;
                        if c + 2 < n_coords {
                            let i = c + 1;
                            cand_cut[i] += dir * step;
                            if cand_cut[i] <= cand_cut[i - 1] || cand_cut[i] >= cand_cut[i + 1] {
                                break;
                            }
                            if atoms.0 == atoms.1 && (i == pair_at || i == pair_at + 1) {
                                let (a, b) = (cand_cut[pair_at], cand_cut[pair_at + 1]);
                                let m = f.mean_raw(a, b).unwrap_or(atoms.0);
                                cand_at = (m, m);
                            }
                        } else if atoms.0 == atoms.1 {
                            break;
                        } else if c + 2 == n_coords {
                            cand_at.0 += dir * step;
                        } else {
                            cand_at.1 += dir * step;
                        }
                        let v = eval(&cand_cut, cand_at);
                        if v > best {
                            best = v;
                            cutoffs = cand_cut;
                            atoms = cand_at;
                            moved = true;
                        } else {
                            break;
                        }
                    }
                }
            }
        }
    }

    // a pair is weakly beaten by the interval split at its tangent point
    // when that split, a spread of the pair, pays at least as much
    if atoms.0 != atoms.1 {
        let (a, b) = (cutoffs[pair_at], cutoffs[pair_at + 1]);
        if let Some((t, _)) = tangent_point(f, a, b, atoms.0, atoms.1) {
            let mut split = cutoffs.clone();
            split.insert(pair_at + 1, t);
            if interval_payoff(f, u, &split) >= best - 1e-12 {
                let mut sol = IntervalSolution::from_cutoffs(f, u, split).expect("positive mass");
                sol.residuals = Residuals::default();
                return BiPoolingSolution::from_interval(&sol);
            }
        }
    }

    let mut segments = Vec::with_capacity(k_segments);
    for (k, w) in cutoffs.windows(2).enumerate() {
        let (m0, m1) = f.moments(w[0], w[1]);
        let mean = w[0] + m1 / m0;
        if k == pair_at && atoms.0 != atoms.1 {
            let w2 = (mean - atoms.0) / (atoms.1 - atoms.0);
            segments.push(Segment::Pair { x1: atoms.0, x2: atoms.1, mass1: m0 * (1.0 - w2), mass2: m0 * w2 });
        } else {
            segments.push(Segment::Single { x: mean, mass: m0 });
        }
    }
    BiPoolingSolution { cutoffs, segments, payoff: best, residuals: Residuals::default(), bitangency_residual: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::Kind;
    use crate::structures::build_integral_distribution;

    #[test]
    fn equal_split_on_grid() {
        let f = FunctionModel::uniform();
        let u = ValueFunction::quadratic();
        let o = oracle_interval(&f, &u, 2, 400);
        assert!((o.cutoffs[1] - 0.5).abs() <= 1.0 / 400.0);
        assert!((o.payoff - 0.3125).abs() < 1e-12);
    }

    #[test]
    fn null_information() {
        let f = FunctionModel::density(Kind::Beta { alpha: 2.0, beta: 3.0 }, (0.0, 1.0)).unwrap();
        let o = oracle_interval(&f, &ValueFunction::quadratic(), 1, 100);
        assert_eq!(o.cutoffs, vec![0.0, 1.0]);
        assert!((o.signals[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn dp_matches_exhaustive_enumeration() {
        let f = FunctionModel::density(Kind::Beta { alpha: 2.0, beta: 2.0 }, (0.0, 1.0)).unwrap();
        let u = ValueFunction::new(FunctionModel::curvature_expr("exp(2*x)").unwrap());
        let g = 30;
        let mut best = f64::NEG_INFINITY;
        for i in 1..g {
            for j in i + 1..g {
                let c = [0.0, i as f64 / g as f64, j as f64 / g as f64, 1.0];
                best = best.max(interval_payoff(&f, &u, &c));
            }
        }
        let o = oracle_interval(&f, &u, 3, g);
        assert!(o.payoff >= best - 1e-14);
        assert!(o.payoff - best < 1e-3);
    }

    #[test]
    fn pair_feasibility_against_grid() {
        let f = FunctionModel::uniform();
        // the uniform prior on (0.2, 0.8) split at its mean
        // equal weights: the widest feasible pair splits the segment at its mean
        assert!(pair_feasible(&f, 0.2, 0.8, 0.35, 0.65));
        assert!(pair_feasible(&f, 0.2, 0.8, 0.4, 0.6));
        assert!(!pair_feasible(&f, 0.2, 0.8, 0.3, 0.7));
        assert!(!pair_feasible(&f, 0.2, 0.8, 0.21, 0.79));
        assert!(!pair_feasible(&f, 0.2, 0.8, 0.1, 0.7));
        for (x1, x2) in [(0.3, 0.7), (0.34, 0.66), (0.26, 0.74), (0.25, 0.6)] {
            let mean = 0.5;
            let w2 = (mean - x1) / (x2 - x1);
            let atoms = [(0.1, 0.2), (x1, 0.6 * (1.0 - w2)), (x2, 0.6 * w2), (0.9, 0.2)];
            let grid_ok = build_integral_distribution(&atoms, &f).is_ok();
            assert_eq!(grid_ok, pair_feasible(&f, 0.2, 0.8, x1, x2), "{x1} {x2}");
        }
    }

    #[test]
    fn convex_value_gives_degenerate_pair() {
        let f = FunctionModel::uniform();
        let u = ValueFunction::quadratic();
        let o = oracle_bipooling(&f, &u, 3, 60);
        assert_eq!(o.pair_count(), 0);
        // the pair opens into the three-cell equal split
        assert_eq!(o.signal_count(), 3);
        assert!((o.payoff - 35.0 / 108.0).abs() < 1e-4);
    }
}
