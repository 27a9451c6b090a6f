//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any criterion fails.

use std::time::Instant;

use coarse_core::analysis::{compare_likelihood_ratio, compare_uniform_variability, scrutiny_report, Problem};
use coarse_core::oracle::{default_grid, oracle_bipooling, oracle_interval};
use coarse_core::pricing::{exclusion_comparative_static, solve_menu, PricingInstance};
use coarse_core::solver::{
    compute_upper_censorship, find_bitangents, solve_cheap_talk, solve_dual_expectations, solve_general, solve_sshaped,
};
use coarse_core::structures::{build_integral_distribution, integral_cdf, payoff_auxiliary, payoff_direct};
use coarse_core::value::{EnergyAgent, EnergyParams};
use coarse_core::{FunctionModel, IntervalSolution, Kind, SolverOptions, ValueFunction};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Suite {
    failed: usize,
}

impl Suite {
    fn record(&mut self, id: u32, name: &str, outcome: Result<String, String>) {
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL {id:>2} {name}: {detail}");
            }
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_prior(rng: &mut StdRng) -> FunctionModel {
    if rng.gen_bool(0.75) {
        let (alpha, beta) = (rng.gen_range(1.0..4.0), rng.gen_range(1.0..4.0));
        FunctionModel::density(Kind::Beta { alpha, beta }, (0.0, 1.0)).unwrap()
    } else {
        let (mean, sd) = (rng.gen_range(0.0..1.0), rng.gen_range(0.1..0.5));
        FunctionModel::density(Kind::TruncatedNormal { mean, sd }, (0.0, 1.0)).unwrap()
    }
}

fn random_curvature(rng: &mut StdRng) -> FunctionModel {
    match rng.gen_range(0..3) {
        0 => FunctionModel::constant(rng.gen_range(0.5..3.0)),
        1 => {
            let c: f64 = rng.gen_range(-2.0..2.0);
            FunctionModel::curvature_expr(&format!("exp({c}*x)")).unwrap()
        }
        _ => {
            let (mean, sd) = (rng.gen_range(0.0..1.0), rng.gen_range(0.1..0.5));
            FunctionModel::curvature(Kind::TruncatedNormal { mean, sd }, (0.0, 1.0)).unwrap()
        }
    }
}

/// Draws a prior and curvature, both verified logconcave on the grid.
fn logconcave_instance(rng: &mut StdRng) -> (FunctionModel, ValueFunction) {
    loop {
        let f = random_prior(rng);
        let u2 = random_curvature(rng);
        if f.is_logconcave().logconcave && u2.is_logconcave().logconcave {
            return (f, ValueFunction::new(u2));
        }
    }
}

fn payoff_identity_gap(f: &FunctionModel, u: &ValueFunction, sol: &IntervalSolution) -> Result<f64, String> {
    let atoms = sol.atoms();
    let ig = build_integral_distribution(&atoms, f).map_err(|e| e.to_string())?;
    Ok((payoff_direct(&atoms, u) - payoff_auxiliary(&ig, f, u)).abs())
}

fn main() {
    let mut suite = Suite { failed: 0 };
    // residual maxima of every emitted solution, for criterion 3
    let mut residuals: Vec<(String, f64)> = Vec::new();
    // (f, u, solution) triples for criterion 4
    let mut identity: Vec<(FunctionModel, ValueFunction, IntervalSolution)> = Vec::new();

    // 1
    let outcome = (|| {
        let f = FunctionModel::uniform();
        let u = ValueFunction::quadratic();
        let mut worst = (0.0f64, 0.0f64);
        for n in 1..=8 {
            let t = Instant::now();
            let sol = solve_dual_expectations(&f, &u, &SolverOptions::with_n(n)).map_err(|e| e.to_string())?;
            let secs = t.elapsed().as_secs_f64();
            let mut err = 0.0f64;
            for k in 0..=n {
                err = err.max((sol.cutoffs[k] - k as f64 / n as f64).abs());
            }
            for k in 1..=n {
                err = err.max((sol.signals[k - 1] - (2 * k - 1) as f64 / (2 * n) as f64).abs());
            }
            ensure(err < 1e-8, || format!("N={n}: max error {err:.3e}"))?;
            ensure(secs < 0.1, || format!("N={n}: {secs:.3}s"))?;
            worst = (worst.0.max(err), worst.1.max(secs));
            residuals.push((format!("equal split N={n}"), sol.residuals.max()));
            identity.push((f.clone(), u.clone(), sol));
        }
        Ok(format!("max error {:.2e}, slowest {:.4}s", worst.0, worst.1))
    })();
    suite.record(1, "equal split closed form", outcome);

    // 2
    let outcome = (|| {
        let mut rng = StdRng::seed_from_u64(20_231);
        let t = Instant::now();
        let (mut dp, mut dc) = (0.0f64, 0.0f64);
        for i in 0..20 {
            let (f, u) = logconcave_instance(&mut rng);
            let n = 2 + i % 2;
            let sol = solve_dual_expectations(&f, &u, &SolverOptions::with_n(n)).map_err(|e| e.to_string())?;
            let grid = default_grid(n);
            let o = oracle_interval(&f, &u, n, grid);
            let gap = (sol.payoff - o.payoff).abs();
            let cut = sol.cutoffs.iter().zip(&o.cutoffs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            ensure(gap < 1e-5, || format!("instance {i}: payoff gap {gap:.3e}"))?;
            ensure(cut <= 2.0 / grid as f64, || format!("instance {i}: cutoff gap {cut:.3e}"))?;
            dp = dp.max(gap);
            dc = dc.max(cut);
            residuals.push((format!("oracle instance {i}"), sol.residuals.max()));
            identity.push((f, u, sol));
        }
        let secs = t.elapsed().as_secs_f64();
        ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
        Ok(format!("max payoff gap {dp:.2e}, max cutoff gap {dc:.2e}, {secs:.1}s"))
    })();
    suite.record(2, "oracle equivalence", outcome);

    // 4 uses the solutions above; 3 is reported after every solve has run
    let outcome = (|| {
        let mut worst = 0.0f64;
        for (f, u, sol) in &identity {
            worst = worst.max(payoff_identity_gap(f, u, sol)?);
        }
        ensure(worst < 1e-8, || format!("max gap {worst:.3e}"))?;
        Ok(format!("{} solutions, max gap {worst:.2e}", identity.len()))
    })();
    suite.record(4, "payoff identity", outcome);

    // 5
    let outcome = (|| {
        let mut rng = StdRng::seed_from_u64(7_002);
        let mut violations = 0;
        for i in 0..50 {
            let (f, u) = logconcave_instance(&mut rng);
            let sol = solve_dual_expectations(&f, &u, &SolverOptions::with_n(6)).map_err(|e| format!("{i}: {e}"))?;
            residuals.push((format!("scrutiny instance {i}"), sol.residuals.max()));
            if !scrutiny_report(&sol).single_dipped {
                violations += 1;
            }
        }
        ensure(violations == 0, || format!("{violations} violations"))?;
        Ok("50 instances, 0 violations".into())
    })();
    suite.record(5, "single-dipped interleaved widths", outcome);

    // 6
    let outcome = (|| {
        let mut rng = StdRng::seed_from_u64(4_004);
        let mut violations = 0;
        let mut drawn = 0;
        while drawn < 200 {
            let f = random_prior(&mut rng);
            if !f.is_logconcave().logconcave {
                continue;
            }
            drawn += 1;
            let a: f64 = rng.gen_range(0.0..0.9);
            let b: f64 = rng.gen_range(a + 0.01..1.0);
            let eps: f64 = rng.gen_range(0.0..=(1.0 - b));
            let lhs = f.phi(a + eps, b + eps).map_err(|e| e.to_string())?;
            let rhs = f.phi(a, b).map_err(|e| e.to_string())? + eps;
            if lhs > rhs + 1e-9 {
                violations += 1;
            }
        }
        ensure(violations == 0, || format!("{violations} violations"))?;
        Ok("200 draws, 0 violations".into())
    })();
    suite.record(6, "conditional-mean shift bound", outcome);

    // 7
    let outcome = (|| {
        let opts = SolverOptions::with_n(4);
        let q = ValueFunction::new(FunctionModel::constant(1.0));
        let beta = |a, b| FunctionModel::density(Kind::Beta { alpha: a, beta: b }, (0.0, 1.0)).unwrap();
        let r = compare_likelihood_ratio(
            &Problem { f: beta(2.0, 2.0), u: q.clone() },
            &Problem { f: beta(3.0, 2.0), u: q.clone() },
            &opts,
        )
        .map_err(|e| e.to_string())?;
        let prior_min = r.interleaved_shifts.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(r.precondition && prior_min >= -1e-9, || format!("prior shift min {prior_min:.3e}"))?;
        let f = FunctionModel::uniform();
        let e = ValueFunction::new(FunctionModel::curvature_expr("exp(x)").unwrap());
        let r2 = compare_likelihood_ratio(&Problem { f: f.clone(), u: q }, &Problem { f, u: e }, &opts)
            .map_err(|e| e.to_string())?;
        let curv_min = r2.interleaved_shifts.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(r2.precondition && curv_min >= -1e-9, || format!("curvature shift min {curv_min:.3e}"))?;
        for rep in [&r, &r2] {
            residuals.push(("likelihood-ratio base".into(), rep.base.residuals.max()));
            residuals.push(("likelihood-ratio shifted".into(), rep.shifted.residuals.max()));
        }
        Ok(format!("smallest shifts {prior_min:.3e} (prior), {curv_min:.3e} (curvature)"))
    })();
    suite.record(7, "likelihood-ratio comparative statics", outcome);

    // 8
    let outcome = (|| {
        let q = ValueFunction::new(FunctionModel::constant(1.0));
        let tn = |sd| FunctionModel::density(Kind::TruncatedNormal { mean: 0.5, sd }, (0.0, 1.0)).unwrap();
        let r = compare_uniform_variability(
            &Problem { f: tn(0.2), u: q.clone() },
            &Problem { f: tn(0.1), u: q },
            &SolverOptions::with_n(5),
        )
        .map_err(|e| e.to_string())?;
        residuals.push(("variability base".into(), r.base.residuals.max()));
        residuals.push(("variability shifted".into(), r.shifted.residuals.max()));
        ensure(r.precondition && r.sign_changes <= 1, || format!("{} sign changes", r.sign_changes))?;
        let pattern: String = r.interleaved_shifts.iter().map(|d| if *d > 0.0 { '+' } else { '-' }).collect();
        Ok(format!("{} sign change(s), pattern {pattern}, orientation {}", r.sign_changes, r.orientation))
    })();
    suite.record(8, "uniform-variability comparative statics", outcome);

    // 9
    let outcome = (|| {
        let f = FunctionModel::uniform();
        let u = ValueFunction::new(FunctionModel::curvature_expr("1-2*x").unwrap());
        let opts = SolverOptions::with_n(3);
        let sol = solve_sshaped(&f, &u, &opts).map_err(|e| e.to_string())?;
        residuals.push(("s-shaped".into(), sol.residuals.max()));
        let general = solve_general(&f, &u, &opts).map_err(|e| e.to_string())?;
        ensure(general.best.pair_count() == 0, || "general solve picked a pair".into())?;
        let cens = compute_upper_censorship(&f, &u).map_err(|e| e.to_string())?;
        let top = sol.cutoffs[2];
        ensure(top <= cens.s_star + 1e-6, || format!("s2 = {top} > s* = {}", cens.s_star))?;
        // I_{G*}: I_F below s*, then linear with slope F(s*) plus the pooled atom
        let s = cens.s_star;
        let (m, x_c) = (f.integrate(s, 1.0).unwrap(), f.phi(s, 1.0).unwrap());
        let ig_star = |x: f64| {
            if x <= s {
                integral_cdf(&f, x)
            } else {
                integral_cdf(&f, s) + f.cdf(s) * (x - s) + m * (x - x_c).max(0.0)
            }
        };
        let ig = build_integral_distribution(&sol.atoms(), &f).map_err(|e| e.to_string())?;
        let worst =
            (0..=2048).map(|i| i as f64 / 2048.0).fold(f64::NEG_INFINITY, |w, x| w.max(ig.value(x) - ig_star(x)));
        ensure(worst <= 1e-12, || format!("I_G exceeds I_G* by {worst:.3e}"))?;
        let oi = oracle_interval(&f, &u, 3, default_grid(3));
        let ob = oracle_bipooling(&f, &u, 3, 60);
        let gap = (sol.payoff - oi.payoff).abs();
        ensure(gap < 1e-5, || format!("oracle gap {gap:.3e}"))?;
        ensure(sol.payoff >= ob.payoff - 1e-12, || format!("bi-pooling oracle {} beats {}", ob.payoff, sol.payoff))?;
        Ok(format!("s = ({:.6}, {:.6}), s* = {s:.6}, oracle gap {gap:.2e}", sol.cutoffs[1], sol.cutoffs[2]))
    })();
    suite.record(9, "S-shaped structure", outcome);

    // 10
    let outcome = (|| {
        let f = FunctionModel::density_expr("exp(-(x-0.2)^2/0.005) + 2*exp(-(x-0.7)^2/0.125) + 0.02").unwrap();
        let u2 = FunctionModel::curvature(
            Kind::PiecewiseConstant {
                breakpoints: vec![0.35, 0.5, 0.65, 0.75],
                values: vec![-1.0, 10.0, -6.0, 3.0, -6.0],
            },
            (0.0, 1.0),
        )
        .unwrap();
        let u = ValueFunction::new(u2);
        let opts = SolverOptions::with_n(3);
        let g = solve_general(&f, &u, &opts).map_err(|e| e.to_string())?;
        let best = &g.best;
        residuals.push(("bi-pooling".into(), best.residuals.max()));
        ensure(best.pair_count() == 1, || format!("{} pair segments", best.pair_count()))?;
        ensure(best.bitangency_residual < 1e-8, || format!("bi-tangency residual {:.3e}", best.bitangency_residual))?;
        let cut = best.residuals.cutoff.iter().fold(0.0f64, |m, r| m.max(*r));
        ensure(cut < 1e-8, || format!("barycenter residual {cut:.3e}"))?;
        let interval = g
            .candidates
            .iter()
            .filter(|c| !c.label.contains('P'))
            .filter_map(|c| c.payoff)
            .fold(f64::NEG_INFINITY, f64::max);
        ensure(best.payoff >= interval, || format!("interval {interval} beats {}", best.payoff))?;
        let o = oracle_bipooling(&f, &u, 3, 100);
        let gap = (best.payoff - o.payoff).abs();
        ensure(gap < 1e-5, || format!("oracle gap {gap:.3e} (solver {}, oracle {})", best.payoff, o.payoff))?;
        let pair = best.segments.iter().find(|s| s.is_pair()).unwrap();
        Ok(format!(
            "{} bi-tangents, pair ({:.4}, {:.4}), payoff {:.6} vs interval {:.6}, oracle gap {gap:.2e}",
            find_bitangents(&u).len(),
            pair.left(),
            pair.right(),
            best.payoff,
            interval
        ))
    })();
    suite.record(10, "bi-pooling structure", outcome);

    // 11
    let outcome = (|| {
        let (beta, gamma) = (0.5, 0.05);
        let inst = PricingInstance::power_linear(FunctionModel::uniform(), beta, gamma, 3);
        let mut worst = 0.0f64;
        for i in 1..=20 {
            let phi = i as f64 / 20.0;
            let (q, p) = search_surplus(phi, beta, gamma);
            worst = worst.max((inst.q_star(phi) - q).abs() / q.max(1.0));
            worst = worst.max((inst.pi(phi) - p).abs() / p.abs().max(1.0));
        }
        ensure(worst < 1e-8, || format!("closed form vs search {worst:.3e}"))?;
        let opts = SolverOptions::default();
        let menu = solve_menu(&inst, &opts).map_err(|e| e.to_string())?;
        residuals.push(("pricing menu".into(), menu.residuals.max()));
        let rep = exclusion_comparative_static(&inst, 0.5, 0.6, &opts).map_err(|e| e.to_string())?;
        residuals.push(("pricing β=0.6".into(), rep.high.residuals.max()));
        ensure(rep.shifts[0] >= -1e-9, || format!("ŝ₁ − s₁ = {:.3e}", rep.shifts[0]))?;
        Ok(format!("search gap {worst:.2e}, ŝ₁ − s₁ = {:.4e}", rep.shifts[0]))
    })();
    suite.record(11, "pricing", outcome);

    // 12
    let outcome = (|| {
        let e = EnergyParams { theta_low: 0.01, price: 0.1, lambda1: 0.3, lambda2: 0.05 };
        let f = FunctionModel::uniform();
        let opts = SolverOptions::with_n(6);
        let gov = e.value_function(EnergyAgent::Government).map_err(|e| e.to_string())?;
        let g = solve_sshaped(&f, &gov, &opts).map_err(|e| e.to_string())?;
        let house = e.value_function(EnergyAgent::Household).map_err(|e| e.to_string())?;
        let h = solve_dual_expectations(&f, &house, &opts).map_err(|e| e.to_string())?;
        residuals.push(("energy government".into(), g.residuals.max()));
        residuals.push(("energy household".into(), h.residuals.max()));
        let w = g.widths();
        ensure(w[0] > w[1], || format!("w₁ = {:.4} ≤ w₂ = {:.4}", w[0], w[1]))?;
        ensure(h.n() == 6, || "household ladder missing".into())?;
        let ext = |s: &IntervalSolution| {
            s.cutoffs.iter().map(|c| format!("{:.3}", 0.01 + 0.99 * c)).collect::<Vec<_>>().join(" ")
        };
        Ok(format!("government [{}], household [{}]", ext(&g), ext(&h)))
    })();
    suite.record(12, "energy application", outcome);

    // 13
    let outcome = (|| {
        let f = FunctionModel::uniform();
        let mut worst = 0.0f64;
        for n in 1..=8 {
            let sol = solve_cheap_talk(&f, 1.0, &SolverOptions::with_n(n)).map_err(|e| e.to_string())?;
            residuals.push((format!("cheap talk N={n}"), sol.residuals.max()));
            for k in 0..=n {
                worst = worst.max((sol.cutoffs[k] - k as f64 / n as f64).abs());
            }
        }
        ensure(worst < 1e-8, || format!("equal split error {worst:.3e}"))?;
        let sol = solve_cheap_talk(&f, 1.25, &SolverOptions::with_n(2)).map_err(|e| e.to_string())?;
        residuals.push(("cheap talk κ=1.25".into(), sol.residuals.max()));
        let err = (sol.cutoffs[1] - 1.0 / 3.0).abs();
        ensure(err < 1e-8, || format!("s₁ error {err:.3e}"))?;
        Ok(format!("equal split error {worst:.2e}, s₁ error {err:.2e}"))
    })();
    suite.record(13, "cheap talk", outcome);

    // 3
    let worst = residuals
        .iter()
        .fold(("none".to_string(), 0.0f64), |w, (name, r)| if *r > w.1 { (name.clone(), *r) } else { w });
    let outcome = ensure(worst.1 < 1e-8, || format!("{} has residual {:.3e}", worst.0, worst.1))
        .map(|_| format!("{} solutions, worst {:.2e} ({})", residuals.len(), worst.1, worst.0));
    suite.record(3, "fixed-point residuals", outcome);

    println!("{} criteria failed", suite.failed);
    if suite.failed > 0 {
        std::process::exit(1);
    }
}

/// Maximizes `φ q^β − γ q` by golden section, then bisects the derivative.
fn search_surplus(phi: f64, beta: f64, gamma: f64) -> (f64, f64) {
    let obj = |q: f64| phi * q.powf(beta) - gamma * q;
    let mut hi = 1.0;
    while obj(2.0 * hi) > obj(hi) {
        hi *= 2.0;
    }
    let (mut a, mut b) = (0.0, 2.0 * hi);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-9 * b {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if obj(c) >= obj(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let slope = |q: f64| phi * beta * q.powf(beta - 1.0) - gamma;
    let (mut lo, mut up) = (0.5 * a, 2.0 * b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    let q = 0.5 * (lo + up);
    (q, obj(q))
}
