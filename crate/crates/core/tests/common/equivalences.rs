//! Randomized comparisons of the estimators against the brute-force oracles.
//! Each returns the worst discrepancy seen over `cases` random inputs.

use endpower::inference::{
    fisher_exact, fit_proportional_odds, wilcoxon_rank_sum_with, CoxModel, ProportionalOddsModel, RankSumMethod, Ties,
};
use endpower::rng::Stream;
use endpower::SurvivalObservation;

use super::oracles::*;

const Z_975: f64 = 1.959963984540054;

pub struct Comparison {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.worst <= self.tolerance
    }
}

fn below(s: &mut Stream, n: u64) -> u64 {
    (s.uniform() * n as f64) as u64
}

pub fn wilcoxon_exact_vs_permutation(seed: u64, cases: usize) -> Comparison {
    let mut s = Stream::new(seed, 1, 0);
    let mut worst = 0.0f64;
    for case in 0..cases {
        let nx = 1 + below(&mut s, 8) as usize;
        let ny = 1 + below(&mut s, 8) as usize;
        // Half the cases on a coarse grid to force ties.
        let coarse = case % 2 == 0;
        let draw = |s: &mut Stream| if coarse { below(s, 5) as f64 } else { s.normal(0.0, 1.0) };
        let x: Vec<f64> = (0..nx).map(|_| draw(&mut s)).collect();
        let y: Vec<f64> = (0..ny).map(|_| draw(&mut s)).collect();
        let got = wilcoxon_rank_sum_with(&x, &y, RankSumMethod::Exact).unwrap().p_value;
        worst = worst.max((got - wilcoxon_permutation_p(&x, &y)).abs());
    }
    Comparison { name: "wilcoxon exact vs permutation", worst, tolerance: 1e-12, cases }
}

pub fn fisher_vs_enumeration(seed: u64, cases: usize) -> Comparison {
    let mut s = Stream::new(seed, 2, 0);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let r1 = 1 + below(&mut s, 12);
        let r2 = 1 + below(&mut s, 12);
        let a = below(&mut s, r1 + 1);
        let c = below(&mut s, r2 + 1);
        let got = fisher_exact::<f64>(a, r1 - a, c, r2 - c).unwrap().p_value;
        worst = worst.max((got - fisher_enumeration_p(a, r1 - a, c, r2 - c)).abs());
    }
    Comparison { name: "fisher exact vs enumeration", worst, tolerance: 1e-12, cases }
}

pub fn prop_odds_vs_two_by_two(seed: u64, cases: usize) -> Comparison {
    let mut s = Stream::new(seed, 3, 0);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let counts: Vec<u64> = (0..4).map(|_| 1 + below(&mut s, 40)).collect();
        let scores = |better: u64, worse: u64| -> Vec<u16> {
            std::iter::repeat_n(1u16, better as usize).chain(std::iter::repeat_n(2, worse as usize)).collect()
        };
        let r = fit_proportional_odds::<f64>(&scores(counts[0], counts[1]), &scores(counts[2], counts[3])).unwrap();
        let (log_or, se) = two_by_two_log_or(counts[0], counts[1], counts[2], counts[3]);
        let (lo, hi) = r.ci.unwrap();
        let fit_se = (hi.ln() - lo.ln()) / (2.0 * Z_975);
        worst = worst.max((r.estimate.ln() - log_or).abs()).max((fit_se - se).abs());
    }
    Comparison { name: "proportional odds vs 2x2 closed form", worst, tolerance: 1e-6, cases }
}

/// Two arms of distinct event/censoring times, each with at least one event.
fn tie_free_arms(s: &mut Stream) -> (Vec<SurvivalObservation>, Vec<SurvivalObservation>) {
    loop {
        let nt = 3 + below(s, 13) as usize;
        let nc = 3 + below(s, 13) as usize;
        let mut times: Vec<u32> = (1..=(nt + nc) as u32).collect();
        for i in (1..times.len()).rev() {
            times.swap(i, below(s, i as u64 + 1) as usize);
        }
        let obs: Vec<SurvivalObservation> = times
            .iter()
            .map(|&t| SurvivalObservation { time: t, event: s.uniform() < 0.7 })
            .collect();
        let (t, c) = obs.split_at(nt);
        if t.iter().any(|o| o.event) && c.iter().any(|o| o.event) {
            return (t.to_vec(), c.to_vec());
        }
    }
}

fn tied_arms(s: &mut Stream) -> (Vec<SurvivalObservation>, Vec<SurvivalObservation>) {
    let arm = |n: usize, s: &mut Stream| -> Vec<SurvivalObservation> {
        (0..n)
            .map(|_| SurvivalObservation { time: 1 + below(s, 10) as u32, event: s.uniform() < 0.7 })
            .collect()
    };
    let nt = 2 + below(s, 20) as usize;
    let nc = 2 + below(s, 20) as usize;
    (arm(nt, s), arm(nc, s))
}

pub fn cox_vs_grid(seed: u64, cases: usize) -> Comparison {
    let mut s = Stream::new(seed, 4, 0);
    let (mut worst, mut used) = (0.0f64, 0);
    for _ in 0..cases {
        let (t, c) = tie_free_arms(&mut s);
        let Ok(fit) = CoxModel::new(&t, &c, Ties::Efron).fit::<f64>() else { continue };
        if fit.beta.abs() > 8.0 {
            continue;
        }
        used += 1;
        worst = worst.max((fit.beta - cox_grid_beta(&t, &c)).abs());
    }
    Comparison { name: "cox estimate vs grid search", worst, tolerance: 1e-6, cases: used }
}

pub fn cox_score_vs_log_rank(seed: u64, cases: usize) -> Comparison {
    let mut s = Stream::new(seed, 5, 0);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let (t, c) = tie_free_arms(&mut s);
        let model = CoxModel::new(&t, &c, Ties::Efron);
        let (oe, v) = log_rank_o_minus_e(&t, &c);
        worst = worst
            .max((model.score::<f64>(0.0) - oe).abs())
            .max((model.information::<f64>(0.0) - v).abs());
    }
    Comparison { name: "cox score at 0 vs log-rank O-E and V", worst, tolerance: 1e-10, cases }
}

pub fn gradients_vs_finite_differences(seed: u64, cases: usize) -> Comparison {
    let mut s = Stream::new(seed, 6, 0);
    let mut worst = 0.0f64;
    for case in 0..cases {
        let (t, c) = tied_arms(&mut s);
        let ties = if case % 2 == 0 { Ties::Efron } else { Ties::Breslow };
        let model = CoxModel::new(&t, &c, ties);
        let beta = s.uniform() * 4.0 - 2.0;
        let fd = central_difference(|b| model.log_partial_likelihood::<f64>(b), beta, 1e-5);
        let fd2 = -central_difference(|b| model.score::<f64>(b), beta, 1e-5);
        worst = worst
            .max(rel_err(model.score::<f64>(beta), fd))
            .max(rel_err(model.information::<f64>(beta), fd2));

        let k = 3 + below(&mut s, 3) as u16;
        let draw = |n: usize, s: &mut Stream| -> Vec<u16> { (0..n).map(|_| 1 + below(s, k as u64) as u16).collect() };
        let control = draw(5 + below(&mut s, 30) as usize, &mut s);
        let treatment = draw(5 + below(&mut s, 30) as usize, &mut s);
        let Ok(po) = ProportionalOddsModel::<f64>::new(&control, &treatment) else { continue };
        let p = po.n_params();
        let mut theta: Vec<f64> = (0..p - 1).map(|_| s.uniform() * 6.0 - 3.0).collect();
        theta.sort_by(f64::total_cmp);
        for i in 1..theta.len() {
            // Keep the cutpoints strictly increasing and well apart.
            theta[i] = theta[i].max(theta[i - 1] + 0.1);
        }
        theta.push(s.uniform() * 2.0 - 1.0);
        let grad = po.gradient(&theta);
        for (i, g) in grad.iter().enumerate() {
            let f = |x: f64| {
                let mut th = theta.clone();
                th[i] = x;
                po.log_likelihood(&th)
            };
            worst = worst.max(rel_err(*g, central_difference(f, theta[i], 1e-5)));
        }
    }
    Comparison { name: "likelihood gradients vs finite differences", worst, tolerance: 1e-5, cases }
}

pub fn all(seed: u64) -> Vec<Comparison> {
    vec![
        wilcoxon_exact_vs_permutation(seed, 300),
        fisher_vs_enumeration(seed, 500),
        prop_odds_vs_two_by_two(seed, 300),
        cox_vs_grid(seed, 200),
        cox_score_vs_log_rank(seed, 300),
        gradients_vs_finite_differences(seed, 300),
    ]
}
