//! The acceptance criteria, each a named, timed, deterministic check.

use std::time::{Duration, Instant};

use bct_core::channels::{asymptotic_rate, build_digitizer, compose_seq, Channel};
use bct_core::compression::codec::{twice_atypical_mass, CROSS_CHECK_BOUND};
use bct_core::compression::oracle::{best_point_mass_codec, brute_force_codecs};
use bct_core::compression::rate::{codewords, mass_threshold};
use bct_core::compression::{
    build_codec, exact_rate, fom_tilde, message_distribution, restricted_rate, top_k_mass, Source,
};
use bct_core::dilation::{random_dilation, steer, steering_channel};
use bct_core::entropy::{
    entropies_closed_form, s1_oracle, s2_oracle, s3, s_reg, shannon, superadditivity_witness,
    EntropyKind, SearchBudget,
};
use bct_core::opt::{op_norm, op_norm_lp_oracle, Side, State, SystemShape};
use bct_core::rational::{format_rational, q, to_f64};
use bct_core::{sample, Q};
use num_traits::{One, Zero};
use rand::Rng;

use crate::report::fmt_float;

/// Absolute tolerance for every float comparison below.
pub const TOL: f64 = 1e-9;
/// Oracle bound for the brute-force codec search.
pub const CODEC_ORACLE_LIMIT: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Self::new(false, format!("error: {e}"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub budget: Duration,
    check: fn() -> Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:02} {} ({:.2} s of {} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

impl Criterion {
    pub fn run(&self) -> Verdict {
        let start = Instant::now();
        let outcome = (self.check)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= self.budget;
        let detail = if in_time {
            outcome.detail
        } else {
            format!("{}; over the time budget", outcome.detail)
        };
        Verdict {
            id: self.id,
            name: self.name,
            passed: outcome.passed && in_time,
            detail,
            elapsed,
            budget: self.budget,
        }
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub fn all() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "uniform-rate", budget: secs(10), check: uniform_rate },
        Criterion { id: 2, name: "pure-state-anomaly", budget: secs(10), check: pure_state_anomaly },
        Criterion { id: 3, name: "biased-convergence", budget: secs(60), check: biased_convergence },
        Criterion { id: 4, name: "regularized-entropy", budget: secs(10), check: regularized_entropy },
        Criterion { id: 5, name: "monoentropy-sandwich", budget: secs(30), check: monoentropy },
        Criterion { id: 6, name: "superadditivity", budget: secs(5), check: superadditivity },
        Criterion { id: 7, name: "steering-completeness", budget: secs(10), check: steering },
        Criterion { id: 8, name: "digitizer", budget: secs(5), check: digitizer },
        Criterion { id: 9, name: "codec-soundness", budget: secs(30), check: codec_soundness },
        Criterion { id: 10, name: "oracle-optimality", budget: secs(60), check: oracle_optimality },
        Criterion { id: 11, name: "counterexample", budget: secs(60), check: counterexample },
        Criterion { id: 12, name: "norm-properties", budget: secs(30), check: norm_properties },
    ]
}

/// Looks a criterion up by number or name.
pub fn find(selector: &str) -> Option<Criterion> {
    let id = selector.parse::<u8>().ok();
    all()
        .into_iter()
        .find(|c| Some(c.id) == id || c.name == selector)
}

fn uniform_rate() -> Outcome {
    let p = [q(1, 2), q(1, 2)];
    let mut bad = Vec::new();
    for eps in [q(1, 2), q(1, 10), q(1, 50)] {
        for n in 1..=18 {
            match exact_rate(&p, n, &eps) {
                Ok(m) if m as usize == n => {}
                Ok(m) => bad.push(format!("N={n} ε={}: M_min={m}", format_rational(&eps))),
                Err(e) => return Outcome::error(e),
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        if bad.is_empty() {
            "M_min = N for all 54 instances, rate 1 = (H+1)/2".to_string()
        } else {
            bad.join("; ")
        },
    )
}

fn pure_state_anomaly() -> Outcome {
    let p = [Q::one(), Q::zero()];
    let eps = q(1, 10);
    let mut values = Vec::new();
    let mut bad = Vec::new();
    for n in 1..=18usize {
        let m = match exact_rate(&p, n, &eps) {
            Ok(m) => m as usize,
            Err(e) => return Outcome::error(e),
        };
        // ½ ≤ M/N ≤ ½ + 2/N  ⇔  N ≤ 2M ≤ N + 4.
        if 2 * m < n || 2 * m > n + 4 {
            bad.push(format!("N={n}: M_min={m}"));
        }
        values.push(m.to_string());
    }
    Outcome::new(
        bad.is_empty(),
        format!("M_min for N=1..18: {}{}", values.join(","), if bad.is_empty() { String::new() } else { format!("; outside [1/2, 1/2+2/N]: {}", bad.join(", ")) }),
    )
}

fn biased_convergence() -> Outcome {
    let source = match Source::new(vec![q(9, 10), q(1, 10)]) {
        Ok(s) => s,
        Err(e) => return Outcome::error(e),
    };
    let eps = q(1, 50);
    let limit = source.information_content();
    // The pinned threshold sits just above (H+1)/2.
    let target = 0.7345;
    let mut rates = Vec::new();
    for n in 1..=18usize {
        match bct_core::compression::rate::exact_rate_source(&source, n, &eps) {
            Ok(m) => rates.push((n, m as f64 / n as f64)),
            Err(e) => return Outcome::error(e),
        }
    }
    let converse = rates.iter().all(|&(_, r)| r >= target - TOL);
    let gap = |n: usize| rates[n - 1].1 - target;
    let checkpoints = [6, 10, 14, 18];
    let gaps: Vec<f64> = checkpoints.iter().map(|&n| gap(n)).collect();
    let final_ok = gap(18) <= 0.12 + TOL;
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + TOL);
    Outcome::new(
        converse && final_ok && monotone,
        format!(
            "threshold {target} ((H+1)/2 = {}); converse {}; gaps at N=6,10,14,18: {}; gap(18) ≤ 0.12: {final_ok}; nonincreasing: {monotone}",
            fmt_float(limit),
            if converse { "holds" } else { "violated" },
            gaps.iter().map(|g| fmt_float(*g)).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn regularized_entropy() -> Outcome {
    let mut rng = sample::rng(4);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let len = rng.gen_range(2..=4);
        let p = sample::distribution(&mut rng, len);
        let h = match shannon(&p) {
            Ok(h) => h,
            Err(e) => return Outcome::error(e),
        };
        for n in 1..=10 {
            for which in EntropyKind::ALL {
                match s_reg(&p, n, which) {
                    Ok(v) => worst = worst.max((v - (h + 1.0 - 1.0 / n as f64)).abs()),
                    Err(e) => return Outcome::error(e),
                }
            }
        }
    }
    Outcome::new(
        worst <= TOL,
        format!("10 sources, N ≤ 10, both paths; worst deviation {worst:.3e}"),
    )
}

fn monoentropy() -> Outcome {
    let mut rng = sample::rng(5);
    let shapes = [vec![2], vec![3], vec![5], vec![2, 2], vec![3, 2], vec![2, 2, 2]];
    let mut worst_closed = 0.0f64;
    let mut worst_attain = 0.0f64;
    let mut worst_cross = 0.0f64;
    let mut states = 0;
    for (k, factors) in shapes.iter().cycle().take(10).enumerate() {
        let shape = SystemShape::new(factors.clone()).expect("sizes ≥ 2");
        let weights = sample::sparse_distribution(&mut rng, shape.size() as usize);
        let rho = State::new(
            shape.clone(),
            bct_core::opt::PureIndex::all(&shape).zip(weights),
        )
        .expect("normalized");
        let h = match s3(&rho) {
            Ok(h) => h,
            Err(e) => return Outcome::error(e),
        };
        let closed = entropies_closed_form(&rho, 1).expect("deterministic");
        worst_closed = worst_closed
            .max((closed.s1 - h).abs())
            .max((closed.s2 - h).abs())
            .max((closed.s3 - h).abs());
        let budget = SearchBudget {
            candidates: 100,
            max_parts: 4,
            seed: 50 + k as u64,
        };
        let (o1, o2) = match (s1_oracle(&rho, budget), s2_oracle(&rho, budget)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
        };
        worst_attain = worst_attain.max((o1.best - h).abs()).max((o2.best - h).abs());
        for v in &o1.samples {
            worst_cross = worst_cross.max(h - v);
        }
        for v in &o2.samples {
            worst_cross = worst_cross.max(v - h);
        }
        states += 1;
    }
    Outcome::new(
        worst_closed <= TOL && worst_attain <= TOL && worst_cross <= TOL,
        format!(
            "{states} states, 100 tests each; |S_i - H| ≤ {worst_closed:.1e}, attainment gap {worst_attain:.1e}, worst crossing {worst_cross:.1e}"
        ),
    )
}

fn superadditivity() -> Outcome {
    let mut rng = sample::rng(6);
    let mut bad = Vec::new();
    for k in 0..10 {
        let a = sample::shape(&mut rng, 2, 3);
        let b = sample::shape(&mut rng, 2, 3);
        let i = sample::pure_index(&mut rng, &a);
        let j = sample::pure_index(&mut rng, &b);
        match superadditivity_witness(&a, &i, &b, &j, 1) {
            Ok(r) => {
                let ok = (r.s_sigma - 1.0).abs() <= TOL
                    && (r.s_sigma2 - 3.0).abs() <= TOL
                    && r.strict_superadditivity
                    && r.additivity_violated;
                if !ok {
                    bad.push(format!("pair {k}: S(Σ)={} S(Σ⊠Σ)={}", r.s_sigma, r.s_sigma2));
                }
            }
            Err(e) => return Outcome::error(e),
        }
    }
    Outcome::new(
        bad.is_empty(),
        if bad.is_empty() {
            "10 pure pairs: S(Σ) = 1, S(Σ⊠Σ) = 3 > 2 S(Σ), S(Σ) > S(i) + S(j) = 0".to_string()
        } else {
            bad.join("; ")
        },
    )
}

fn steering() -> Outcome {
    let mut rng = sample::rng(7);
    let mut reproduced = 0;
    let mut total = 0;
    for _ in 0..5 {
        let len = rng.gen_range(2..=5);
        let p = sample::sparse_distribution(&mut rng, len);
        let rho = State::from_probabilities(&p).expect("normalized");
        for _ in 0..50 {
            let f = rng.gen_range(2..=5);
            let seed: u64 = rng.gen();
            let result = random_dilation(&rho, f, seed).and_then(|psi| {
                let c = steering_channel(&rho, &psi)?;
                Ok(steer(&rho, &c)? == *psi.joint())
            });
            match result {
                Ok(ok) => reproduced += ok as usize,
                Err(e) => return Outcome::error(e),
            }
            total += 1;
        }
    }
    Outcome::new(
        reproduced == total,
        format!("{reproduced}/{total} dilations reproduced exactly"),
    )
}

fn digitizer() -> Outcome {
    let mut rng = sample::rng(8);
    let mut bad = Vec::new();
    for _ in 0..20 {
        let a = rng.gen_range(2..=40);
        let b = rng.gen_range(2..=6);
        let ok = build_digitizer(a, b).and_then(|dg| {
            Ok(compose_seq(&dg.decoder, &dg.encoder)? == Channel::identity(a)?)
        });
        match ok {
            Ok(true) => {}
            Ok(false) => bad.push(format!("D∘E ≠ Id for ({a},{b})")),
            Err(e) => return Outcome::error(e),
        }
        let limit = ((2 * a) as f64).ln() / ((2 * b) as f64).ln();
        for k1 in 1..=200u32 {
            let m = match asymptotic_rate(a, b, k1) {
                Ok(m) => m,
                Err(e) => return Outcome::error(e),
            };
            let diff = m as f64 / k1 as f64 - limit;
            if diff < -TOL || diff > 1.0 / k1 as f64 + TOL {
                bad.push(format!("({a},{b}) k1={k1}: M/k1 - limit = {diff}"));
                break;
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        if bad.is_empty() {
            "20 size pairs: D∘E = Id; 0 ≤ M/k1 - log_{2D_B}(2D_A) ≤ 1/k1 for k1 ≤ 200".to_string()
        } else {
            bad.join("; ")
        },
    )
}

fn codec_soundness() -> Outcome {
    let p = [q(9, 10), q(1, 10)];
    let mut values = Vec::new();
    let mut equal = true;
    for n in [8usize, 12, 16] {
        let codec = match build_codec(&p, n, 0.1) {
            Ok(c) => c,
            Err(e) => return Outcome::error(e),
        };
        let d = match fom_tilde(&codec, CROSS_CHECK_BOUND) {
            Ok(d) => d,
            Err(e) => return Outcome::error(e),
        };
        equal &= d == twice_atypical_mass(codec.typical());
        values.push((n, d));
    }
    let decreasing = values.windows(2).all(|w| w[1].1 < w[0].1);
    let below = values[2].1 < q(1, 10);
    Outcome::new(
        equal && decreasing && below,
        format!(
            "D~ at N=8,12,16: {}; equals 2 P(non-typical): {equal}; decreasing: {decreasing}; below 0.1 at N=16: {below}",
            values
                .iter()
                .map(|(_, d)| fmt_float(to_f64(d)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn oracle_optimality() -> Outcome {
    let sources = [
        vec![q(1, 2), q(1, 2)],
        vec![Q::one(), Q::zero()],
        vec![q(3, 4), q(1, 4)],
        vec![q(9, 10), q(1, 10)],
        vec![q(2, 3), q(1, 3)],
        vec![q(3, 5), q(2, 5)],
    ];
    let eps_grid = [q(1, 5), q(3, 5), q(1, 1)];
    let mut instances = 0;
    let mut bad = Vec::new();
    for p in &sources {
        let source = Source::new(p.clone()).expect("normalized");
        for n in 1..=2usize {
            let msg = message_distribution(&source.state(), n).expect("small");
            let mut best = Vec::new();
            for m in 1..=2u32 {
                let oracle = match best_point_mass_codec(&msg, m, CODEC_ORACLE_LIMIT) {
                    Ok(r) => r.best_retained,
                    Err(e) => return Outcome::error(e),
                };
                if n == 1 {
                    match brute_force_codecs(&msg, m, CODEC_ORACLE_LIMIT) {
                        Ok(r) if r.best_retained == oracle => {}
                        Ok(_) => bad.push(format!("N=1 M={m}: signed brute force disagrees")),
                        Err(e) => return Outcome::error(e),
                    }
                }
                if oracle != top_k_mass(&source, n, &codewords(m)) {
                    bad.push(format!("p={:?} N={n} M={m}: top-K mass disagrees", p.iter().map(format_rational).collect::<Vec<_>>()));
                }
                best.push(oracle);
            }
            for eps in &eps_grid {
                instances += 1;
                let threshold = mass_threshold(eps);
                let oracle_m = best.iter().position(|r| *r > threshold).map(|k| k as u32 + 1);
                let exact = match exact_rate(p, n, eps) {
                    Ok(m) => m,
                    Err(e) => return Outcome::error(e),
                };
                let agrees = match oracle_m {
                    Some(m) => m == exact,
                    None => exact > 2,
                };
                if !agrees {
                    bad.push(format!("N={n} ε={}: oracle {oracle_m:?} vs exact {exact}", format_rational(eps)));
                }
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{instances} (source, N, ε) instances agree with exhaustive codec enumeration")
        } else {
            bad.join("; ")
        },
    )
}

fn counterexample() -> Outcome {
    let eps = q(1, 10);
    let mut bad = Vec::new();
    for p in [vec![q(1, 2), q(1, 2)], vec![q(9, 10), q(1, 10)]] {
        for n in 1..=6 {
            match restricted_rate(&p, n, &eps) {
                Ok(r) if r.incompressible() => {}
                Ok(r) => bad.push(format!("N={n}: M_min={} mixtures {}", r.m_min, r.m_min_mixtures)),
                Err(e) => return Outcome::error(e),
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        if bad.is_empty() {
            "M_min = N for (1/2,1/2) and (9/10,1/10), N ≤ 6, deterministic and mixed codecs".to_string()
        } else {
            bad.join("; ")
        },
    )
}

fn norm_properties() -> Outcome {
    let mut rng = sample::rng(12);
    let mut lp_mismatch = 0;
    for k in 0..200 {
        // At most 32 pure indices, inside the oracle bound.
        let shape = if k % 2 == 0 {
            sample::shape(&mut rng, 3, 2)
        } else {
            sample::shape(&mut rng, 2, 4)
        };
        let d = sample::delta(&mut rng, &shape);
        lp_mismatch += (op_norm_lp_oracle(&d, bct_core::DEFAULT_ORACLE_BOUND).ok() != Some(op_norm(&d))) as usize;
    }
    let mut monotone_fail = 0;
    for k in 0..500 {
        let din = rng.gen_range(2..=4);
        let dout = rng.gen_range(2..=4);
        let c = Channel::random(&mut rng, din, dout).expect("valid sizes");
        if k % 2 == 0 {
            let shape = SystemShape::elementary(din).expect("size ≥ 2");
            let d = sample::delta(&mut rng, &shape);
            let out = c.apply_local_delta(&d).expect("sizes match");
            monotone_fail += (op_norm(&out) > op_norm(&d)) as usize;
        } else {
            let f = rng.gen_range(2..=3);
            let (a, b) = random_pair(&mut rng, din, f);
            let before = op_norm(&a.minus(&b).expect("same shape"));
            let ca = c.apply_with_ancilla(&a, 1, Side::Left).expect("sizes match");
            let cb = c.apply_with_ancilla(&b, 1, Side::Left).expect("sizes match");
            monotone_fail += (op_norm(&ca.minus(&cb).expect("same shape")) > before) as usize;
        }
    }
    let mut equality_fail = 0;
    for _ in 0..50 {
        let d = rng.gen_range(2..=4);
        let f = rng.gen_range(2..=3);
        let c = Channel::random_reversible(&mut rng, d).expect("valid size");
        let (a, b) = random_pair(&mut rng, d, f);
        let before = op_norm(&a.minus(&b).expect("same shape"));
        let ca = c.apply_with_ancilla(&a, 1, Side::Left).expect("sizes match");
        let cb = c.apply_with_ancilla(&b, 1, Side::Left).expect("sizes match");
        equality_fail += (op_norm(&ca.minus(&cb).expect("same shape")) != before) as usize;
    }
    Outcome::new(
        lp_mismatch == 0 && monotone_fail == 0 && equality_fail == 0,
        format!(
            "LP mismatches {lp_mismatch}/200, monotonicity failures {monotone_fail}/500, reversible inequalities {equality_fail}/50"
        ),
    )
}

fn random_pair<R: Rng>(rng: &mut R, d: usize, f: usize) -> (State, State) {
    let shape = SystemShape::new(vec![d, f]).expect("sizes ≥ 2");
    let mut draw = || {
        let w = sample::sparse_distribution(rng, shape.size() as usize);
        State::new(shape.clone(), bct_core::opt::PureIndex::all(&shape).zip(w)).expect("normalized")
    };
    (draw(), draw())
}
