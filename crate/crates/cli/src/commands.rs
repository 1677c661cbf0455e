//! Report generators behind every subcommand.

use std::collections::BTreeMap;

use anyhow::Result;
use bct_core::channels::{asymptotic_rate, build_digitizer, compose_seq, Channel};
use bct_core::compression::rate::{rate_curve, RateCurve};
use bct_core::compression::{build_codec, exact_rate, fom_tilde, restricted_rate, Source};
use bct_core::dilation::{random_dilation, steer, steering_channel};
use bct_core::entropy::{
    entropies_closed_form, s1_oracle, s2_oracle, s_reg, EntropyKind, SearchBudget,
};
use bct_core::opt::State;
use bct_core::rational::{format_rational, to_f64};
use bct_core::{sample, Q, TOLERANCE};
use rand::Rng;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::report::{fmt_float, jf, jq, jq_list, table, Report};

pub const CSV_HEADER: &str = "N,epsilon,M_min,rate,target,gap";

fn curves(cfg: &ExperimentConfig) -> Result<(Source, Vec<RateCurve>)> {
    let source = Source::new(cfg.dist()?)?;
    let eps = cfg.eps("0.1")?;
    let ns = cfg.n_range(12)?;
    let curves = eps
        .iter()
        .map(|e| rate_curve(&source, e, &ns))
        .collect::<bct_core::Result<Vec<_>>>()?;
    Ok((source, curves))
}

/// `rate`: `M_min` over the requested grid, as CSV.
pub fn rate(cfg: &ExperimentConfig) -> Result<Report> {
    let (_, curves) = curves(cfg)?;
    let mut body = format!("{CSV_HEADER}\n");
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for c in &curves {
        let eps = fmt_float(to_f64(&c.epsilon));
        for p in &c.points {
            body.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.n,
                eps,
                p.m_min,
                fmt_float(p.rate),
                fmt_float(c.target),
                fmt_float(p.gap)
            ));
            if (p.m_min as f64) < p.converse - TOLERANCE {
                violations.push(format!(
                    "N={} ε={eps}: M_min={} below the converse bound {}",
                    p.n,
                    p.m_min,
                    fmt_float(p.converse)
                ));
            }
        }
        for w in c.points.windows(2) {
            if w[1].m_min < w[0].m_min {
                violations.push(format!("ε={eps}: M_min decreases from N={} to N={}", w[0].n, w[1].n));
            }
        }
        rows.push(vec![
            eps,
            fmt_float(c.target),
            fmt_float(c.limit_estimate),
            fmt_float(c.deviation),
        ]);
    }
    for pair in curves.windows(2) {
        for (a, b) in pair[0].points.iter().zip(&pair[1].points) {
            let (lo, hi) = if pair[0].epsilon <= pair[1].epsilon { (a, b) } else { (b, a) };
            if hi.m_min > lo.m_min {
                violations.push(format!("N={}: M_min increases with ε", a.n));
            }
        }
    }
    let summary = table(&["epsilon", "target", "window max", "deviation"], &rows);
    Ok(Report {
        body,
        summary,
        violations,
    })
}

/// JSON companion of [`rate`].
pub fn rate_json(cfg: &ExperimentConfig) -> Result<Value> {
    let (source, curves) = curves(cfg)?;
    Ok(json!({
        "source": jq_list(source.probabilities()),
        "entropy": jf(source.entropy()),
        "target": jf(source.information_content()),
        "curves": curves.iter().map(|c| json!({
            "epsilon": jq(&c.epsilon),
            "limit_estimate": jf(c.limit_estimate),
            "limit_estimate_note": "max of M_min/N over the upper half of the N window",
            "deviation": jf(c.deviation),
            "points": c.points.iter().map(|p| json!({
                "N": p.n, "M_min": p.m_min, "rate": jf(p.rate), "gap": jf(p.gap),
                "converse": jf(p.converse),
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    }))
}

/// `codec`: the typical-set codec and its figure of merit.
pub fn codec(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.dist()?;
    let n = cfg.n_single(12)?;
    let delta = cfg.delta(bct_core::compression::DEFAULT_DELTA)?;
    let eps = cfg.eps("0.1")?.remove(0);
    let codec = build_codec(&p, n, delta)?;
    let t = codec.typical();
    let bound = cfg
        .memory_bound
        .map(u128::from)
        .unwrap_or(bct_core::compression::codec::CROSS_CHECK_BOUND);
    let d = fom_tilde(&codec, bound)?;
    let twice = bct_core::compression::codec::twice_atypical_mass(t);
    let explicit = bct_core::compression::codec::explicit_check_fits(&codec, bound);
    let m_min = exact_rate(&p, n, &eps)?;
    let meets = d < eps;
    let (lo, hi) = t.cardinality_bounds();
    let mut violations = Vec::new();
    if !t.is_empty() && d != twice {
        violations.push(format!(
            "D̃ = {} differs from 2 P(non-typical) = {}",
            format_rational(&d),
            format_rational(&twice)
        ));
    }
    if !t.cardinality_within_bounds() {
        violations.push(format!("|T| = {} outside the cardinality bounds", t.cardinality()));
    }
    if meets && m_min > codec.m() {
        violations.push(format!("exact M_min {m_min} exceeds the codec's M {}", codec.m()));
    }
    let value = json!({
        "source": jq_list(&p),
        "N": n,
        "delta": jf(delta),
        "entropy": jf(t.source().entropy()),
        "M": codec.m(),
        "codewords": (bct_core::compression::rate::codewords(codec.m())).to_string(),
        "used_codewords": codec.used_codewords().to_string(),
        "fallback_codeword": bct_core::compression::codec::FALLBACK_CODEWORD.to_string(),
        "fallback_string": codec.fallback_string().to_string(),
        "typical": {
            "cardinality": t.cardinality().to_string(),
            "mass": jq(t.mass()),
            "classes": t.classes().iter().map(|c| json!(c.counts)).collect::<Vec<_>>(),
            "cardinality_lower": jf(lo),
            "cardinality_upper": jf(hi),
            "within_bounds": t.cardinality_within_bounds(),
        },
        "fom_tilde": jq(&d),
        "fom_tilde_float": jf(to_f64(&d)),
        "twice_atypical_mass": jq(&twice),
        "fom_equals_twice_atypical": d == twice,
        "explicit_paths_checked": explicit,
        "epsilon": jq(&eps),
        "meets_epsilon": meets,
        "exact_M_min": m_min,
    });
    let summary = table(
        &["N", "delta", "M", "|T|", "P(T)", "D~"],
        &[vec![
            n.to_string(),
            fmt_float(delta),
            codec.m().to_string(),
            t.cardinality().to_string(),
            fmt_float(to_f64(t.mass())),
            fmt_float(to_f64(&d)),
        ]],
    );
    Ok(Report::json(&value, summary, violations))
}

/// `entropy`: closed forms, oracle sandwich and regularizations.
pub fn entropy(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.dist()?;
    let rho = State::from_probabilities(&p)?;
    let ns = cfg.n_range(10)?;
    let n_max = *ns.last().expect("nonempty range");
    let closed = entropies_closed_form(&rho, n_max)?;
    let budget = SearchBudget {
        candidates: cfg.positive("budget", cfg.budget, 100)?,
        max_parts: 4,
        seed: cfg.seed.unwrap_or(0),
    };
    let s1 = s1_oracle(&rho, budget)?;
    let s2 = s2_oracle(&rho, budget)?;
    let h = closed.h;
    let mut violations = Vec::new();
    let s1_min = s1.samples.iter().copied().fold(f64::INFINITY, f64::min);
    let s2_max = s2.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (s1.best - h).abs() > TOLERANCE || s1_min < h - TOLERANCE {
        violations.push(format!("S1 oracle breaks the sandwich: best {} min {}", s1.best, s1_min));
    }
    if (s2.best - h).abs() > TOLERANCE || s2_max > h + TOLERANCE {
        violations.push(format!("S2 oracle breaks the sandwich: best {} max {}", s2.best, s2_max));
    }
    let bound = cfg.memory_bound();
    let mut sreg = Vec::new();
    let mut rows = Vec::new();
    for &n in &ns {
        let closed_n = h + 1.0 - 1.0 / n as f64;
        let direct = (p.len() as u128)
            .checked_pow(n as u32)
            .is_some_and(|s| s <= bound.min(bct_core::DEFAULT_MEMORY_BOUND));
        let mut entry = serde_json::Map::new();
        entry.insert("N".into(), json!(n));
        entry.insert("closed".into(), jf(closed_n));
        if direct {
            for (key, which) in [("S1", EntropyKind::Measurement), ("S2", EntropyKind::Hybrid), ("S3", EntropyKind::Preparation)] {
                match s_reg(&p, n, which) {
                    Ok(v) => {
                        entry.insert(key.into(), jf(v));
                    }
                    Err(e) => violations.push(format!("N={n} {key}: {e}")),
                }
            }
        }
        rows.push(vec![n.to_string(), fmt_float(closed_n)]);
        sreg.push(Value::Object(entry));
    }
    let value = json!({
        "source": jq_list(&p),
        "H": jf(h),
        "S1": jf(closed.s1),
        "S2": jf(closed.s2),
        "S3": jf(closed.s3),
        "oracle": {
            "seed": budget.seed,
            "candidates": budget.candidates,
            "s1_best": jf(s1.best),
            "s1_perfect_test": jf(s1.perfect_test),
            "s1_sample_min": jf(s1_min),
            "s2_best": jf(s2.best),
            "s2_perfect_test": jf(s2.perfect_test),
            "s2_sample_max": jf(s2_max),
            "certified": false,
        },
        "Sreg_at_N": sreg,
        "Sreg_limit": jf(closed.sreg_limit),
        "tolerance": jf(closed.tolerance),
    });
    let summary = format!("H = {}\n{}", fmt_float(h), table(&["N", "S_i(rho^N)/N"], &rows));
    Ok(Report::json(&value, summary, violations))
}

/// `steer`: random dilations reproduced through the mother dilation.
pub fn steer_cmd(cfg: &ExperimentConfig) -> Result<Report> {
    let seed = cfg.seed.unwrap_or(7);
    let samples = cfg.positive("samples", cfg.samples, 50)?;
    let states = cfg.positive("states", cfg.states, 5)?;
    let fixed = match cfg.dist {
        Some(_) => Some(cfg.dist()?),
        None => None,
    };
    let mut rng = sample::rng(seed);
    let mut per_state = Vec::new();
    let mut violations = Vec::new();
    let mut rows = Vec::new();
    for k in 0..states {
        let p = match &fixed {
            Some(p) => p.clone(),
            None => {
                let len = rng.gen_range(2..=5);
                sample::sparse_distribution(&mut rng, len)
            }
        };
        let rho = State::from_probabilities(&p)?;
        let mut reproduced = 0;
        let mut ancillas = BTreeMap::new();
        for _ in 0..samples {
            let f = rng.gen_range(2..=5);
            let psi = random_dilation(&rho, f, rng.gen())?;
            let c = steering_channel(&rho, &psi)?;
            if steer(&rho, &c)? == *psi.joint() {
                reproduced += 1;
            }
            *ancillas.entry(f).or_insert(0usize) += 1;
        }
        if reproduced != samples {
            violations.push(format!("state {k}: {reproduced}/{samples} dilations reproduced"));
        }
        rows.push(vec![k.to_string(), p.len().to_string(), format!("{reproduced}/{samples}")]);
        per_state.push(json!({
            "source": jq_list(&p),
            "dilations": samples,
            "reproduced": reproduced,
            "ancilla_sizes": ancillas,
        }));
    }
    let value = json!({
        "seed": seed,
        "states": per_state,
        "all_reproduced": violations.is_empty(),
    });
    let summary = table(&["state", "size", "reproduced"], &rows);
    Ok(Report::json(&value, summary, violations))
}

/// `digitize`: encoder/decoder into bibit-like registers and the rate
/// `M_2^min(k_1)/k_1`.
pub fn digitize(cfg: &ExperimentConfig) -> Result<Report> {
    let a = cfg.a.unwrap_or(5);
    let b = cfg.b.unwrap_or(2);
    if a < 2 {
        return Err(crate::config::ConfigError::new("a", "system sizes start at 2").into());
    }
    if b < 2 {
        return Err(crate::config::ConfigError::new("b", "system sizes start at 2").into());
    }
    let k1max = cfg.k1max.unwrap_or(100).max(1);
    let dg = build_digitizer(a, b)?;
    let identity = compose_seq(&dg.decoder, &dg.encoder)? == Channel::identity(a)?;
    let limit = ((2 * a) as f64).ln() / ((2 * b) as f64).ln();
    let mut violations = Vec::new();
    if !identity {
        violations.push("decoder ∘ encoder is not the identity".into());
    }
    let mut rates = Vec::new();
    for k1 in 1..=k1max {
        let m = asymptotic_rate(a, b, k1)?;
        let ratio = m as f64 / k1 as f64;
        let within = ratio - limit >= -TOLERANCE && ratio - limit <= 1.0 / k1 as f64 + TOLERANCE;
        if !within {
            violations.push(format!("k1={k1}: ratio {ratio} not within 1/k1 of {limit}"));
        }
        if k1 <= 10 || k1 % 10 == 0 {
            rates.push(json!({"k1": k1, "M": m, "ratio": jf(ratio), "within": within}));
        }
    }
    let value = json!({
        "a": a,
        "b": b,
        "k": dg.k,
        "register": dg.register.to_string(),
        "register_size": dg.register.size().to_string(),
        "identity": identity,
        "encoder": dg.encoder.to_text(),
        "limit": jf(limit),
        "rates": rates,
    });
    let summary = format!(
        "k = {} (register {}), D∘E = Id: {}, limit log_{}({}) = {}\n",
        dg.k,
        dg.register,
        identity,
        2 * b,
        2 * a,
        fmt_float(limit)
    );
    Ok(Report::json(&value, summary, violations))
}

/// `counterexample`: permutation-restricted codecs in a locally
/// discriminable bit theory.
pub fn counterexample(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.dist()?;
    let ns = cfg.n_range(6)?;
    let eps = cfg.eps("0.1")?.remove(0);
    let source = Source::new(p.clone())?;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut threshold = Q::default();
    for &n in &ns {
        let r = restricted_rate(&p, n, &eps)?;
        threshold = r.threshold.clone();
        if !r.degenerate && eps < r.threshold && !r.incompressible() {
            violations.push(format!("N={n}: compressed to M={} below N", r.m_min));
        }
        rows.push(vec![n.to_string(), r.m_min.to_string(), r.m_min_mixtures.to_string()]);
        points.push(json!({
            "N": n,
            "M_min": r.m_min,
            "M_min_mixtures": r.m_min_mixtures,
            "best_retained": jq_list(&r.best_retained),
            "maps_searched": r.maps_searched.to_string(),
        }));
    }
    let degenerate = source.is_pure();
    let value = json!({
        "source": jq_list(&p),
        "epsilon": jq(&eps),
        "threshold": jq(&threshold),
        "degenerate": degenerate,
        "entropy": jf(source.entropy()),
        "bct_information_content": jf(source.information_content()),
        "restricted_information_content": if degenerate { jf(0.0) } else { jf(1.0) },
        "points": points,
    });
    let summary = format!(
        "threshold ε* = {}\n{}",
        format_rational(&threshold),
        table(&["N", "M_min", "M_min (mixtures)"], &rows)
    );
    Ok(Report::json(&value, summary, violations))
}
