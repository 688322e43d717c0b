use std::collections::{BTreeMap, BTreeSet};

use super::config::ExperimentConfig;
use super::report::{Outcome, Report, Row};
use crate::affine::{gauge_count_bound, gauge_enumerate_capped, HPoint};
use crate::arith::{height, log_norm, log_plus_norm, ExtendedPrime, Rational};
use crate::error::{Error, Result};
use crate::measure::{first_moment, ConvolutionTable, DriftProfile};
use crate::padic::ball_key;
use crate::walk::{extract_boundary, rng::replica_seeds, run_replicas, BoundaryOptions, EmpiricalMeasure, Walker};

/// Relative tolerance of the entropy subadditivity check.
const ENTROPY_SLACK: f64 = 1e-9;

fn place_label(places: &BTreeSet<ExtendedPrime>) -> String {
    if places.is_empty() {
        "none".to_string()
    } else {
        places.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("+")
    }
}

fn sorted_grid(grid: &[usize]) -> Vec<usize> {
    let mut g = grid.to_vec();
    g.sort_unstable();
    g.dedup();
    g
}

fn mean(xs: &[f64]) -> f64 {
    let finite: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    finite.iter().sum::<f64>() / finite.len().max(1) as f64
}

/// Nearest-rank empirical quantile, ignoring NaN entries.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

fn summary_rows(experiment: &str, label: &str, n: usize, xs: &[f64], rows: &mut Vec<Row>) {
    rows.push(Row::new(experiment, label, Some(n), None, "mean", mean(xs)));
    for (q, name) in [(0.05, "q05"), (0.5, "q50"), (0.95, "q95")] {
        rows.push(Row::new(experiment, label, Some(n), None, name, quantile(xs, q)));
    }
}

fn walker_for(cfg: &ExperimentConfig, notes: &mut Vec<String>) -> Result<Walker> {
    let mu = cfg.measure()?;
    if let Some(d) = mu.validate().degeneracy {
        notes.push(format!("degenerate step law: {d}"));
    }
    Ok(Walker::allow_degenerate(mu)?.with_max_bits(cfg.max_bits))
}

fn report(experiment: &str, cfg: &ExperimentConfig, seeds: Vec<u64>, pass: bool, notes: Vec<String>, rows: Vec<Row>) -> Report {
    Report {
        experiment: experiment.to_string(),
        config: cfg.clone(),
        seeds,
        outcome: if pass { Outcome::Pass } else { Outcome::BoundFailed },
        notes,
        rows,
    }
}

/// `⟨A_n⁻¹ q_n⟩ / n`.
pub fn alignment_rate(a_n: &Rational, q_n: &Rational, n: usize) -> f64 {
    height(&(q_n / a_n)).expect("nonzero quotient") / n as f64
}

/// Step law checks: pass iff the law is non-degenerate.
pub fn run_validate(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "validate";
    let mu = cfg.measure()?;
    let v = mu.validate();
    let mut rows = vec![
        Row::new(E, "", None, None, "atoms", v.atoms),
        Row::new(E, "", None, None, "degenerate", v.is_degenerate()),
    ];
    if let Some(d) = &v.degeneracy {
        rows.push(Row::new(E, "", None, None, "degeneracy", d.to_string()));
    }
    Ok(report(E, cfg, Vec::new(), !v.is_degenerate(), Vec::new(), rows))
}

/// Drift table and the product-formula residual `φ_∞ + Σ φ_p`.
pub fn run_drift(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "drift";
    let mu = cfg.measure()?;
    let profile = DriftProfile::of(&mu)?;
    let mut rows = Vec::new();
    let mut scale = 1.0;
    for r in profile.rows() {
        rows.push(Row::new(E, r.place, None, None, "drift", r.drift));
        if let Some(c) = &r.log_coefficient {
            rows.push(Row::new(E, r.place, None, None, "drift_over_log_p", c.to_string()));
        }
        rows.push(Row::new(E, r.place, None, None, "contracting", r.contracting));
        scale += r.drift.abs();
    }
    let residual = profile.product_formula_residual();
    rows.push(Row::new(E, "", None, None, "product_formula_residual", residual));
    rows.push(Row::new(E, "", None, None, "first_moment", first_moment(&mu)));
    let contracting = place_label(&profile.contracting_set());
    rows.push(Row::new(E, "", None, None, "contracting_set", contracting));
    let pass = residual.abs() <= 1e-12 * scale;
    Ok(report(E, cfg, Vec::new(), pass, Vec::new(), rows))
}

/// Size of the gauge set of radius `k` at the identity against its counting bound.
pub fn run_gauge(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "gauge";
    let k = cfg.gauge.k;
    let count = gauge_enumerate_capped(k, cfg.gauge.cap)?.len();
    let bound = gauge_count_bound(k);
    let rows = vec![
        Row::new(E, "", None, None, "k", k),
        Row::new(E, "", None, None, "count", count),
        Row::new(E, "", None, None, "bound", bound),
    ];
    Ok(report(E, cfg, Vec::new(), count as f64 <= bound, Vec::new(), rows))
}

/// Exact prefixes `(A_k, Z_k)` and `ln|A_k|_p` along each replica's path.
pub fn run_walk(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "walk";
    let walker = Walker::new(cfg.measure()?)?.with_max_bits(cfg.max_bits);
    let places = walker.profile().nonzero_places();
    let n = cfg.walk.n;
    let paths = run_replicas(cfg.seed, cfg.replicas, |_, s| walker.sample_path(s, n));
    let mut rows = Vec::new();
    for path in paths {
        let t = path?;
        let s = Some(t.seed());
        for k in 0..=n {
            rows.push(Row::new(E, "", Some(k), s, "A", t.a(k).to_string()));
            rows.push(Row::new(E, "", Some(k), s, "Z", t.z(k).to_string()));
            for p in &places {
                let ln = log_norm(t.a(k), *p)?.value;
                rows.push(Row::new(E, p, Some(k), s, "log_norm_A", ln));
            }
        }
    }
    Ok(report(E, cfg, replica_seeds(cfg.seed, cfg.replicas), true, Vec::new(), rows))
}

fn contracting_places(
    walker: &Walker,
    requested: Option<&Vec<ExtendedPrime>>,
) -> Result<BTreeSet<ExtendedPrime>> {
    match requested {
        None => Ok(walker.profile().contracting_set()),
        Some(list) => {
            let set: BTreeSet<ExtendedPrime> = list.iter().copied().collect();
            for p in &set {
                walker.require_contracting(*p)?;
            }
            Ok(set)
        }
    }
}

/// Boundary coordinates per replica, with continuation-probe outcomes.
pub fn run_boundary(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "boundary";
    let params = &cfg.boundary;
    let mut notes = Vec::new();
    let walker = walker_for(cfg, &mut notes)?;
    let places = contracting_places(&walker, params.places.as_ref())?;
    if places.is_empty() {
        return Err(Error::Config("the step law has no contracting place".into()));
    }
    let opts = BoundaryOptions {
        digits: params.digits,
        margin: params.margin,
        real_tolerance: params.real_tolerance,
        ..BoundaryOptions::default()
    };
    notes.push("digits are locked heuristically; probe outcomes are recorded per seed".into());
    let samples = run_replicas(cfg.seed, cfg.replicas, |_, s| {
        let mut traj = walker.sample_path(s, 0)?;
        match extract_boundary(&walker, &mut traj, &places, &opts) {
            Ok(b) => Ok((s, Some(b))),
            Err(Error::StabilizationFailed { .. }) => Ok((s, None)),
            Err(e) => Err(e),
        }
    });

    let mut rows = Vec::new();
    let mut failures = 0usize;
    let mut misses = 0usize;
    let mut keys: BTreeMap<ExtendedPrime, Vec<_>> = BTreeMap::new();
    for item in samples {
        let (seed, sample) = item?;
        let s = Some(seed);
        let Some(b) = sample else {
            failures += 1;
            rows.push(Row::new(E, place_label(&places), None, s, "stabilization_failed", true));
            continue;
        };
        let n = Some(b.stabilization_index);
        misses += usize::from(!b.probe_agreed);
        rows.push(Row::new(E, place_label(&places), n, s, "probe_agreed", b.probe_agreed));
        for (p, e) in &b.expansions {
            rows.push(Row::new(E, p, n, s, "digits", e.to_string()));
            rows.push(Row::new(E, p, n, s, "start_exponent", e.start_exponent));
            if let Some(r) = params.radius_exponent {
                keys.entry(ExtendedPrime::Finite(*p)).or_default().push(ball_key(e, r)?);
            }
        }
        if let Some((lo, hi)) = b.real_coordinate {
            rows.push(Row::new(E, ExtendedPrime::Infinity, n, s, "real_lo", lo));
            rows.push(Row::new(E, ExtendedPrime::Infinity, n, s, "real_hi", hi));
        }
    }
    let done = cfg.replicas - failures;
    let miss_rate = misses as f64 / done.max(1) as f64;
    let label = place_label(&places);
    rows.push(Row::new(E, &label, None, None, "failures", failures));
    rows.push(Row::new(E, &label, None, None, "probe_miss_rate", miss_rate));
    if let Some(r) = params.radius_exponent {
        for (p, ks) in keys {
            let ExtendedPrime::Finite(prime) = p else { continue };
            let m = EmpiricalMeasure::from_keys(prime, r, ks);
            rows.push(Row::new(E, p, None, None, "balls", m.counts.len()));
            rows.push(Row::new(E, p, None, None, "max_ball_mass", m.max_mass()));
        }
    }
    let pass = failures == 0 && miss_rate <= params.max_probe_miss_rate;
    Ok(report(E, cfg, replica_seeds(cfg.seed, cfg.replicas), pass, notes, rows))
}

/// Monte Carlo mean of `⟨A_n⁻¹ q_n⟩ / n` along the grid.
/// Passes when the means do not increase and the last one is below `epsilon`.
pub fn run_alignment(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "lln41";
    let params = &cfg.lln41;
    let mut notes = Vec::new();
    let walker = walker_for(cfg, &mut notes)?;
    let grid = sorted_grid(&params.n_grid);
    let max_n = *grid.last().expect("checked non-empty");
    let q: Vec<Rational> = grid.iter().map(|&n| walker.profile().q_n(n as u64)).collect();
    let per_path = run_replicas(cfg.seed, cfg.replicas, |_, s| {
        let t = walker.sample_path(s, max_n)?;
        Ok::<_, Error>((s, grid.iter().zip(&q).map(|(&n, q)| alignment_rate(t.a(n), q, n)).collect::<Vec<f64>>()))
    });
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (seed, values) in &per_path {
        for (&n, v) in grid.iter().zip(values) {
            rows.push(Row::new(E, "", Some(n), Some(*seed), "alignment_rate", *v));
        }
    }
    let mut means = Vec::new();
    for (i, &n) in grid.iter().enumerate() {
        let xs: Vec<f64> = per_path.iter().map(|(_, v)| v[i]).collect();
        means.push(mean(&xs));
        summary_rows(E, "", n, &xs, &mut rows);
    }
    let monotone = means.windows(2).all(|w| w[1] <= w[0]);
    let last = *means.last().expect("non-empty grid");
    rows.push(Row::new(E, "", None, None, "non_increasing", monotone));
    rows.push(Row::new(E, "", None, None, "epsilon", params.epsilon));
    let pass = monotone && last < params.epsilon;
    let seeds = per_path.iter().map(|(s, _)| *s).collect();
    Ok(report(E, cfg, seeds, pass, notes, rows))
}

/// Frequency of `⟨Z_n⟩_P⁺ / n ≤ Σ_{p∈P} φ_p⁺ + ε` along the grid.
pub fn run_partial_height(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "lln43";
    let params = &cfg.lln43;
    let mut notes = Vec::new();
    let walker = walker_for(cfg, &mut notes)?;
    let places: BTreeSet<ExtendedPrime> = match &params.places {
        Some(list) => list.iter().copied().collect(),
        None => walker.profile().nonzero_places(),
    };
    let label = place_label(&places);
    let bound = places.iter().map(|p| walker.profile().drift_plus(*p)).sum::<f64>() + params.epsilon;
    let grid = sorted_grid(&params.n_grid);
    let max_n = *grid.last().expect("checked non-empty");
    let per_path = run_replicas(cfg.seed, cfg.replicas, |_, s| {
        let t = walker.sample_path(s, max_n)?;
        let stats = grid
            .iter()
            .map(|&n| places.iter().map(|p| log_plus_norm(t.z(n), *p)).sum::<f64>() / n as f64)
            .collect::<Vec<f64>>();
        Ok::<_, Error>((s, stats))
    });
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (seed, values) in &per_path {
        for (&n, v) in grid.iter().zip(values) {
            rows.push(Row::new(E, &label, Some(n), Some(*seed), "partial_height_rate", *v));
            rows.push(Row::new(E, &label, Some(n), Some(*seed), "within_bound", *v <= bound));
        }
    }
    let mut freq = 0.0;
    for (i, &n) in grid.iter().enumerate() {
        let xs: Vec<f64> = per_path.iter().map(|(_, v)| v[i]).collect();
        summary_rows(E, &label, n, &xs, &mut rows);
        freq = xs.iter().filter(|&&x| x <= bound).count() as f64 / xs.len() as f64;
        rows.push(Row::new(E, &label, Some(n), None, "frequency", freq));
    }
    rows.push(Row::new(E, &label, None, None, "bound", bound));
    let pass = freq >= params.min_frequency;
    let seeds = per_path.iter().map(|(s, _)| *s).collect();
    Ok(report(E, cfg, seeds, pass, notes, rows))
}

struct DistanceParts {
    total: f64,
    alignment: f64,
    contracting: f64,
    complement: f64,
}

/// Frequency of `‖x_n⁻¹ π_n(ẑ)‖ / n ≤ Σ_{p∉P} φ_p⁻ + ε`, where `π_n(ẑ)` has
/// scale `q_n`, the boundary representative at the places of `P` and 0 elsewhere.
pub fn run_boundary_distance(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "prop44";
    let params = &cfg.prop44;
    let mut notes = Vec::new();
    let walker = walker_for(cfg, &mut notes)?;
    let places = contracting_places(&walker, params.places.as_ref())?;
    let label = place_label(&places);
    let profile = walker.profile();
    let bound = profile
        .nonzero_places()
        .difference(&places)
        .map(|p| profile.drift_minus(*p))
        .sum::<f64>()
        + params.epsilon;
    let grid = sorted_grid(&params.n_grid);
    let max_n = *grid.last().expect("checked non-empty");
    let min_steps = params.stabilization_factor * max_n;
    let opts = BoundaryOptions {
        digits: params.digits,
        margin: params.margin,
        real_tolerance: params.real_tolerance,
        min_steps,
        max_steps: (min_steps + 100_000).max(BoundaryOptions::default().max_steps),
    };
    notes.push(format!(
        "boundary representatives are exact partial sums taken at step ≥ {min_steps}"
    ));
    let q: Vec<Rational> = grid.iter().map(|&n| profile.q_n(n as u64)).collect();

    let per_path = run_replicas(cfg.seed, cfg.replicas, |_, s| {
        let mut traj = walker.sample_path(s, max_n)?;
        let (representative, stab, agreed) = if places.is_empty() {
            (None, None, true)
        } else {
            match extract_boundary(&walker, &mut traj, &places, &opts) {
                Ok(b) => (Some(b.representative), Some(b.stabilization_index), b.probe_agreed),
                Err(Error::StabilizationFailed { .. }) => return Ok((s, None)),
                Err(e) => return Err(e),
            }
        };
        let parts = grid
            .iter()
            .zip(&q)
            .map(|(&n, q_n)| {
                let coords = match &representative {
                    Some(z) => places.iter().map(|p| (*p, z.clone())).collect(),
                    None => BTreeMap::new(),
                };
                let target = HPoint::from_coordinates(q_n.clone(), coords).expect("q_n ≠ 0");
                let y = traj.position(n).inverse().embed().compose(&target);
                let total = y.adelic_length() / n as f64;
                let alignment = alignment_rate(traj.a(n), q_n, n);
                let contracting = places
                    .iter()
                    .map(|p| log_plus_norm(y.coordinate(*p), *p))
                    .sum::<f64>()
                    / n as f64;
                DistanceParts {
                    total,
                    alignment,
                    contracting,
                    complement: total - alignment - contracting,
                }
            })
            .collect::<Vec<_>>();
        Ok((s, Some((parts, stab, agreed))))
    });
    let per_path = per_path.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut failures = 0usize;
    let mut misses = 0usize;
    for (seed, outcome) in &per_path {
        let s = Some(*seed);
        let Some((parts, stab, agreed)) = outcome else {
            failures += 1;
            rows.push(Row::new(E, &label, None, s, "stabilization_failed", true));
            continue;
        };
        if let Some(k) = stab {
            misses += usize::from(!agreed);
            rows.push(Row::new(E, &label, Some(*k), s, "probe_agreed", *agreed));
        }
        for (&n, d) in grid.iter().zip(parts) {
            rows.push(Row::new(E, &label, Some(n), s, "distance_rate", d.total));
            rows.push(Row::new(E, &label, Some(n), s, "alignment_part", d.alignment));
            rows.push(Row::new(E, &label, Some(n), s, "contracting_part", d.contracting));
            rows.push(Row::new(E, &label, Some(n), s, "complement_part", d.complement));
            rows.push(Row::new(E, &label, Some(n), s, "within_bound", d.total <= bound));
        }
    }
    let mut freq = 0.0;
    for (i, &n) in grid.iter().enumerate() {
        // failed replicas count against the event
        let xs: Vec<f64> = per_path
            .iter()
            .map(|(_, o)| o.as_ref().map_or(f64::NAN, |(parts, _, _)| parts[i].total))
            .collect();
        summary_rows(E, &label, n, &xs, &mut rows);
        freq = xs.iter().filter(|&&x| x <= bound).count() as f64 / xs.len() as f64;
        rows.push(Row::new(E, &label, Some(n), None, "frequency", freq));
    }
    let done = per_path.len() - failures;
    let miss_rate = if places.is_empty() { 0.0 } else { misses as f64 / done.max(1) as f64 };
    rows.push(Row::new(E, &label, None, None, "bound", bound));
    rows.push(Row::new(E, &label, None, None, "failures", failures));
    rows.push(Row::new(E, &label, None, None, "probe_miss_rate", miss_rate));
    let pass = freq >= params.min_frequency && miss_rate <= params.max_probe_miss_rate;
    let seeds = per_path.iter().map(|(s, _)| *s).collect();
    Ok(report(E, cfg, seeds, pass, notes, rows))
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Exact entropies `H_n` of the convolution powers, with trend diagnostics.
///
/// `trending_to_zero` is set when `H_n/n` falls over the last half of the
/// table and the last increment is more than 5% below the one before.
pub fn run_entropy(cfg: &ExperimentConfig) -> Result<Report> {
    const E: &str = "entropy";
    let mu = cfg.measure()?;
    let (tables, truncated) = ConvolutionTable::powers(&mu, cfg.entropy.n_max, cfg.entropy.cell_budget);
    let h: Vec<f64> = tables.iter().map(ConvolutionTable::entropy).collect();
    let mut rows = Vec::new();
    for (n, t) in tables.iter().enumerate() {
        rows.push(Row::new(E, "", Some(n), None, "support", t.len()));
        rows.push(Row::new(E, "", Some(n), None, "entropy", h[n]));
        if n > 0 {
            rows.push(Row::new(E, "", Some(n), None, "entropy_rate", h[n] / n as f64));
            rows.push(Row::new(E, "", Some(n), None, "increment", h[n] - h[n - 1]));
        }
    }
    let top = h.len() - 1;
    let tail: Vec<usize> = (top.div_ceil(2).max(1)..=top).collect();
    let xs: Vec<f64> = tail.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|&n| h[n] / n as f64).collect();
    let rate_slope = slope(&xs, &ys);
    let increment_ratio = if top >= 2 {
        (h[top] - h[top - 1]) / (h[top - 1] - h[top - 2])
    } else {
        1.0
    };
    let subadditive = (0..=top).all(|m| {
        (0..=top - m).all(|k| h[m + k] <= h[m] + h[k] + ENTROPY_SLACK * (1.0 + h[m] + h[k]))
    });
    rows.push(Row::new(E, "", None, None, "rate_slope", rate_slope));
    rows.push(Row::new(E, "", None, None, "increment_ratio", increment_ratio));
    rows.push(Row::new(E, "", None, None, "trending_to_zero", rate_slope < 0.0 && increment_ratio < 0.95));
    rows.push(Row::new(E, "", None, None, "subadditive", subadditive));
    let mut notes = Vec::new();
    let outcome = match truncated {
        Some(e) => {
            notes.push(format!("table truncated: {e}"));
            Outcome::BudgetExceeded
        }
        None if subadditive => Outcome::Pass,
        None => Outcome::BoundFailed,
    };
    Ok(Report {
        experiment: E.to_string(),
        config: cfg.clone(),
        seeds: Vec::new(),
        outcome,
        notes,
        rows,
    })
}
