//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use qnn_core::analysis::{estimate_period, sweep_periods, AnalysisParams, Classification, PeriodEstimate};
use qnn_core::config::{ExperimentConfig, Preset};
use qnn_core::dynamics::{coupling_delta, oracle_step, step, ModelParams, Variant};
use qnn_core::experiment::{simulate, write_timeseries_csv, Simulation};
use qnn_core::init::random_unit_qubit;
use qnn_core::lattice::{renormalize, LatticeState, Qubit};
use qnn_core::rng::XorShift64Star;

const SITE: &str = "c_10_10";
const SUM: &str = "sum_c";
const CORR: &str = "corr_10_10_20_21";

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(config: &ExperimentConfig) -> Simulation {
    simulate(config).expect("simulation failed")
}

fn estimate(sim: &Simulation, channel: &str, params: &AnalysisParams) -> Option<PeriodEstimate> {
    let series = sim.record.channel(channel)?;
    estimate_period(series, params)
        .ok()
        .map(|e| e.scaled(sim.record.sample_stride()))
}

fn describe(e: &Option<PeriodEstimate>) -> String {
    match e {
        None => "n/a".into(),
        Some(e) => format!(
            "{} (period {}, cv {}, peaks {})",
            e.classification,
            e.period_steps.map_or("-".into(), |p| format!("{p:.2}")),
            e.cv.map_or("-".into(), |c| format!("{c:.3}")),
            e.n_peaks
        ),
    }
}

fn is(e: &Option<PeriodEstimate>, class: Classification) -> bool {
    e.map_or(false, |e| e.classification == class)
}

fn tail_total_variation(series: &[f64], window: usize) -> f64 {
    let tail = &series[series.len().saturating_sub(window + 1)..];
    tail.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

fn c1_no_threshold_aperiodic() -> Outcome {
    let config = ExperimentConfig::preset(Preset::Fig1);
    let sim = run(&config);
    let site = estimate(&sim, SITE, &config.analysis);
    let corr = estimate(&sim, CORR, &config.analysis);
    let aperiodic = |e: &Option<PeriodEstimate>| {
        is(e, Classification::Aperiodic) && e.and_then(|e| e.cv).map_or(false, |cv| cv >= 0.15)
    };
    let max_abs = sim
        .record
        .channel(SITE)
        .unwrap()
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()));
    Outcome {
        pass: aperiodic(&site) && aperiodic(&corr) && max_abs > 0.9,
        detail: format!(
            "site {}; corr {}; max |c| {max_abs:.4}",
            describe(&site),
            describe(&corr)
        ),
    }
}

fn c2_threshold_periodic(fig3: &Simulation, config: &ExperimentConfig) -> Outcome {
    let sum = estimate(fig3, SUM, &config.analysis);
    let corr = estimate(fig3, CORR, &config.analysis);
    let site = estimate(fig3, SITE, &config.analysis);
    let sum_ok = is(&sum, Classification::Periodic) && sum.and_then(|e| e.cv).map_or(false, |cv| cv <= 0.05);
    let ratio = match (sum.and_then(|e| e.period_steps), corr.and_then(|e| e.period_steps)) {
        (Some(ps), Some(pc)) => Some((pc / ps - 1.0).abs()),
        _ => None,
    };
    let corr_ok = is(&corr, Classification::Periodic) && ratio.map_or(false, |r| r <= 0.02);
    Outcome {
        pass: sum_ok && corr_ok,
        detail: format!(
            "sum {}; corr {}; |ratio-1| {}; info: site {}",
            describe(&sum),
            describe(&corr),
            ratio.map_or("-".into(), |r| format!("{r:.3}")),
            describe(&site)
        ),
    }
}

fn c3_two_sides_static() -> Outcome {
    let config = ExperimentConfig::preset(Preset::Fig5);
    let sim = run(&config);
    let series = sim.record.channel(SITE).unwrap();
    let tv = tail_total_variation(series, 500);
    let site = estimate(&sim, SITE, &config.analysis);
    let abs: Vec<f64> = series.iter().map(|c| c.abs()).collect();
    let tv_abs = tail_total_variation(&abs, 500);
    let tv_corr = tail_total_variation(sim.record.channel(CORR).unwrap(), 500);
    Outcome {
        pass: tv < 1e-6 && is(&site, Classification::Static),
        detail: format!(
            "TV(c) {tv:.3e}; site {}; info: TV(|c|) {tv_abs:.3e}, TV(corr) {tv_corr:.3e}",
            describe(&site)
        ),
    }
}

fn c4_four_sides_dynamic(fig3_sum: Option<PeriodEstimate>) -> Outcome {
    let mut config = ExperimentConfig::preset(Preset::Fig3);
    config.set_epsilon(0.8);
    let sim = run(&config);
    let sum = estimate(&sim, SUM, &config.analysis);
    let differs = match (sum.and_then(|e| e.period_steps), fig3_sum.and_then(|e| e.period_steps)) {
        (Some(a), Some(b)) => a != b,
        (Some(_), None) => true,
        _ => false,
    };
    let tv_abs = {
        let abs: Vec<f64> = sim.record.channel(SITE).unwrap().iter().map(|c| c.abs()).collect();
        tail_total_variation(&abs, 500)
    };
    Outcome {
        pass: is(&sum, Classification::Periodic) && differs,
        detail: format!(
            "sum {}; info: site {}, TV(|c|) last 500 {tv_abs:.3e}",
            describe(&sum),
            describe(&estimate(&sim, SITE, &config.analysis))
        ),
    }
}

fn c5_period_scaling() -> Outcome {
    let config = ExperimentConfig::preset(Preset::Fig6);
    let eps = [0.005, 0.01, 0.02, 0.05, 0.1];
    let rows = sweep_periods(&eps, &config, &config.analysis);
    let periods: Vec<Option<f64>> = rows.iter().map(|r| r.estimate.period_steps).collect();
    let decreasing = periods.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => b < a,
        _ => false,
    });
    let products: Vec<f64> = eps
        .iter()
        .zip(&periods)
        .map(|(e, p)| p.map_or(f64::NAN, |p| p * e))
        .collect();
    let small = &products[..3];
    let spread = small.iter().cloned().fold(f64::MIN, f64::max) / small.iter().cloned().fold(f64::MAX, f64::min) - 1.0;
    let reference = small.iter().sum::<f64>() / 3.0;
    let large_dev: Vec<String> = products[3..]
        .iter()
        .zip(&eps[3..])
        .map(|(p, e)| format!("eps {e}: {:+.1}%", (p / reference - 1.0) * 100.0))
        .collect();
    let listing: Vec<String> = eps
        .iter()
        .zip(&periods)
        .map(|(e, p)| format!("{e}->{}", p.map_or("-".into(), |p| format!("{p:.2}"))))
        .collect();
    Outcome {
        pass: decreasing && spread <= 0.25,
        detail: format!(
            "channel {}; periods [{}]; period*eps spread {:.3}; info: {}",
            rows[0].channel,
            listing.join(", "),
            spread,
            large_dev.join(", ")
        ),
    }
}

fn random_lattice(width: usize, height: usize, rng: &mut XorShift64Star) -> LatticeState {
    let sites = (0..width * height).map(|_| random_unit_qubit(rng)).collect();
    LatticeState::from_sites(width, height, sites).unwrap()
}

fn c6_oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut min_per_combo = usize::MAX;
    let mut rng = XorShift64Star::new(0xACCE);
    for variant in [Variant::NoThreshold, Variant::Threshold] {
        for eps in [0.01, 0.1, 0.8] {
            let params = match variant {
                Variant::NoThreshold => ModelParams::no_threshold(eps),
                Variant::Threshold => ModelParams::threshold(eps, 0.7),
            };
            let mut count = 0;
            for w in 3..=6 {
                for h in 3..=6 {
                    for _ in 0..64 {
                        let state = random_lattice(w, h, &mut rng);
                        let a = step(&state, &params).unwrap();
                        let b = oracle_step(&state, &params).unwrap();
                        for (p, q) in a.sites().iter().zip(b.sites()) {
                            worst = worst.max((p.c() - q.c()).abs()).max((p.s() - q.s()).abs());
                        }
                        count += 1;
                    }
                }
            }
            checked += count;
            min_per_combo = min_per_combo.min(count);
        }
    }
    Outcome {
        pass: worst <= 1e-12 && min_per_combo >= 1000,
        detail: format!("{checked} states, {min_per_combo} per combo, max diff {worst:.2e}"),
    }
}

fn csv_bytes(config: &ExperimentConfig) -> Vec<u8> {
    let mut out = Vec::new();
    write_timeseries_csv(&run(config).record, &mut out).unwrap();
    out
}

fn c7_invariants() -> Outcome {
    let mut failures = Vec::new();

    let mut worst_norm = 0.0f64;
    let mut full_size_secs = 0.0f64;
    for preset in Preset::ALL {
        let config = ExperimentConfig::preset(preset);
        let start = Instant::now();
        let sim = run(&config);
        full_size_secs = full_size_secs.max(start.elapsed().as_secs_f64());
        worst_norm = worst_norm.max(sim.max_norm_deviation);
    }
    if worst_norm >= 1e-12 {
        failures.push(format!("norm deviation {worst_norm:.2e}"));
    }
    if full_size_secs >= 60.0 {
        failures.push(format!("slowest full-size run {full_size_secs:.1}s"));
    }

    for variant in [Variant::NoThreshold, Variant::Threshold] {
        let params = match variant {
            Variant::NoThreshold => ModelParams::no_threshold(0.1),
            Variant::Threshold => ModelParams::threshold(0.1, 0.7),
        };
        let ground = LatticeState::uniform(40, 40, Qubit::GROUND).unwrap();
        if step(&ground, &params).unwrap().sites() != ground.sites() {
            failures.push(format!("ground not fixed under {variant}"));
        }
    }

    let mut rng = XorShift64Star::new(7);
    let mut rotation_err = 0.0f64;
    for _ in 0..10_000 {
        let target = random_unit_qubit(&mut rng);
        let controller = random_unit_qubit(&mut rng);
        let eps = rng.next_f64();
        let noop = coupling_delta(Qubit::GROUND, target, eps);
        if noop.dc != 0.0 || noop.ds != 0.0 {
            failures.push("ground controller moved target".into());
            break;
        }
        let d = coupling_delta(controller, target, eps);
        let moved = renormalize(target.c() + d.dc, target.s() + d.ds).unwrap();
        let theta = (eps * controller.c()).atan();
        let (sn, cs) = theta.sin_cos();
        let expect = (target.c() * cs - target.s() * sn, target.c() * sn + target.s() * cs);
        rotation_err = rotation_err
            .max((moved.c() - expect.0).abs())
            .max((moved.s() - expect.1).abs());
    }
    if rotation_err > 1e-12 {
        failures.push(format!("rotation identity error {rotation_err:.2e}"));
    }

    for preset in [Preset::Fig1, Preset::Fig3, Preset::Fig5] {
        let mut config = ExperimentConfig::preset(preset);
        config.threads = 1;
        let first = csv_bytes(&config);
        let second = csv_bytes(&config);
        config.threads = 4;
        let threaded = csv_bytes(&config);
        if first != second || first != threaded {
            failures.push(format!("{preset} CSV not byte-identical"));
        }
    }

    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "max norm deviation {worst_norm:.2e}; slowest full-size run {full_size_secs:.2}s; rotation error {rotation_err:.2e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    }
}

fn c8_synthetic_series() -> Outcome {
    let params = AnalysisParams::default();
    let sine: Vec<f64> = (0..10_000).map(|t| (2.0 * PI * t as f64 / 100.0).sin()).collect();
    let sine_est = estimate_period(&sine, &params).ok();
    let sine_ok = is(&sine_est, Classification::Periodic)
        && sine_est
            .and_then(|e| e.period_steps)
            .map_or(false, |p| (p - 100.0).abs() <= 1.0);
    let constant = estimate_period(&vec![0.3; 10_000], &params).ok();
    let mut rng = XorShift64Star::new(2024);
    let noise: Vec<f64> = (0..10_000).map(|_| rng.next_f64() - 0.5).collect();
    let noise_est = estimate_period(&noise, &params).ok();
    Outcome {
        pass: sine_ok && is(&constant, Classification::Static) && is(&noise_est, Classification::Aperiodic),
        detail: format!(
            "sine {}; constant {}; noise {}",
            describe(&sine_est),
            describe(&constant),
            describe(&noise_est)
        ),
    }
}

fn main() -> ExitCode {
    let fig3_config = ExperimentConfig::preset(Preset::Fig3);
    let fig3 = run(&fig3_config);
    let fig3_sum = estimate(&fig3, SUM, &fig3_config.analysis);

    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("C1 no-threshold regime is aperiodic", Box::new(c1_no_threshold_aperiodic)),
        ("C2 threshold regime is periodic", Box::new(|| c2_threshold_periodic(&fig3, &fig3_config))),
        ("C3 two-sides init reaches a static state", Box::new(c3_two_sides_static)),
        ("C4 strong coupling, four sides, periodic", Box::new(move || c4_four_sides_dynamic(fig3_sum))),
        ("C5 period scales as 1/eps", Box::new(c5_period_scaling)),
        ("C6 step matches rotation oracle", Box::new(c6_oracle_equivalence)),
        ("C7 invariants, determinism, performance", Box::new(c7_invariants)),
        ("C8 classifier on synthetic series", Box::new(c8_synthetic_series)),
    ];

    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {} ({:.1}s)",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
