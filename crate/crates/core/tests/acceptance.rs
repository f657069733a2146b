//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed regardless of
//! output capture. Exits non-zero when any criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photon_router::dressed::{dressed_pair, extract_valley_widths, large_detuning_approx};
use photon_router::model::{validate_detuned, CavityParams, CouplingMatrix, PortLabel, ScatterPoint};
use photon_router::oracle::{
    decay_calibration, standard_carriers, verify_carriers, OracleConfig, VerifyReport,
};
use photon_router::scattering::{even_transmission, four_port, scattering_factor, special_points};
use photon_router::sweep::{photon_number_scan, spectrum_1d, Axis, AxisSpec, GridSpec, Quantity};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn cavity(lambda: f64, n: u32) -> CavityParams {
    CavityParams::new(lambda, n).expect("valid cavity")
}

fn reference() -> CouplingMatrix {
    CouplingMatrix::reference_chiral()
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    // Uniform on (0, 1].
    1.0 - rng.gen::<f64>()
}

fn flux_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cases: Vec<_> = (0..10_000)
        .map(|_| {
            let c = CouplingMatrix::new(
                open_unit(&mut rng),
                open_unit(&mut rng),
                open_unit(&mut rng),
                open_unit(&mut rng),
            )
            .expect("positive rates");
            let g = c.gamma();
            let cav = cavity(2.0 * g * open_unit(&mut rng), rng.gen_range(0..=20));
            let dk = rng.gen_range(-10.0..=10.0) * g;
            let da = rng.gen_range(-10.0..=10.0) * g;
            (c, cav, ScatterPoint::from_detunings(dk, da))
        })
        .collect();
    let start = Instant::now();
    let mut flux: f64 = 0.0;
    let mut modulus: f64 = 0.0;
    for (c, cav, p) in &cases {
        for port in PortLabel::ALL {
            flux = flux.max((four_port(p, cav, c, port).probabilities().total() - 1.0).abs());
        }
        modulus = modulus.max((even_transmission(p, cav, c.gamma()).norm() - 1.0).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome::new(
        flux <= 1e-12 && modulus <= 1e-12 && elapsed < 1.0,
        format!("max |sum - 1| = {flux:.2e}, max ||t_e| - 1| = {modulus:.2e}, {elapsed:.3} s"),
    )
}

fn pit_reproduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cav = cavity(1.0, 1);
    let worst = (0..100)
        .map(|_| {
            let da = rng.gen_range(-10.0..=10.0);
            let p = ScatterPoint::from_detunings(-da, da);
            (four_port(&p, &cav, &reference(), PortLabel::RA).probabilities().t_p - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Outcome::new(worst <= 1e-12, format!("max |T_p - 1| = {worst:.2e} over 100 Delta_a"))
}

fn routing_maxima() -> Outcome {
    let cav = cavity(1.0, 1);
    let mut worst: f64 = 0.0;
    let mut roots_gap: f64 = 0.0;
    for i in 0..20 {
        let da = -9.5 + f64::from(i);
        let omega = (da * da + 4.0).sqrt();
        let explicit = [(-da - omega) / 2.0, (-da + omega) / 2.0];
        let from_lib = special_points(da, &cav).pole_roots;
        for (x, y) in explicit.iter().zip(from_lib) {
            roots_gap = roots_gap.max((x - y).abs());
        }
        for dk in explicit {
            let p = four_port(&ScatterPoint::from_detunings(dk, da), &cav, &reference(), PortLabel::RA)
                .probabilities();
            worst = worst.max((p.r_p - 0.6).abs()).max((p.transfer - 0.4).abs()).max(p.t_p.abs());
        }
    }
    Outcome::new(
        worst <= 1e-10,
        format!("max deviation from (R_p, T, T_p) = (0.6, 0.4, 0) is {worst:.2e}; root formulas differ by {roots_gap:.1e}"),
    )
}

fn two_level_limit() -> Outcome {
    let mut worst_u: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut zero_gap: f64 = 0.0;
    let couplings = [
        reference(),
        CouplingMatrix::symmetric(),
        CouplingMatrix::new(0.7, 0.1, 0.1, 0.1).expect("rates"),
        CouplingMatrix::new(0.05, 0.4, 0.3, 0.25).expect("rates"),
    ];
    for c in couplings {
        let g = c.gamma();
        let g_in = c.rate(PortLabel::RA);
        for da in [-3.0, 0.0, 2.5] {
            let system = validate_detuned(c, cavity(1.0, 0), da).expect("valid system");
            let spec = GridSpec::new(vec![AxisSpec::default_1d(Axis::DeltaK, g)], system, PortLabel::RA)
                .expect("grid");
            let table = spectrum_1d(&spec).expect("spectrum");
            for row in &table.rows {
                let dk = row.axes[0];
                let reference = -Complex64::i() * g / Complex64::new(dk, g / 2.0);
                let u = scattering_factor(&ScatterPoint::from_detunings(dk, da), &cavity(1.0, 0), g);
                worst_u = worst_u.max((u - reference).norm());
                let t = (reference * (g_in / g) + 1.0).norm_sqr();
                worst_t = worst_t.max((row.probs.t_p - t).abs());
            }
            let at_zero =
                four_port(&ScatterPoint::from_detunings(0.0, da), &cavity(1.0, 0), &c, PortLabel::RA)
                    .probabilities()
                    .t_p;
            zero_gap = zero_gap.max((at_zero - (1.0 - 2.0 * g_in / g).powi(2)).abs());
        }
    }
    Outcome::new(
        worst_u <= 1e-12 && worst_t <= 1e-12 && zero_gap <= 1e-12,
        format!("max |U - U_2lvl| = {worst_u:.2e}, max |dT_p| = {worst_t:.2e}, T_p(0) gap = {zero_gap:.2e}"),
    )
}

fn dressed_poles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut energy_gap: f64 = 0.0;
    let mut sum_gap: f64 = 0.0;
    for _ in 0..100 {
        let da = rng.gen_range(-10.0..=10.0);
        let cav = cavity(2.0 * open_unit(&mut rng), rng.gen_range(0..=20));
        let pair = dressed_pair(da, &cav, 1.0);
        let roots = special_points(da, &cav).pole_roots;
        let e = pair.energies();
        energy_gap = energy_gap.max((e[0] - roots[0]).abs()).max((e[1] - roots[1]).abs());
        sum_gap = sum_gap.max((pair.gamma_plus + pair.gamma_minus - 1.0).abs());
    }
    Outcome::new(
        energy_gap <= 1e-12 && sum_gap <= 1e-12,
        format!("max |E - root| = {energy_gap:.2e}, max |gamma_+ + gamma_- - gamma| = {sum_gap:.2e}"),
    )
}

fn large_detuning() -> Outcome {
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    let mut sample = String::new();
    for (lambda, n) in [(1.0, 1), (0.5, 4), (0.5, 9), (0.3, 20)] {
        let cav = cavity(lambda, n);
        let da = 10.0 * cav.coupling();
        let exact = dressed_pair(da, &cav, 1.0);
        let approx = large_detuning_approx(da, &cav, 1.0).expect("positive detuning");
        plus = plus.max((exact.gamma_plus / approx.gamma_plus - 1.0).abs());
        minus = minus.max((exact.gamma_minus / approx.gamma_minus - 1.0).abs());
        if n == 1 {
            sample = format!(
                "at n = 1: gamma_- exact {:.4e} vs approx {:.4e}",
                exact.gamma_minus, approx.gamma_minus
            );
        }
    }
    Outcome::new(
        plus <= 0.02 && minus <= 0.02,
        format!("rel. error gamma_+ {plus:.2e}, gamma_- {minus:.2e} (limit 0.02); {sample}"),
    )
}

fn valley_widths() -> Outcome {
    let cav = cavity(1.0, 1);
    let system = |da| validate_detuned(reference(), cav, da).expect("valid system");
    let mut right = Vec::new();
    let mut left_gap: f64 = 0.0;
    let mut left_exact_gap: f64 = 0.0;
    let mut text = Vec::new();
    for da in [1.5, 4.0, 8.0, 16.0] {
        // Fine enough to resolve the narrow left valley (width ~ γ/Δ_a²).
        let axis = AxisSpec::new(Axis::DeltaK, -da - 3.0, 3.0, 200_001).expect("axis");
        let spec = GridSpec::new(vec![axis], system(da), PortLabel::RA).expect("grid");
        let table = spectrum_1d(&spec).expect("spectrum");
        let valleys = extract_valley_widths(&table.axis(0), &table.column(Quantity::Tp));
        let (Some(l), Some(r)) = (valleys.first(), valleys.last()) else {
            return Outcome::new(false, format!("no valleys found at Delta_a = {da}"));
        };
        let (Some(lw), Some(rw)) = (l.fwhm, r.fwhm) else {
            return Outcome::new(false, format!("unresolved valley width at Delta_a = {da}"));
        };
        right.push(rw);
        if da >= 8.0 {
            let approx = large_detuning_approx(da, &cav, 1.0).expect("positive detuning").gamma_minus;
            let exact = dressed_pair(da, &cav, 1.0).gamma_minus;
            left_gap = left_gap.max((lw / approx - 1.0).abs());
            left_exact_gap = left_exact_gap.max((lw / exact - 1.0).abs());
        }
        text.push(format!("Delta_a={da}: right {rw:.4}, left {lw:.4}"));
    }
    let below = right.iter().all(|&w| w < 0.5);
    let monotone = right.windows(2).all(|w| w[1] > w[0]);
    Outcome::new(
        below && monotone && left_gap <= 0.15,
        format!(
            "{}; right < gamma/2: {below}, monotone: {monotone}; left vs approximate gamma_- rel. error {left_gap:.2} (limit 0.15), vs exact gamma_- {left_exact_gap:.3}",
            text.join(", ")
        ),
    )
}

fn photon_trend() -> Outcome {
    let system = validate_detuned(reference(), cavity(1.0, 0), 1.0).expect("valid system");
    let table = photon_number_scan(&system, (0, 250), 0.0, &[1.0, 5.0, 10.0], PortLabel::RA).expect("scan");
    let mut increasing = true;
    let mut crossings = Vec::new();
    let mut tail_gap = f64::NAN;
    for da in [1.0, 5.0, 10.0] {
        let series: Vec<(f64, f64)> =
            table.rows.iter().filter(|r| r.axes[1] == da).map(|r| (r.axes[0], r.probs.t_p)).collect();
        increasing &= series.len() == 251 && series.windows(2).all(|w| w[1].1 > w[0].1);
        let cross = series.iter().find(|(_, t)| *t >= 0.99).map(|(n, _)| *n);
        crossings.push(format!("Delta_a={da}: n={}", cross.map_or("none".into(), |n| n.to_string())));
        if da == 1.0 {
            tail_gap = 1.0 - series[250].1;
        }
    }
    // At Δ_k = 0 with γ_Ra/γ = 1/2: T_p = m²/(m² + Δ_a²/4), m = nλ².
    let derived = |m: f64, da: f64| m * m / (m * m + da * da / 4.0);
    let at_one =
        four_port(&ScatterPoint::from_detunings(0.0, 1.0), &cavity(1.0, 1), &reference(), PortLabel::RA)
            .probabilities()
            .t_p;
    let gap = (at_one - derived(1.0, 1.0)).abs().max((at_one - 0.8).abs());
    Outcome::new(
        increasing && gap <= 1e-12 && tail_gap <= 0.01,
        format!(
            "strictly increasing: {increasing}; T_p(1, 1) = {at_one:.15} (gap {gap:.1e}); 1 - T_p(250) = {tail_gap:.1e}; T_p >= 0.99 from {}",
            crossings.join(", ")
        ),
    )
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let base = OracleConfig::new(0.0, 1.0);
    let carriers = standard_carriers(1.0);
    let mut parts = Vec::new();
    let mut ok = true;
    let mut pole_note = String::new();
    for (label, n, da) in [("n=0", 0, 0.0), ("n=1 Delta_a=0", 1, 0.0), ("n=1 Delta_a=1.5", 1, 1.5)] {
        match verify_carriers(&base, &carriers, da, &cavity(1.0, n), 1.0) {
            Ok(reports) => {
                let worst = reports.iter().map(|r| r.max_error).fold(0.0, f64::max);
                ok &= worst < 0.02;
                parts.push(format!("{label}: {worst:.2e}"));
                if n == 1 && da == 0.0 {
                    pole_note = pole_transmission(&reports);
                }
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    match decay_calibration(1.0) {
        Ok(d) => {
            ok &= d.max_relative_error < 0.01;
            parts.push(format!("decay {:.2e}", d.max_relative_error));
        }
        Err(e) => {
            ok = false;
            parts.push(format!("decay: {e}"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 120.0;
    Outcome::new(ok, format!("max error {}; {pole_note}; {elapsed:.1} s", parts.join(", ")))
}

/// |T_p| amplitude at the pole carriers ±λ from the even-mode estimate.
fn pole_transmission(reports: &[VerifyReport]) -> String {
    let weight = reference().rate(PortLabel::RA) / reference().gamma();
    let vals: Vec<String> = reports
        .iter()
        .filter(|r| (r.carrier.abs() - 1.0).abs() < 1e-12)
        .filter_map(|r| r.at_carrier())
        .map(|row| {
            let t = Complex64::new(row.t_est[0], row.t_est[1]);
            format!("{:.1e}", (1.0 + (t - 1.0) * weight).norm())
        })
        .collect();
    format!("|t_p| at pole carriers {}", vals.join(", "))
}

fn list_data_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .expect("output directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| !n.ends_with(".meta"))
        .collect();
    names.sort();
    names
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().expect("temp dir");
    let runs: Vec<_> = ["first", "second"].iter().map(|s| root.path().join(s)).collect();
    for dir in &runs {
        let status = Command::new(env!("CARGO_BIN_EXE_photon-router"))
            .args(["--out", dir.to_str().expect("utf-8 path"), "figure", "fig2"])
            .stdout(Stdio::null())
            .status()
            .expect("run binary");
        if !status.success() {
            return Outcome::new(false, format!("figure fig2 exited with {status}"));
        }
    }
    let names = list_data_files(&runs[0]);
    if names != list_data_files(&runs[1]) || names.is_empty() {
        return Outcome::new(false, "runs produced different file sets");
    }
    let differing: Vec<&String> =
        names.iter().filter(|n| fs::read(runs[0].join(n)).ok() != fs::read(runs[1].join(n)).ok()).collect();
    Outcome::new(
        differing.is_empty(),
        format!("{} data files compared, {} differ", names.len(), differing.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("flux conservation", flux_conservation),
        ("PIT reproduction", pit_reproduction),
        ("routing maxima", routing_maxima),
        ("two-level limit", two_level_limit),
        ("dressed-pole correspondence", dressed_poles),
        ("large-detuning asymptotics", large_detuning),
        ("valley-width bound", valley_widths),
        ("photon-number trend", photon_trend),
        ("oracle agreement", oracle_agreement),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status} {} {name}: {}", i + 1, outcome.detail);
        failed += usize::from(!outcome.passed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
