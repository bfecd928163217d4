//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use dicke::measures::{self, qfi_matrix, total_correlations};
use dicke::oracle;
use dicke::spectra::{converged_frame_ground_state, converged_ground_state};
use dicke::sweep::{self, evaluate_point, parallel_map, Grid, MeasureSet, SweepConfig, SweepRow};
use dicke::{ConvergenceOptions, ModelParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn opts() -> ConvergenceOptions {
    ConvergenceOptions::default()
}

fn gmc_only() -> MeasureSet {
    MeasureSet {
        gmc: true,
        qfi: false,
        global: false,
        energy: false,
    }
}

fn check(ok: bool, pass: String, fail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(pass)
    } else {
        Err(fail())
    }
}

fn binary_entropy(p: f64) -> f64 {
    -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
}

fn orders(row: &SweepRow) -> Vec<f64> {
    row.gmc.as_ref().map(|g| g.orders.clone()).unwrap_or_default()
}

fn first_order_critical_points() -> Outcome {
    let step = 1e-3;
    let config = SweepConfig {
        omega_c: 1.0,
        omega_0: 1.0,
        n_qubits: 5,
        lambda_grid: Grid::single(0.0),
        eta_grid: Grid::new(0.0, 1.0, 1001).map_err(|e| e.to_string())?,
        measures: MeasureSet::ALL,
        convergence: opts(),
        workers: workers(),
    };
    let rows = sweep::run_sweep(&config).map_err(|e| e.to_string())?;
    if rows.iter().any(|r| !r.converged) {
        return Err("non-converged point on the λ = 0 line".into());
    }
    let observables = |r: &SweepRow| {
        let mut v = orders(r);
        v.push(r.f_max.unwrap_or(f64::NAN));
        v
    };
    let mut jumps = Vec::new();
    for pair in rows.windows(2) {
        let (a, b) = (observables(&pair[0]), observables(&pair[1]));
        let moved: Vec<bool> = a.iter().zip(&b).map(|(x, y)| (x - y).abs() > 1e-3).collect();
        let drift = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if moved.iter().any(|&m| m) {
            jumps.push((pair[0].eta_over_n, pair[1].eta_over_n, moved.iter().all(|&m| m)));
        } else if drift > 1e-9 {
            return Err(format!(
                "observables drift by {drift:e} inside a plateau at η/N = {}",
                pair[0].eta_over_n
            ));
        }
    }
    let expected: Vec<f64> = sweep::critical_table(5, 1.0, 1.0)
        .map_err(|e| e.to_string())?
        .first_order
        .iter()
        .map(|c| c.eta_c_over_n)
        .collect();
    let located = jumps.len() == expected.len()
        && jumps.iter().zip(&expected).all(|(&(lo, hi, _), &c)| {
            lo - step - 1e-12 <= c && c <= hi + step + 1e-12 && (hi - lo) <= step + 1e-12
        });
    let all_move = jumps.iter().all(|j| j.2);
    check(
        located && all_move,
        format!("jumps between {jumps:?} (expected {expected:?}), every I^k and f_max jumps"),
        || format!("jumps {jumps:?}, expected crossings at {expected:?}"),
    )
}

fn gmc_shares() -> Outcome {
    let row = evaluate_point(1.0, 1.0, 5, 0.0, 0.4, gmc_only(), &opts()).map_err(|e| e.to_string())?;
    let g = row.gmc.ok_or("no GMC")?;
    // W state: S(ρ_1) = h(1/5), ρ_5 pure
    let i1_expected = 5.0 * binary_entropy(0.2);
    let targets = [(5, 40.0), (2, 26.2), (3, 20.0), (4, 13.8)];
    let shares_ok = targets.iter().all(|&(k, s)| (g.share(k) - s).abs() <= 0.1);
    let i1_ok = (g.total - 2.50201).abs() <= 1e-4 && (g.total - i1_expected).abs() < 1e-10;
    let shares: Vec<String> = targets
        .iter()
        .map(|&(k, _)| format!("k={k}: {:.2}%", g.share(k)))
        .collect();
    check(
        shares_ok && i1_ok,
        format!("{}, I1 = {:.6}", shares.join(", "), g.total),
        || format!("{}, I1 = {} (want 2.50201, derived {i1_expected})", shares.join(", "), g.total),
    )
}

fn global_entanglement() -> Outcome {
    let measures = MeasureSet {
        global: true,
        ..gmc_only()
    };
    let row = evaluate_point(1.0, 1.0, 5, 0.0, 0.4, measures, &opts()).map_err(|e| e.to_string())?;
    let eg = row.global.ok_or("no E_G")?;
    let (e1, e2) = (eg[0].ok_or("E_G^(1) n/a")?, eg[1].ok_or("E_G^(2) n/a")?);
    check(
        (e1 - 16.0 / 25.0).abs() <= 1e-10 && (e2 - 48.0 / 75.0).abs() <= 1e-10,
        format!("E_G^(1) = {e1:.12}, E_G^(2) = {e2:.12}"),
        || format!("E_G^(1) = {e1}, E_G^(2) = {e2}, want 0.64"),
    )
}

fn qfi_depths() -> Outcome {
    // Dicke state |S, m⟩: 4 Var(J_x) = 2 (S(S+1) − m²)
    let four_var = |m: f64| 2.0 * (2.5 * 3.5 - m * m);
    let mut lines = Vec::new();
    let mut ok = true;
    for (eta, m, want_f, want_depth) in [(0.4, -1.5, 13.0, 3), (0.75, -0.5, 17.0, 4)] {
        let p = ModelParams::from_scaled(1.0, 1.0, 0.0, eta, 5, 0).map_err(|e| e.to_string())?;
        let gs = converged_ground_state(&p, &opts()).map_err(|e| e.to_string())?;
        let q = qfi_matrix(&gs.qubit_state().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ok &= (q.f_max - want_f).abs() <= 1e-8
            && (q.f_max - four_var(m)).abs() <= 1e-8
            && q.depth == want_depth
            && (gs.mean_m_s() - m).abs() < 1e-10;
        lines.push(format!("η/N={eta}: f_max = {:.10}, depth {}", q.f_max, q.depth));
    }
    check(ok, lines.join("; "), || lines.join("; "))
}

fn sum_rule_suite() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 2..=8 {
        let mut rng = StdRng::seed_from_u64(1000 + n as u64);
        let points: Vec<(f64, f64)> = (0..100)
            .map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(-0.5..1.5)))
            .collect();
        let results = parallel_map(&points, workers(), |&(g, eta)| -> Result<f64, String> {
            let p = ModelParams::from_scaled(1.0, 1.0, g, eta, n, 0).map_err(|e| e.to_string())?;
            let gs = converged_ground_state(&p, &opts()).map_err(|e| e.to_string())?;
            let rho = gs.qubit_state().map_err(|e| e.to_string())?;
            let i1 = total_correlations(&rho).map_err(|e| e.to_string())?;
            let sum: f64 = (2..=n)
                .map(|k| measures::gmc_order_k(&rho, k))
                .sum::<dicke::Result<f64>>()
                .map_err(|e| e.to_string())?;
            Ok((i1 - sum).abs())
        });
        for r in results {
            worst = worst.max(r.map_err(|e| format!("N={n}: {e}"))?);
            count += 1;
        }
    }
    check(
        worst <= 1e-9,
        format!("{count} points, max |I1 − Σ I^k| = {worst:e}"),
        || format!("max |I1 − Σ I^k| = {worst:e}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let points = oracle::default_sample_points();
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut failures = Vec::new();
    for n in 1..=5 {
        let report = oracle::oracle_check(n, &points, oracle::DEFAULT_ORACLE_N_MAX)
            .map_err(|e| format!("N={n}: {e}"))?;
        worst = worst.max(report.max_deviation());
        count += report.comparisons.len();
        failures.extend(report.failures().map(|c| {
            format!(
                "N={n} ({}, {}) {}: {:e}",
                c.lambda_scaled, c.eta_scaled, c.quantity, c.deviation
            )
        }));
    }
    check(
        failures.is_empty(),
        format!("{count} comparisons for N = 1..5, max deviation {worst:e}"),
        || failures.join("; "),
    )
}

fn second_order_signature() -> Outcome {
    let n_list = [8, 16, 24];
    let grid = Grid::new(0.0, 1.2, 49).map_err(|e| e.to_string())?;
    let scan = sweep::extensivity_scan(&n_list, &grid, 1.0, 1.0, &opts(), workers())
        .map_err(|e| e.to_string())?;
    if let Some(r) = scan.rows.iter().find(|r| !r.converged) {
        return Err(format!("N={} λ/√N={} did not converge", r.n_qubits, r.lambda_over_sqrt_n));
    }
    let per_qubit_at = |n: usize, g: f64| {
        scan.rows
            .iter()
            .filter(|r| r.n_qubits == n)
            .min_by(|a, b| {
                (a.lambda_over_sqrt_n - g).abs().total_cmp(&(b.lambda_over_sqrt_n - g).abs())
            })
            .and_then(|r| r.total_per_qubit)
            .unwrap_or(f64::NAN)
    };
    let infl: Vec<f64> = n_list
        .iter()
        .map(|&n| scan.inflection(n).unwrap_or(f64::NAN))
        .collect();
    let approaching = infl.windows(2).all(|w| (w[1] - 0.5).abs() < (w[0] - 0.5).abs());
    let strong: Vec<f64> = n_list.iter().map(|&n| per_qubit_at(n, 1.0)).collect();
    let weak: Vec<f64> = n_list.iter().map(|&n| per_qubit_at(n, 0.3)).collect();
    let (lo, hi) = strong
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let spread = (hi - lo) / lo;
    let decreasing = weak.windows(2).all(|w| w[1] < w[0]);
    let summary = format!(
        "inflections {infl:.4?}, I1/N(1.0) = {strong:.4?} (spread {:.1}%), I1/N(0.3) = {weak:.5?}",
        100.0 * spread
    );
    check(approaching && spread < 0.15 && decreasing, summary.clone(), || summary)
}

fn phase_diagram_structure() -> Outcome {
    let config = SweepConfig {
        omega_c: 1.0,
        omega_0: 1.0,
        n_qubits: 5,
        lambda_grid: Grid::new(0.0, 2.0, 41).map_err(|e| e.to_string())?,
        eta_grid: Grid::new(0.0, 1.0, 41).map_err(|e| e.to_string())?,
        measures: gmc_only(),
        convergence: opts(),
        workers: workers(),
    };
    let rows = sweep::run_sweep(&config).map_err(|e| e.to_string())?;
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    let mut axis = (0, 0);
    let mut strong = (0, 0);
    for r in &rows {
        if r.eta_over_n <= 0.5 {
            continue;
        }
        let o = orders(r);
        let (i2, i5) = (o[0], o[3]);
        if r.lambda_over_sqrt_n == 0.0 {
            axis.0 += 1;
            axis.1 += usize::from(i5 > i2);
        } else if r.lambda_over_sqrt_n > 1.0 {
            strong.0 += 1;
            strong.1 += usize::from(i2 > i5);
        }
    }
    let summary = format!(
        "λ=0, η/N>1/2: I5 > I2 at {}/{} points; λ/√N>1, η/N>1/2: I2 > I5 at {}/{} points; {} unconverged",
        axis.1, axis.0, strong.1, strong.0, unconverged
    );
    check(
        unconverged == 0 && axis.0 > 0 && axis.0 == axis.1 && strong.0 > 0 && strong.0 == strong.1,
        summary.clone(),
        || summary,
    )
}

fn frame_cross_check() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let points: Vec<(usize, f64, f64)> = (0..10)
        .map(|_| (rng.gen_range(2..=6), rng.gen_range(0.0..1.5), rng.gen_range(-0.3..1.0)))
        .collect();
    let results = parallel_map(&points, workers(), |&(n, g, eta)| -> Result<f64, String> {
        let p = ModelParams::from_scaled(1.0, 1.0, g, eta, n, 0).map_err(|e| e.to_string())?;
        let lab = converged_ground_state(&p, &opts()).map_err(|e| e.to_string())?;
        let frame = converged_frame_ground_state(&p, &opts()).map_err(|e| e.to_string())?;
        if !(lab.converged && frame.converged) {
            return Err(format!("N={n} g={g:.3} η/N={eta:.3} not converged"));
        }
        Ok((lab.energy - frame.energy).abs())
    });
    let mut worst = 0.0f64;
    for r in results {
        worst = worst.max(r?);
    }
    check(
        worst <= 1e-8,
        format!("10 points, max |E_lab − E_frame| = {worst:e}"),
        || format!("max |E_lab − E_frame| = {worst:e}"),
    )
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--nocapture`; none apply here.
    let criteria: [Criterion; 9] = [
        ("first-order critical points", first_order_critical_points),
        ("GMC percentage decomposition", gmc_shares),
        ("global entanglement on the W plateau", global_entanglement),
        ("QFI witness depths", qfi_depths),
        ("sum rule property suite", sum_rule_suite),
        ("oracle equivalence", oracle_equivalence),
        ("second-order QPT signature", second_order_signature),
        ("N=5 phase-diagram structure", phase_diagram_structure),
        ("frame cross-check", frame_cross_check),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
