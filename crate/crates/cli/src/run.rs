use difftd::instance::fmt_f64;
use difftd::stability::{
    build_a, eigen_trajectory, eta_star, is_positive_stable, stability_region, EtaStarOptions,
};
use difftd::td::{expected_update_run, init_v0, run_td, Algorithm, Clock, TdRun, TdTrajectory};
use rayon::prelude::*;

use crate::config::{EtaStarConfig, RegionConfig, RunConfig, SimulateConfig, TrajectoryConfig};
use crate::csv::{Cell, Table};
use crate::error::CliError;

pub struct Output {
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    pub summary: String,
}

pub fn execute(cfg: &RunConfig, prefix: Option<&str>) -> Result<Output, CliError> {
    match cfg {
        RunConfig::StabilityRegion(c) => region(c, prefix.unwrap_or("stability_region")),
        RunConfig::EtaStar(c) => star(c, prefix.unwrap_or("eta_star")),
        RunConfig::EigenTrajectory(c) => trajectory(c, prefix.unwrap_or("eigen_trajectory")),
        RunConfig::Simulate(c) => simulate(c, prefix.unwrap_or("simulate")),
    }
}

fn fmt_list(xs: &[f64]) -> String {
    let v: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", v.join(", "))
}

fn region(cfg: &RegionConfig, prefix: &str) -> Result<Output, CliError> {
    let inst = cfg.source.instance(&cfg.tolerances)?;
    let reg = stability_region(&inst, cfg.eta_cap, &cfg.tolerances)?;
    let mut t = Table::new(
        &RunConfig::StabilityRegion(cfg.clone()),
        &[("boundary_roots", fmt_list(&reg.boundary_roots))],
        &["interval_index", "lo", "hi"],
    );
    for (i, iv) in reg.intervals.iter().enumerate() {
        t.row(&[Cell::U(i as u64), Cell::F(iv.lo), Cell::F(iv.hi)]);
    }
    let mut summary = if reg.intervals.is_empty() {
        format!("stability region is empty: {}", reg.empty_reason.as_deref().unwrap_or("no stable cell"))
    } else {
        let parts: Vec<String> = reg
            .intervals
            .iter()
            .map(|i| format!("({}, {})", fmt_f64(i.lo), fmt_f64(i.hi)))
            .collect();
        format!("stability region: {}", parts.join(" U "))
    };
    summary.push_str(&format!("\nboundary roots: {}", fmt_list(&reg.boundary_roots)));

    if cfg.verify_samples > 0 {
        let n = cfg.verify_samples;
        let (mut skipped, mut bad) = (0, Vec::new());
        for i in 0..n {
            // Log-spaced over four decades around the cap.
            let eta = cfg.eta_cap * 10f64.powf(-3.0 + 4.0 * (i as f64 + 0.5) / n as f64);
            if reg.boundary_roots.iter().any(|&r| (eta - r).abs() <= 1e-6 * r) {
                skipped += 1;
                continue;
            }
            if is_positive_stable(&build_a(&inst, eta)?)? != reg.contains(eta) {
                bad.push(eta);
            }
        }
        if !bad.is_empty() {
            return Err(CliError::Check(format!(
                "region disagrees with direct Hurwitz test at eta = {}",
                fmt_list(&bad)
            )));
        }
        summary.push_str(&format!(
            "\nverified against direct test at {} samples ({skipped} skipped near a boundary)",
            n - skipped
        ));
    }
    Ok(Output {
        files: vec![(format!("{prefix}.csv"), t.finish())],
        summary,
    })
}

fn star(cfg: &EtaStarConfig, prefix: &str) -> Result<Output, CliError> {
    let inst = cfg.source.instance(&cfg.tolerances)?;
    let opts = EtaStarOptions {
        omega_min: cfg.omega_min,
        omega_max: cfg.omega_max,
        grid: cfg.grid,
    };
    let res = eta_star(&inst, &opts, &cfg.tolerances)?;
    let mut t = Table::new(
        &RunConfig::EtaStar(cfg.clone()),
        &[
            ("eta_star", fmt_f64(res.eta_star)),
            ("omega_range", fmt_list(&[res.omega_range.0, res.omega_range.1])),
        ],
        &["omega", "eta", "residual"],
    );
    for w in &res.witnesses {
        t.row(&[Cell::F(w.omega), Cell::F(w.eta), Cell::F(w.residual)]);
    }
    let summary = if res.eta_star.is_finite() {
        format!("eta_star = {}", fmt_f64(res.eta_star))
    } else {
        "eta_star = inf".to_string()
    };
    Ok(Output {
        files: vec![(format!("{prefix}.csv"), t.finish())],
        summary,
    })
}

fn trajectory(cfg: &TrajectoryConfig, prefix: &str) -> Result<Output, CliError> {
    if cfg.points == 0 || !(cfg.t_max >= cfg.t_min) || cfg.t_min < 0.0 {
        return Err(CliError::Usage("need points >= 1 and 0 <= t_min <= t_max".into()));
    }
    let inst = cfg.source.instance(&cfg.tolerances)?;
    let grid = cfg.grid();
    let tr = eigen_trajectory(&inst, &grid, &cfg.tolerances)?;
    let crossings: Vec<String> = tr
        .crossings
        .iter()
        .map(|c| {
            format!(
                "track {} at t = {:.10} (ordinate/eta_ref = {:+.10}, {})",
                c.track,
                c.eta / cfg.eta_ref,
                c.ordinate / cfg.eta_ref,
                if c.direction < 0 { "into Re < 0" } else { "into Re > 0" }
            )
        })
        .collect();
    let mut t = Table::new(
        &RunConfig::EigenTrajectory(cfg.clone()),
        &[("crossings", format!("[{}]", crossings.join("; ")))],
        &["eta", "t_ratio", "eig_index", "re", "im", "is_trivial"],
    );
    for p in &tr.points {
        for (k, z) in p.eigenvalues.iter().enumerate() {
            t.row(&[
                Cell::F(p.eta),
                Cell::F(p.eta / cfg.eta_ref),
                Cell::U(k as u64),
                Cell::F(z.re / cfg.eta_ref),
                Cell::F(z.im / cfg.eta_ref),
                Cell::B(p.trivial[k]),
            ]);
        }
    }
    let mut summary = format!("{} grid points, {} imaginary-axis crossings", grid.len(), crossings.len());
    for c in &crossings {
        summary.push_str("\n  ");
        summary.push_str(c);
    }
    if !tr.ambiguous.is_empty() {
        summary.push_str(&format!("\n{} ambiguous track pairings", tr.ambiguous.len()));
    }
    Ok(Output {
        files: vec![(format!("{prefix}.csv"), t.finish())],
        summary,
    })
}

fn trajectory_table(cfg: SimulateConfig, extra: &[(&str, String)], tr: &TdTrajectory) -> String {
    let mut t = Table::new(
        &RunConfig::Simulate(cfg),
        extra,
        &["t", "norm_v", "dist_e", "J_hat", "diverged_flag"],
    );
    for c in &tr.checkpoints {
        t.row(&[Cell::U(c.t), Cell::F(c.norm_v), Cell::F(c.dist_e), Cell::F(c.j_hat), Cell::B(c.diverged)]);
    }
    t.finish()
}

fn run_summary(label: &str, tr: &TdTrajectory) -> String {
    let (a, b) = (tr.first(), tr.last());
    format!(
        "{label}: dist_e {:.6e} -> {:.6e} (ratio {:.4}), norm_v -> {:.6e}{}",
        a.dist_e,
        b.dist_e,
        b.dist_e / a.dist_e,
        b.norm_v,
        if tr.diverged() { ", diverged" } else { "" }
    )
}

fn simulate(cfg: &SimulateConfig, prefix: &str) -> Result<Output, CliError> {
    let tol = &cfg.tolerances;
    let inst = cfg.source.instance(tol)?;
    let (v0, j0) = init_v0(&build_a(&inst, cfg.init_eta)?, cfg.init_eta, tol)?;

    if cfg.expected_update {
        let Algorithm::Differential { eta } = cfg.algorithm else {
            return Err(CliError::Usage("the expected-update surrogate needs the differential algorithm".into()));
        };
        let tr = expected_update_run(&inst, eta, &cfg.schedule, cfg.steps, &v0, j0, cfg.checkpoint_ratio)?;
        let single = SimulateConfig {
            seeds: vec![],
            clocks: vec![Clock::Global],
            ..cfg.clone()
        };
        return Ok(Output {
            summary: run_summary("expected update", &tr),
            files: vec![(format!("{prefix}_expected.csv"), trajectory_table(single, &[], &tr))],
        });
    }

    if cfg.seeds.is_empty() || cfg.clocks.is_empty() {
        return Err(CliError::Usage("need at least one seed and one clock".into()));
    }
    let ex = cfg.source.experiment_mdp(cfg.kappa, cfg.initial_state)?;
    let extra = [
        ("rng", "ChaCha8 (rand_chacha), seed_from_u64".to_string()),
        ("kappa", fmt_f64(ex.kappa)),
        ("kappa_max", fmt_f64(ex.kappa_max)),
    ];
    let jobs: Vec<(u64, Clock)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| cfg.clocks.iter().map(move |&c| (s, c)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(seed, clock)| {
            let run = TdRun {
                algorithm: cfg.algorithm,
                schedule: cfg.schedule,
                clock,
                steps: cfg.steps,
                seed,
                checkpoint_ratio: cfg.checkpoint_ratio,
                v0: v0.clone(),
                j0,
            };
            let tr = run_td(&ex.mdp, &ex.policies, &run)?;
            let single = SimulateConfig {
                seeds: vec![seed],
                clocks: vec![clock],
                ..cfg.clone()
            };
            let label = format!("{} seed {seed}", clock.name());
            Ok::<_, CliError>((
                (format!("{prefix}_{}_seed{seed}.csv", clock.name()), trajectory_table(single, &extra, &tr)),
                run_summary(&label, &tr),
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (files, lines): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(Output {
        files,
        summary: lines.join("\n"),
    })
}
