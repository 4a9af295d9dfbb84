//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured quantity (run with `-- --nocapture` to see them).

mod common;

use common::{jacobi_svd, scratch_dir};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use romlab::closure::{compute_targets, split_windows};
use romlab::eval::{
    grid_search, r2_val, select_best, EnergyForm, EnergyOps, GridOutcome, HyperPoint,
    RomEvalContext,
};
use romlab::fields::{generate_burgers, BurgersConfig, InitialProfile};
use romlab::pipeline::{fom_energy_series, run_pipeline, Family, PipelineConfig};
use romlab::pod::{compute_pod_max, FieldForm};
use romlab::regress::symbolic::{evolve, parse_expr, print_expr, simplify, SrConfig};
use romlab::regress::{design_rank, fit_quadratic_tsvd, fit_ridge, NnConfig};
use romlab::rom::{assemble_operators, integrate};
use romlab::{RomOperators, StepperConfig};
use romlab::ClosureDataset;

fn burgers(n: usize, nu: f64, end: f64, dt: f64, profile: InitialProfile, seed: u64) -> romlab::FieldEnsemble {
    generate_burgers(&BurgersConfig {
        resolution: n,
        viscosity: nu,
        end_time: end,
        dt_sample: dt,
        profile,
        seed,
    })
    .unwrap()
}

/// Criterion 1: the closure target vanishes identically when r = R, for
/// any ensemble and any admissible rank, within 1e-11. Runtime < 10 s.
#[test]
fn criterion_01_closure_vanishing_identity() {
    let start = std::time::Instant::now();
    let mut worst = 0.0f64;
    for (seed, nu) in [(1u64, 0.01), (7, 0.005)] {
        let ens = burgers(128, nu, 1.0, 0.05, InitialProfile::Mixed, seed);
        let basis = compute_pod_max(&ens).unwrap();
        for m in [2usize, 4, basis.rank().min(8)] {
            let ds = compute_targets(&ens, &basis, m, m).unwrap();
            let max_tau = ds.targets.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            worst = worst.max(max_tau);
            assert!(
                max_tau <= 1e-11,
                "tau not vanishing at r = R = {m}: {max_tau:e}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}");
    println!(
        "criterion 1 (closure vanishing at r = R): PASS, max |tau| = {worst:.2e} <= 1e-11 in {elapsed:.1?}"
    );
}

/// Criterion 2: adding the exact closure to the r-dimensional advection
/// term reproduces the first r components of the R-dimensional advection
/// term at every snapshot, to 1e-10 relative.
#[test]
fn criterion_02_closure_consistency_identity() {
    let ens = burgers(128, 0.005, 1.0, 0.05, InitialProfile::Mixed, 3);
    let basis = compute_pod_max(&ens).unwrap();
    let (r, big_r) = (3usize, 10usize);
    let ds = compute_targets(&ens, &basis, r, big_r).unwrap();
    let ops_small = assemble_operators(&basis, r, 1.0).unwrap();
    let ops_big = assemble_operators(&basis, big_r, 1.0).unwrap();

    let mut worst = 0.0f64;
    for j in 0..ens.snapshot_count() {
        let coeffs = basis
            .project(&ens.snapshot(j), big_r, FieldForm::Centered)
            .unwrap();
        let adv_small = ops_small.advection_galerkin(&coeffs[..r]);
        let adv_big = ops_big.advection_galerkin(&coeffs);
        for i in 0..r {
            let closed = -adv_small[i] + ds.targets[(j, i)];
            let full = -adv_big[i];
            let rel = (closed - full).abs() / full.abs().max(1e-30);
            worst = worst.max(rel);
            assert!(
                rel <= 1e-10,
                "sample {j} component {i}: relative mismatch {rel:e}"
            );
        }
    }
    println!(
        "criterion 2 (closure consistency, fixes the sign convention): PASS, worst relative mismatch {worst:.2e} <= 1e-10"
    );
}

/// Criterion 3: POD orthonormality <= 1e-10, full-rank reconstruction
/// <= 1e-9 relative, Gramian eigenvalues match an independent SVD oracle
/// to 1e-10 relative on K <= 50.
#[test]
fn criterion_03_pod_correctness() {
    // Short convection-dominated window: the whole nonzero spectrum sits
    // far above the rank cutoff.
    let ens = burgers(128, 0.005, 0.45, 0.05, InitialProfile::Mixed, 11);
    assert!(ens.snapshot_count() <= 50);
    let basis = compute_pod_max(&ens).unwrap();

    let ortho = basis.orthonormality_residual().unwrap();
    assert!(ortho <= 1e-10, "orthonormality residual {ortho:e}");

    let rank = basis.rank();
    let mut worst_recon = 0.0f64;
    let disc = ens.discretization();
    for k in 0..ens.snapshot_count() {
        let u = ens.raw_snapshot(k);
        let coeffs = basis.project(&u, rank, FieldForm::Raw).unwrap();
        let back = basis.reconstruct(&coeffs).unwrap();
        let err2: f64 = u.iter().zip(&back).map(|(a, b)| (a - b) * (a - b)).sum();
        let norm2 = disc.dot(&u, &u).unwrap().max(1e-30);
        worst_recon = worst_recon.max((err2 / norm2).sqrt());
    }
    assert!(
        worst_recon <= 1e-9,
        "full-rank reconstruction error {worst_recon:e}"
    );

    // Independent oracle: Jacobi SVD of W^(1/2) U.
    let w = disc.quadrature_weights();
    let mut scaled = ens.snapshots().clone();
    for (i, &wi) in w.iter().enumerate() {
        let root = wi.sqrt();
        for v in scaled.row_mut(i).iter_mut() {
            *v *= root;
        }
    }
    let (_, sigma, _) = jacobi_svd(&scaled);
    let mut squared: Vec<f64> = sigma
        .iter()
        .map(|s| s * s / ens.snapshot_count() as f64)
        .collect();
    squared.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = basis.eigenvalues()[0];
    let mut worst_eig = 0.0f64;
    for (i, &lambda) in basis.eigenvalues().iter().enumerate() {
        worst_eig = worst_eig.max((lambda - squared[i]).abs() / scale);
    }
    assert!(worst_eig <= 1e-10, "eigenvalue mismatch {worst_eig:e}");

    println!(
        "criterion 3 (POD correctness): PASS, orthonormality {ortho:.2e}, reconstruction {worst_recon:.2e}, eigenvalues vs SVD oracle {worst_eig:.2e}"
    );
}

fn decay_operators() -> RomOperators {
    RomOperators {
        mass: DMatrix::identity(1, 1),
        stiffness: DMatrix::identity(1, 1),
        advection: vec![0.0],
        zeroth_advection: vec![0.0],
        zeroth_stiffness: vec![0.0],
        coupling_zeroth_carrier: DMatrix::zeros(1, 1),
        coupling_zeroth_carried: DMatrix::zeros(1, 1),
        reynolds: 1.0,
        dim: 1,
    }
}

/// Criterion 4: observed convergence orders on u' = -u over dt halvings
/// 1e-2 -> 2.5e-3: BDF1 >= 0.95, BDF3/EXT3 >= 2.7.
#[test]
fn criterion_04_stepper_orders() {
    let ops = decay_operators();
    let errors = |order: usize| -> Vec<f64> {
        [1e-2f64, 5e-3, 2.5e-3]
            .iter()
            .map(|&dt| {
                let steps = (1.0 / dt).round() as usize;
                let history: Vec<Vec<f64>> = (0..order)
                    .map(|i| vec![((i as f64) * dt).exp()])
                    .rev()
                    .collect();
                let config = StepperConfig::new(dt, order, steps, 1.0);
                let traj = integrate(&ops, &history, &config, None).unwrap();
                (traj.states.last().unwrap()[0] - (-1.0f64).exp()).abs()
            })
            .collect()
    };
    let order_of = |errs: &[f64]| -> f64 {
        0.5 * ((errs[0] / errs[1]).log2() + (errs[1] / errs[2]).log2())
    };

    let e1 = errors(1);
    let p1 = order_of(&e1);
    assert!(p1 >= 0.95, "BDF1 observed order {p1}");

    let e3 = errors(3);
    let p3 = order_of(&e3);
    assert!(p3 >= 2.7, "BDF3/EXT3 observed order {p3}");

    println!(
        "criterion 4 (stepper orders): PASS, BDF1 order {p1:.3} >= 0.95, BDF3/EXT3 order {p3:.3} >= 2.7"
    );
}

/// Criterion 5: regressor oracles. Ridge vs hand-rolled normal equations
/// to 1e-10; truncated SVD vs explicit Jacobi pseudo-inverse to 1e-9;
/// network gradients vs central finite differences to 1e-4 relative on
/// at least 20 random weights.
#[test]
fn criterion_05_regressor_oracles() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let n = 80;
    let r = 3;
    let inputs: DMatrix<f64> = DMatrix::from_fn(n, r, |_, _| rng.gen_range(-1.5..1.5));
    let mut targets = DMatrix::zeros(n, r);
    for j in 0..n {
        targets[(j, 0)] = inputs[(j, 0)] * inputs[(j, 1)] + 0.2;
        targets[(j, 1)] = (inputs[(j, 2)]).sin() - inputs[(j, 0)];
        targets[(j, 2)] = inputs[(j, 1)] * 0.5 - inputs[(j, 2)] * inputs[(j, 2)];
    }
    let ds = ClosureDataset {
        inputs: inputs.clone(),
        targets: targets.clone(),
        times: (0..n).map(|j| j as f64).collect(),
        resolved_dim: r,
        unresolved_dim: r,
    };

    // (a) ridge vs Gaussian-elimination normal equations.
    let alpha = 0.75;
    let model = fit_ridge(&ds, alpha).unwrap();
    let p = r + 1;
    let x = |j: usize, d: usize| if d == 0 { 1.0 } else { inputs[(j, d - 1)] };
    let mut worst_ridge = 0.0f64;
    for i in 0..r {
        let mut a = vec![vec![0.0f64; p]; p];
        let mut b = vec![0.0f64; p];
        for d1 in 0..p {
            for d2 in 0..p {
                a[d1][d2] = (0..n).map(|j| x(j, d1) * x(j, d2)).sum();
            }
            if d1 > 0 {
                a[d1][d1] += alpha;
            }
            b[d1] = (0..n).map(|j| x(j, d1) * targets[(j, i)]).sum();
        }
        let beta = gaussian_solve(a, b);
        for d in 0..p {
            worst_ridge = worst_ridge.max((model.weights[(i, d)] - beta[d]).abs());
        }
    }
    assert!(worst_ridge <= 1e-10, "ridge vs oracle {worst_ridge:e}");

    // (b) truncated SVD vs Jacobi pseudo-inverse. The design has three
    // identical diagonal blocks, so singular values come in triples; the
    // truncation rank stays on a triple boundary to keep the truncated
    // subspace well defined.
    let full = design_rank(&ds);
    let sub = (full / r / 2).max(1) * r;
    let model = fit_quadratic_tsvd(&ds, sub).unwrap();
    let (g, f) = quadratic_system(&ds);
    let (u, sigma, v) = jacobi_svd(&g);
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());
    let mut x_vec = vec![0.0f64; g.ncols()];
    for &idx in order.iter().take(sub) {
        let mut coeff = 0.0;
        for row in 0..g.nrows() {
            coeff += u[(row, idx)] * f[row];
        }
        coeff /= sigma[idx];
        for c in 0..g.ncols() {
            x_vec[c] += coeff * v[(c, idx)];
        }
    }
    let mut worst_tsvd = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            worst_tsvd =
                worst_tsvd.max((model.linear[(i, j)] - x_vec[i * r + j]).abs());
            for k in 0..r {
                let q = (i * r + j) * r + k;
                worst_tsvd =
                    worst_tsvd.max((model.quadratic[q] - x_vec[r * r + q]).abs());
            }
        }
    }
    assert!(worst_tsvd <= 1e-9, "tsvd vs pseudo-inverse {worst_tsvd:e}");

    // (c) network gradients vs central differences.
    let cfg = NnConfig {
        hidden: vec![12, 8],
        l2: 1e-4,
        dropout: 0.0,
        ..NnConfig::new(9)
    };
    let net = romlab::regress::MlpClosure::<f64>::initialized(r, r, &cfg);
    let (_, grad_w, grad_b) = net.loss_and_grad(&inputs, &targets, None);
    let h = 1e-6;
    let mut checked = 0;
    let mut worst_grad = 0.0f64;
    while checked < 20 {
        let layer = rng.gen_range(0..net.weights.len());
        let bias = rng.gen::<f64>() < 0.3;
        let (analytic, fd) = if bias {
            let idx = rng.gen_range(0..net.biases[layer].len());
            let mut up = net.clone();
            up.biases[layer][idx] += h;
            let mut down = net.clone();
            down.biases[layer][idx] -= h;
            let (lu, _, _) = up.loss_and_grad(&inputs, &targets, None);
            let (ld, _, _) = down.loss_and_grad(&inputs, &targets, None);
            (grad_b[layer][idx], (lu - ld) / (2.0 * h))
        } else {
            let idx = rng.gen_range(0..net.weights[layer].len());
            let mut up = net.clone();
            up.weights[layer][idx] += h;
            let mut down = net.clone();
            down.weights[layer][idx] -= h;
            let (lu, _, _) = up.loss_and_grad(&inputs, &targets, None);
            let (ld, _, _) = down.loss_and_grad(&inputs, &targets, None);
            (grad_w[layer][idx], (lu - ld) / (2.0 * h))
        };
        let scale = fd.abs().max(analytic.abs()).max(1e-4);
        let rel = (analytic - fd).abs() / scale;
        worst_grad = worst_grad.max(rel);
        assert!(rel <= 1e-4, "gradient mismatch {rel:e}");
        checked += 1;
    }

    println!(
        "criterion 5 (regressor oracles): PASS, ridge {worst_ridge:.2e} <= 1e-10, tsvd {worst_tsvd:.2e} <= 1e-9, mlp gradients {worst_grad:.2e} <= 1e-4 on {checked} weights"
    );
}

/// Criterion 6: planted-expression recovery. Population 1000, depth <= 5,
/// tournament 5, 10 constant-optimizer iterations; the target
/// 0.5 u1 u2 - 0.3 sin(u1) is recovered with fitness >= 0.999 in at least
/// 3 of 5 seeds within 50 generations, under 5 minutes.
#[test]
fn criterion_06_planted_expression_recovery() {
    let start = std::time::Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
    let n = 500;
    let inputs: DMatrix<f64> = DMatrix::from_fn(n, 2, |_, _| rng.gen_range(-2.0..2.0));
    let target: Vec<f64> = (0..n)
        .map(|j| 0.5 * inputs[(j, 0)] * inputs[(j, 1)] - 0.3 * (inputs[(j, 0)]).sin())
        .collect();

    let mut hits = 0;
    let mut fitnesses = Vec::new();
    for seed in 0..5u64 {
        let mut cfg = SrConfig::new(seed);
        cfg.primitive_set = 2; // add, sub, mul, sin, constant, variable
        cfg.max_length = 15;
        cfg.generations = 50;
        cfg.population = 1000;
        let run = evolve(&inputs, &target, &cfg, seed).unwrap();
        assert!(run.expr.depth() <= 5 && run.expr.len() <= 15);
        fitnesses.push(run.fitness);
        if run.fitness >= 0.999 {
            hits += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(hits >= 3, "only {hits}/5 seeds recovered: {fitnesses:?}");
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}");
    println!(
        "criterion 6 (planted-expression recovery): PASS, {hits}/5 seeds >= 0.999 (fitness {fitnesses:?}) in {elapsed:.1?}"
    );
}

/// Criterion 7: occurrence counting reproduces the published worked
/// example: two u1, two u4, one u5, two sines.
#[test]
fn criterion_07_occurrence_counting() {
    let text =
        "0.015u1 + 0.010u4 + sin(0.191u1 - 0.100u5 + sin(0.064u4) - 1.569) + 0.979";
    let expr: romlab::regress::symbolic::Expr<f64> = parse_expr(text).unwrap();
    let simplified = simplify(&expr);
    let counts = simplified.occurrences();
    assert_eq!(counts.get("u1"), Some(&2), "{counts:?}");
    assert_eq!(counts.get("u4"), Some(&2), "{counts:?}");
    assert_eq!(counts.get("u5"), Some(&1), "{counts:?}");
    assert_eq!(counts.get("sin"), Some(&2), "{counts:?}");
    assert_eq!(counts.len(), 4, "{counts:?}");

    // The model evaluates as printed: at u = 0 it reduces to
    // sin(-1.569) + 0.979.
    let at_zero = expr.eval(&[0.0; 5]);
    let want = (-1.569f64).sin() + 0.979;
    assert!((at_zero - want).abs() <= 1e-15);

    // Round trip through the grammar is bit-exact.
    let back: romlab::regress::symbolic::Expr<f64> =
        parse_expr(&print_expr(&expr)).unwrap();
    assert_eq!(expr, back);

    println!(
        "criterion 7 (occurrence counting): PASS, counts {counts:?}, value at origin matches to 1e-15"
    );
}

fn desk_pipeline(out: std::path::PathBuf, family: Family, grid: Vec<HyperPoint>) -> PipelineConfig {
    PipelineConfig {
        out_dir: out,
        burgers: BurgersConfig {
            resolution: 256,
            viscosity: 0.005,
            end_time: 39.95,
            dt_sample: 0.05,
            profile: InitialProfile::Gentle,
            seed: 2,
        },
        reynolds: None,
        resolved_dim: 3,
        probe_dim: 15,
        window_fractions: (0.25, 0.25, 0.5),
        family,
        grid,
        seeds: 5,
        seed: 0,
        stepper_order: 3,
        substeps: 5,
        energy_form: EnergyForm::SqrtHalf,
    }
}

/// Criterion 8: desk-scale end-to-end study (nu = 0.005, N = 256, K = 800,
/// r = 3, R = 15, windows 25/25/50): the closed model's test-window
/// relative MSE is strictly below the no-closure baseline for both the
/// quadratic and the symbolic families; the symbolic number is the mean
/// over 5 seeds. Runtime < 15 minutes.
#[test]
fn criterion_08_end_to_end_closures_beat_grom() {
    let start = std::time::Instant::now();

    // Quadratic family over the full truncation-rank grid.
    let d2_cfg = desk_pipeline(
        scratch_dir("c8_d2"),
        Family::Quadratic,
        (1..=36).map(|svd_rank| HyperPoint::Quadratic { svd_rank }).collect(),
    );
    let (d2_outcome, _) = run_pipeline(&d2_cfg).unwrap();
    assert!(
        d2_outcome.rmse_closed.mean.is_finite(),
        "quadratic run diverged"
    );
    assert!(
        d2_outcome.rmse_closed.mean < d2_outcome.rmse_grom,
        "quadratic closure did not improve: {} vs {}",
        d2_outcome.rmse_closed.mean,
        d2_outcome.rmse_grom
    );

    // Symbolic family, 5 seeds at a fixed configuration.
    let mut sr = SrConfig::new(0);
    sr.primitive_set = 4; // add, sub, mul, sin, cos, constant, variable
    sr.max_length = 15;
    sr.generations = 25;
    sr.population = 1000;
    let sr_cfg = desk_pipeline(
        scratch_dir("c8_sr"),
        Family::Symbolic,
        vec![HyperPoint::Symbolic(sr)],
    );
    let (sr_outcome, _) = run_pipeline(&sr_cfg).unwrap();
    assert_eq!(
        sr_outcome.rmse_closed.per_seed.len(),
        5,
        "expected 5 seeds"
    );
    assert!(
        sr_outcome.rmse_closed.excluded.is_empty(),
        "seeds diverged: {:?}",
        sr_outcome.rmse_closed.excluded
    );
    assert!(
        sr_outcome.rmse_closed.mean < sr_outcome.rmse_grom,
        "symbolic closure did not improve: {} vs {}",
        sr_outcome.rmse_closed.mean,
        sr_outcome.rmse_grom
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 900, "took {elapsed:?}");
    println!(
        "criterion 8 (end-to-end closures beat G-ROM): PASS, d2 {:.3e} < {:.3e}; sr mean over 5 seeds {:.3e} (std {:.1e}) < {:.3e}; {elapsed:.1?}",
        d2_outcome.rmse_closed.mean,
        d2_outcome.rmse_grom,
        sr_outcome.rmse_closed.mean,
        sr_outcome.rmse_closed.std,
        sr_outcome.rmse_grom
    );
}

/// Criterion 9: rerunning the full pipeline with identical configuration
/// and seeds reproduces every report byte.
#[test]
fn criterion_09_pipeline_determinism() {
    let make = |label: &str| -> PipelineConfig {
        let mut sr = SrConfig::new(0);
        sr.primitive_set = 4;
        sr.max_length = 10;
        sr.generations = 10;
        sr.population = 300;
        PipelineConfig {
            out_dir: scratch_dir(label),
            burgers: BurgersConfig {
                resolution: 128,
                viscosity: 0.01,
                end_time: 7.95,
                dt_sample: 0.05,
                profile: InitialProfile::Gentle,
                seed: 5,
            },
            reynolds: None,
            resolved_dim: 2,
            probe_dim: 6,
            window_fractions: (0.25, 0.25, 0.5),
            family: Family::Symbolic,
            grid: vec![HyperPoint::Symbolic(sr)],
            seeds: 3,
            seed: 0,
            stepper_order: 3,
            substeps: 5,
            energy_form: EnergyForm::SqrtHalf,
        }
    };
    let a = make("c9_a");
    let b = make("c9_b");
    run_pipeline(&a).unwrap();
    run_pipeline(&b).unwrap();

    let mut names: Vec<String> = std::fs::read_dir(&a.out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in &names {
        let left = std::fs::read(a.out_dir.join(name)).unwrap();
        let right = std::fs::read(b.out_dir.join(name)).unwrap();
        assert_eq!(left, right, "artifact {name} differs between reruns");
    }
    println!(
        "criterion 9 (byte-identical reruns): PASS, {} artifacts identical ({})",
        names.len(),
        names.join(", ")
    );
}

/// Criterion 10: hyperparameter search. On a two-point ridge-alpha grid
/// the selection matches an exhaustive oracle that scores both points
/// end to end; exact score ties select the smaller parameter count.
#[test]
fn criterion_10_grid_search_selection() {
    let ens = burgers(128, 0.01, 7.95, 0.05, InitialProfile::Gentle, 5);
    let windows = split_windows(ens.snapshot_count(), (0.25, 0.25, 0.5)).unwrap();
    let training = ens.window(windows.train.clone()).unwrap();
    let basis = compute_pod_max(&training).unwrap();
    let (r, big_r) = (2usize, 6usize);
    let ds = compute_targets(&training, &basis, r, big_r).unwrap();
    let ops = assemble_operators(&basis, r, 1.0 / 0.01).unwrap();
    let energy = EnergyOps::new(&basis).unwrap();
    let e_fom = fom_energy_series(&ens, &basis, &energy, &windows).unwrap();
    let initial = basis
        .project(&ens.snapshot(0), r, FieldForm::Centered)
        .unwrap();
    let ctx = RomEvalContext {
        operators: &ops,
        energy: &energy,
        initial_history: vec![initial],
        sample_every: 5,
        dt: ens.dt_sample() / 5.0,
        order: 3,
        reynolds: 1.0 / 0.01,
        start_time: 0.0,
        energy_form: EnergyForm::SqrtHalf,
    };

    // A tiny alpha keeps the fitted closure; a huge one flattens it to
    // nearly zero, reducing the run to the (worse) plain Galerkin model.
    let grid = vec![
        HyperPoint::Ridge { alpha: 1e-8 },
        HyperPoint::Ridge { alpha: 1e12 },
    ];
    let (model, report) = grid_search(&grid, &ds, &ctx, &windows, &e_fom).unwrap();

    // Exhaustive oracle: evaluate both points through the public pieces.
    let mut scores = Vec::new();
    for point in &grid {
        let candidate = point.fit(&ds).unwrap();
        let series = ctx.energy_series(Some(&candidate), windows.val.end).unwrap();
        let score = r2_val(&e_fom[windows.val.clone()], &series[windows.val.clone()]).unwrap();
        scores.push(score);
    }
    let oracle_best = if scores[0] >= scores[1] { 0 } else { 1 };
    assert_ne!(scores[0], scores[1], "test needs distinguishable points");
    assert_eq!(report.selected, oracle_best, "scores {scores:?}");
    assert!(matches!(model, romlab::ClosureModel::Ridge(_)));
    // The informative point must genuinely beat the flattened one.
    assert_eq!(report.selected, 0, "tiny alpha should win: {scores:?}");

    // Tie case: equal scores select the smaller parameter count. Within
    // one deterministic family the structural parameter count is fixed,
    // so the tie rule is exercised on the selection function itself.
    let tie = vec![
        GridOutcome {
            index: 0,
            description: "big".into(),
            score: 0.5,
            parameter_count: 120,
            failure: None,
        },
        GridOutcome {
            index: 1,
            description: "small".into(),
            score: 0.5,
            parameter_count: 12,
            failure: None,
        },
    ];
    assert_eq!(select_best(&tie).unwrap(), 1);

    println!(
        "criterion 10 (grid search): PASS, selection matches exhaustive oracle (scores {:.4} vs {:.4}), tie resolved by parameter count",
        scores[0], scores[1]
    );
}

fn quadratic_system(ds: &ClosureDataset) -> (DMatrix<f64>, Vec<f64>) {
    let n = ds.len();
    let r = ds.resolved_dim;
    let cols = r * r + r * r * r;
    let mut g = DMatrix::<f64>::zeros(n * r, cols);
    let mut f = vec![0.0f64; n * r];
    for sample in 0..n {
        let u: Vec<f64> = ds.inputs.row(sample).iter().cloned().collect();
        for i in 0..r {
            let row = sample * r + i;
            f[row] = ds.targets[(sample, i)];
            for j in 0..r {
                g[(row, i * r + j)] = u[j];
                for k in 0..r {
                    g[(row, r * r + (i * r + j) * r + k)] = u[j] * u[k];
                }
            }
        }
    }
    (g, f)
}

fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}
