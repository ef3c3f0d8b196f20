use nehari_core::asymptotics::LaneEmdenOptions;
use nehari_core::branches::{BranchPoint, ContinuationOptions};
use nehari_core::discretization::Field;
use nehari_core::extremal::ExtremalResult;
use nehari_core::fiber::{analyze, dt_dlambda, lambda_of, DEFAULT_ROOT_TOL};
use nehari_core::oracles::{closed_form_roots, fd_gradient, lambda_scan, scan_slopes, shoot, SHOOTING_STEPS};
use nehari_core::optimize::DescentOptions;
use nehari_core::{
    continue_past_star, minimize_branch, minimize_lambda, solve_branches, solve_lane_emden, verify_scaling, Branch,
    BranchDiagram, BranchOptions, ExtremalOptions, FiberCase, FiberData, Problem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{GridSpec, RunConfig};
use crate::error::CliError;
use crate::report::{opt9, sig9, Report};

/// Files to write (name, bytes) and the report body.
pub struct Outcome {
    pub files: Vec<(String, Vec<u8>)>,
    pub report: Report,
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(header).expect("in-memory write");
        for r in rows {
            w.write_record(r).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    buf
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Nodal table `node,x,y,value` of a field.
pub fn field_csv(field: &Field<f64>) -> Vec<u8> {
    let rows: Vec<Vec<String>> = field
        .mesh()
        .coords()
        .iter()
        .zip(field.values())
        .enumerate()
        .map(|(i, (c, v))| vec![i.to_string(), num(c[0]), num(c[1]), num(*v)])
        .collect();
    csv_bytes(&["node", "x", "y", "value"], &rows)
}

fn extremal_options(cfg: &RunConfig) -> ExtremalOptions<f64> {
    ExtremalOptions {
        starts: cfg.extremal.starts,
        tol: cfg.extremal.tol,
        max_iter: cfg.extremal.max_iter,
        seed: cfg.seed,
        ..Default::default()
    }
}

fn branch_options(cfg: &RunConfig) -> BranchOptions<f64> {
    let d = BranchOptions::<f64>::default();
    BranchOptions {
        tol: cfg.branches.tol,
        descent: DescentOptions {
            max_iter: cfg.branches.max_iter,
            ..d.descent
        },
        newton_max_iter: cfg.branches.newton_max_iter,
    }
}

pub fn fiber_analyze(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let e = cfg.exponents()?;
    let mut report = Report::new("fiber-analyze");
    let mut cases: Vec<(FiberData<f64>, f64)> = cfg
        .fiber
        .iter()
        .map(|f| (FiberData::new(f.a, f.b, f.c, e), f.lambda))
        .collect();
    if cases.is_empty() {
        // Without explicit data, scan the fiber of the flat direction
        // (1 at every interior node with f ≥ 0) over the λ-grid.
        let Some(grid) = &cfg.lambda_grid else {
            return Err(CliError::Parse(
                "fiber-analyze needs explicit `fiber` entries or a `lambda_grid`".into(),
            ));
        };
        let pr = cfg.problem()?;
        let v: Vec<f64> = pr
            .weight()
            .interior_values()
            .iter()
            .map(|&f| if f < 0.0 { 0.0 } else { 1.0 })
            .collect();
        let d = pr.coefficients(&v);
        let lambdas: Vec<f64> = match grid {
            GridSpec::Values(v) => v.clone(),
            GridSpec::FractionsOfStar(fr) => {
                let l = lambda_of(&d)?;
                report.section("direction");
                report.line("flat direction: 1 on interior nodes with f >= 0, 0 elsewhere");
                report.value("lambda(u)", l);
                fr.iter().map(|s| s * l).collect()
            }
        };
        cases = lambdas.into_iter().map(|l| (d, l)).collect();
    }

    let quadratic = e.is_quadratic_family();
    let mut rows = Vec::with_capacity(cases.len());
    let mut oracle_ok = true;
    report.section("fiber");
    report.line("A B C lambda case t_plus t_minus t_zero");
    for (d, lambda) in &cases {
        let a = analyze(d, *lambda, DEFAULT_ROOT_TOL)?;
        let dt = |b: Branch| match a.case {
            FiberCase::CaseI | FiberCase::FNonPos => dt_dlambda(d, *lambda, b).ok(),
            _ => None,
        };
        if quadratic && a.case != FiberCase::CaseII {
            let oracle = closed_form_roots(d, *lambda);
            let agree = match (oracle, a.case) {
                (Ok(Some((tp, tm))), FiberCase::CaseI) => {
                    let rel = |x: f64, y: Option<f64>| y.is_some_and(|y| (x - y).abs() <= 1e-10 * x.abs());
                    rel(tp, a.t_plus) && rel(tm, a.t_minus)
                }
                (Ok(None), FiberCase::CaseIII) => true,
                (Err(_), FiberCase::FNonPos) => true,
                _ => false,
            };
            oracle_ok &= agree;
        }
        report.line(format!(
            "{} {} {} {} {} {} {} {}",
            sig9(d.a),
            sig9(d.b),
            sig9(d.c),
            sig9(*lambda),
            a.case.label(),
            opt9(a.t_plus),
            opt9(a.t_minus),
            opt9(a.t_zero)
        ));
        let h = |t: Option<f64>| t.map(|t| d.scaled(t).h_indicator(*lambda));
        rows.push(vec![
            num(d.a),
            num(d.b),
            num(d.c),
            num(*lambda),
            a.case.label().to_string(),
            opt_num(a.t_plus),
            opt_num(a.t_minus),
            opt_num(a.t_zero),
            opt_num(a.lambda_of_u),
            opt_num(a.t_of_u),
            opt_num(h(a.t_plus)),
            opt_num(h(a.t_minus)),
            opt_num(dt(Branch::Plus)),
            opt_num(dt(Branch::Minus)),
        ]);
    }
    if quadratic {
        report.check("fiber roots agree with the closed-form quadratic roots (rel 1e-10)", oracle_ok);
    }
    let header = [
        "a",
        "b",
        "c",
        "lambda",
        "case",
        "t_plus",
        "t_minus",
        "t_zero",
        "lambda_of_u",
        "t_of_u",
        "h_plus",
        "h_minus",
        "dt_plus_dlambda",
        "dt_minus_dlambda",
    ];
    Ok(Outcome {
        files: vec![("fiber.csv".into(), csv_bytes(&header, &rows))],
        report,
    })
}

fn extremal_section(report: &mut Report, pr: &Problem<f64>, ext: &ExtremalResult<f64>) {
    report.section("extremal value");
    report.value("lambda_star", ext.lambda_star);
    report.line("lambda_star is the best value over all starts, not a certified global minimum");
    report.value("extreme_residual", ext.residual);
    report.value("extreme_relative_residual", ext.relative_residual);
    report.text_value("witnesses", ext.witnesses.len());
    let d = pr.coefficients(&ext.witness.interior_values());
    report.value("witness_nehari_relative", d.nehari(ext.lambda_star).abs() / d.nehari_scale(ext.lambda_star));
    report.value("witness_h_relative", d.h_indicator(ext.lambda_star).abs() / d.h_scale(ext.lambda_star));
}

pub fn lambda_star(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let pr = cfg.problem()?;
    let ext = minimize_lambda(&pr, &extremal_options(cfg))?;
    let mut report = Report::new("lambda-star");
    extremal_section(&mut report, &pr, &ext);

    let d = pr.coefficients(&ext.witness.interior_values());
    let case = analyze(&d, ext.lambda_star, DEFAULT_ROOT_TOL)?.case;
    report.check("witness fiber is degenerate at lambda_star", case == FiberCase::CaseII);
    report.check("extreme equation residual < 1e-6 relative", ext.relative_residual < 1e-6);

    let starts: Vec<Vec<String>> = ext
        .log
        .iter()
        .map(|s| {
            vec![
                s.start.to_string(),
                num(s.lambda),
                s.iterations.to_string(),
                s.converged.to_string(),
                s.polished.to_string(),
            ]
        })
        .collect();
    let mut witness_rows = Vec::new();
    for (k, w) in ext.witnesses.iter().enumerate() {
        for (i, (c, v)) in w.field.mesh().coords().iter().zip(w.field.values()).enumerate() {
            witness_rows.push(vec![k.to_string(), num(w.lambda), i.to_string(), num(c[0]), num(c[1]), num(*v)]);
        }
    }
    Ok(Outcome {
        files: vec![
            (
                "lambda_star.csv".into(),
                csv_bytes(&["start", "lambda", "iterations", "converged", "polished"], &starts),
            ),
            (
                "witness.csv".into(),
                csv_bytes(&["witness", "lambda", "node", "x", "y", "value"], &witness_rows),
            ),
        ],
        report,
    })
}

fn point_line(p: &BranchPoint<f64>) -> String {
    format!(
        "{} {} {} {} {} {} {} {}",
        p.branch,
        sig9(p.lambda),
        sig9(p.energy),
        sig9(p.residual),
        sig9(p.h),
        sig9(p.min_interior),
        sig9(p.norm),
        opt9(p.witness_distance)
    )
}

pub fn solve_branches_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let Some(grid) = &cfg.lambda_grid else {
        return Err(CliError::Parse("solve-branches needs a `lambda_grid`".into()));
    };
    let pr = cfg.problem()?;
    let ext = minimize_lambda(&pr, &extremal_options(cfg))?;
    let ls = ext.lambda_star;
    let lambdas: Vec<f64> = match grid {
        GridSpec::Values(v) => v.clone(),
        GridSpec::FractionsOfStar(fr) => fr.iter().map(|s| s * ls).collect(),
    };
    let opts = branch_options(cfg);
    let mut diagram = if lambdas.is_empty() {
        BranchDiagram::default()
    } else {
        solve_branches(&pr, &lambdas, Some(&ext), &opts)?
    };
    let below = diagram.minus.len();

    let mut files = Vec::new();
    if cfg.continuation.enabled {
        let c = &cfg.continuation;
        let copts = ContinuationOptions {
            eps_max: c.eps_max_fraction * ls,
            steps: c.steps,
            d_min: c.d_min,
            fold_tol: c.fold_tol,
            refine: c.refine,
            branch: opts,
        };
        let at_star = match (diagram.minus.last(), diagram.plus.last()) {
            (Some(m), Some(p)) if (m.lambda - ls).abs() <= 1e-12 * ls => Some((m, p)),
            _ => None,
        };
        let cont = continue_past_star(&pr, &ext, at_star, &copts)?;
        if let Some(fold) = &cont.fold {
            let rows: Vec<Vec<String>> = fold
                .h_trend
                .iter()
                .map(|s| vec![num(s.lambda), num(s.h_minus), num(s.h_plus)])
                .collect();
            files.push(("fold.csv".to_string(), csv_bytes(&["lambda", "h_minus", "h_plus"], &rows)));
        }
        diagram.extend(cont);
    }

    let mut report = Report::new("solve-branches");
    extremal_section(&mut report, &pr, &ext);
    report.section("branch points");
    if diagram.is_empty() {
        report.line("no points");
    } else {
        report.line("branch lambda energy residual H min_interior norm witness_distance");
        for p in diagram.minus.iter().chain(&diagram.plus) {
            report.line(point_line(p));
        }
    }
    if let Some(fold) = &diagram.fold {
        report.section("fold");
        report.value("lambda_bar", fold.lambda_bar);
        report.text_value("lambda_fail", opt9(fold.lambda_fail));
        report.text_value("reason", fold.reason.as_str());
        report.text_value("branch", fold.branch.map_or("none", |b| b.as_str()));
        report.text_value("steps_past_star", fold.steps);
        report.text_value("delta_minus", opt9(fold.delta_minus));
        report.text_value("delta_plus", opt9(fold.delta_plus));
    }

    if below > 0 {
        let minus = &diagram.minus[..below];
        let plus = &diagram.plus[..below];
        let all = || minus.iter().chain(plus);
        report.check("PDE residual < 1e-8 below lambda_star", all().all(|p| p.residual < 1e-8));
        report.check(
            "H < 0 on the minus branch, H > 0 on the plus branch",
            minus.iter().all(|p| p.h < 0.0) && plus.iter().all(|p| p.h > 0.0),
        );
        report.check("interior nodal minima are positive", all().all(|p| p.min_interior > 0.0));
        report.check(
            "branch inequalities hold strictly",
            all().all(|p| p.inequality_margin(&pr) > 0.0),
        );
        let nonincreasing = |pts: &[BranchPoint<f64>]| pts.windows(2).all(|w| w[1].energy <= w[0].energy);
        report.check("minus energies are nonincreasing in lambda", nonincreasing(minus));
        report.check("plus energies are nonincreasing in lambda", nonincreasing(plus));
        report.check("plus energies are negative", plus.iter().all(|p| p.energy < 0.0));
    }
    if let Some(fold) = &diagram.fold {
        report.check("fold lambda_bar >= lambda_star", fold.lambda_bar >= ls);
    }

    let mut csv = Vec::new();
    diagram.write_csv(&mut csv).map_err(|e| CliError::Output(e.to_string()))?;
    files.insert(0, ("branches.csv".to_string(), csv));
    Ok(Outcome { files, report })
}

pub fn asymptotics(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let pr = cfg.problem()?;
    let e = pr.exponents();
    let lane = solve_lane_emden(
        pr.mesh(),
        e,
        &LaneEmdenOptions {
            starts: cfg.asymptotics.starts,
            seed: cfg.seed,
            ..Default::default()
        },
    )?;
    let opts = branch_options(cfg);
    let lambdas = cfg.asymptotics.lambdas.clone();
    let mut plus = Vec::with_capacity(lambdas.len());
    let mut warm = lane.direction.interior_values();
    for &l in lambdas.iter().rev() {
        let p = minimize_branch(&pr, l, Branch::Plus, Some(&warm), &opts)?;
        warm = p.direction(&pr);
        plus.push(p);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dirs: Vec<Vec<f64>> = (0..cfg.asymptotics.directions)
        .map(|_| (0..pr.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let table = verify_scaling(&pr, &plus, &lane, &lambdas, &dirs)?;

    let mut report = Report::new("asymptotics");
    report.section("lane-emden limit");
    report.value("phi_hat_0", lane.energy);
    report.value("residual", lane.residual);
    report.value("start_spread", lane.spread);
    report.text_value("unique", lane.unique);
    report.section("scaling");
    if table.rows.is_empty() {
        report.line("no points");
    } else {
        report.line("lambda field_error scalar_error energy_ratio_error");
        for r in &table.rows {
            report.line(format!(
                "{} {} {} {}",
                sig9(r.lambda),
                sig9(r.field_error),
                sig9(r.scalar_error),
                sig9(r.energy_ratio_error)
            ));
        }
        let ratios: Vec<String> = table.scalar_ratios().into_iter().map(sig9).collect();
        report.text_value("scalar_error_ratios", ratios.join(" "));
    }
    report.check("Lane-Emden starts agree", lane.unique);
    report.check("field error decreases", table.field_monotone);
    report.check("scalar error decreases", table.scalar_monotone);
    if let Some(last) = table.rows.last() {
        report.check(
            "energy ratio within 10% of phi_hat_0 at the smallest lambda",
            last.energy_ratio_error < 0.1,
        );
    }

    let mut csv = Vec::new();
    table.write_csv(&mut csv).map_err(|e| CliError::Output(e.to_string()))?;
    Ok(Outcome {
        files: vec![("scaling.csv".into(), csv), ("lane_emden.csv".into(), field_csv(&lane.field))],
        report,
    })
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let pr = cfg.problem()?;
    let e = pr.exponents();
    let v = &cfg.validate;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut report = Report::new("validate");
    report.section("oracle checks");
    let mut record = |report: &mut Report, name: &str, value: f64, tol: f64| {
        let ok = value <= tol;
        report.line(format!("{name}: {} (tolerance {})", sig9(value), sig9(tol)));
        report.check(name.to_string(), ok);
        rows.push(vec![name.to_string(), num(value), num(tol), ok.to_string()]);
    };

    if e.is_quadratic_family() {
        let mut worst = 0.0f64;
        let mut mismatched = 0usize;
        for _ in 0..v.fiber_samples {
            let d = FiberData::new(
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.1..10.0),
                e,
            );
            let lambda = rng.gen_range(0.01..2.0) * lambda_of(&d)?;
            let a = analyze(&d, lambda, DEFAULT_ROOT_TOL)?;
            match (closed_form_roots(&d, lambda)?, a.t_plus, a.t_minus) {
                (Some((tp, tm)), Some(ap), Some(am)) => {
                    worst = worst.max(((ap - tp) / tp).abs()).max(((am - tm) / tm).abs());
                }
                (None, None, None) => {}
                _ if a.case == FiberCase::CaseII => {}
                _ => mismatched += 1,
            }
        }
        record(&mut report, "fiber_roots_vs_closed_form", worst, 1e-10);
        record(&mut report, "fiber_case_mismatches", mismatched as f64, 0.0);
    }

    // Dense root counting against the classification of the flat direction.
    let flat: Vec<f64> = pr
        .weight()
        .interior_values()
        .iter()
        .map(|&f| if f < 0.0 { 0.0 } else { 1.0 })
        .collect();
    let d = pr.coefficients(&flat);
    if d.c > 0.0 {
        let l = lambda_of(&d)?;
        let lambdas: Vec<f64> = [0.25, 0.5, 0.9, 1.1, 2.0].iter().map(|s| s * l).collect();
        let mut mismatched = 0usize;
        for (lambda, roots) in lambda_scan(&d, &lambdas, 20_000) {
            let expect = match analyze(&d, lambda, DEFAULT_ROOT_TOL)?.case {
                FiberCase::CaseI => 2,
                FiberCase::CaseIII => 0,
                _ => continue,
            };
            if roots != expect {
                mismatched += 1;
            }
        }
        record(&mut report, "fiber_scan_case_mismatches", mismatched as f64, 0.0);
    }

    let mut worst = 0.0f64;
    for _ in 0..v.gradient_samples {
        let u: Vec<f64> = (0..pr.n_dofs()).map(|_| rng.gen_range(0.1..2.0)).collect();
        let lambda = rng.gen_range(0.1..10.0);
        let g = pr.energy_gradient(&u, lambda);
        let fd = fd_gradient(|x| pr.energy(x, lambda), &u, 1e-5);
        let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        let err = g.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err / scale);
    }
    record(&mut report, "energy_gradient_vs_differences", worst, 1e-6);

    let shooting = (e.p - 2.0).abs() < f64::EPSILON && cfg.domain.dimension == 1;
    match (shooting, cfg.formula()) {
        (true, Some(formula)) => {
            let ext = minimize_lambda(&pr, &extremal_options(cfg))?;
            let lambda = v.shooting_fraction * ext.lambda_star;
            report.value("shooting_lambda", lambda);
            let f = |x: f64| formula.eval([x, 0.0], 1);
            let brackets = scan_slopes(lambda, &f, e, 1e-2, 1e4, 200, SHOOTING_STEPS)?;
            record(&mut report, "shooting_profile_count_minus_two", (brackets.len() as f64 - 2.0).abs(), 0.0);
            // Brackets come in increasing slope, so the smaller profile is
            // the plus branch.
            let opts = branch_options(cfg);
            for (b, branch) in brackets.into_iter().zip([Branch::Plus, Branch::Minus]) {
                let s = shoot(lambda, f, e, b, SHOOTING_STEPS)?;
                let p = minimize_branch(&pr, lambda, branch, Some(&ext.direction.interior_values()), &opts)?;
                let err = p
                    .field
                    .mesh()
                    .coords()
                    .iter()
                    .zip(p.field.values())
                    .fold(0.0f64, |m, (c, u)| m.max((u - s.sample(c[0])).abs()));
                report.value(&format!("shooting_{branch}_max"), p.field.max_abs());
                report.value(&format!("shooting_{branch}_relative_error"), err / p.field.max_abs());
                record(&mut report, &format!("shooting_{branch}_sup_error"), err, v.shooting_tol);
            }
        }
        _ => report.line("shooting comparison skipped: needs p = 2, dimension 1 and a built-in weight"),
    }

    Ok(Outcome {
        files: vec![(
            "validate.csv".into(),
            csv_bytes(&["check", "value", "tolerance", "pass"], &rows),
        )],
        report,
    })
}
