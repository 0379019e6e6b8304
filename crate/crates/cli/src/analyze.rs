use std::io::Write;

use gplandmark::analysis::{self, AnalysisReport, BaselineMethod, DesignMethod, FitScale};
use gplandmark::landmarking;
use gplandmark::pipeline::Surface;
use gplandmark::{Error, Result};

use crate::manifest::{self, RunManifest};
use crate::run::{ensure_dir, write_file};
use crate::{AnalyzeArgs, FitScaleArg};

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("fit range must look like 20:100, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    if !args.bound_check.is_empty() && args.baselines == 0 {
        return Err(Error::Config(
            "bound check needs at least one random candidate design; got --baselines 0".into(),
        ));
    }
    let fit_range = args.fit.as_deref().map(parse_range).transpose()?;
    let trace_dir = args
        .trace
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_default();
    let manifest = RunManifest::read(&trace_dir.join(manifest::FILE_NAME))?;
    let (trace, params) = landmarking::read_trace_json(&args.trace)?;
    if params.kernel_kind != manifest.kernel || params.epsilon.to_bits() != manifest.epsilon.to_bits() {
        return Err(Error::Config("trace parameters disagree with run_manifest.json".into()));
    }
    if trace.is_empty() {
        return Err(Error::EmptyDesign);
    }
    if let Some(&m) = args.bound_check.iter().find(|&&m| m == 0 || 2 * m > trace.len()) {
        return Err(Error::Config(format!(
            "bound check at m = {m} needs 1 <= 2m <= {} (trace length)",
            trace.len()
        )));
    }

    let surface = Surface::load(&manifest.input, manifest.input_format()?)?;
    let prepared = manifest.prepare(surface)?;
    let (kernel, points) = (&prepared.kernel, &prepared.points);
    if trace.selected.iter().any(|&i| i >= kernel.len()) {
        return Err(Error::Validation("trace refers to points outside the input".into()));
    }
    let seed = args.seed.unwrap_or(manifest.seed);
    let size = trace.len();

    let mut report = AnalysisReport::default();
    report.designs.push(analysis::evaluate_design(
        kernel,
        points,
        trace.selected.clone(),
        DesignMethod::Greedy,
        None,
    )?);
    let fps = analysis::baseline_design(points, BaselineMethod::Fps, size, 0)?;
    report
        .designs
        .push(analysis::evaluate_design(kernel, points, fps, DesignMethod::Fps, None)?);
    if args.baselines > 0 {
        let mut random = analysis::candidate_designs(kernel, points, size, args.baselines, seed)?;
        random.retain(|d| d.method == DesignMethod::Random);
        let beaten = random
            .iter()
            .filter(|d| d.max_mspe < report.designs[0].max_mspe)
            .count();
        log::info!(
            "greedy max MSPE {:e}; {beaten} of {} random {size}-designs do better",
            report.designs[0].max_mspe,
            random.len()
        );
        report.designs.extend(random);
    }

    for &m in &args.bound_check {
        let candidates = analysis::candidate_designs(kernel, points, m, args.baselines, seed)?;
        let check = analysis::oracle_bound_check(kernel, &trace, &candidates, m)?;
        log::info!(
            "bound check m = {m}: sigma_2m = {:e} <= {:e}: {}",
            check.lhs,
            check.rhs,
            if check.pass { "pass" } else { "FAIL" }
        );
        report.bound_checks.push(check);
    }

    let scale = match args.fit_scale {
        FitScaleArg::Loglog => FitScale::Loglog,
        FitScaleArg::Semilog => FitScale::Semilog,
    };
    if let Some((lo, hi)) = fit_range {
        let fit = analysis::convergence_fit(&trace.sigma_history, lo, hi, scale)?;
        log::info!(
            "fit over n in [{lo}, {hi}]: slope {:.4}, R^2 {:.4}",
            fit.slope,
            fit.r_squared
        );
        report.fits.push(fit);
    }

    let out = args.out.clone().unwrap_or(trace_dir);
    ensure_dir(&out)?;
    let json = report.to_json()?;
    write_file(out.join("report.json"), |w| writeln!(w, "{json}"))?;
    write_file(out.join("report.csv"), |w| report.write_csv(w))?;
    let svg = analysis::convergence_svg(&trace.sigma_history, report.fits.first());
    write_file(out.join("convergence.svg"), |w| w.write_all(svg.as_bytes()))?;
    log::info!("wrote report to {}", out.display());
    Ok(())
}
