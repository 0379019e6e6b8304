use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gplandmark::analysis::{self, AnalysisReport, DesignMethod};
use gplandmark::geometry;
use gplandmark::kernel::KernelKind;
use gplandmark::landmarking::{self, GreedyOptions, TieRule, TraceParams};
use gplandmark::mesh_io::InputFormat;
use gplandmark::pipeline::{Surface, WeightParams, WeightSource};
use gplandmark::{Error, Result};

use clap::ValueEnum;

use crate::manifest::{self, RunManifest};
use crate::{Emit, KernelArg, RunArgs, TieArg, WeightsArg};

pub(crate) fn create(path: PathBuf) -> Result<BufWriter<File>> {
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io { path, source: e })
}

pub(crate) fn write_file(path: PathBuf, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut out = create(path.clone())?;
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::Io { path, source: e })
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn check_args(args: &RunArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.lambda) {
        return Err(Error::Config(format!("lambda must lie in [0, 1], got {}", args.lambda)));
    }
    if !(args.rho > 0.0 && args.rho.is_finite()) {
        return Err(Error::Config(format!("rho must be positive, got {}", args.rho)));
    }
    if !(args.tolerance >= 0.0 && args.tolerance.is_finite()) {
        return Err(Error::Config(format!("tolerance must be >= 0, got {}", args.tolerance)));
    }
    if args.num_landmarks == 0 {
        return Err(Error::Config("num-landmarks must be at least 1".into()));
    }
    match (args.weights, &args.weights_file) {
        (WeightsArg::File, None) => Err(Error::Config("--weights file needs --weights-file".into())),
        (WeightsArg::Curvature | WeightsArg::Uniform, Some(_)) => {
            Err(Error::Config("--weights-file is only used with --weights file".into()))
        }
        _ => Ok(()),
    }
}

fn canonical(path: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn run(args: &RunArgs) -> Result<()> {
    check_args(args)?;
    let format: InputFormat = match &args.format {
        Some(f) => f.parse()?,
        None => InputFormat::from_path(&args.input)
            .ok_or_else(|| Error::Config(format!("cannot infer format of {}; pass --format", args.input.display())))?,
    };
    let surface = Surface::load(&args.input, format)?;
    if args.num_landmarks > surface.len() {
        return Err(Error::Config(format!(
            "num-landmarks {} exceeds the number of points N = {}",
            args.num_landmarks,
            surface.len()
        )));
    }
    let points = surface.points();
    let (epsilon, epsilon_auto) = manifest::resolve_epsilon(&args.epsilon, &points)?;
    log::info!(
        "bandwidth epsilon = {epsilon:?}{}",
        if epsilon_auto { " (auto: (0.1 * bbox diagonal)^2)" } else { "" }
    );

    let source = match args.weights {
        WeightsArg::Curvature => WeightSource::Curvature,
        WeightsArg::Uniform => WeightSource::Uniform,
        WeightsArg::File => WeightSource::File(canonical(args.weights_file.as_ref().expect("checked"))?),
    };
    let mut emit: Vec<Emit> = Vec::new();
    for e in &args.emit {
        if !emit.contains(e) {
            emit.push(*e);
        }
    }
    let manifest = RunManifest {
        input: canonical(&args.input)?,
        format: format.to_string(),
        kernel: match args.kernel {
            KernelArg::Euclidean => KernelKind::Euclidean,
            KernelArg::Reweighted => KernelKind::Reweighted,
        },
        epsilon,
        epsilon_auto,
        weights: WeightParams {
            source,
            lambda: args.lambda,
            rho: args.rho,
            knn: args.knn,
        },
        num_landmarks: args.num_landmarks,
        tolerance: args.tolerance,
        tie_rule: match args.tie {
            TieArg::Lowest => TieRule::LowestIndex,
            TieArg::Random => TieRule::Random { seed: args.seed },
        },
        seed: args.seed,
        emit: emit
            .iter()
            .filter_map(|e| e.to_possible_value().map(|v| v.get_name().to_owned()))
            .collect(),
    };

    let prepared = manifest.prepare(surface)?;
    let kernel = &prepared.kernel;
    log::info!("kernel assembled: N = {}, max prior variance = {:e}", kernel.len(), kernel.max_diag());
    let trace = landmarking::gp_landmark(
        kernel,
        &GreedyOptions {
            budget: manifest.num_landmarks,
            tolerance: manifest.tolerance,
            tie_rule: manifest.tie_rule,
        },
    )?;
    log::info!(
        "selected {} landmarks ({:?}), final max MSPE = {:e}",
        trace.len(),
        trace.stop_reason,
        trace.final_sigma()
    );

    let out = &args.out;
    ensure_dir(out)?;
    manifest.write(out)?;
    let reweighted = manifest.kernel == KernelKind::Reweighted;
    let params = TraceParams {
        epsilon,
        lambda: reweighted.then_some(manifest.weights.lambda),
        rho: reweighted.then_some(manifest.weights.rho),
        kernel_kind: manifest.kernel,
        tie_rule: manifest.tie_rule,
    };
    let json = landmarking::trace_to_json(&trace, &params)?;
    write_file(out.join("landmarks.json"), |w| writeln!(w, "{json}"))?;
    write_file(out.join("landmarks.csv"), |w| landmarking::write_trace_csv(w, &trace))?;

    if emit.contains(&Emit::MspeField) {
        write_file(out.join("mspe_field.csv"), |w| {
            writeln!(w, "vertex_index,mspe")?;
            for (i, v) in trace.final_mspe.iter().enumerate() {
                writeln!(w, "{i},{v:?}")?;
            }
            Ok(())
        })?;
    }
    if emit.contains(&Emit::Plot) {
        let svg = analysis::convergence_svg(&trace.sigma_history, None);
        write_file(out.join("convergence.svg"), |w| w.write_all(svg.as_bytes()))?;
    }
    if emit.contains(&Emit::Report) {
        let greedy = analysis::evaluate_design(
            kernel,
            &prepared.points,
            trace.selected.clone(),
            DesignMethod::Greedy,
            None,
        )?;
        let report = AnalysisReport {
            designs: vec![greedy],
            ..Default::default()
        };
        let json = report.to_json()?;
        write_file(out.join("report.json"), |w| writeln!(w, "{json}"))?;
        if let Some(wf) = &prepared.weights {
            write_file(out.join("geometry.csv"), |w| {
                geometry::write_geometry_csv(w, prepared.curvature.as_ref(), wf)
            })?;
        }
    }
    log::info!("wrote outputs to {}", out.display());
    Ok(())
}
