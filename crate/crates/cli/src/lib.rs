//! `heartid` command-line front end.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

use args::{Cli, Command};
use config::{resolve_features, resolve_svm, resolve_synth, resolve_tsne, FileConfig};
use error::CliResult;

/// Runs one parsed invocation, printing a short summary to stdout.
pub fn run(cli: Cli) -> CliResult<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(a) => {
            let plan = resolve_synth(&a, &file.synth);
            let manifest = commands::synth(&plan, &a.out)?;
            println!("{}", commands::dataset_summary(&manifest));
        }
        Command::Extract(a) => {
            let cfg = resolve_features(&a.features, &file.features);
            let (_, ms) = commands::load_measurements(&a.data, a.segment)?;
            let rows = commands::extract(&ms, a.kind, &cfg, &file.echo)?;
            commands::write_features(&a.out, &rows)?;
            println!(
                "{} rows x {} r_{} features -> {}",
                rows.len(),
                rows[0].values.len(),
                a.kind,
                a.out.display()
            );
        }
        Command::Train(a) => {
            let svm = resolve_svm(&a.svm, &file.svm)?;
            let (rows, sha) = commands::read_features(&a.features)?;
            let model = commands::train(&rows, &sha, &svm)?;
            commands::write_model(&a.out, &model)?;
            let n_sv: usize = model.model.machines.iter().map(|m| m.support_vectors.nrows()).sum();
            println!(
                "{} classes, {} machines, {} support vectors -> {}",
                model.model.classes.len(),
                model.model.machines.len(),
                n_sv,
                a.out.display()
            );
        }
        Command::Eval(a) => {
            let svm = resolve_svm(&a.svm, &file.svm)?;
            let (rows, sha) = commands::read_features(&a.features)?;
            let report = commands::evaluate(&rows, &sha, &svm, a.timestamp)?;
            commands::write_eval_outputs(&a.out_dir, "report", &report, a.svg)?;
            println!(
                "r_{}: accuracy {:.2}%  macro AUC {:.4}  ({} samples, {} folds)",
                report.kind,
                report.report.accuracy,
                report.report.macro_auc,
                report.report.n_samples,
                report.report.folds.len()
            );
        }
        Command::Project(a) => {
            let tsne = resolve_tsne(a.seed, a.perplexity, a.iterations, &file.tsne);
            let (rows, _) = commands::read_features(&a.features)?;
            let p = commands::project(&rows, a.method, &tsne)?;
            commands::write_projection(&a.out, a.svg.as_deref(), &rows, &p)?;
            println!("{} points -> {}", p.len(), a.out.display());
        }
        Command::Report(a) => {
            let features = resolve_features(&a.features, &file.features);
            let svm = resolve_svm(&a.svm, &file.svm)?;
            let opts = commands::ReportOptions {
                features: &features,
                echo: &file.echo,
                svm: &svm,
                segment: a.segment,
                svg: a.svg,
                timestamp: a.timestamp,
            };
            let rows = commands::report(&a.data, &a.out_dir, &opts, |m| eprintln!("{m}"))?;
            print!("{}", commands::summary_table(&rows));
        }
    }
    Ok(())
}
