use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vostrack::cli;

#[derive(Parser)]
#[command(name = "vostrack", version, about = "Offline video segmentation tracking")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track proposals into non-overlapping object tracks.
    Track {
        #[arg(long)]
        proposals: PathBuf,
        /// Directory of NNNNNN.flo files (frame NNNNNN to NNNNNN+1).
        #[arg(long)]
        flow_dir: PathBuf,
        /// key = value config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also dump tracklets, forest and cuts here.
        #[arg(long)]
        debug_dir: Option<PathBuf>,
    },
    /// Score predicted tracks against ground truth (mean region Jaccard).
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Write the report as JSON too.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a synthetic scenario (proposals, flow, ground truth).
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render tracks as one 8-bit PGM label image per frame.
    Render {
        #[arg(long)]
        tracks: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let result = match Args::parse().command {
        Command::Track {
            proposals,
            flow_dir,
            config,
            out,
            debug_dir,
        } => cli::cmd_track(&proposals, &flow_dir, config.as_deref(), &out, debug_dir.as_deref()).map(|run| {
            eprintln!(
                "{} tracklets, {} tracks written to {}",
                run.tracklets.len(),
                run.output.tracks.len(),
                out.display()
            );
        }),
        Command::Eval { pred, gt, report } => {
            cli::cmd_eval(&pred, &gt, report.as_deref()).map(|r| print!("{}", r.table()))
        }
        Command::Synth { spec, out_dir } => cli::cmd_synth(&spec, &out_dir),
        Command::Render { tracks, out_dir } => cli::cmd_render(&tracks, &out_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
