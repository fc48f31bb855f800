use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use margulis_lab::config::{Command, Overrides};
use margulis_lab::report::{write_outputs, Relation};
use margulis_lab::{load_config, suites};

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

const ABOUT: &str = "Verification suites for flat-bundle models of SL(2,R) and affine \
deformations of Fuchsian groups. Each run writes <command>.json and CSV tables to the output \
directory and exits 0 iff every assertion holds (1: assertion failed, 2: bad configuration, \
3: numerical error).";

const FLATNESS_CSV: &str = "CSV files:
  flatness.csv          n,x,y,step,residual,residual_half_step,order_ratio,order_source
  flatness-control.csv  x,y,area,levi_civita_defect
  flatness-metric.csv   n,sample,length,defect_per_length";

const REP_CHECK_CSV: &str = "CSV files:
  rep-check.csv          n,sample,translation_length,trace,character,relative_error
  rep-check-weights.csv  n,theta,k,re,im,expected_re,expected_im
  rep-check-even.csv     degree,sample,a,min_gap,gap_bound,fixed_point_residual";

const MARGULIS_CSV: &str = "CSV files:
  margulis.csv           n,word,mu,mu_inverse,parity_residual,basepoint_residual,power_residual
                         (the last two relative to their roundoff scale)
  margulis-elements.csv  sample,translation_length,mu,basepoint_residual,power_residual";

const OBSTRUCT_CSV: &str = "CSV files:
  obstruct.csv               n,word,mu
  obstruct-certificates.csv  n,word1,word2,mu1,mu2,margin,general_position,verdict";

const SURVEY_CSV: &str = "CSV files:
  survey.csv               word,length,integral_f,mu_direct,mu_integral  (first n)
  survey-n<N>.csv          same columns for each further n
  survey-certificates.csv  n,word1,word2,mu1,mu2,margin,general_position,verdict
  survey-sections.csv      p,n,norm_sq,drift_recurrence,drift_product";

const SYMMETRY_CSV: &str = "CSV files:
  symmetry.csv  n,q,beta_samples,beta_max_residual,max_abs_f,mc_samples,mc_mean,mc_stderr,mc_proposals";

#[derive(Debug, Parser)]
#[command(name = "margulis-lab", version, about = ABOUT)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Holonomy of the flat connection around small squares, step halving,
    /// the Levi-Civita control and metric preservation.
    #[command(after_help = FLATNESS_CSV)]
    Flatness(RunArgs),
    /// Holonomy traces against the character, circle weights, and fixed
    /// points of odd symmetric powers.
    #[command(after_help = REP_CHECK_CSV)]
    RepCheck(RunArgs),
    /// Margulis invariants of a word list: parity, base point, powers.
    #[command(after_help = MARGULIS_CSV)]
    Margulis(RunArgs),
    /// Scan of word pairs for an opposite-sign certificate in general position.
    #[command(after_help = OBSTRUCT_CSV)]
    Obstruct(RunArgs),
    /// Integrals of f along closed geodesics of the genus-2 surface.
    #[command(after_help = SURVEY_CSV)]
    Survey(RunArgs),
    /// f(beta u) = -f(u) and the zero mean of f.
    #[command(after_help = SYMMETRY_CSV)]
    Symmetry(RunArgs),
}

impl Sub {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Sub::Flatness(a) => (Command::Flatness, a),
            Sub::RepCheck(a) => (Command::RepCheck, a),
            Sub::Margulis(a) => (Command::Margulis, a),
            Sub::Obstruct(a) => (Command::Obstruct, a),
            Sub::Survey(a) => (Command::Survey, a),
            Sub::Symmetry(a) => (Command::Symmetry, a),
        }
    }
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    let cfg = match load_config(command, args.config.as_deref(), args.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match suites::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    for a in &outcome.assertions {
        let rel = match a.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        println!(
            "{} {}: {:.3e} {rel} {:.3e}",
            if a.passed { "PASS" } else { "FAIL" },
            a.name,
            a.value,
            a.bound
        );
    }
    match write_outputs(&cfg, &outcome) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}
