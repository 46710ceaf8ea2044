use std::path::PathBuf;
use std::process::ExitCode;

use cavity_eit_cli::config::{parse_config, Scenario};
use cavity_eit_cli::figures::{emit_figure_bundle, Figure};
use cavity_eit_cli::run::StageError;
use cavity_eit_cli::{emit, resolve_out_dir, run};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cavity-eit",
    version,
    about = "Single-atom cavity-EIT phase-gate simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Output directory (overrides CAVITY_EIT_OUT and the config value).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Amplitude-equation variant: "standard" or "as-printed".
    #[arg(long)]
    variant: Option<String>,
    /// Replace the configured pulse by the quasi-monochromatic one (FWHM = 20/kappa).
    #[arg(long)]
    long_pulse: bool,
}

#[derive(Args, Clone)]
struct ScenarioOpts {
    /// Path to the JSON configuration document.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state phase and photon-number spectra vs detuning.
    Spectrum(ScenarioOpts),
    /// Single-photon pulse scattering at fixed control power.
    Pulse(ScenarioOpts),
    /// Impedance-matched storage of a photon in the atomic ground state.
    Store(ScenarioOpts),
    /// Full two-photon controlled phase gate.
    Gate(ScenarioOpts),
    /// Gate sweep over a cooperativity grid with landmark extraction.
    Sweep(ScenarioOpts),
    /// Built-in figure presets.
    Figure {
        /// One of fig2, fig3, fig4, fig5.
        name: String,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let doc = match err.downcast_ref::<StageError>() {
                Some(stage) => {
                    emit::error_json(stage.module, stage.operation, &stage.source.to_string())
                }
                None => emit::error_json("cli-io", "run", &format!("{err:#}")),
            };
            eprintln!("{}", serde_json::to_string_pretty(&doc).unwrap());
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Spectrum(opts) => scenario(Scenario::Spectrum, opts),
        Command::Pulse(opts) => scenario(Scenario::Pulse, opts),
        Command::Store(opts) => scenario(Scenario::Store, opts),
        Command::Gate(opts) => scenario(Scenario::Gate, opts),
        Command::Sweep(opts) => scenario(Scenario::Sweep, opts),
        Command::Figure { name, common } => {
            let figure: Figure = name.parse()?;
            let out = resolve_out_dir(common.out, std::path::Path::new("out"));
            emit_figure_bundle(figure, &out)?;
            println!("figure bundle written to {}", out.display());
            Ok(())
        }
    }
}

fn scenario(expected: Scenario, opts: ScenarioOpts) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&opts.config)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", opts.config.display()))?;
    let mut config = parse_config(&text)?;
    if config.scenario != expected {
        anyhow::bail!(
            "config declares scenario \"{}\" but the \"{}\" subcommand was invoked",
            config.scenario.name(),
            expected.name()
        );
    }
    if let Some(variant) = opts.common.variant {
        config.variant = Some(variant);
    }
    if opts.common.long_pulse {
        config.long_pulse = Some(true);
    }
    let resolved = config.resolve()?;
    let out = resolve_out_dir(opts.common.out, &resolved.output_dir);
    run::run(&resolved, &out)?;
    println!("artifacts written to {}", out.display());
    Ok(())
}
